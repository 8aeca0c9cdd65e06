#pragma once

#include <array>
#include <cstdint>

namespace spingw {

/// What the eight-digit display is currently showing.
enum class DisplayMode : std::uint8_t {
    SetValue = 0x00,
    RxCount = 0x01,
    MeasuredFreq = 0x02,
    Errors = 0x03,
};

/// Active-high gfedcba segment code for one decimal digit.
inline std::uint8_t seven_segment_digit(unsigned digit) {
    static constexpr std::array<std::uint8_t, 10> codes = {0x3F, 0x06, 0x5B, 0x4F, 0x66,
                                                           0x6D, 0x7D, 0x07, 0x7F, 0x6F};
    return codes[digit % 10];
}

/// Renders a value in decimal, right-aligned; leading digits stay blank.
/// digits[0] is the rightmost (least significant) position. Values wider
/// than eight digits show their low eight.
inline std::array<std::uint8_t, 8> seven_segment_render(std::uint64_t value) {
    std::array<std::uint8_t, 8> digits{};
    value %= 100'000'000;
    std::size_t i = 0;
    do {
        digits[i++] = seven_segment_digit(static_cast<unsigned>(value % 10));
        value /= 10;
    } while (value != 0 && i < digits.size());
    return digits;
}

/// Operator-feedback registers; digits are always derivable from the value
/// and mode.
struct MonitorRegisters {
    std::uint64_t displayed_value = 0;
    DisplayMode mode = DisplayMode::SetValue;
    std::array<std::uint8_t, 8> digits = seven_segment_render(0);

    void show(std::uint64_t value) {
        displayed_value = value;
        digits = seven_segment_render(value);
    }
};

inline const char* display_mode_name(DisplayMode m) {
    switch (m) {
    case DisplayMode::SetValue:
        return "set_value";
    case DisplayMode::RxCount:
        return "rx_count";
    case DisplayMode::MeasuredFreq:
        return "measured_freq";
    case DisplayMode::Errors:
        return "errors";
    }
    return "unknown";
}

} // namespace spingw
