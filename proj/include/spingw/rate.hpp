#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "spingw/errors.hpp"

namespace spingw {

/// Hard frequency ceiling: 1 kHz in millihertz.
inline constexpr std::int64_t kFrequencyCapMhz = 1'000'000;

/// Linear sensor-value <-> frequency map. Frequencies are integer millihertz;
/// no fractional quantity appears anywhere in this module.
struct RateConfig {
    std::uint64_t tick_rate = 1'000'000; // ticks per second
    std::int64_t f_min_mhz = 1'000;      // 1 Hz
    std::int64_t f_max_mhz = 1'000'000;  // 1 kHz
    std::int64_t v_min = 0;
    std::int64_t v_max = 999;

    void validate() const {
        if (f_min_mhz <= 0)
            throw ConfigError("f_min_mhz must be positive");
        if (f_min_mhz > f_max_mhz)
            throw ConfigError("f_min_mhz must not exceed f_max_mhz");
        if (f_max_mhz > kFrequencyCapMhz)
            throw ConfigError("f_max_mhz " + std::to_string(f_max_mhz) +
                              " exceeds the 1 kHz cap (" + std::to_string(kFrequencyCapMhz) +
                              " mHz)");
        if (v_min >= v_max)
            throw ConfigError("v_min must be below v_max");
        if (tick_rate < 1'000 || tick_rate > 1'000'000'000)
            throw ConfigError("tick_rate must be in [1e3, 1e9] ticks per second");
    }
};

/// Strictly increasing spike times on the virtual tick grid.
struct SpikeTrain {
    std::vector<std::uint64_t> ticks;

    bool strictly_increasing() const {
        for (std::size_t i = 1; i < ticks.size(); ++i)
            if (ticks[i] <= ticks[i - 1])
                return false;
        return true;
    }
};

namespace detail {

using int128 = __int128;

// floor division for a positive divisor
inline int128 floor_div(int128 num, int128 den) {
    int128 q = num / den;
    if (num % den != 0 && num < 0)
        --q;
    return q;
}

// round-half-up of num/den, den > 0: floor((2*num + den) / (2*den))
inline std::int64_t round_half_up(int128 num, int128 den) {
    return static_cast<std::int64_t>(floor_div(2 * num + den, 2 * den));
}

} // namespace detail

/// f(value) = f_min + (value - v_min) * (f_max - f_min) / (v_max - v_min),
/// kept as an exact rational; period = round_half_up(1000 * tick_rate / f).
inline std::uint64_t value_to_period(std::int64_t value, const RateConfig& cfg) {
    using detail::int128;
    if (value < cfg.v_min || value > cfg.v_max)
        throw ValueOutOfRange("value " + std::to_string(value) + " outside [" +
                              std::to_string(cfg.v_min) + ", " + std::to_string(cfg.v_max) + "]");
    const int128 span = cfg.v_max - cfg.v_min;
    const int128 f_num =
        int128{cfg.f_min_mhz} * span + int128{value - cfg.v_min} * (cfg.f_max_mhz - cfg.f_min_mhz);
    if (f_num > int128{kFrequencyCapMhz} * span)
        throw FrequencyCapExceeded(); // cannot happen with a valid config
    const int128 period_num = int128{1000} * cfg.tick_rate * span;
    return static_cast<std::uint64_t>(detail::round_half_up(period_num, f_num));
}

/// Spikes at start + k*period for k = 1, 2, ... inside [start, start+duration).
/// No spike at the window start.
inline SpikeTrain generate_spike_train(std::uint64_t period, std::uint64_t start,
                                       std::uint64_t duration) {
    if (period == 0)
        throw ZeroPeriod();
    SpikeTrain train;
    for (std::uint64_t off = period; off < duration; off += period)
        train.ticks.push_back(start + off);
    return train;
}

/// Round-half-up mean of the last k inter-spike intervals.
inline std::uint64_t estimate_period(const SpikeTrain& train, std::size_t k = 1) {
    if (k < 1)
        throw ConfigError("estimation window must be at least one interval");
    if (train.ticks.size() < k + 1)
        throw NotEnoughSpikes("need " + std::to_string(k + 1) + " spikes, have " +
                              std::to_string(train.ticks.size()));
    const std::uint64_t span = train.ticks.back() - train.ticks[train.ticks.size() - 1 - k];
    return static_cast<std::uint64_t>(
        detail::round_half_up(static_cast<detail::int128>(span), static_cast<detail::int128>(k)));
}

/// Inverse of value_to_period, rounded half-up and clamped to the sensor range.
inline std::int64_t period_to_value(std::uint64_t period, const RateConfig& cfg) {
    using detail::int128;
    if (period == 0)
        throw ZeroPeriod();
    if (cfg.f_max_mhz == cfg.f_min_mhz)
        return cfg.v_min; // constant map has no informative inverse
    // measured frequency is the exact rational 1000*tick_rate / period
    const int128 num =
        (int128{1000} * cfg.tick_rate - int128{cfg.f_min_mhz} * period) * (cfg.v_max - cfg.v_min);
    const int128 den = int128{period} * (cfg.f_max_mhz - cfg.f_min_mhz);
    std::int64_t value = cfg.v_min + detail::round_half_up(num, den);
    if (value < cfg.v_min)
        value = cfg.v_min;
    if (value > cfg.v_max)
        value = cfg.v_max;
    return value;
}

/// Frequency in millihertz corresponding to a period, rounded half-up.
inline std::int64_t period_to_freq_mhz(std::uint64_t period, std::uint64_t tick_rate) {
    if (period == 0)
        throw ZeroPeriod();
    return detail::round_half_up(detail::int128{1000} * tick_rate,
                                 static_cast<detail::int128>(period));
}

/// Sensor value whose frequency is nearest the requested one (inverse of the
/// linear map, rounded half-up, clamped).
inline std::int64_t freq_to_value(std::int64_t f_mhz, const RateConfig& cfg) {
    using detail::int128;
    if (cfg.f_max_mhz == cfg.f_min_mhz)
        return cfg.v_min;
    const int128 num = int128{f_mhz - cfg.f_min_mhz} * (cfg.v_max - cfg.v_min);
    const int128 den = int128{cfg.f_max_mhz} - cfg.f_min_mhz;
    std::int64_t value = cfg.v_min + detail::round_half_up(num, den);
    if (value < cfg.v_min)
        value = cfg.v_min;
    if (value > cfg.v_max)
        value = cfg.v_max;
    return value;
}

/// One tick per line, no header.
inline void write_spike_train_csv(const SpikeTrain& train, std::ostream& out) {
    for (auto t : train.ticks)
        out << t << '\n';
}

} // namespace spingw
