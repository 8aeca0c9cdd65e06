#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spingw/errors.hpp"

namespace spingw {

/// Framed PC channel: [0xA5, type, length, payload..., checksum] where the
/// checksum XORs type, length and every payload byte.
inline constexpr std::uint8_t kFrameMagic = 0xA5;

enum class FrameType : std::uint8_t {
    SetValue = 0x01,       // 2-byte big-endian sensor value
    QueryCounter = 0x02,   // 4-byte big-endian routing key
    EventReport = 0x03,    // 4-byte key + 8-byte tick
    CounterReport = 0x04,  // 4-byte key + 8-byte count
    SetDisplayMode = 0x05, // 1 byte
};

inline bool frame_type_known(std::uint8_t t) { return t >= 0x01 && t <= 0x05; }

struct ControlFrame {
    FrameType frame_type = FrameType::SetValue;
    std::vector<std::uint8_t> payload;

    bool operator==(const ControlFrame&) const = default;

    static ControlFrame set_value(std::uint16_t value) {
        return {FrameType::SetValue,
                {static_cast<std::uint8_t>(value >> 8), static_cast<std::uint8_t>(value)}};
    }

    static ControlFrame query_counter(std::uint32_t key) {
        ControlFrame f{FrameType::QueryCounter, {}};
        append_be(f.payload, key);
        return f;
    }

    static ControlFrame event_report(std::uint32_t key, std::uint64_t tick) {
        ControlFrame f{FrameType::EventReport, {}};
        append_be(f.payload, key);
        append_be(f.payload, tick);
        return f;
    }

    static ControlFrame counter_report(std::uint32_t key, std::uint64_t count) {
        ControlFrame f{FrameType::CounterReport, {}};
        append_be(f.payload, key);
        append_be(f.payload, count);
        return f;
    }

    static ControlFrame set_display_mode(std::uint8_t mode) {
        return {FrameType::SetDisplayMode, {mode}};
    }

    std::uint16_t payload_u16(std::size_t at = 0) const {
        return static_cast<std::uint16_t>((std::uint16_t{payload.at(at)} << 8) |
                                          payload.at(at + 1));
    }

    std::uint32_t payload_u32(std::size_t at = 0) const {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < 4; ++i)
            v = (v << 8) | payload.at(at + i);
        return v;
    }

    std::uint64_t payload_u64(std::size_t at = 0) const {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < 8; ++i)
            v = (v << 8) | payload.at(at + i);
        return v;
    }

private:
    template <typename T> static void append_be(std::vector<std::uint8_t>& out, T v) {
        for (int shift = 8 * (static_cast<int>(sizeof(T)) - 1); shift >= 0; shift -= 8)
            out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
};

namespace detail {

inline std::size_t expected_payload_size(FrameType t) {
    switch (t) {
    case FrameType::SetValue:
        return 2;
    case FrameType::QueryCounter:
        return 4;
    case FrameType::EventReport:
        return 12;
    case FrameType::CounterReport:
        return 12;
    case FrameType::SetDisplayMode:
        return 1;
    }
    return 0;
}

inline std::uint8_t frame_checksum(std::uint8_t type, std::span<const std::uint8_t> payload) {
    std::uint8_t x = type ^ static_cast<std::uint8_t>(payload.size());
    for (auto b : payload)
        x ^= b;
    return x;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_control_frame(const ControlFrame& frame) {
    if (frame.payload.size() > 255)
        throw PayloadTooLong();
    std::vector<std::uint8_t> out;
    out.reserve(frame.payload.size() + 4);
    out.push_back(kFrameMagic);
    out.push_back(static_cast<std::uint8_t>(frame.frame_type));
    out.push_back(static_cast<std::uint8_t>(frame.payload.size()));
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    out.push_back(detail::frame_checksum(static_cast<std::uint8_t>(frame.frame_type),
                                         frame.payload));
    return out;
}

struct DecodeResult {
    std::vector<ControlFrame> frames;
    std::size_t bytes_consumed = 0;
    std::uint64_t checksum_errors = 0;
    std::uint64_t truncated_errors = 0;
};

/// Scans a byte stream for frames. With `final_chunk` false, an incomplete
/// frame at the tail is left unconsumed so the caller can append more bytes;
/// with it true the tail counts as truncated and scanning resumes at the
/// next magic byte inside it. After a checksum or layout error, scanning
/// resynchronizes at the next 0xA5 beyond the failed frame's start.
inline DecodeResult decode_control_frames(std::span<const std::uint8_t> stream,
                                          bool final_chunk = true) {
    DecodeResult r;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        if (stream[pos] != kFrameMagic) {
            ++pos;
            continue;
        }
        // header: magic, type, length
        if (pos + 3 > stream.size()) {
            if (!final_chunk)
                break;
            ++r.truncated_errors;
            ++pos;
            continue;
        }
        const std::uint8_t type = stream[pos + 1];
        const std::uint8_t length = stream[pos + 2];
        const std::size_t total = std::size_t{3} + length + 1;
        if (pos + total > stream.size()) {
            if (!final_chunk)
                break;
            ++r.truncated_errors;
            ++pos;
            continue;
        }
        const auto payload = stream.subspan(pos + 3, length);
        const std::uint8_t checksum = stream[pos + 3 + length];
        if (checksum != detail::frame_checksum(type, payload) || !frame_type_known(type) ||
            detail::expected_payload_size(static_cast<FrameType>(type)) != length) {
            ++r.checksum_errors;
            ++pos; // resync at the next magic byte past this one
            continue;
        }
        ControlFrame f;
        f.frame_type = static_cast<FrameType>(type);
        f.payload.assign(payload.begin(), payload.end());
        r.frames.push_back(std::move(f));
        pos += total;
    }
    r.bytes_consumed = pos;
    return r;
}

/// Incremental decoder for a live byte channel. Holds the unconsumed tail
/// between feeds.
class FrameDecoder {
public:
    std::vector<ControlFrame> feed(std::span<const std::uint8_t> bytes) {
        buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
        auto r = decode_control_frames(buffer_, false);
        checksum_errors_ += r.checksum_errors;
        buffer_.erase(buffer_.begin(),
                      buffer_.begin() + static_cast<std::ptrdiff_t>(r.bytes_consumed));
        return std::move(r.frames);
    }

    /// End-of-stream: flushes whatever is buffered, counting truncation.
    std::vector<ControlFrame> finish() {
        auto r = decode_control_frames(buffer_, true);
        checksum_errors_ += r.checksum_errors;
        truncated_errors_ += r.truncated_errors;
        buffer_.clear();
        return std::move(r.frames);
    }

    std::uint64_t checksum_errors() const { return checksum_errors_; }
    std::uint64_t truncated_errors() const { return truncated_errors_; }
    std::size_t buffered() const { return buffer_.size(); }

private:
    std::vector<std::uint8_t> buffer_;
    std::uint64_t checksum_errors_ = 0;
    std::uint64_t truncated_errors_ = 0;
};

} // namespace spingw
