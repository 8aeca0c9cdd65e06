#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "spingw/errors.hpp"

namespace spingw {

/// Serialized packet word: 40 bits (no payload) or 72 bits (with payload).
/// Bit 0 is transmitted first and is the least-significant bit of the hex form.
struct PacketBits {
    std::uint64_t low = 0;  // bits 0..63
    std::uint8_t high = 0;  // bits 64..71
    int bit_count = 40;     // 40 or 72

    bool get(int i) const {
        return i < 64 ? ((low >> i) & 1u) != 0 : ((high >> (i - 64)) & 1u) != 0;
    }

    void set(int i, bool v) {
        if (i < 64) {
            const std::uint64_t m = std::uint64_t{1} << i;
            low = v ? (low | m) : (low & ~m);
        } else {
            const std::uint8_t m = static_cast<std::uint8_t>(1u << (i - 64));
            high = v ? (high | m) : static_cast<std::uint8_t>(high & ~m);
        }
    }

    int popcount() const { return std::popcount(low) + std::popcount(high); }

    bool operator==(const PacketBits&) const = default;

    /// 10 or 18 hex digits, most-significant nibble first, lowercase.
    std::string to_hex() const {
        static constexpr char digits[] = "0123456789abcdef";
        const int nibbles = bit_count / 4;
        std::string out(static_cast<std::size_t>(nibbles), '0');
        for (int n = 0; n < nibbles; ++n) {
            const int shift = 4 * n; // nibble n covers bits [4n, 4n+4)
            unsigned v = 0;
            for (int b = 0; b < 4; ++b)
                v |= static_cast<unsigned>(get(shift + b)) << b;
            out[static_cast<std::size_t>(nibbles - 1 - n)] = digits[v];
        }
        return out;
    }

    /// Parses 10 or 18 hex digits (case-insensitive). Throws IllegalLength on
    /// any other length and ConfigError on non-hex characters.
    static PacketBits from_hex(std::string_view hex) {
        if (hex.size() != 10 && hex.size() != 18)
            throw IllegalLength("hex packet must be 10 or 18 digits, got " +
                                std::to_string(hex.size()));
        PacketBits bits;
        bits.bit_count = static_cast<int>(hex.size()) * 4;
        const int nibbles = bits.bit_count / 4;
        for (int n = 0; n < nibbles; ++n) {
            const char c = hex[static_cast<std::size_t>(nibbles - 1 - n)];
            unsigned v;
            if (c >= '0' && c <= '9')
                v = static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f')
                v = static_cast<unsigned>(c - 'a') + 10;
            else if (c >= 'A' && c <= 'F')
                v = static_cast<unsigned>(c - 'A') + 10;
            else
                throw ConfigError(std::string("invalid hex digit '") + c + "' in packet");
            for (int b = 0; b < 4; ++b)
                bits.set(4 * n + b, ((v >> b) & 1u) != 0);
        }
        return bits;
    }
};

/// Field positions inside a serialized packet.
namespace packet_layout {
inline constexpr int kParityBit = 0;
inline constexpr int kPayloadFlagBit = 1;
inline constexpr int kTimestampShift = 2; // bits 2..3
inline constexpr int kEmergencyShift = 4; // bits 4..5
inline constexpr int kTypeShift = 6;      // bits 6..7
inline constexpr int kKeyShift = 8;       // bits 8..39, LSB first
inline constexpr int kPayloadShift = 40;  // bits 40..71, LSB first
} // namespace packet_layout

enum class PacketType : std::uint8_t {
    Multicast = 0,
    // 1..3 exist on the wire but are not used by this artifact.
};

/// A multicast packet: 32-bit routing key plus an optional 32-bit payload.
struct SpinnPacket {
    PacketType packet_type = PacketType::Multicast;
    std::uint32_t key = 0;
    std::optional<std::uint32_t> payload;
    std::uint8_t timestamp_bits = 0; // always 0 here
    std::uint8_t emergency_bits = 0; // always 0 here

    bool operator==(const SpinnPacket&) const = default;
};

/// Parity bit that makes the total 1-count of the packet odd. `content` must
/// have the parity position zeroed and be exactly 40 or 72 bits long.
inline int compute_parity(const PacketBits& content) {
    if (content.bit_count != 40 && content.bit_count != 72)
        throw IllegalLength("parity is defined for 40- or 72-bit packets, got " +
                            std::to_string(content.bit_count));
    return (content.popcount() % 2 == 0) ? 1 : 0;
}

/// Serializes a packet into its wire word, computing the parity bit.
inline PacketBits serialize_packet(const SpinnPacket& p) {
    using namespace packet_layout;
    PacketBits bits;
    bits.bit_count = p.payload ? 72 : 40;
    bits.low = std::uint64_t{p.key} << kKeyShift;
    bits.low |= std::uint64_t{p.timestamp_bits & 0x3u} << kTimestampShift;
    bits.low |= std::uint64_t{p.emergency_bits & 0x3u} << kEmergencyShift;
    bits.low |= std::uint64_t{static_cast<std::uint8_t>(p.packet_type) & 0x3u} << kTypeShift;
    if (p.payload) {
        bits.set(kPayloadFlagBit, true);
        bits.low |= std::uint64_t{*p.payload & 0xFFFFFFu} << kPayloadShift;
        bits.high = static_cast<std::uint8_t>(*p.payload >> 24);
    }
    bits.set(kParityBit, compute_parity(bits) != 0);
    return bits;
}

inline SpinnPacket build_mc_packet(std::uint32_t key,
                                   std::optional<std::uint32_t> payload = std::nullopt) {
    SpinnPacket p;
    p.key = key;
    p.payload = payload;
    return p;
}

/// Parses and validates a serialized word. Parity is checked before anything
/// else: a corrupt word's remaining fields are untrustworthy.
inline SpinnPacket parse_packet(const PacketBits& bits) {
    using namespace packet_layout;
    if (bits.bit_count != 40 && bits.bit_count != 72)
        throw IllegalLength();
    if (bits.popcount() % 2 != 1)
        throw ParityError();
    const auto type = static_cast<std::uint8_t>((bits.low >> kTypeShift) & 0x3u);
    if (type != static_cast<std::uint8_t>(PacketType::Multicast))
        throw UnsupportedPacketType("packet type bits " + std::to_string(type) +
                                    " are not multicast");
    const bool has_payload = bits.get(kPayloadFlagBit);
    if (has_payload != (bits.bit_count == 72))
        throw FramingError("payload flag does not match packet length");
    SpinnPacket p;
    p.key = static_cast<std::uint32_t>((bits.low >> kKeyShift) & 0xFFFFFFFFu);
    p.timestamp_bits = static_cast<std::uint8_t>((bits.low >> kTimestampShift) & 0x3u);
    p.emergency_bits = static_cast<std::uint8_t>((bits.low >> kEmergencyShift) & 0x3u);
    if (has_payload)
        p.payload = static_cast<std::uint32_t>((bits.low >> kPayloadShift) & 0xFFFFFFu) |
                    (std::uint32_t{bits.high} << 24);
    return p;
}

} // namespace spingw
