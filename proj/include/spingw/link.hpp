#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spingw/errors.hpp"
#include "spingw/packet.hpp"

namespace spingw {

/// One direction's wire bundle: 7 data wires plus the return ack wire.
struct WireState {
    std::uint8_t data = 0; // bit i = wire i
    bool ack = false;
};

/// 2-of-7 symbol: a data nibble (0..15) or end-of-packet.
struct LinkSymbol {
    std::uint8_t code = 0; // 0..15 data, 16 = EOP

    static constexpr std::uint8_t kEop = 16;

    static LinkSymbol data(std::uint8_t nibble) { return LinkSymbol{nibble}; }
    static LinkSymbol eop() { return LinkSymbol{kEop}; }

    bool is_eop() const { return code == kEop; }
    std::uint8_t value() const { return code; }

    bool operator==(const LinkSymbol&) const = default;
};

namespace detail {

// Wire pairs (i, j), i < j, in lexicographic order give Data(0)..Data(15);
// (5, 6) is end-of-packet. (3,5) (3,6) (4,5) (4,6) are reserved.
inline constexpr std::array<std::uint8_t, 17> kSymbolMask = [] {
    std::array<std::uint8_t, 17> m{};
    constexpr std::pair<int, int> pairs[17] = {
        {0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}, {1, 2}, {1, 3}, {1, 4},
        {1, 5}, {1, 6}, {2, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 4}, {5, 6}};
    for (int s = 0; s < 17; ++s)
        m[static_cast<std::size_t>(s)] =
            static_cast<std::uint8_t>((1u << pairs[s].first) | (1u << pairs[s].second));
    return m;
}();

inline constexpr std::array<std::int8_t, 128> kMaskSymbol = [] {
    std::array<std::int8_t, 128> t{};
    for (auto& v : t)
        v = -1;
    for (int s = 0; s < 17; ++s)
        t[kSymbolMask[static_cast<std::size_t>(s)]] = static_cast<std::int8_t>(s);
    return t;
}();

} // namespace detail

/// NRZ transition coding: emitting a symbol toggles exactly its wire pair.
inline std::uint8_t encode_symbol(std::uint8_t prev, LinkSymbol sym) {
    return static_cast<std::uint8_t>(prev ^ detail::kSymbolMask[sym.code]);
}

/// Inverse of encode_symbol. Returns nullopt when the wires did not move.
/// Throws InvalidTransition for toggle counts other than {0, 2} or for a
/// reserved pair.
inline std::optional<LinkSymbol> decode_transition(std::uint8_t prev, std::uint8_t next) {
    const std::uint8_t diff = static_cast<std::uint8_t>((prev ^ next) & 0x7Fu);
    if (diff == 0)
        return std::nullopt;
    if (std::popcount(diff) != 2)
        throw InvalidTransition("transition toggles " + std::to_string(std::popcount(diff)) +
                                " wires");
    const std::int8_t sym = detail::kMaskSymbol[diff];
    if (sym < 0)
        throw InvalidTransition("toggled wire pair is reserved");
    return LinkSymbol{static_cast<std::uint8_t>(sym)};
}

/// Splits a serialized packet into data nibbles, least-significant first,
/// terminated by end-of-packet.
inline std::vector<LinkSymbol> frame_bits(const PacketBits& bits) {
    std::vector<LinkSymbol> symbols;
    const int nibbles = bits.bit_count / 4;
    symbols.reserve(static_cast<std::size_t>(nibbles) + 1);
    for (int n = 0; n < nibbles; ++n) {
        std::uint8_t v = 0;
        for (int b = 0; b < 4; ++b)
            v |= static_cast<std::uint8_t>(bits.get(4 * n + b)) << b;
        symbols.push_back(LinkSymbol::data(v));
    }
    symbols.push_back(LinkSymbol::eop());
    return symbols;
}

inline std::vector<LinkSymbol> frame_packet(const SpinnPacket& packet) {
    return frame_bits(serialize_packet(packet));
}

/// Reassembles one frame: 10 or 18 data symbols then end-of-packet.
inline PacketBits deframe_symbols(const std::vector<LinkSymbol>& symbols) {
    if (symbols.empty() || !symbols.back().is_eop())
        throw MissingEop();
    const std::size_t nibbles = symbols.size() - 1;
    for (std::size_t i = 0; i < nibbles; ++i)
        if (symbols[i].is_eop())
            throw FramingError("end-of-packet inside the frame body");
    if (nibbles != 10 && nibbles != 18)
        throw FramingError("frame carries " + std::to_string(nibbles) +
                           " nibbles, expected 10 or 18");
    PacketBits bits;
    bits.bit_count = static_cast<int>(nibbles) * 4;
    for (std::size_t n = 0; n < nibbles; ++n)
        for (int b = 0; b < 4; ++b)
            bits.set(4 * static_cast<int>(n) + b, ((symbols[n].value() >> b) & 1u) != 0);
    return bits;
}

/// Receiver-side acknowledge behaviour.
struct AckPolicy {
    enum Kind { Normal, NeverAck, Delay } kind = Normal;
    std::uint64_t delay_ticks = 0;

    static AckPolicy normal() { return {Normal, 0}; }
    static AckPolicy never() { return {NeverAck, 0}; }
    static AckPolicy delay(std::uint64_t n) { return {Delay, n}; }
};

/// Sending endpoint. One symbol may be in flight; the next goes out only
/// after the ack wire toggles. Missing the ack for ack_timeout ticks stalls
/// the endpoint permanently (until reset).
class LinkSender {
public:
    explicit LinkSender(std::uint64_t ack_timeout = 1000) : ack_timeout_(ack_timeout) {}

    void enqueue(const PacketBits& packet) {
        for (auto sym : frame_bits(packet))
            pending_.push_back(sym);
        ++packets_enqueued_;
    }

    void tick(std::uint64_t /*now*/, bool ack_wire) {
        if (stalled_)
            return;
        if (awaiting_ack_) {
            if (ack_wire != last_ack_seen_) {
                last_ack_seen_ = ack_wire;
                awaiting_ack_ = false;
                ++acks_received_;
                wait_ticks_ = 0;
            } else if (++wait_ticks_ >= ack_timeout_) {
                stalled_ = true;
                stall_symbol_index_ = symbols_sent_;
                return;
            }
        }
        if (!awaiting_ack_ && !pending_.empty()) {
            wires_ = encode_symbol(wires_, pending_.front());
            pending_.pop_front();
            ++symbols_sent_;
            awaiting_ack_ = true;
        }
    }

    void reset_stall() {
        stalled_ = false;
        wait_ticks_ = 0;
    }

    std::uint8_t wires() const { return wires_; }
    bool idle() const { return pending_.empty() && !awaiting_ack_ && !stalled_; }
    bool stalled() const { return stalled_; }
    std::uint64_t stall_symbol_index() const { return stall_symbol_index_; }
    std::uint64_t symbols_sent() const { return symbols_sent_; }
    std::uint64_t acks_received() const { return acks_received_; }
    std::uint64_t packets_enqueued() const { return packets_enqueued_; }

private:
    std::uint64_t ack_timeout_;
    std::deque<LinkSymbol> pending_;
    std::uint8_t wires_ = 0;
    bool awaiting_ack_ = false;
    bool last_ack_seen_ = false;
    bool stalled_ = false;
    std::uint64_t wait_ticks_ = 0;
    std::uint64_t stall_symbol_index_ = 0;
    std::uint64_t symbols_sent_ = 0;
    std::uint64_t acks_received_ = 0;
    std::uint64_t packets_enqueued_ = 0;
};

/// Receiving endpoint. Decodes wire transitions, reassembles frames and
/// drives the ack wire per policy. An invalid transition puts the endpoint
/// into a resync state that discards input until the next end-of-packet.
class LinkReceiver {
public:
    explicit LinkReceiver(AckPolicy policy = AckPolicy::normal()) : policy_(policy) {}

    void tick(std::uint64_t now, std::uint8_t data_wires) {
        while (!ack_due_.empty() && ack_due_.front() <= now) {
            ack_due_.pop_front();
            ack_ = !ack_;
            ++acks_sent_;
        }
        data_wires &= 0x7Fu;
        if (data_wires == last_wires_)
            return;
        ++symbols_received_;
        schedule_ack(now);
        std::optional<LinkSymbol> sym;
        try {
            sym = decode_transition(last_wires_, data_wires);
        } catch (const InvalidTransition&) {
            if (!resync_)
                ++framing_errors_;
            resync_ = true;
            nibbles_.clear();
        }
        last_wires_ = data_wires;
        if (!sym)
            return;
        if (resync_) {
            if (sym->is_eop()) {
                resync_ = false;
                nibbles_.clear();
            }
            return;
        }
        if (sym->is_eop()) {
            if (nibbles_.size() == 10 || nibbles_.size() == 18) {
                std::vector<LinkSymbol> frame;
                frame.reserve(nibbles_.size() + 1);
                for (auto n : nibbles_)
                    frame.push_back(LinkSymbol::data(n));
                frame.push_back(LinkSymbol::eop());
                completed_.push_back(deframe_symbols(frame));
            } else {
                ++framing_errors_;
            }
            nibbles_.clear();
        } else {
            if (nibbles_.size() < 18)
                nibbles_.push_back(sym->value());
            else {
                // overlong frame; drop it and resync at the next EOP
                ++framing_errors_;
                resync_ = true;
                nibbles_.clear();
            }
        }
    }

    std::vector<PacketBits> drain() {
        std::vector<PacketBits> out;
        out.swap(completed_);
        return out;
    }

    bool ack_wire() const { return ack_; }
    std::uint64_t framing_errors() const { return framing_errors_; }
    std::uint64_t symbols_received() const { return symbols_received_; }
    std::uint64_t acks_sent() const { return acks_sent_; }
    bool has_completed() const { return !completed_.empty(); }

private:
    void schedule_ack(std::uint64_t now) {
        switch (policy_.kind) {
        case AckPolicy::Normal:
            ack_ = !ack_;
            ++acks_sent_;
            break;
        case AckPolicy::NeverAck:
            break;
        case AckPolicy::Delay:
            ack_due_.push_back(now + policy_.delay_ticks);
            break;
        }
    }

    AckPolicy policy_;
    std::uint8_t last_wires_ = 0;
    bool ack_ = false;
    bool resync_ = false;
    std::vector<std::uint8_t> nibbles_;
    std::vector<PacketBits> completed_;
    std::deque<std::uint64_t> ack_due_;
    std::uint64_t framing_errors_ = 0;
    std::uint64_t symbols_received_ = 0;
    std::uint64_t acks_sent_ = 0;
};

/// Optional wire observer: called once per tick on which the bundle moved.
using WireTraceFn =
    std::function<void(std::uint64_t tick, std::uint8_t data_wires, bool ack_wire)>;

/// One simplex link: sender and receiver advanced together by the caller.
class LinkChannel {
public:
    LinkChannel(std::uint64_t ack_timeout = 1000, AckPolicy policy = AckPolicy::normal())
        : tx(ack_timeout), rx(policy) {}

    void tick(std::uint64_t now) {
        tx.tick(now, rx.ack_wire());
        rx.tick(now, tx.wires());
        if (trace && (tx.wires() != traced_data_ || rx.ack_wire() != traced_ack_)) {
            trace(now, tx.wires(), rx.ack_wire());
            traced_data_ = tx.wires();
            traced_ack_ = rx.ack_wire();
        }
    }

    bool quiet() const { return tx.idle() && !rx.has_completed(); }

    LinkSender tx;
    LinkReceiver rx;
    WireTraceFn trace;

private:
    std::uint8_t traced_data_ = 0;
    bool traced_ack_ = false;
};

struct TransferReport {
    std::uint64_t delivered = 0;
    std::uint64_t symbols_sent = 0;
    std::uint64_t acks_received = 0;
    std::uint64_t framing_errors = 0;
    bool stalled = false;
    std::uint64_t stall_symbol_index = 0; // 1-based index of the unacked symbol
    std::uint64_t ticks_used = 0;
    std::vector<PacketBits> packets;

    bool operator==(const TransferReport&) const = default;
};

/// Pushes a packet queue through one link direction and reports what
/// arrived. A stall is carried inside the report, never thrown. Stops early
/// once the queue is drained and the wires are quiet.
inline TransferReport link_transfer(const std::vector<PacketBits>& queue, AckPolicy policy,
                                    std::uint64_t budget, std::uint64_t ack_timeout = 1000,
                                    WireTraceFn trace = nullptr) {
    if (budget == 0)
        throw ConfigError("link transfer budget must be positive");
    LinkChannel ch(ack_timeout, policy);
    ch.trace = std::move(trace);
    for (const auto& p : queue)
        ch.tx.enqueue(p);
    TransferReport report;
    for (std::uint64_t t = 0; t < budget; ++t) {
        ch.tick(t);
        report.ticks_used = t + 1;
        for (auto& bits : ch.rx.drain())
            report.packets.push_back(bits);
        if (ch.tx.stalled() || ch.tx.idle())
            break;
    }
    report.delivered = report.packets.size();
    report.symbols_sent = ch.tx.symbols_sent();
    report.acks_received = ch.tx.acks_received();
    report.framing_errors = ch.rx.framing_errors();
    report.stalled = ch.tx.stalled();
    report.stall_symbol_index = ch.tx.stall_symbol_index();
    return report;
}

} // namespace spingw
