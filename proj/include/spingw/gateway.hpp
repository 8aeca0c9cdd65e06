#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spingw/control.hpp"
#include "spingw/display.hpp"
#include "spingw/errors.hpp"
#include "spingw/packet.hpp"
#include "spingw/rate.hpp"
#include "spingw/routing.hpp"

namespace spingw {

struct GatewayConfig {
    RateConfig rate;
    RoutingTable routing;
    std::uint32_t tx_address = 0;
    std::size_t detector_window = 1; // inter-spike intervals averaged per estimate

    void validate() const {
        rate.validate();
        if (detector_window < 1)
            throw ConfigError("detector_window must be at least 1");
        if (!routing.forward_key(tx_address))
            throw ConfigError("tx_address " + std::to_string(tx_address) +
                              " has no forward routing entry");
    }
};

struct GatewayErrorCounters {
    std::uint64_t parity = 0;
    std::uint64_t framing = 0;
    std::uint64_t unroutable = 0;
    std::uint64_t stalled = 0;
    std::uint64_t out_of_range = 0;
    std::uint64_t pc_checksum = 0;
    std::uint64_t pc_truncated = 0;

    std::uint64_t total() const {
        return parity + framing + unroutable + stalled + out_of_range + pc_checksum +
               pc_truncated;
    }
};

struct GatewayTraceEvent {
    std::uint64_t tick;
    bool tx; // false = rx
    std::uint32_t key;
    std::uint64_t counter; // per-key running count after this event
};

/// The board-side state machine: turns sensor samples into a paced packet
/// stream, counts and measures what comes back, answers the PC channel and
/// keeps the operator display current. Driven tick by tick by one driver.
class Gateway {
public:
    explicit Gateway(GatewayConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    const GatewayConfig& config() const { return cfg_; }

    /// New sensor reading. The period changes with it, but the pending
    /// inter-spike countdown is never restarted; the new pace starts at the
    /// next emitted spike. Out-of-range readings are counted and ignored.
    void ingest_sample(std::int64_t value) {
        std::uint64_t period;
        try {
            period = value_to_period(value, cfg_.rate);
        } catch (const ValueOutOfRange&) {
            ++errors_.out_of_range;
            refresh_monitor();
            return;
        }
        period_ = period;
        last_value_ = value;
        refresh_monitor();
    }

    /// Advances the virtual clock by one tick; returns packets to transmit.
    std::vector<SpinnPacket> tick(std::uint64_t now) {
        std::vector<SpinnPacket> out;
        if (!period_)
            return out;
        if (!next_spike_)
            next_spike_ = now + *period_;
        if (now >= *next_spike_) {
            auto key = cfg_.routing.forward_key(cfg_.tx_address);
            if (!key) {
                ++errors_.unroutable;
            } else {
                out.push_back(build_mc_packet(*key));
                const std::uint64_t n = ++tx_counters_[*key];
                ++tx_total_;
                trace_.push_back({now, true, *key, n});
            }
            next_spike_ = now + *period_;
        }
        return out;
    }

    /// Validates and dispatches a received wire word. Parity and framing
    /// failures land in the error counters and never reach the packet path.
    void handle_rx_bits(const PacketBits& bits, std::uint64_t now) {
        SpinnPacket packet;
        try {
            packet = parse_packet(bits);
        } catch (const ParityError&) {
            ++errors_.parity;
            refresh_monitor();
            return;
        } catch (const Error&) { // unsupported type / payload-flag mismatch
            ++errors_.framing;
            refresh_monitor();
            return;
        }
        handle_rx_packet(packet, now);
    }

    /// Counts a parity-valid packet, feeds the frequency detector and queues
    /// an EventReport. Keys without a reverse routing entry are counted as
    /// unroutable and dropped before the detector.
    void handle_rx_packet(const SpinnPacket& packet, std::uint64_t now) {
        const std::uint64_t n = ++rx_counters_[packet.key];
        ++rx_total_;
        trace_.push_back({now, false, packet.key, n});
        if (!cfg_.routing.reverse_address(packet.key)) {
            ++errors_.unroutable;
            refresh_monitor();
            return;
        }
        last_rx_key_ = packet.key;
        auto& recent = detector_[packet.key];
        recent.push_back(now);
        while (recent.size() > cfg_.detector_window + 1)
            recent.pop_front();
        if (recent.size() == cfg_.detector_window + 1) {
            SpikeTrain train;
            train.ticks.assign(recent.begin(), recent.end());
            const std::uint64_t period = estimate_period(train, cfg_.detector_window);
            measured_period_[packet.key] = period;
            last_freq_mhz_ = period_to_freq_mhz(period, cfg_.rate.tick_rate);
        }
        pc_out_append(encode_control_frame(ControlFrame::event_report(packet.key, now)));
        refresh_monitor();
    }

    /// PC channel input; frames act on the gateway, replies queue on pc_out.
    void feed_pc_bytes(std::span<const std::uint8_t> bytes) {
        handle_frames(pc_decoder_.feed(bytes));
        sync_pc_errors();
    }

    /// End-of-stream flush for the PC channel.
    void finish_pc_stream() {
        handle_frames(pc_decoder_.finish());
        sync_pc_errors();
    }

    std::vector<std::uint8_t> drain_pc_out() {
        std::vector<std::uint8_t> out;
        out.swap(pc_out_);
        return out;
    }

    void set_display_mode(DisplayMode mode) {
        monitor_.mode = mode;
        refresh_monitor();
    }

    // Link-side conditions observed by the driver.
    void note_framing_errors(std::uint64_t n) {
        errors_.framing += n;
        if (n)
            refresh_monitor();
    }
    void note_stall() {
        ++errors_.stalled;
        refresh_monitor();
    }

    const std::map<std::uint32_t, std::uint64_t>& rx_counters() const { return rx_counters_; }
    const std::map<std::uint32_t, std::uint64_t>& tx_counters() const { return tx_counters_; }
    std::uint64_t rx_total() const { return rx_total_; }
    std::uint64_t tx_total() const { return tx_total_; }
    const GatewayErrorCounters& errors() const { return errors_; }
    const MonitorRegisters& monitor() const { return monitor_; }
    const std::vector<GatewayTraceEvent>& trace() const { return trace_; }
    std::optional<std::int64_t> last_value() const { return last_value_; }
    std::optional<std::uint64_t> current_period() const { return period_; }

    std::optional<std::uint64_t> measured_period(std::uint32_t key) const {
        auto it = measured_period_.find(key);
        if (it == measured_period_.end())
            return std::nullopt;
        return it->second;
    }

    const std::map<std::uint32_t, std::uint64_t>& measured_periods() const {
        return measured_period_;
    }

    std::map<std::uint32_t, std::int64_t> measured_frequencies_mhz() const {
        std::map<std::uint32_t, std::int64_t> out;
        for (const auto& [key, period] : measured_period_)
            out[key] = period_to_freq_mhz(period, cfg_.rate.tick_rate);
        return out;
    }

private:
    void handle_frames(const std::vector<ControlFrame>& frames) {
        for (const auto& f : frames) {
            switch (f.frame_type) {
            case FrameType::SetValue:
                ingest_sample(static_cast<std::int64_t>(f.payload_u16()));
                break;
            case FrameType::QueryCounter: {
                const std::uint32_t key = f.payload_u32();
                auto it = rx_counters_.find(key);
                const std::uint64_t count = it == rx_counters_.end() ? 0 : it->second;
                pc_out_append(encode_control_frame(ControlFrame::counter_report(key, count)));
                break;
            }
            case FrameType::SetDisplayMode:
                if (f.payload[0] <= static_cast<std::uint8_t>(DisplayMode::Errors))
                    set_display_mode(static_cast<DisplayMode>(f.payload[0]));
                break;
            case FrameType::EventReport:
            case FrameType::CounterReport:
                break; // outbound-only types; ignore on input
            }
        }
    }

    void sync_pc_errors() {
        errors_.pc_checksum = pc_decoder_.checksum_errors();
        errors_.pc_truncated = pc_decoder_.truncated_errors();
    }

    void pc_out_append(const std::vector<std::uint8_t>& bytes) {
        pc_out_.insert(pc_out_.end(), bytes.begin(), bytes.end());
    }

    void refresh_monitor() {
        switch (monitor_.mode) {
        case DisplayMode::SetValue:
            monitor_.show(last_value_ && *last_value_ > 0
                              ? static_cast<std::uint64_t>(*last_value_)
                              : 0);
            break;
        case DisplayMode::RxCount: {
            std::uint64_t n = 0;
            if (last_rx_key_) {
                auto it = rx_counters_.find(*last_rx_key_);
                if (it != rx_counters_.end())
                    n = it->second;
            }
            monitor_.show(n);
            break;
        }
        case DisplayMode::MeasuredFreq:
            monitor_.show(last_freq_mhz_ > 0 ? static_cast<std::uint64_t>(last_freq_mhz_) : 0);
            break;
        case DisplayMode::Errors:
            monitor_.show(errors_.total());
            break;
        }
    }

    GatewayConfig cfg_;
    std::optional<std::uint64_t> period_;
    std::optional<std::uint64_t> next_spike_;
    std::optional<std::int64_t> last_value_;
    std::optional<std::uint32_t> last_rx_key_;
    std::int64_t last_freq_mhz_ = 0;
    std::map<std::uint32_t, std::uint64_t> rx_counters_;
    std::map<std::uint32_t, std::uint64_t> tx_counters_;
    std::uint64_t rx_total_ = 0;
    std::uint64_t tx_total_ = 0;
    std::map<std::uint32_t, std::deque<std::uint64_t>> detector_;
    std::map<std::uint32_t, std::uint64_t> measured_period_;
    GatewayErrorCounters errors_;
    MonitorRegisters monitor_;
    std::vector<GatewayTraceEvent> trace_;
    std::vector<std::uint8_t> pc_out_;
    FrameDecoder pc_decoder_;
};

} // namespace spingw
