#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spingw/config.hpp"
#include "spingw/gateway.hpp"
#include "spingw/link.hpp"
#include "spingw/network.hpp"

namespace spingw {

struct WireTraceRow {
    std::uint64_t tick;
    bool tx; // gateway-to-board direction
    std::uint8_t data;
    bool ack;
};

struct ExperimentResult {
    std::uint64_t duration_ticks = 0;
    std::uint64_t tx_count = 0;
    std::uint64_t rx_count = 0;
    std::map<std::uint32_t, std::uint64_t> counters;
    std::map<std::uint32_t, std::uint64_t> measured_periods;
    std::map<std::uint32_t, std::int64_t> measured_frequencies_mhz;
    GatewayErrorCounters errors;
    std::uint64_t board_unknown_keys = 0;
    std::uint64_t board_rx_parse_errors = 0;
    Recordings recordings;
    std::vector<std::string> population_names;
    std::vector<GatewayTraceEvent> events;
    std::vector<WireTraceRow> wire_trace;
    MonitorRegisters monitor;
};

namespace detail {

inline std::string wire_bits(std::uint8_t data) {
    std::string s(7, '0');
    for (int i = 0; i < 7; ++i)
        if ((data >> i) & 1u)
            s[static_cast<std::size_t>(6 - i)] = '1'; // wire 6 printed first
    return s;
}

} // namespace detail

/// Runs the whole loop: gateway TX -> link A->B -> board step at each dt
/// boundary -> link B->A -> gateway RX, one fixed order per tick. After the
/// clock stops, the links are drained (no further board steps or TX) so
/// in-flight answers still reach the counters.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    Gateway gw(GatewayConfig{cfg.rate, cfg.routing, cfg.tx_address, cfg.detector_window});
    Network net(cfg.network);
    LinkChannel link_tx(cfg.ack_timeout); // gateway -> board
    LinkChannel link_rx(cfg.ack_timeout); // board -> gateway

    ExperimentResult result;
    result.duration_ticks = cfg.duration_ticks();
    for (const auto& p : cfg.network.populations)
        result.population_names.push_back(p.name);
    link_tx.trace = [&](std::uint64_t t, std::uint8_t d, bool a) {
        result.wire_trace.push_back({t, true, d, a});
    };
    link_rx.trace = [&](std::uint64_t t, std::uint8_t d, bool a) {
        result.wire_trace.push_back({t, false, d, a});
    };

    const std::uint64_t dt_ticks = net.dt_ticks();
    const std::uint64_t ticks_per_ms = cfg.rate.tick_rate / 1000;
    std::size_t next_sample = 0;
    bool stall_noted = false;

    const auto wall_start = std::chrono::steady_clock::now();
    auto pace = [&](std::uint64_t now) {
        if (!cfg.realtime_pacing || now % 1000 != 0)
            return;
        const auto target = wall_start + std::chrono::microseconds(now * 1'000'000 /
                                                                   cfg.rate.tick_rate *
                                                                   cfg.network.time_scale_factor);
        std::this_thread::sleep_until(target);
    };

    auto link_stage = [&](std::uint64_t t) {
        link_tx.tick(t);
        for (const auto& bits : link_tx.rx.drain()) {
            try {
                net.deliver_packet(parse_packet(bits), t);
            } catch (const Error&) {
                ++result.board_rx_parse_errors;
            }
        }
        if (t > 0 && t % dt_ticks == 0 && net.steps_run() < t / dt_ticks) {
            net.step();
            for (const auto& ev : net.drain_output())
                link_rx.tx.enqueue(serialize_packet(build_mc_packet(ev.key)));
        }
        link_rx.tick(t);
        for (const auto& bits : link_rx.rx.drain())
            gw.handle_rx_bits(bits, t);
        if (!stall_noted && (link_tx.tx.stalled() || link_rx.tx.stalled())) {
            gw.note_stall();
            stall_noted = true;
        }
    };

    for (std::uint64_t t = 0; t <= result.duration_ticks; ++t) {
        if (t < result.duration_ticks) {
            while (next_sample < cfg.schedule.size() &&
                   cfg.schedule[next_sample].start_ms * ticks_per_ms == t) {
                gw.ingest_sample(freq_to_value(cfg.schedule[next_sample].frequency_mhz, cfg.rate));
                ++next_sample;
            }
            for (const auto& packet : gw.tick(t))
                link_tx.tx.enqueue(serialize_packet(packet));
        }
        link_stage(t);
        pace(t);
        if (result.duration_ticks == 0)
            break;
    }
    // drain in-flight wire traffic; the board clock is stopped
    std::uint64_t t = result.duration_ticks;
    const std::uint64_t drain_limit = result.duration_ticks + 2 * cfg.ack_timeout + 1024;
    while ((!link_tx.quiet() || !link_rx.quiet()) && !link_tx.tx.stalled() &&
           !link_rx.tx.stalled() && t < drain_limit) {
        ++t;
        link_tx.tick(t);
        for (const auto& bits : link_tx.rx.drain()) {
            try {
                net.deliver_packet(parse_packet(bits), t);
            } catch (const Error&) {
                ++result.board_rx_parse_errors;
            }
        }
        link_rx.tick(t);
        for (const auto& bits : link_rx.rx.drain())
            gw.handle_rx_bits(bits, t);
    }
    gw.note_framing_errors(link_rx.rx.framing_errors());

    result.tx_count = gw.tx_total();
    result.rx_count = gw.rx_total();
    result.counters = gw.rx_counters();
    result.measured_periods = gw.measured_periods();
    result.measured_frequencies_mhz = gw.measured_frequencies_mhz();
    result.errors = gw.errors();
    result.board_unknown_keys = net.unknown_key_count();
    result.recordings = net.recordings();
    result.events = gw.trace();
    result.monitor = gw.monitor();
    return result;
}

inline nlohmann::json summary_json(const ExperimentResult& r) {
    nlohmann::json counters = nlohmann::json::object();
    for (const auto& [key, count] : r.counters)
        counters[std::to_string(key)] = count;
    nlohmann::json freqs = nlohmann::json::object();
    for (const auto& [key, f] : r.measured_frequencies_mhz)
        freqs[std::to_string(key)] = f;
    return nlohmann::json{
        {"tx_count", r.tx_count},
        {"rx_count", r.rx_count},
        {"counters", counters},
        {"measured_frequencies_mhz", freqs},
        {"errors",
         {{"parity", r.errors.parity},
          {"framing", r.errors.framing},
          {"unroutable", r.errors.unroutable},
          {"stalled", r.errors.stalled},
          {"out_of_range", r.errors.out_of_range},
          {"pc_checksum", r.errors.pc_checksum},
          {"pc_truncated", r.errors.pc_truncated},
          {"board_unknown_keys", r.board_unknown_keys},
          {"board_rx_parse", r.board_rx_parse_errors}}},
    };
}

inline nlohmann::json monitor_json(const MonitorRegisters& m) {
    return nlohmann::json{{"displayed_value", m.displayed_value},
                          {"mode", display_mode_name(m.mode)},
                          {"digits", m.digits}};
}

/// Writes raster.csv, membrane.csv, events.jsonl, wire_trace.csv and
/// summary.json into `out_dir` (created if needed). Byte-deterministic for
/// identical results.
inline void write_artifacts(const ExperimentResult& r, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::ofstream f(out_dir / "raster.csv", std::ios::binary);
        f << "tick,population,neuron\n";
        for (const auto& s : r.recordings.raster)
            f << s.tick << ',' << r.population_names.at(s.population) << ',' << s.neuron << '\n';
    }
    {
        std::ofstream f(out_dir / "membrane.csv", std::ios::binary);
        f << "tick,neuron,v_mv\n";
        char buf[64];
        for (const auto& s : r.recordings.membrane) {
            std::snprintf(buf, sizeof(buf), "%.6f", s.v_mv);
            f << s.tick << ',' << s.neuron << ',' << buf << '\n';
        }
    }
    {
        std::ofstream f(out_dir / "events.jsonl", std::ios::binary);
        for (const auto& e : r.events) {
            const nlohmann::json j{{"tick", e.tick},
                                   {"dir", e.tx ? "tx" : "rx"},
                                   {"key", e.key},
                                   {"counter", e.counter}};
            f << j.dump() << '\n';
        }
    }
    {
        std::ofstream f(out_dir / "wire_trace.csv", std::ios::binary);
        f << "tick,dir,data,ack\n";
        for (const auto& w : r.wire_trace)
            f << w.tick << ',' << (w.tx ? "tx" : "rx") << ',' << detail::wire_bits(w.data) << ','
              << (w.ack ? 1 : 0) << '\n';
    }
    {
        std::ofstream f(out_dir / "summary.json", std::ios::binary);
        f << summary_json(r).dump(2) << '\n';
    }
}

} // namespace spingw
