#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spingw/errors.hpp"
#include "spingw/network.hpp"
#include "spingw/rate.hpp"
#include "spingw/routing.hpp"

namespace spingw {

namespace ini {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::vector<Entry> entries;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

/// Flat `key = value` pairs under `[section]` headers. Lines starting with
/// ';' or '#' are comments.
inline std::vector<Section> parse(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == ';' || line.front() == '#')
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": unterminated section header");
            sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        if (sections.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": entry before any section");
        sections.back().entries.push_back({std::string(trim(line.substr(0, eq))),
                                           std::string(trim(line.substr(eq + 1))), line_no});
    }
    return sections;
}

inline std::string where(const Section& s, const Entry& e) {
    return "line " + std::to_string(e.line) + ": [" + s.name + "] " + e.key;
}

inline std::int64_t parse_int(const Section& s, const Entry& e) {
    std::int64_t v = 0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last)
        throw ConfigError(where(s, e) + ": '" + e.value + "' is not an integer");
    return v;
}

inline std::uint64_t parse_uint(const Section& s, const Entry& e) {
    const std::int64_t v = parse_int(s, e);
    if (v < 0)
        throw ConfigError(where(s, e) + ": must not be negative");
    return static_cast<std::uint64_t>(v);
}

inline double parse_real(const Section& s, const Entry& e) {
    double v = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last)
        throw ConfigError(where(s, e) + ": '" + e.value + "' is not a number");
    return v;
}

inline bool parse_bool(const Section& s, const Entry& e) {
    if (e.value == "true" || e.value == "on" || e.value == "1")
        return true;
    if (e.value == "false" || e.value == "off" || e.value == "0")
        return false;
    throw ConfigError(where(s, e) + ": '" + e.value + "' is not a boolean");
}

} // namespace ini

struct ScheduleEntry {
    std::uint64_t start_ms = 0;
    std::int64_t frequency_mhz = 0;
};

/// Full closed-loop run description, loadable from an INI file.
struct ExperimentConfig {
    std::uint64_t duration_ms = 10'000;
    bool realtime_pacing = false;
    RateConfig rate;
    std::vector<ScheduleEntry> schedule;
    RoutingTable routing;
    std::uint32_t tx_address = 0;
    std::size_t detector_window = 1;
    std::uint64_t ack_timeout = 1000;
    NetworkConfig network;

    std::uint64_t duration_ticks() const { return duration_ms * rate.tick_rate / 1000; }

    void validate() const {
        rate.validate();
        network.validate();
        if (network.tick_rate != rate.tick_rate)
            throw ConfigError("[network] and [rate] must share one tick_rate");
        if (duration_ms > 0 && duration_ticks() % network.dt_ticks() != 0)
            throw ConfigError("duration_ms must be a whole number of simulation steps");
        if (schedule.empty())
            throw ConfigError("[schedule] needs at least one entry");
        if (schedule.front().start_ms != 0)
            throw ConfigError("[schedule] must start at 0 ms");
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            const auto& e = schedule[i];
            if (i > 0 && e.start_ms <= schedule[i - 1].start_ms)
                throw ConfigError("[schedule] start times must be strictly increasing");
            if (e.frequency_mhz <= 0)
                throw ConfigError("[schedule] frequency must be positive");
            if (e.frequency_mhz > kFrequencyCapMhz)
                throw ConfigError("[schedule] frequency " + std::to_string(e.frequency_mhz) +
                                  " mHz at " + std::to_string(e.start_ms) +
                                  " ms exceeds the 1 kHz cap");
            if (e.frequency_mhz < rate.f_min_mhz || e.frequency_mhz > rate.f_max_mhz)
                throw ConfigError("[schedule] frequency " + std::to_string(e.frequency_mhz) +
                                  " mHz is outside the configured rate range [" +
                                  std::to_string(rate.f_min_mhz) + ", " +
                                  std::to_string(rate.f_max_mhz) + "]");
        }
        if (detector_window < 1)
            throw ConfigError("[gateway] detector_window must be at least 1");
        if (ack_timeout < 1)
            throw ConfigError("[gateway] ack_timeout must be at least 1 tick");
        if (!routing.forward_key(tx_address))
            throw ConfigError("[gateway] tx_address " + std::to_string(tx_address) +
                              " has no [routing forward] entry");
    }

    static ExperimentConfig from_ini_text(const std::string& text) {
        ExperimentConfig cfg;
        cfg.network.populations.clear();
        bool rate_tick_set = false;
        for (const auto& section : ini::parse(text)) {
            if (section.name == "experiment") {
                for (const auto& e : section.entries) {
                    if (e.key == "duration_ms")
                        cfg.duration_ms = ini::parse_uint(section, e);
                    else if (e.key == "realtime_pacing")
                        cfg.realtime_pacing = ini::parse_bool(section, e);
                    else
                        throw unknown_key(section, e);
                }
            } else if (section.name == "rate") {
                for (const auto& e : section.entries) {
                    if (e.key == "tick_rate") {
                        cfg.rate.tick_rate = ini::parse_uint(section, e);
                        rate_tick_set = true;
                    } else if (e.key == "f_min_mhz")
                        cfg.rate.f_min_mhz = ini::parse_int(section, e);
                    else if (e.key == "f_max_mhz")
                        cfg.rate.f_max_mhz = ini::parse_int(section, e);
                    else if (e.key == "v_min")
                        cfg.rate.v_min = ini::parse_int(section, e);
                    else if (e.key == "v_max")
                        cfg.rate.v_max = ini::parse_int(section, e);
                    else
                        throw unknown_key(section, e);
                }
            } else if (section.name == "schedule") {
                for (const auto& e : section.entries) {
                    ini::Entry start_entry{e.key, e.key, e.line};
                    cfg.schedule.push_back(
                        {ini::parse_uint(section, start_entry), ini::parse_int(section, e)});
                }
            } else if (section.name == "gateway") {
                for (const auto& e : section.entries) {
                    if (e.key == "tx_address")
                        cfg.tx_address = static_cast<std::uint32_t>(ini::parse_uint(section, e));
                    else if (e.key == "detector_window")
                        cfg.detector_window = static_cast<std::size_t>(ini::parse_uint(section, e));
                    else if (e.key == "ack_timeout")
                        cfg.ack_timeout = ini::parse_uint(section, e);
                    else
                        throw unknown_key(section, e);
                }
            } else if (section.name == "routing forward") {
                for (const auto& e : section.entries) {
                    ini::Entry addr{e.key, e.key, e.line};
                    cfg.routing.add_forward(
                        static_cast<std::uint32_t>(ini::parse_uint(section, addr)),
                        static_cast<std::uint32_t>(ini::parse_uint(section, e)));
                }
            } else if (section.name == "routing reverse") {
                for (const auto& e : section.entries) {
                    ini::Entry key{e.key, e.key, e.line};
                    cfg.routing.add_reverse(
                        static_cast<std::uint32_t>(ini::parse_uint(section, key)),
                        static_cast<std::uint32_t>(ini::parse_uint(section, e)));
                }
            } else if (section.name == "network") {
                for (const auto& e : section.entries) {
                    if (e.key == "dt_us")
                        cfg.network.dt_us = static_cast<std::uint32_t>(ini::parse_uint(section, e));
                    else if (e.key == "time_scale_factor")
                        cfg.network.time_scale_factor =
                            static_cast<std::uint32_t>(ini::parse_uint(section, e));
                    else
                        throw unknown_key(section, e);
                }
            } else if (section.name.starts_with("population ")) {
                PopulationConfig pop;
                pop.name = section.name.substr(11);
                for (const auto& e : section.entries) {
                    if (e.key == "model") {
                        if (e.value == "spike_source")
                            pop.model = PopulationConfig::Model::SpikeSource;
                        else if (e.value == "if_curr_exp")
                            pop.model = PopulationConfig::Model::LifCurrExp;
                        else
                            throw ConfigError(ini::where(section, e) + ": unknown model '" +
                                              e.value + "'");
                    } else if (e.key == "size")
                        pop.size = static_cast<std::uint32_t>(ini::parse_uint(section, e));
                    else if (e.key == "tau_m")
                        pop.params.tau_m_ms = ini::parse_real(section, e);
                    else if (e.key == "tau_syn_E")
                        pop.params.tau_syn_e_ms = ini::parse_real(section, e);
                    else if (e.key == "tau_syn_I")
                        pop.params.tau_syn_i_ms = ini::parse_real(section, e);
                    else if (e.key == "tau_refrac")
                        pop.params.tau_refrac_ms = ini::parse_real(section, e);
                    else if (e.key == "v_rest")
                        pop.params.v_rest_mv = ini::parse_real(section, e);
                    else if (e.key == "v_reset")
                        pop.params.v_reset_mv = ini::parse_real(section, e);
                    else if (e.key == "v_thresh")
                        pop.params.v_thresh_mv = ini::parse_real(section, e);
                    else if (e.key == "c_m")
                        pop.params.c_m_nf = ini::parse_real(section, e);
                    else if (e.key == "i_offset")
                        pop.params.i_offset_na = ini::parse_real(section, e);
                    else
                        throw unknown_key(section, e);
                }
                cfg.network.populations.push_back(std::move(pop));
            } else if (section.name.starts_with("projection ")) {
                ProjectionConfig proj;
                for (const auto& e : section.entries) {
                    if (e.key == "source")
                        proj.source = e.value;
                    else if (e.key == "target")
                        proj.target = e.value;
                    else if (e.key == "weight")
                        proj.weight_na = ini::parse_real(section, e);
                    else if (e.key == "delay_ms")
                        proj.delay_ms = ini::parse_real(section, e);
                    else if (e.key == "connector") {
                        if (e.value == "one_to_one")
                            proj.connector = ProjectionConfig::Connector::OneToOne;
                        else if (e.value == "all_to_all")
                            proj.connector = ProjectionConfig::Connector::AllToAll;
                        else
                            throw ConfigError(ini::where(section, e) + ": unknown connector '" +
                                              e.value + "'");
                    } else
                        throw unknown_key(section, e);
                }
                cfg.network.projections.push_back(std::move(proj));
            } else if (section.name == "input_keys") {
                for (const auto& e : section.entries) {
                    ini::Entry key{e.key, e.key, e.line};
                    const auto colon = e.value.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError(ini::where(section, e) +
                                          ": expected 'population:neuron'");
                    ini::Entry neuron{e.key, e.value.substr(colon + 1), e.line};
                    cfg.network.input_keys[static_cast<std::uint32_t>(
                        ini::parse_uint(section, key))] = {
                        e.value.substr(0, colon),
                        static_cast<std::uint32_t>(ini::parse_uint(section, neuron))};
                }
            } else if (section.name.starts_with("live_output ")) {
                LiveOutputConfig lo;
                lo.population = section.name.substr(12);
                for (const auto& e : section.entries) {
                    ini::Entry neuron{e.key, e.key, e.line};
                    lo.keys[static_cast<std::uint32_t>(ini::parse_uint(section, neuron))] =
                        static_cast<std::uint32_t>(ini::parse_uint(section, e));
                }
                cfg.network.live_output.push_back(std::move(lo));
            } else {
                throw ConfigError("line " + std::to_string(section.line) + ": unknown section [" +
                                  section.name + "]");
            }
        }
        if (rate_tick_set)
            cfg.network.tick_rate = cfg.rate.tick_rate;
        cfg.validate();
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            return from_ini_text(buf.str());
        } catch (const ConfigError& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }

private:
    static ConfigError unknown_key(const ini::Section& s, const ini::Entry& e) {
        return ConfigError(ini::where(s, e) + ": unknown key");
    }
};

} // namespace spingw
