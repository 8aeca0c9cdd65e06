#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spingw/errors.hpp"
#include "spingw/lif.hpp"
#include "spingw/packet.hpp"
#include "spingw/rate.hpp"

namespace spingw {

struct PopulationConfig {
    enum class Model { SpikeSource, LifCurrExp };

    std::string name;
    std::uint32_t size = 1;
    Model model = Model::LifCurrExp;
    LifParams params;
};

struct ProjectionConfig {
    enum class Connector { OneToOne, AllToAll };

    std::string source;
    std::string target;
    double weight_na = 0.0; // negative drives the inhibitory synapse
    double delay_ms = 0.0;  // clamped to at least one step
    Connector connector = Connector::OneToOne;
};

struct LiveOutputConfig {
    std::string population;
    std::map<std::uint32_t, std::uint32_t> keys; // neuron -> routing key
};

struct NetworkConfig {
    std::vector<PopulationConfig> populations;
    std::vector<ProjectionConfig> projections;
    std::vector<LiveOutputConfig> live_output;
    std::map<std::uint32_t, std::pair<std::string, std::uint32_t>> input_keys; // key -> (pop, neuron)
    std::uint32_t dt_us = 1000;
    std::uint32_t time_scale_factor = 1;
    std::uint64_t tick_rate = 1'000'000; // ticks per second of the virtual clock

    std::optional<std::size_t> population_index(const std::string& name) const {
        for (std::size_t i = 0; i < populations.size(); ++i)
            if (populations[i].name == name)
                return i;
        return std::nullopt;
    }

    std::uint64_t dt_ticks() const { return std::uint64_t{dt_us} * tick_rate / 1'000'000; }

    void validate() const {
        if (dt_us == 0)
            throw ConfigError("dt_us must be positive");
        if (std::uint64_t{dt_us} * tick_rate % 1'000'000 != 0 || dt_ticks() == 0)
            throw ConfigError("dt_us must be a whole number of virtual ticks");
        if (time_scale_factor == 0)
            throw ConfigError("time_scale_factor must be at least 1");
        if (populations.empty())
            throw ConfigError("at least one population is required");
        for (std::size_t i = 0; i < populations.size(); ++i) {
            const auto& p = populations[i];
            if (p.name.empty())
                throw ConfigError("population name must not be empty");
            if (p.size == 0)
                throw ConfigError("population '" + p.name + "' must have at least one neuron");
            for (std::size_t j = 0; j < i; ++j)
                if (populations[j].name == p.name)
                    throw ConfigError("duplicate population name '" + p.name + "'");
            if (p.model == PopulationConfig::Model::LifCurrExp)
                p.params.validate();
        }
        for (const auto& proj : projections) {
            auto src = population_index(proj.source);
            auto dst = population_index(proj.target);
            if (!src)
                throw ConfigError("projection source '" + proj.source + "' does not exist");
            if (!dst)
                throw ConfigError("projection target '" + proj.target + "' does not exist");
            if (populations[*dst].model != PopulationConfig::Model::LifCurrExp)
                throw ConfigError("projection target '" + proj.target + "' is not a neuron model");
            if (proj.connector == ProjectionConfig::Connector::OneToOne &&
                populations[*src].size != populations[*dst].size)
                throw ConfigError("one-to-one projection '" + proj.source + "' -> '" +
                                  proj.target + "' needs equal population sizes");
            if (proj.delay_ms < 0.0)
                throw ConfigError("projection delay must not be negative");
        }
        std::map<std::uint32_t, std::string> seen_keys;
        for (const auto& lo : live_output) {
            auto pop = population_index(lo.population);
            if (!pop)
                throw ConfigError("live_output population '" + lo.population + "' does not exist");
            for (const auto& [neuron, key] : lo.keys) {
                if (neuron >= populations[*pop].size)
                    throw ConfigError("live_output neuron " + std::to_string(neuron) +
                                      " outside population '" + lo.population + "'");
                auto [it, fresh] = seen_keys.emplace(key, lo.population);
                if (!fresh)
                    throw ConfigError("live_output key " + std::to_string(key) +
                                      " is not unique");
            }
        }
        for (const auto& [key, target] : input_keys) {
            auto pop = population_index(target.first);
            if (!pop)
                throw ConfigError("input key " + std::to_string(key) + " targets unknown "
                                  "population '" + target.first + "'");
            if (populations[*pop].model != PopulationConfig::Model::SpikeSource)
                throw ConfigError("input key " + std::to_string(key) +
                                  " must target a spike source population");
            if (target.second >= populations[*pop].size)
                throw ConfigError("input key " + std::to_string(key) + " targets neuron " +
                                  std::to_string(target.second) + " outside population '" +
                                  target.first + "'");
        }
    }
};

/// Everything a run records: spike raster, per-step membrane samples and the
/// live-output packet log.
struct Recordings {
    struct Spike {
        std::uint64_t tick;
        std::uint32_t population;
        std::uint32_t neuron;
    };
    struct Sample {
        std::uint64_t tick;
        std::uint32_t neuron; // global index across LIF populations
        double v_mv;
    };
    struct Output {
        std::uint64_t tick;
        std::uint32_t key;
    };

    std::vector<Spike> raster;
    std::vector<Sample> membrane;
    std::vector<Output> outputs;
};

/// Discrete-time board model: spike-source relays, LIF populations, static
/// projections and live-output packet emission. Advanced one step at a time
/// by a single driver; deliveries land at step boundaries, never inside the
/// step that is being computed.
class Network {
public:
    explicit Network(NetworkConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        dt_ticks_ = cfg_.dt_ticks();
        std::uint32_t global = 0;
        states_.resize(cfg_.populations.size());
        constants_.resize(cfg_.populations.size());
        global_base_.resize(cfg_.populations.size(), 0);
        for (std::size_t i = 0; i < cfg_.populations.size(); ++i) {
            const auto& p = cfg_.populations[i];
            global_base_[i] = global;
            if (p.model == PopulationConfig::Model::LifCurrExp) {
                constants_[i] = LifStepConstants::make(p.params, cfg_.dt_us);
                states_[i].assign(p.size, LifState{p.params.v_rest_mv, 0.0, 0.0, 0});
                global += p.size;
            }
        }
        for (const auto& proj : cfg_.projections)
            resolved_projections_.push_back(
                {*cfg_.population_index(proj.source), *cfg_.population_index(proj.target),
                 proj.weight_na, delay_steps(proj.delay_ms), proj.connector});
        for (const auto& lo : cfg_.live_output) {
            const std::size_t pop = *cfg_.population_index(lo.population);
            for (const auto& [neuron, key] : lo.keys)
                live_keys_[{pop, neuron}] = key;
        }
        for (const auto& [key, target] : cfg_.input_keys)
            input_map_[key] = {*cfg_.population_index(target.first), target.second};
    }

    const NetworkConfig& config() const { return cfg_; }
    std::uint64_t dt_ticks() const { return dt_ticks_; }
    std::uint64_t steps_run() const { return steps_run_; }
    std::uint64_t unknown_key_count() const { return unknown_keys_; }
    const Recordings& recordings() const { return rec_; }

    /// Injects a parsed packet. Unknown keys are counted and dropped, the
    /// way a router treats a miss.
    void deliver_packet(const SpinnPacket& packet, std::uint64_t at_tick) {
        deliver_key(packet.key, at_tick);
    }

    void deliver_key(std::uint32_t key, std::uint64_t at_tick) {
        auto it = input_map_.find(key);
        if (it == input_map_.end()) {
            ++unknown_keys_;
            return;
        }
        const auto [pop, neuron] = it->second;
        rec_.raster.push_back({at_tick, static_cast<std::uint32_t>(pop), neuron});
        propagate_spike(pop, neuron, at_tick / dt_ticks_);
    }

    /// Runs the step that closes window [steps_run * dt, (steps_run+1) * dt).
    void step() {
        const std::uint64_t s = steps_run_;
        const std::uint64_t boundary = (s + 1) * dt_ticks_;
        struct FiredNeuron {
            std::size_t pop;
            std::uint32_t neuron;
        };
        std::vector<FiredNeuron> fired;
        for (std::size_t pop = 0; pop < cfg_.populations.size(); ++pop) {
            if (cfg_.populations[pop].model != PopulationConfig::Model::LifCurrExp)
                continue;
            auto& states = states_[pop];
            for (std::uint32_t n = 0; n < static_cast<std::uint32_t>(states.size()); ++n) {
                const bool spiked = step_lif(states[n], 0.0, 0.0, constants_[pop]);
                rec_.membrane.push_back({boundary, global_base_[pop] + n, states[n].v_mv});
                if (spiked) {
                    rec_.raster.push_back({boundary, static_cast<std::uint32_t>(pop), n});
                    fired.push_back({pop, n});
                    auto key = live_keys_.find({pop, n});
                    if (key != live_keys_.end()) {
                        rec_.outputs.push_back({boundary, key->second});
                        pending_out_.push_back({boundary, key->second});
                    }
                }
            }
        }
        for (const auto& f : fired)
            propagate_spike(f.pop, f.neuron, s);
        // stage 6: weights scheduled for this step land now and drive the next
        auto due = pending_inj_.find(s);
        if (due != pending_inj_.end()) {
            for (const auto& inj : due->second) {
                auto& st = states_[inj.pop][inj.neuron];
                st.i_syn_e_na += inj.exc_na;
                st.i_syn_i_na += inj.inh_na;
            }
            pending_inj_.erase(due);
        }
        ++steps_run_;
    }

    /// Live-output packets with tick strictly after `since`, in spike order.
    std::vector<SpinnPacket> collect_live_output(std::uint64_t since) const {
        std::vector<SpinnPacket> out;
        for (const auto& o : rec_.outputs)
            if (o.tick > since)
                out.push_back(build_mc_packet(o.key));
        return out;
    }

    struct OutputEvent {
        std::uint64_t tick;
        std::uint32_t key;
    };

    /// Incremental drain for a closed-loop driver.
    std::vector<OutputEvent> drain_output() {
        std::vector<OutputEvent> out;
        out.swap(pending_out_);
        return out;
    }

    std::uint32_t delay_steps(double delay_ms) const {
        const double steps = delay_ms * 1000.0 / cfg_.dt_us;
        auto n = static_cast<std::uint32_t>(std::ceil(steps - 1e-9));
        return n < 1 ? 1u : n;
    }

private:
    struct ResolvedProjection {
        std::size_t source;
        std::size_t target;
        double weight_na;
        std::uint32_t delay_steps;
        ProjectionConfig::Connector connector;
    };
    struct PendingInjection {
        std::size_t pop;
        std::uint32_t neuron;
        double exc_na;
        double inh_na;
    };

    // A spike of (pop, neuron) within window `window` feeds its targets'
    // stage 6 at window + delay - 1, driving the membrane one step later.
    void propagate_spike(std::size_t pop, std::uint32_t neuron, std::uint64_t window) {
        for (const auto& proj : resolved_projections_) {
            if (proj.source != pop)
                continue;
            const std::uint64_t due = window + proj.delay_steps - 1;
            const double exc = proj.weight_na >= 0.0 ? proj.weight_na : 0.0;
            const double inh = proj.weight_na < 0.0 ? -proj.weight_na : 0.0;
            auto& slot = pending_inj_[due];
            if (proj.connector == ProjectionConfig::Connector::OneToOne) {
                slot.push_back({proj.target, neuron, exc, inh});
            } else {
                const std::uint32_t size = cfg_.populations[proj.target].size;
                for (std::uint32_t n = 0; n < size; ++n)
                    slot.push_back({proj.target, n, exc, inh});
            }
        }
    }

    NetworkConfig cfg_;
    std::uint64_t dt_ticks_ = 1000;
    std::uint64_t steps_run_ = 0;
    std::uint64_t unknown_keys_ = 0;
    std::vector<std::vector<LifState>> states_;
    std::vector<LifStepConstants> constants_;
    std::vector<std::uint32_t> global_base_;
    std::vector<ResolvedProjection> resolved_projections_;
    std::map<std::pair<std::size_t, std::uint32_t>, std::uint32_t> live_keys_;
    std::map<std::uint32_t, std::pair<std::size_t, std::uint32_t>> input_map_;
    std::map<std::uint64_t, std::vector<PendingInjection>> pending_inj_;
    std::vector<OutputEvent> pending_out_;
    Recordings rec_;
};

/// Drives a network with key-addressed stimulus trains for a whole run.
/// `duration_ms` must be a multiple of dt.
inline Recordings run_network(Network& net, const std::map<std::uint32_t, SpikeTrain>& stimulus,
                              std::uint64_t duration_ms) {
    const std::uint64_t dt = net.dt_ticks();
    const std::uint64_t duration_ticks = duration_ms * net.config().tick_rate / 1000;
    if (duration_ticks % dt != 0)
        throw ConfigError("duration must be a whole number of steps");
    struct Event {
        std::uint64_t tick;
        std::uint32_t key;
    };
    std::vector<Event> events;
    for (const auto& [key, train] : stimulus)
        for (auto t : train.ticks) {
            if (t >= duration_ticks)
                throw ConfigError("stimulus spike at tick " + std::to_string(t) +
                                  " is outside the run");
            events.push_back({t, key});
        }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.tick < b.tick; });
    std::size_t next = 0;
    const std::uint64_t steps = duration_ticks / dt;
    for (std::uint64_t s = 0; s < steps; ++s) {
        const std::uint64_t close = (s + 1) * dt;
        while (next < events.size() && events[next].tick < close) {
            net.deliver_key(events[next].key, events[next].tick);
            ++next;
        }
        net.step();
    }
    return net.recordings();
}

} // namespace spingw
