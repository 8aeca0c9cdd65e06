#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "spingw/errors.hpp"

namespace spingw {

/// Leaky integrate-and-fire parameters with exponential current synapses.
struct LifParams {
    double tau_m_ms = 3.0;
    double tau_syn_e_ms = 0.5;
    double tau_syn_i_ms = 0.5;
    double tau_refrac_ms = 0.0;
    double v_rest_mv = -65.0;
    double v_reset_mv = -65.0;
    double v_thresh_mv = -50.0;
    double c_m_nf = 1.0;
    double i_offset_na = 0.0;

    void validate() const {
        if (!(tau_m_ms > 0.0))
            throw ConfigError("tau_m must be positive");
        if (!(tau_syn_e_ms > 0.0) || !(tau_syn_i_ms > 0.0))
            throw ConfigError("synaptic time constants must be positive");
        if (tau_refrac_ms < 0.0)
            throw ConfigError("tau_refrac must not be negative");
        if (!(c_m_nf > 0.0))
            throw ConfigError("membrane capacitance must be positive");
        if (v_reset_mv > v_thresh_mv)
            throw ConfigError("v_reset must not exceed v_thresh");
    }
};

/// Per-neuron state. During refractory holds, v equals v_reset.
struct LifState {
    double v_mv = -65.0;
    double i_syn_e_na = 0.0;
    double i_syn_i_na = 0.0;
    std::uint32_t refrac_remaining = 0;
};

namespace detail {

// Decay factor exp(-dt/tau) quantized to Q32.32 so every platform computes
// the identical constant.
inline double fixed_exp_decay(double dt_us, double tau_ms) {
    const double x = std::exp(-dt_us / (tau_ms * 1000.0));
    const double q = static_cast<double>(static_cast<std::int64_t>(std::llround(x * 4294967296.0)));
    return std::ldexp(q, -32);
}

} // namespace detail

/// Step constants for one (params, dt) pairing.
struct LifStepConstants {
    double decay_m = 0.0;
    double decay_syn_e = 0.0;
    double decay_syn_i = 0.0;
    double input_scale = 0.0; // (tau_m / c_m) * (1 - decay_m), mV per nA
    double v_rest_mv = 0.0;
    double v_reset_mv = 0.0;
    double v_thresh_mv = 0.0;
    double i_offset_na = 0.0;
    std::uint32_t refrac_steps = 0;

    static LifStepConstants make(const LifParams& p, std::uint32_t dt_us) {
        if (dt_us == 0)
            throw ConfigError("dt must be positive");
        p.validate();
        LifStepConstants c;
        c.decay_m = detail::fixed_exp_decay(static_cast<double>(dt_us), p.tau_m_ms);
        c.decay_syn_e = detail::fixed_exp_decay(static_cast<double>(dt_us), p.tau_syn_e_ms);
        c.decay_syn_i = detail::fixed_exp_decay(static_cast<double>(dt_us), p.tau_syn_i_ms);
        c.input_scale = (p.tau_m_ms / p.c_m_nf) * (1.0 - c.decay_m);
        c.v_rest_mv = p.v_rest_mv;
        c.v_reset_mv = p.v_reset_mv;
        c.v_thresh_mv = p.v_thresh_mv;
        c.i_offset_na = p.i_offset_na;
        c.refrac_steps =
            static_cast<std::uint32_t>(std::ceil(p.tau_refrac_ms * 1000.0 / dt_us - 1e-9));
        return c;
    }
};

/// Advances one neuron by one step. Stage order: refractory hold or membrane
/// update with the synaptic current held constant over the step, synaptic
/// decay, threshold/reset, then injection of this step's newly delivered
/// weights (they drive the *next* step). The caller samples state.v_mv right
/// after this returns, so the spiking step is recorded at v_reset.
inline bool step_lif(LifState& s, double injected_exc_na, double injected_inh_na,
                     const LifStepConstants& c) {
    bool held = false;
    if (s.refrac_remaining > 0) {
        --s.refrac_remaining;
        s.v_mv = c.v_reset_mv;
        held = true;
    } else {
        const double current = s.i_syn_e_na - s.i_syn_i_na + c.i_offset_na;
        s.v_mv = c.v_rest_mv + (s.v_mv - c.v_rest_mv) * c.decay_m + current * c.input_scale;
    }
    s.i_syn_e_na *= c.decay_syn_e;
    s.i_syn_i_na *= c.decay_syn_i;
    bool spiked = false;
    if (!held && s.v_mv >= c.v_thresh_mv) {
        spiked = true;
        s.v_mv = c.v_reset_mv;
        s.refrac_remaining = c.refrac_steps;
    }
    s.i_syn_e_na += injected_exc_na;
    s.i_syn_i_na += injected_inh_na;
    return spiked;
}

/// Convenience form for single-neuron use; excitatory injection only.
inline bool step_lif(LifState& s, double injected_exc_na, const LifParams& p,
                     std::uint32_t dt_us) {
    return step_lif(s, injected_exc_na, 0.0, LifStepConstants::make(p, dt_us));
}

} // namespace spingw
