#pragma once

#include <cmath>
#include <stdexcept>

#include "gsr/utility.hpp"

namespace gsr {

// High-probability interval on a task's long-run value U, built from the
// checkpoint utility interval plus optimization-gap headroom.
struct ValueEnvelope {
    double lower = 0.0;
    double upper = 1.0;

    bool has_checkpoint = false;
    int checkpoint_step = 0;                                 // local step nu
    UtilityInterval checkpoint_interval = UtilityInterval::initial();
    double checkpoint_incumbent = 0.0;

    double width() const { return upper - lower; }
};

struct EnvelopeConfig {
    enum class CheckpointSchedule { dense, geometric };
    double lipschitz_bound = 1.0; // L-bar
    double c_u = 1.0;
    CheckpointSchedule schedule = CheckpointSchedule::dense;
    bool intersect_at_checkpoint = false; // default replace, matching the proofs

    double envelope_constant() const {
        // C_v: c_u + 1 dense; sqrt(2)(c_u + 1) + 1 geometric.
        if (schedule == CheckpointSchedule::dense) return c_u + 1.0;
        return std::sqrt(2.0) * (c_u + 1.0) + 1.0;
    }
    bool is_checkpoint_step(int s) const {
        if (schedule == CheckpointSchedule::dense) return true;
        // geometric schedule {1, 2, 4, ...}
        return s >= 1 && (s & (s - 1)) == 0;
    }
    void check() const {
        if (!(lipschitz_bound > 0.0)) throw std::invalid_argument("EnvelopeConfig: L-bar must be positive");
        if (!(c_u > 0.0)) throw std::invalid_argument("EnvelopeConfig: c_u must be positive");
    }
};

// Between-checkpoint Lipschitz propagation of the checkpoint utility interval
// to the current incumbent: the upper bound grows by L * (incumbent gain), the
// lower bound never decreases.
UtilityInterval propagate(const ValueEnvelope& env, double current_incumbent, double lipschitz_bound);

// [U_lower, U_upper] = [u_lower, clip(u_upper + L * eps_f, 0, 1)].
ValueEnvelope update_envelope(const UtilityInterval& interval_at_s, double opt_gap_s,
                              double lipschitz_bound);

// True iff width <= C_v * L * eps^f_s.
bool width_bound_check(const ValueEnvelope& env, double opt_gap_s, const EnvelopeConfig& config);

} // namespace gsr
