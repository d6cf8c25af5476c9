#include "gsr/envelope.hpp"

#include "gsr/math.hpp"

namespace gsr {

UtilityInterval propagate(const ValueEnvelope& env, double current_incumbent, double lipschitz_bound) {
    if (!env.has_checkpoint) return UtilityInterval::initial();
    const double gain = current_incumbent - env.checkpoint_incumbent;
    if (gain < -1e-12)
        throw std::invalid_argument("propagate: incumbent moved below its checkpoint value");
    UtilityInterval out;
    out.lower = env.checkpoint_interval.lower;
    out.upper = std::min(1.0, env.checkpoint_interval.upper + lipschitz_bound * std::max(0.0, gain));
    out.source = env.checkpoint_interval.source;
    out.check();
    return out;
}

ValueEnvelope update_envelope(const UtilityInterval& interval_at_s, double opt_gap_s,
                              double lipschitz_bound) {
    interval_at_s.check();
    ValueEnvelope env;
    env.lower = clip(interval_at_s.lower, 0.0, 1.0);
    env.upper = clip(interval_at_s.upper + lipschitz_bound * opt_gap_s, 0.0, 1.0);
    if (env.upper < env.lower) env.upper = env.lower;
    return env;
}

bool width_bound_check(const ValueEnvelope& env, double opt_gap_s, const EnvelopeConfig& config) {
    config.check();
    if (!env.has_checkpoint) throw std::invalid_argument("width_bound_check: envelope has no checkpoint");
    return env.width() <= config.envelope_constant() * config.lipschitz_bound * opt_gap_s + 1e-12;
}

} // namespace gsr
