#include <doctest.h>

#include "gsr/envelope.hpp"
#include "gsr/rng.hpp"

using namespace gsr;

namespace {

ValueEnvelope with_checkpoint(double lo, double hi, double incumbent, int step = 1) {
    ValueEnvelope env;
    env.lower = lo;
    env.upper = hi;
    env.has_checkpoint = true;
    env.checkpoint_step = step;
    env.checkpoint_interval = UtilityInterval::of(lo, hi, UtilityInterval::Source::direct);
    env.checkpoint_incumbent = incumbent;
    return env;
}

} // namespace

TEST_CASE("propagation between checkpoints") {
    const auto env = with_checkpoint(0.4, 0.5, 1.0);

    // unchanged incumbent leaves the interval unchanged
    const auto same = propagate(env, 1.0, 1.0);
    CHECK(same.lower == 0.4);
    CHECK(same.upper == 0.5);

    // incumbent gain 0.7 with L = 1 pushes the upper to the clip
    const auto up = propagate(env, 1.7, 1.0);
    CHECK(up.lower == 0.4);
    CHECK(up.upper == 1.0);

    // the lower bound never moves without a new checkpoint
    double incumbent = 1.0;
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        incumbent += rng.uniform(0.0, 0.01);
        CHECK(propagate(env, incumbent, 0.7).lower == 0.4);
    }
}

TEST_CASE("envelope update applies the gap headroom") {
    const auto interval = UtilityInterval::of(0.4, 0.5, UtilityInterval::Source::direct);
    const auto env = update_envelope(interval, 0.2, 1.0);
    CHECK(env.lower == doctest::Approx(0.4));
    CHECK(env.upper == doctest::Approx(0.7));
    CHECK(env.width() == doctest::Approx(0.3));

    // pre-checkpoint initialization
    ValueEnvelope fresh;
    CHECK(fresh.lower == 0.0);
    CHECK(fresh.upper == 1.0);
    CHECK(!fresh.has_checkpoint);

    // clip at one
    const auto clipped = update_envelope(UtilityInterval::of(0.7, 0.9, UtilityInterval::Source::direct),
                                         0.5, 1.0);
    CHECK(clipped.upper == 1.0);
}

TEST_CASE("width bound constants") {
    EnvelopeConfig dense;
    dense.c_u = 1.0;
    dense.schedule = EnvelopeConfig::CheckpointSchedule::dense;
    CHECK(dense.envelope_constant() == doctest::Approx(2.0));

    EnvelopeConfig geometric = dense;
    geometric.schedule = EnvelopeConfig::CheckpointSchedule::geometric;
    CHECK(geometric.envelope_constant() == doctest::Approx(3.8284271247461903).epsilon(1e-9));

    auto env = with_checkpoint(0.3, 0.6, 0.5);
    // dense, c_u = 1: width 0.3 vs 2 * L * eps = 0.4 -> true
    CHECK(width_bound_check(env, 0.2, dense));
    // and false once the budget shrinks
    CHECK(!width_bound_check(env, 0.1, dense));
}

TEST_CASE("geometric checkpoint schedule") {
    EnvelopeConfig geo;
    geo.schedule = EnvelopeConfig::CheckpointSchedule::geometric;
    for (int s : {1, 2, 4, 8, 16, 1024}) CHECK(geo.is_checkpoint_step(s));
    for (int s : {3, 5, 6, 7, 9, 100}) CHECK(!geo.is_checkpoint_step(s));
    EnvelopeConfig dense;
    for (int s = 1; s <= 20; ++s) CHECK(dense.is_checkpoint_step(s));
}
