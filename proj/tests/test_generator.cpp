#include <doctest.h>

#include <cmath>

#include "gsr/experiments.hpp"
#include "gsr/generator.hpp"

using namespace gsr;

namespace {

ParamSchema eight_field_schema() {
    ParamSchema schema;
    for (int i = 0; i < 8; ++i)
        schema.fields.push_back({"w" + std::to_string(i), FieldDef::Kind::scalar, 1, 0.0, 1.0, true});
    schema.domain_ref = Box::cube(2, 0.0, 1.0);
    schema.domain_editable = false;
    return schema;
}

TaskSpec eight_field_anchor() {
    TaskSpec spec;
    spec.task_id = "anchor";
    spec.domain = Box::cube(2, 0.0, 1.0);
    for (int i = 0; i < 8; ++i) spec.params["w" + std::to_string(i)] = {0.5};
    return spec;
}

} // namespace

TEST_CASE("validate reports violations without throwing") {
    ParamSchema schema = eight_field_schema();
    schema.min_span_frac = 0.1;
    TaskSpec ok = eight_field_anchor();
    CHECK(validate(ok, schema).empty());

    TaskSpec degenerate = ok;
    degenerate.domain.lower[1] = degenerate.domain.upper[1];
    const auto violations = validate(degenerate, schema);
    REQUIRE(!violations.empty());
    CHECK(violations.front().find("dim 1") != std::string::npos);

    ParamSchema simplex_schema;
    simplex_schema.fields = {{"w", FieldDef::Kind::simplex, 3, 0.0, 1.0, true}};
    simplex_schema.domain_ref = Box::cube(1, 0.0, 1.0);
    TaskSpec simplex_bad;
    simplex_bad.task_id = "s";
    simplex_bad.domain = Box::cube(1, 0.0, 1.0);
    simplex_bad.params["w"] = {0.6, 0.3, 0.3};
    CHECK(!validate(simplex_bad, simplex_schema).empty());
}

TEST_CASE("dedup removes near-duplicates against registry and batch") {
    ParamSchema schema = eight_field_schema();
    TaskRegistry registry(&schema);
    registry.register_task(eight_field_anchor());

    TaskSpec clone = eight_field_anchor();
    clone.task_id = "clone";
    TaskSpec fresh = eight_field_anchor();
    fresh.task_id = "fresh";
    fresh.params["w0"] = {0.8};

    const auto kept = dedup({clone, fresh, fresh}, registry, 1e-3);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].task_id == "fresh");

    // a candidate a hair beyond the tolerance survives
    TaskSpec near = eight_field_anchor();
    near.task_id = "near";
    near.params["w0"] = {0.5 + 2e-3};
    CHECK(dedup({near}, registry, 1e-3).size() == 1);
}

TEST_CASE("mutation children edit exactly the scheduled number of fields") {
    ParamSchema schema = eight_field_schema();
    TaskRegistry registry(&schema);
    registry.register_task(eight_field_anchor());
    MutationSchedule sched;

    Rng rng(1);
    // rho_0 = 0.5 over 8 fields -> 4 edits; m = 1 -> 2 edits; m = 2 -> 1 edit
    for (const auto& [m, expected] : std::vector<std::pair<int, int>>{{0, 4}, {1, 2}, {2, 1}}) {
        const auto result =
            gen_mutations(eight_field_anchor(), nullptr, m, 8, sched, schema, registry, rng);
        CHECK(!result.accepted.empty());
        for (const auto& child : result.accepted) {
            int edited = 0;
            for (int i = 0; i < 8; ++i)
                if (std::abs(child.params.at("w" + std::to_string(i))[0] - 0.5) > 1e-12) ++edited;
            CHECK(edited == expected);
            CHECK(mutation_ratio(child, eight_field_anchor(), schema) ==
                  doctest::Approx(expected / 8.0));
            CHECK(child.parent_id.has_value());
            CHECK(*child.parent_id == "anchor");
            CHECK(child.level_m == m);
            CHECK(validate(child, schema).empty());
        }
    }
}

TEST_CASE("vanishing mutation steps collapse into duplicates and an empty batch") {
    ParamSchema schema = eight_field_schema();
    TaskRegistry registry(&schema);
    registry.register_task(eight_field_anchor());
    MutationSchedule sched;
    Rng rng(3);
    // huge m: steps shrink far below the dedup tolerance
    const auto result = gen_mutations(eight_field_anchor(), nullptr, 40, 5, sched, schema, registry, rng);
    CHECK(result.accepted.empty());
    CHECK(result.raw_proposals > 0);
}

TEST_CASE("coarse levels spread children farther than fine levels") {
    ParamSchema schema = eight_field_schema();
    MutationSchedule sched;
    // paired comparison over 10 seeds: mean distance at rho = 0.5 exceeds rho = 0.125
    int wins = 0;
    for (int seed = 0; seed < 10; ++seed) {
        double mean_coarse = 0.0, mean_fine = 0.0;
        for (int rep = 0; rep < 2; ++rep) {
            TaskRegistry registry(&schema);
            registry.register_task(eight_field_anchor());
            Rng rng(900 + seed * 2 + rep);
            const auto coarse =
                gen_mutations(eight_field_anchor(), nullptr, 0, 20, sched, schema, registry, rng);
            TaskRegistry registry2(&schema);
            registry2.register_task(eight_field_anchor());
            const auto fine =
                gen_mutations(eight_field_anchor(), nullptr, 2, 20, sched, schema, registry2, rng);
            for (const auto& c : coarse.accepted)
                mean_coarse += task_distance(c, eight_field_anchor(), schema) /
                               static_cast<double>(coarse.accepted.size());
            for (const auto& c : fine.accepted)
                mean_fine += task_distance(c, eight_field_anchor(), schema) /
                             static_cast<double>(fine.accepted.size());
        }
        if (mean_coarse > mean_fine) ++wins;
    }
    CHECK(wins == 10);
}

TEST_CASE("simplex mutations stay on the simplex") {
    ParamSchema schema;
    schema.fields = {{"w", FieldDef::Kind::simplex, 4, 0.0, 1.0, true}};
    schema.domain_ref = Box::cube(1, 0.0, 1.0);
    TaskSpec anchor;
    anchor.task_id = "a";
    anchor.domain = Box::cube(1, 0.0, 1.0);
    anchor.params["w"] = {0.25, 0.25, 0.25, 0.25};
    TaskRegistry registry(&schema);
    registry.register_task(anchor);

    Rng rng(6);
    const auto result = gen_mutations(anchor, nullptr, 0, 20, MutationSchedule{}, schema, registry, rng);
    CHECK(!result.accepted.empty());
    for (const auto& child : result.accepted) {
        double sum = 0.0;
        for (double v : child.params.at("w")) {
            CHECK(v >= -1e-12);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("domain shrink edits recenter around the incumbent design") {
    ParamSchema schema;
    schema.fields = {{"w", FieldDef::Kind::scalar, 1, 0.0, 1.0, true}};
    schema.domain_ref = Box::cube(2, 0.0, 1.0);
    schema.domain_editable = true;
    schema.min_span_frac = 0.15;
    TaskSpec anchor;
    anchor.task_id = "a";
    anchor.domain = Box::cube(2, 0.0, 1.0);
    anchor.params["w"] = {0.5};
    TaskRegistry registry(&schema);
    registry.register_task(anchor);

    Eigen::VectorXd incumbent(2);
    incumbent << 0.3, 0.7;
    Rng rng(11);
    const auto result = gen_mutations(anchor, &incumbent, 0, 30, MutationSchedule{}, schema, registry, rng);
    CHECK(!result.accepted.empty());
    for (const auto& child : result.accepted) {
        for (int d = 0; d < 2; ++d) {
            CHECK(child.domain.width(d) >= 0.15 - 1e-9);
            CHECK(child.domain.lower[d] >= -1e-9);
            CHECK(child.domain.upper[d] <= 1.0 + 1e-9);
        }
        CHECK(validate(child, schema).empty());
    }
}

TEST_CASE("domain doubling formula, recentering, and clipping") {
    ExpansionConfig cfg;
    TaskSpec anchor;
    anchor.task_id = "box1";
    anchor.domain = Box::cube(1, 0.0, 1.0);

    Eigen::VectorXd a(1);
    a << 0.5;
    const auto centered = gen_domain_double(anchor, &a, 0, cfg, "box2");
    CHECK(centered.domain.lower[0] == doctest::Approx(-0.5));
    CHECK(centered.domain.upper[0] == doctest::Approx(1.5));
    CHECK(centered.domain.width(0) == doctest::Approx(2.0)); // width exactly rho * old

    a << 0.9;
    const auto off_center = gen_domain_double(anchor, &a, 0, cfg, "box3");
    CHECK(off_center.domain.lower[0] == doctest::Approx(-0.1));
    CHECK(off_center.domain.upper[0] == doctest::Approx(1.9));

    // unevaluated anchor: expand around the box center
    const auto from_center = gen_domain_double(anchor, nullptr, 0, cfg, "box4");
    CHECK(from_center.domain.lower[0] == doctest::Approx(-0.5));
    CHECK(from_center.domain.upper[0] == doctest::Approx(1.5));

    // clipping to the true domain caps the expansion
    ExpansionConfig clipped = cfg;
    clipped.has_clip_box = true;
    clipped.clip_box = Box::cube(1, -4.5, 4.5);
    TaskSpec wide;
    wide.task_id = "w";
    wide.domain = Box::cube(1, -4.0, 4.0);
    Eigen::VectorXd zero(1);
    zero << 0.0;
    const auto capped = gen_domain_double(wide, &zero, 0, clipped, "box5");
    CHECK(capped.domain.lower[0] == doctest::Approx(-4.5));
    CHECK(capped.domain.upper[0] == doctest::Approx(4.5));

    // expansion cap
    CHECK_THROWS_AS(gen_domain_double(anchor, &a, cfg.max_expansions, cfg, "boxN"),
                    std::runtime_error);
}

TEST_CASE("interval-arithmetic trace: three doublings cover the beale optimizer") {
    // greedy trace with the anchor design clamped toward the optimum (3, 0.5)
    ExpansionConfig cfg;
    cfg.has_clip_box = true;
    cfg.clip_box = Box::cube(2, -4.5, 4.5);
    Eigen::VectorXd opt(2);
    opt << 3.0, 0.5;

    TaskSpec box;
    box.task_id = "b0";
    box.domain = Box::cube(2, -1.0, 0.0);
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd a = box.domain.clamp(opt);
        box = gen_domain_double(box, &a, k, cfg, "b" + std::to_string(k + 1));
    }
    CHECK(box.domain.contains(opt, 1e-9));
}

TEST_CASE("delta-plus estimate matches an exact-utility oracle on the planted family") {
    using bench::PlantedFamily;
    const PlantedFamily family;
    const ParamSchema& schema = family.schema();
    const TaskSpec anchor = family.seed_task();
    MutationSchedule sched;
    const int m = 1;
    // tolerance planted so level-1 mutations land near the batch best with
    // probability around 0.3
    const double tol = 0.04;

    // oracle: same generator stream, children scored by their exact task value
    const auto exact_probe = [&](const TaskSpec& spec, std::uint64_t) {
        return family.task_value(spec);
    };
    const auto oracle_res =
        estimate_delta_plus(anchor, m, 40, sched, schema, tol, exact_probe, 10, 424242);

    // estimate: the same protocol scored by short BO probes
    const auto est_res =
        estimate_delta_plus(anchor, m, 40, sched, schema, tol,
                            [&](const TaskSpec& spec, std::uint64_t seed) {
                                return family.probe_utility(spec, 10, seed);
                            },
                            10, 424242);

    CHECK(oracle_res.children >= 350);
    CHECK(oracle_res.delta_plus > 0.15);
    CHECK(oracle_res.delta_plus < 0.6);
    CHECK(est_res.delta_plus >= 0.0);
    CHECK(est_res.delta_plus <= 1.0);
    CHECK(std::abs(est_res.delta_plus - oracle_res.delta_plus) <= 0.1);

    // degenerate case: a tolerance covering the whole range ties everyone
    const auto degenerate =
        estimate_delta_plus(anchor, m, 10, sched, schema, 1.0, exact_probe, 2, 5);
    CHECK(degenerate.delta_plus == doctest::Approx(1.0));
}
