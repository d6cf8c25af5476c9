#include <doctest.h>

#include <algorithm>

#include "gsr/rng.hpp"
#include "gsr/task.hpp"

using namespace gsr;

namespace {

ParamSchema two_field_schema() {
    ParamSchema schema;
    schema.fields = {
        {"weight", FieldDef::Kind::scalar, 1, 0.0, 1.0, true},
        {"target", FieldDef::Kind::scalar, 1, 0.0, 1.0, true},
    };
    schema.domain_ref = Box::cube(2, 0.0, 1.0);
    schema.domain_editable = false;
    return schema;
}

TaskSpec make_spec(const std::string& id, double w, double t) {
    TaskSpec spec;
    spec.task_id = id;
    spec.domain = Box::cube(2, 0.0, 1.0);
    spec.params["weight"] = {w};
    spec.params["target"] = {t};
    return spec;
}

} // namespace

TEST_CASE("registration assigns creation indices and initial state") {
    ParamSchema schema = two_field_schema();
    TaskRegistry registry(&schema);
    CHECK(registry.register_task(make_spec("a", 0.5, 0.5)) == 1);
    const TaskState& st = registry.state("a");
    CHECK(st.envelope.lower == 0.0);
    CHECK(st.envelope.upper == 1.0);
    CHECK(st.local_counter == 0);
    CHECK(st.dataset.size() == 0);

    CHECK_THROWS_AS(registry.register_task(make_spec("a", 0.2, 0.2)), std::invalid_argument);

    for (int i = 2; i <= 5; ++i)
        CHECK(registry.register_task(make_spec("t" + std::to_string(i), 0.1 * i, 0.5)) == i);
    CHECK(registry.size() == 5);
    CHECK(registry.task_index("t5") == 5);
}

TEST_CASE("invalid specs are rejected") {
    ParamSchema schema = two_field_schema();
    TaskRegistry registry(&schema);
    TaskSpec bad = make_spec("bad", 0.5, 0.5);
    bad.domain.upper[1] = bad.domain.lower[1]; // degenerate
    CHECK_THROWS_AS(registry.register_task(bad), std::invalid_argument);

    TaskSpec missing = make_spec("m", 0.5, 0.5);
    missing.params.erase("target");
    CHECK_THROWS_AS(registry.register_task(missing), std::invalid_argument);

    TaskSpec orphan = make_spec("o", 0.5, 0.5);
    orphan.parent_id = "nobody";
    CHECK_THROWS_AS(registry.register_task(orphan), std::invalid_argument);
}

TEST_CASE("record_eval maintains the running max and counter") {
    ParamSchema schema = two_field_schema();
    TaskRegistry registry(&schema);
    registry.register_task(make_spec("a", 0.5, 0.5));
    TaskState& st = registry.state("a");

    Eigen::VectorXd x(2);
    x << 0.5, 0.5;
    record_eval(st, x, 0.2);
    CHECK(st.incumbent == 0.2); // first observation sets the incumbent
    record_eval(st, x, 0.5);
    record_eval(st, x, 0.4);
    CHECK(st.incumbent == 0.5);
    CHECK(st.local_counter == 3);

    Eigen::VectorXd outside(2);
    outside << 1.5, 0.5;
    CHECK_THROWS_AS(record_eval(st, outside, 1.0), std::invalid_argument);

    // replay oracle: incumbent equals a from-scratch max over a random stream
    Rng rng(77);
    double replay_max = st.incumbent;
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd xi(2);
        xi << rng.uniform(), rng.uniform();
        const double y = rng.uniform(-3.0, 3.0);
        const double before = st.incumbent;
        record_eval(st, xi, y);
        CHECK(st.incumbent >= before); // nondecreasing
        replay_max = std::max(replay_max, y);
        CHECK(st.incumbent == replay_max);
    }
}

TEST_CASE("mutation ratio counts differing editable fields") {
    ParamSchema schema = two_field_schema();
    const TaskSpec parent = make_spec("p", 0.5, 0.5);
    CHECK(mutation_ratio(parent, parent, schema) == 0.0);

    TaskSpec child = parent;
    child.params["weight"] = {0.7};
    CHECK(mutation_ratio(child, parent, schema) == doctest::Approx(0.5));

    // 8 editable fields, 2 changed -> 0.25
    ParamSchema schema8;
    TaskSpec p8, c8;
    p8.task_id = "p8";
    p8.domain = Box::cube(1, 0.0, 1.0);
    for (int i = 0; i < 8; ++i) {
        schema8.fields.push_back({"f" + std::to_string(i), FieldDef::Kind::scalar, 1, 0.0, 1.0, true});
        p8.params["f" + std::to_string(i)] = {0.5};
    }
    schema8.domain_ref = Box::cube(1, 0.0, 1.0);
    c8 = p8;
    c8.params["f1"] = {0.6};
    c8.params["f4"] = {0.4};
    CHECK(mutation_ratio(c8, p8, schema8) == doctest::Approx(0.25));

    // domain-editable schemas count one field per dimension-bound pair
    ParamSchema with_domain = two_field_schema();
    with_domain.domain_editable = true; // 2 + 2 editable fields
    TaskSpec moved = parent;
    moved.domain.lower[0] = 0.1;
    CHECK(mutation_ratio(moved, parent, with_domain) == doctest::Approx(0.25));
}

TEST_CASE("task distance is a rescaled euclidean norm") {
    ParamSchema schema;
    schema.fields = {{"v", FieldDef::Kind::scalar, 1, 0.0, 1.0, true}};
    schema.domain_ref = Box::cube(1, 0.0, 1.0);
    TaskSpec a, b;
    a.task_id = "a";
    b.task_id = "b";
    a.domain = b.domain = Box::cube(1, 0.0, 1.0);
    a.params["v"] = {0.4};
    b.params["v"] = {0.7};
    CHECK(task_distance(a, b, schema) == doctest::Approx(0.3));
    CHECK(task_distance(a, a, schema) == 0.0);

    Rng rng(4);
    ParamSchema schema2 = two_field_schema();
    for (int i = 0; i < 50; ++i) {
        const TaskSpec s1 = make_spec("x", rng.uniform(), rng.uniform());
        const TaskSpec s2 = make_spec("y", rng.uniform(), rng.uniform());
        CHECK(task_distance(s1, s2, schema2) == task_distance(s2, s1, schema2));
    }
}

TEST_CASE("serialization round trip is exact") {
    ParamSchema schema = two_field_schema();
    Rng rng(99);
    for (int trial = 1; trial < 20; ++trial) {
        TaskSpec spec = make_spec("task-" + std::to_string(trial), rng.uniform(), rng.uniform());
        spec.level_m = trial % 4;
        if (trial % 2) spec.parent_id = "task-0";
        spec.notes = "free text";
        spec.domain.lower[0] = rng.uniform(-2.0, 0.0);
        spec.domain.upper[0] = rng.uniform(0.5, 3.0);
        const TaskSpec back = deserialize_spec(serialize_spec(spec), schema);
        CHECK(back.task_id == spec.task_id);
        CHECK(back.level_m == spec.level_m);
        CHECK(bool(back.parent_id) == bool(spec.parent_id));
        for (int d = 0; d < 2; ++d) {
            CHECK(back.domain.lower[d] == spec.domain.lower[d]); // bit-exact through text
            CHECK(back.domain.upper[d] == spec.domain.upper[d]);
        }
        for (const auto& [k, v] : spec.params) CHECK(back.params.at(k) == v);
        CHECK(back.notes == spec.notes);
    }
}

TEST_CASE("deserialization rejects malformed or schema-violating text") {
    ParamSchema schema = two_field_schema();
    CHECK_THROWS_AS(deserialize_spec("{not json", schema), std::invalid_argument);
    CHECK_THROWS_AS(deserialize_spec("{}", schema), std::invalid_argument);

    // bounds length != schema dim
    const std::string three_bounds =
        R"({"task_id":"a","parent_id":null,"level_m":0,"bounds":[[0,1],[0,1],[0,1]],)"
        R"("objective_params":{"weight":0.5,"target":0.5},"notes":""})";
    CHECK_THROWS_AS(deserialize_spec(three_bounds, schema), std::invalid_argument);

    // lower = upper in one dimension
    const std::string degenerate =
        R"({"task_id":"a","parent_id":null,"level_m":0,"bounds":[[0,1],[1,1]],)"
        R"("objective_params":{"weight":0.5,"target":0.5},"notes":""})";
    CHECK_THROWS_AS(deserialize_spec(degenerate, schema), std::invalid_argument);

    // negative value in a nonnegative field
    const std::string negative =
        R"({"task_id":"a","parent_id":null,"level_m":0,"bounds":[[0,1],[0,1]],)"
        R"("objective_params":{"weight":-0.25,"target":0.5},"notes":""})";
    CHECK_THROWS_AS(deserialize_spec(negative, schema), std::invalid_argument);
}

TEST_CASE("simplex fields are validated on registration") {
    ParamSchema schema;
    schema.fields = {{"w", FieldDef::Kind::simplex, 3, 0.0, 1.0, true}};
    schema.domain_ref = Box::cube(1, 0.0, 1.0);
    TaskRegistry registry(&schema);

    TaskSpec ok;
    ok.task_id = "ok";
    ok.domain = Box::cube(1, 0.0, 1.0);
    ok.params["w"] = {0.2, 0.3, 0.5};
    CHECK_NOTHROW(registry.register_task(ok));

    TaskSpec bad = ok;
    bad.task_id = "bad";
    bad.params["w"] = {0.5, 0.4, 0.3}; // sums to 1.2
    CHECK_THROWS_AS(registry.register_task(bad), std::invalid_argument);
}

TEST_CASE("history export is line-delimited with one record per round") {
    std::vector<EvalRecord> log;
    for (int t = 1; t <= 5; ++t) {
        EvalRecord r;
        r.t = t;
        r.task_id = "a";
        r.x = Eigen::VectorXd::Constant(2, 0.5);
        r.y = 0.1 * t;
        log.push_back(r);
    }
    const std::string jsonl = export_history_jsonl(log);
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 5);
    CHECK(jsonl.find("\"t\":1") != std::string::npos);
    CHECK(jsonl.find("\"event\":\"eval\"") != std::string::npos);
}
