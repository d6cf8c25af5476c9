#include "gsr/task.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gsr/math.hpp"

namespace gsr {

using nlohmann::json;

namespace {

bool values_differ(double a, double b) {
    // relative tolerance 1e-9, immune to codec noise
    return std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

void check_shared_schema(const TaskSpec& a, const TaskSpec& b, const ParamSchema& schema) {
    if (a.domain.dim() != b.domain.dim())
        throw std::invalid_argument("task schema mismatch: domain dimensions differ");
    for (const auto& f : schema.fields) {
        const auto ia = a.params.find(f.name);
        const auto ib = b.params.find(f.name);
        if (ia == a.params.end() || ib == b.params.end())
            throw std::invalid_argument("task schema mismatch: missing field " + f.name);
        if (static_cast<int>(ia->second.size()) != f.arity ||
            static_cast<int>(ib->second.size()) != f.arity)
            throw std::invalid_argument("task schema mismatch: bad arity for field " + f.name);
    }
}

void validate_basic(const TaskSpec& spec, const ParamSchema* schema) {
    if (spec.task_id.empty()) throw std::invalid_argument("TaskSpec: empty task_id");
    if (spec.level_m < 0) throw std::invalid_argument("TaskSpec: level_m must be nonnegative");
    if (!spec.domain.nondegenerate())
        throw std::invalid_argument("TaskSpec: degenerate domain (needs lower < upper)");
    if (!schema) return;
    if (schema->domain_ref.dim() > 0 && spec.domain.dim() != schema->domain_ref.dim())
        throw std::invalid_argument("TaskSpec: domain dimension does not match schema");
    for (const auto& f : schema->fields) {
        const auto it = spec.params.find(f.name);
        if (it == spec.params.end()) throw std::invalid_argument("TaskSpec: missing field " + f.name);
        if (static_cast<int>(it->second.size()) != f.arity)
            throw std::invalid_argument("TaskSpec: bad arity for field " + f.name);
        if (f.kind == FieldDef::Kind::simplex) {
            double sum = 0.0;
            for (double v : it->second) {
                if (v < -1e-12) throw std::invalid_argument("TaskSpec: negative simplex weight in " + f.name);
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("TaskSpec: simplex weights of " + f.name + " must sum to 1");
        }
    }
}

} // namespace

std::string event_tag_name(EventTag tag) {
    switch (tag) {
        case EventTag::eval: return "eval";
        case EventTag::generate: return "generate";
        case EventTag::level_up: return "level_up";
        case EventTag::eliminate: return "eliminate";
    }
    return "?";
}

int TaskRegistry::register_task(const TaskSpec& spec) {
    validate_basic(spec, schema_);
    if (index_.count(spec.task_id))
        throw std::invalid_argument("register_task: duplicate task_id " + spec.task_id);
    if (spec.parent_id && !index_.count(*spec.parent_id))
        throw std::invalid_argument("register_task: unknown parent_id " + *spec.parent_id);

    TaskState state;
    state.spec = spec;
    state.dataset.noise_lambda = noise_lambda_;
    states_.emplace(spec.task_id, std::move(state));
    order_.push_back(spec.task_id);
    const int idx = static_cast<int>(order_.size());
    index_[spec.task_id] = idx;
    return idx;
}

TaskState& TaskRegistry::state(const std::string& id) {
    const auto it = states_.find(id);
    if (it == states_.end()) throw std::invalid_argument("unknown task " + id);
    return it->second;
}

const TaskState& TaskRegistry::state(const std::string& id) const {
    const auto it = states_.find(id);
    if (it == states_.end()) throw std::invalid_argument("unknown task " + id);
    return it->second;
}

int TaskRegistry::task_index(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw std::invalid_argument("unknown task " + id);
    return it->second;
}

void record_eval(TaskState& state, const Eigen::VectorXd& x, double y) {
    if (!state.spec.domain.contains(x))
        throw std::invalid_argument("record_eval: design outside task domain");
    state.dataset.append(x, y);
    state.local_counter += 1;
    if (y > state.incumbent) {
        state.incumbent = y;
        state.incumbent_x = x;
    }
}

double mutation_ratio(const TaskSpec& child, const TaskSpec& parent, const ParamSchema& schema) {
    check_shared_schema(child, parent, schema);
    int total = 0;
    int edited = 0;
    for (const auto& f : schema.fields) {
        if (!f.editable) continue;
        ++total;
        const auto& a = child.params.at(f.name);
        const auto& b = parent.params.at(f.name);
        for (int i = 0; i < f.arity; ++i)
            if (values_differ(a[static_cast<size_t>(i)], b[static_cast<size_t>(i)])) {
                ++edited;
                break;
            }
    }
    if (schema.domain_editable) {
        for (int d = 0; d < child.domain.dim(); ++d) {
            ++total;
            if (values_differ(child.domain.lower[d], parent.domain.lower[d]) ||
                values_differ(child.domain.upper[d], parent.domain.upper[d]))
                ++edited;
        }
    }
    if (total == 0) return 0.0;
    return static_cast<double>(edited) / static_cast<double>(total);
}

double task_distance(const TaskSpec& a, const TaskSpec& b, const ParamSchema& schema) {
    check_shared_schema(a, b, schema);
    double sq = 0.0;
    for (const auto& f : schema.fields) {
        const double span = std::max(f.hi - f.lo, 1e-300);
        const auto& va = a.params.at(f.name);
        const auto& vb = b.params.at(f.name);
        for (int i = 0; i < f.arity; ++i) {
            const double d = (va[static_cast<size_t>(i)] - vb[static_cast<size_t>(i)]) / span;
            sq += d * d;
        }
    }
    const Box& ref = schema.domain_ref;
    for (int d = 0; d < a.domain.dim(); ++d) {
        const double span = ref.dim() == a.domain.dim() ? std::max(ref.width(d), 1e-300) : 1.0;
        const double dl = (a.domain.lower[d] - b.domain.lower[d]) / span;
        const double du = (a.domain.upper[d] - b.domain.upper[d]) / span;
        sq += dl * dl + du * du;
    }
    return std::sqrt(sq);
}

std::string serialize_spec(const TaskSpec& spec) {
    json j;
    j["task_id"] = spec.task_id;
    j["parent_id"] = spec.parent_id ? json(*spec.parent_id) : json(nullptr);
    j["level_m"] = spec.level_m;
    json bounds = json::array();
    for (int d = 0; d < spec.domain.dim(); ++d)
        bounds.push_back({spec.domain.lower[d], spec.domain.upper[d]});
    j["bounds"] = bounds;
    json params = json::object();
    for (const auto& [name, vals] : spec.params) {
        if (vals.size() == 1)
            params[name] = vals[0];
        else
            params[name] = vals;
    }
    j["objective_params"] = params;
    j["notes"] = spec.notes;
    return j.dump();
}

TaskSpec deserialize_spec(const std::string& text, const ParamSchema& schema) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("deserialize_spec: malformed text: ") + e.what());
    }
    for (const char* key : {"task_id", "parent_id", "level_m", "bounds", "objective_params", "notes"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("deserialize_spec: missing key ") + key);

    TaskSpec spec;
    if (!j["task_id"].is_string()) throw std::invalid_argument("deserialize_spec: task_id must be a string");
    spec.task_id = j["task_id"].get<std::string>();
    if (!j["parent_id"].is_null()) {
        if (!j["parent_id"].is_string())
            throw std::invalid_argument("deserialize_spec: parent_id must be string or null");
        spec.parent_id = j["parent_id"].get<std::string>();
    }
    if (!j["level_m"].is_number_integer() || j["level_m"].get<int>() < 0)
        throw std::invalid_argument("deserialize_spec: level_m must be a nonnegative integer");
    spec.level_m = j["level_m"].get<int>();

    const auto& bounds = j["bounds"];
    if (!bounds.is_array() || bounds.empty())
        throw std::invalid_argument("deserialize_spec: bounds must be a nonempty array");
    const int dim = static_cast<int>(bounds.size());
    if (schema.domain_ref.dim() > 0 && dim != schema.domain_ref.dim())
        throw std::invalid_argument("deserialize_spec: bounds length does not match schema dim");
    spec.domain.lower.resize(dim);
    spec.domain.upper.resize(dim);
    for (int d = 0; d < dim; ++d) {
        const auto& pair = bounds[static_cast<size_t>(d)];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw std::invalid_argument("deserialize_spec: each bound must be [lo, hi]");
        spec.domain.lower[d] = pair[0].get<double>();
        spec.domain.upper[d] = pair[1].get<double>();
        if (!(spec.domain.lower[d] < spec.domain.upper[d]))
            throw std::invalid_argument("deserialize_spec: degenerate bound in dimension " +
                                        std::to_string(d));
    }

    const auto& params = j["objective_params"];
    if (!params.is_object()) throw std::invalid_argument("deserialize_spec: objective_params must be a map");
    for (const auto& [name, val] : params.items()) {
        std::vector<double> vals;
        if (val.is_number()) {
            vals.push_back(val.get<double>());
        } else if (val.is_array()) {
            for (const auto& v : val) {
                if (!v.is_number())
                    throw std::invalid_argument("deserialize_spec: non-numeric entry in field " + name);
                vals.push_back(v.get<double>());
            }
        } else {
            throw std::invalid_argument("deserialize_spec: field " + name + " must be numeric");
        }
        spec.params[name] = std::move(vals);
    }
    spec.notes = j["notes"].is_string() ? j["notes"].get<std::string>() : std::string();

    // schema-level checks: field presence/arity, simplex sums, nonneg noise
    validate_basic(spec, &schema);
    for (const auto& f : schema.fields) {
        if (f.lo >= 0.0) {
            for (double v : spec.params.at(f.name))
                if (v < f.lo - 1e-12)
                    throw std::invalid_argument("deserialize_spec: field " + f.name +
                                                " below its lower bound (negative noise?)");
        }
    }
    return spec;
}

std::string export_history_jsonl(const std::vector<EvalRecord>& log) {
    std::ostringstream out;
    for (const auto& r : log) {
        json j;
        j["t"] = r.t;
        j["task_id"] = r.task_id;
        j["level_m"] = r.level_m;
        std::vector<double> x(r.x.data(), r.x.data() + r.x.size());
        j["x"] = x;
        j["y"] = r.y;
        j["incumbent"] = r.incumbent;
        j["u_lower"] = r.u_lower;
        j["u_upper"] = r.u_upper;
        j["U_lower"] = r.env_lower;
        j["U_upper"] = r.env_upper;
        j["width"] = r.width;
        j["event"] = event_tag_name(r.event);
        j["votes_used"] = r.votes_used;
        out << j.dump() << "\n";
    }
    return out.str();
}

} // namespace gsr
