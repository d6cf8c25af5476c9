#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsr/envelope.hpp"
#include "gsr/gp.hpp"
#include "gsr/utility.hpp"

namespace gsr {

// Declared editable-field schema shared by a task family.
struct FieldDef {
    enum class Kind { scalar, simplex, vector };
    std::string name;
    Kind kind = Kind::scalar;
    int arity = 1;       // components; simplex/vector fields mutate as one unit
    double lo = 0.0;     // natural bounds used for [0,1] rescaling
    double hi = 1.0;
    bool editable = true;
};

struct ParamSchema {
    std::vector<FieldDef> fields;
    Box domain_ref;               // reference box; rescales bound values, checks dim
    bool domain_editable = false; // each dimension-bound pair counts as one editable field
    double min_span_frac = 0.0;   // 0 disables the min-span validation check

    const FieldDef* find(const std::string& name) const {
        for (const auto& f : fields)
            if (f.name == name) return &f;
        return nullptr;
    }
    int editable_field_count() const {
        int n = 0;
        for (const auto& f : fields)
            if (f.editable) ++n;
        if (domain_editable) n += domain_ref.dim();
        return n;
    }
};

struct TaskSpec {
    std::string task_id;
    std::optional<std::string> parent_id;
    int level_m = 0;
    Box domain;
    std::map<std::string, std::vector<double>> params; // flat numeric fields
    std::string notes;
};

enum class EventTag { eval, generate, level_up, eliminate };

std::string event_tag_name(EventTag tag);

struct EvalRecord {
    int t = 0;
    std::string task_id;
    int level_m = 0;
    Eigen::VectorXd x;
    double y = 0.0;
    double incumbent = 0.0;
    double incumbent_true = std::numeric_limits<double>::quiet_NaN(); // harness metric only
    double u_lower = 0.0, u_upper = 1.0;
    double env_lower = 0.0, env_upper = 1.0;
    double width = 1.0;
    EventTag event = EventTag::eval;
    long votes_used = 0;
};

struct TaskState {
    TaskSpec spec;
    int local_counter = 0; // equals dataset size
    GpDataset dataset;
    double incumbent = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd incumbent_x;
    double incumbent_true = -std::numeric_limits<double>::infinity(); // noiseless, harness only
    UtilityInterval utility_interval = UtilityInterval::initial();
    ValueEnvelope envelope;
    int last_checkpoint = 0;
};

class TaskRegistry {
public:
    explicit TaskRegistry(const ParamSchema* schema = nullptr, double noise_lambda = 1e-6)
        : schema_(schema), noise_lambda_(noise_lambda) {}

    // Returns the 1-based creation index; throws on duplicate id or invalid spec.
    int register_task(const TaskSpec& spec);

    bool contains(const std::string& id) const { return index_.count(id) > 0; }
    TaskState& state(const std::string& id);
    const TaskState& state(const std::string& id) const;
    int task_index(const std::string& id) const; // creation order, 1-based

    int size() const { return static_cast<int>(order_.size()); }
    const std::vector<std::string>& creation_order() const { return order_; }
    const ParamSchema* schema() const { return schema_; }

    std::vector<EvalRecord>& event_log() { return log_; }
    const std::vector<EvalRecord>& event_log() const { return log_; }

private:
    const ParamSchema* schema_;
    double noise_lambda_;
    std::map<std::string, TaskState> states_;
    std::map<std::string, int> index_;
    std::vector<std::string> order_;
    std::vector<EvalRecord> log_;
};

// Appends (x, y); bumps the counter and the incumbent. Throws when x is outside the domain.
void record_eval(TaskState& state, const Eigen::VectorXd& x, double y);

// Fraction of editable fields whose values differ beyond a 1e-9 relative tolerance.
double mutation_ratio(const TaskSpec& child, const TaskSpec& parent, const ParamSchema& schema);

// Euclidean norm over concatenated numeric fields, each rescaled to [0,1] by schema bounds.
double task_distance(const TaskSpec& a, const TaskSpec& b, const ParamSchema& schema);

std::string serialize_spec(const TaskSpec& spec);
// Throws std::invalid_argument on malformed text or schema violations.
TaskSpec deserialize_spec(const std::string& text, const ParamSchema& schema);

// Line-delimited history export matching EvalRecord fields.
std::string export_history_jsonl(const std::vector<EvalRecord>& log);

} // namespace gsr
