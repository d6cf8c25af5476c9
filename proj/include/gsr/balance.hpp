#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gsr/rng.hpp"

namespace gsr {

// One candidate Lipschitz bound L_j = 2^j L_0 with its play statistics. The
// wrapper keeps per-rung state fully independent.
struct Hypothesis {
    int index = 0;
    double bound = 0.0;
    long n = 0;
    double utility_sum = 0.0;
    double gap_sum = 0.0; // sum of causal eps-bar over this rung's plays
    bool active = true;
};

// Practical certificate L_j * (sum of causal gap bounds through n plays);
// constant factors common across rungs are dropped.
double suspected_regret(long n, double bound, double gap_sum);

// chi_t = 2 sigma_u^2 log(4 pi^2 t^2 M_t / delta_be).
double chi(long t, double sigma_u2, double delta_be, int m_t);

// Argmin of the one-step-ahead certificate among active rungs; ties go to the
// smaller index. next_gap(j, n) returns the causal gap bound of rung j's n-th play.
int balance_select(const std::vector<Hypothesis>& hypotheses,
                   const std::function<double(int, long)>& next_gap);

// Returns the surviving subset: rung j stays iff
//   clip(mean_j + sqrt(chi/n_j)) + Rsusp(n_j, L_j)/n_j >= max_k clip(mean_k - sqrt(chi/n_k)).
// Requires every active rung to have n > 0.
std::vector<int> eliminate(const std::vector<Hypothesis>& hypotheses, double chi_t);

// Adds rungs while L_{j_max+1} <= L0 * g_L(t), up to max_rungs.
// on_add(j, L_j) instantiates the fresh rung state.
void grow_ladder(std::vector<Hypothesis>& hypotheses, long t, double l0,
                 const std::function<double(long)>& growth, int max_rungs,
                 const std::function<void(int, double)>& on_add);

// One independently-stated GSR run (or a simulation of one) advanced by the wrapper.
class RungRunner {
public:
    virtual ~RungRunner() = default;
    struct Obs {
        double u_tilde = 0.5;  // utility feedback of the round
        double eps_bar = 0.0;  // causal gap bound charged for this play
    };
    virtual Obs advance(Rng& rng) = 0;
    virtual double next_gap(long n) const = 0;
};

struct BalanceConfig {
    double l0 = 0.5;
    std::function<double(long)> growth = [](long t) { return std::sqrt(static_cast<double>(t)); };
    double delta_be = 0.05;
    double sigma_u2 = 1.0 / 256.0; // vote model with K = 64
    int max_rungs = 8;
    int T = 200;
};

struct WrapperRecord {
    int t = 0;
    int rung_j = 0;
    double l_j = 0.0;
    int active_set_size = 0;
    int eliminated_this_round = 0;
    double u_tilde = 0.5;
};

struct WrapperLog {
    std::vector<WrapperRecord> rows;
    std::vector<int> final_active;
    std::string to_csv_string() const;
};

class BalanceEliminate {
public:
    using RunnerFactory = std::function<std::unique_ptr<RungRunner>(int j, double l_j)>;
    BalanceEliminate(BalanceConfig config, RunnerFactory factory);

    WrapperLog run(std::uint64_t seed);

    const std::vector<Hypothesis>& hypotheses() const { return hyps_; }
    bool was_eliminated(int j) const;

private:
    BalanceConfig cfg_;
    RunnerFactory factory_;
    std::vector<Hypothesis> hyps_;
    std::vector<std::unique_ptr<RungRunner>> runners_;
};

} // namespace gsr
