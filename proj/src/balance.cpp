#include "gsr/balance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gsr/math.hpp"

namespace gsr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double suspected_regret(long n, double bound, double gap_sum) {
    if (n < 0) throw std::invalid_argument("suspected_regret: n must be nonnegative");
    if (n == 0) return 0.0;
    return bound * gap_sum;
}

double chi(long t, double sigma_u2, double delta_be, int m_t) {
    if (t < 1 || m_t < 1) throw std::invalid_argument("chi: t and M_t must be >= 1");
    const double td = static_cast<double>(t);
    return 2.0 * sigma_u2 * std::log(4.0 * kPi * kPi * td * td * static_cast<double>(m_t) / delta_be);
}

int balance_select(const std::vector<Hypothesis>& hypotheses,
                   const std::function<double(int, long)>& next_gap) {
    int best = -1;
    double best_cert = 0.0;
    for (const auto& h : hypotheses) {
        if (!h.active) continue;
        const double cert = h.bound * (h.gap_sum + next_gap(h.index, h.n + 1));
        if (best < 0 || cert < best_cert) {
            best = h.index;
            best_cert = cert;
        }
    }
    if (best < 0) throw std::logic_error("balance_select: no active hypothesis");
    return best;
}

std::vector<int> eliminate(const std::vector<Hypothesis>& hypotheses, double chi_t) {
    double best_pessimistic = -std::numeric_limits<double>::infinity();
    for (const auto& h : hypotheses) {
        if (!h.active) continue;
        if (h.n <= 0) throw std::invalid_argument("eliminate: every active rung needs n > 0");
        const double mean = h.utility_sum / static_cast<double>(h.n);
        best_pessimistic =
            std::max(best_pessimistic, clip(mean - std::sqrt(chi_t / static_cast<double>(h.n)), 0.0, 1.0));
    }
    std::vector<int> survivors;
    for (const auto& h : hypotheses) {
        if (!h.active) continue;
        const double mean = h.utility_sum / static_cast<double>(h.n);
        const double optimistic = clip(mean + std::sqrt(chi_t / static_cast<double>(h.n)), 0.0, 1.0);
        const double slack = suspected_regret(h.n, h.bound, h.gap_sum) / static_cast<double>(h.n);
        if (optimistic + slack >= best_pessimistic) survivors.push_back(h.index);
    }
    return survivors;
}

void grow_ladder(std::vector<Hypothesis>& hypotheses, long t, double l0,
                 const std::function<double(long)>& growth, int max_rungs,
                 const std::function<void(int, double)>& on_add) {
    int j_max = -1;
    for (const auto& h : hypotheses) j_max = std::max(j_max, h.index);
    const double cap = l0 * growth(t);
    while (static_cast<int>(hypotheses.size()) < max_rungs) {
        const int j = j_max + 1;
        const double l_j = std::ldexp(l0, j); // 2^j * L0
        if (l_j > cap + 1e-15) break;
        Hypothesis h;
        h.index = j;
        h.bound = l_j;
        hypotheses.push_back(h);
        if (on_add) on_add(j, l_j);
        j_max = j;
    }
}

BalanceEliminate::BalanceEliminate(BalanceConfig config, RunnerFactory factory)
    : cfg_(config), factory_(std::move(factory)) {
    Hypothesis h0;
    h0.index = 0;
    h0.bound = cfg_.l0;
    hyps_.push_back(h0);
}

bool BalanceEliminate::was_eliminated(int j) const {
    for (const auto& h : hyps_)
        if (h.index == j) return !h.active;
    return false;
}

WrapperLog BalanceEliminate::run(std::uint64_t seed) {
    WrapperLog log;
    Rng rng(seed);
    runners_.clear();
    runners_.push_back(factory_(0, cfg_.l0));
    // rungs available from the start per the growth rule at t = 1
    auto add_runner = [&](int j, double l_j) {
        while (static_cast<int>(runners_.size()) < j) runners_.push_back(nullptr);
        runners_.push_back(factory_(j, l_j));
    };

    for (int t = 1; t <= cfg_.T; ++t) {
        const int j = balance_select(hyps_, [&](int idx, long n) {
            return runners_[static_cast<size_t>(idx)]->next_gap(n);
        });
        const RungRunner::Obs obs = runners_[static_cast<size_t>(j)]->advance(rng);
        double bound_j;
        {
            Hypothesis& h = hyps_[static_cast<size_t>(j)];
            h.n += 1;
            h.utility_sum += obs.u_tilde;
            h.gap_sum += obs.eps_bar;
            bound_j = h.bound;
        }

        int eliminated = 0;
        long min_n = std::numeric_limits<long>::max();
        int m_t = 0;
        for (const auto& hh : hyps_)
            if (hh.active) {
                min_n = std::min(min_n, hh.n);
                m_t = std::max(m_t, hh.index + 1);
            }
        if (min_n > 0) {
            const double chi_t = chi(t, cfg_.sigma_u2, cfg_.delta_be, m_t);
            const std::vector<int> survivors = eliminate(hyps_, chi_t);
            for (auto& hh : hyps_) {
                if (!hh.active) continue;
                if (std::find(survivors.begin(), survivors.end(), hh.index) == survivors.end()) {
                    hh.active = false;
                    ++eliminated;
                }
            }
        }

        grow_ladder(hyps_, t, cfg_.l0, cfg_.growth, cfg_.max_rungs, add_runner);

        int active_count = 0;
        for (const auto& hh : hyps_)
            if (hh.active) ++active_count;
        log.rows.push_back({t, j, bound_j, active_count, eliminated, obs.u_tilde});
    }
    for (const auto& hh : hyps_)
        if (hh.active) log.final_active.push_back(hh.index);
    return log;
}

std::string WrapperLog::to_csv_string() const {
    std::ostringstream out;
    out << "t,rung_j,L_j,active_set_size,eliminated_this_round,u_tilde\n";
    for (const auto& r : rows)
        out << r.t << ',' << r.rung_j << ',' << format_double(r.l_j) << ',' << r.active_set_size
            << ',' << r.eliminated_this_round << ',' << format_double(r.u_tilde) << '\n';
    return out.str();
}

} // namespace gsr
