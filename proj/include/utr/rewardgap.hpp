#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace utr {

/// Reward R(V_{a:t}, x_t) for text at step t conditioned on frames a..t
/// (1-based, inclusive).
class RewardModel {
public:
    /// R = t - a + 1, the number of conditioned frames.
    static RewardModel coverage();
    /// Explicit values keyed by (a, t); lookups outside the table throw.
    static RewardModel table(std::map<std::pair<int, int>, double> values);

    double operator()(int a, int t) const;

    bool is_coverage() const noexcept { return table_.empty(); }

    /// True when R(a, t) never increases with a for fixed t over 1 <= a <= t <= horizon,
    /// i.e. longer conditioned prefixes never earn less.
    bool monotone_in_prefix(int horizon) const;

private:
    std::map<std::pair<int, int>, double> table_;
};

/// Start index k_t of the conditioned frame subset at each step.
struct KSchedule {
    std::string name;
    std::function<int(int)> k;

    static KSchedule full_prefix();   ///< k_t = 1
    static KSchedule half();          ///< k_t = ceil(t / 2)
    static KSchedule single_frame();  ///< k_t = t
    static KSchedule by_name(const std::string& name);
};

struct RewardGapSpec {
    int horizon = 1;
    double gamma = 1.0;
    KSchedule schedule = KSchedule::full_prefix();
    RewardModel reward = RewardModel::coverage();

    /// Throws ConfigError unless 0 <= gamma <= 1 and 1 <= k_t <= t for every t.
    void validate() const;
};

/// sum_{t=1..T} gamma^t R(V_{1:t}, x_t)
double objective_true(const RewardGapSpec& spec);
/// sum_{t=1..T} gamma^t R(V_{k_t:t}, x_t)
double objective_proxy(const RewardGapSpec& spec);
/// objective_true - objective_proxy.
double reward_gap(const RewardGapSpec& spec);
/// sum_{t=1..T} gamma^t (R(V_{1:t}) - R(V_{k_t:t})), accumulated term by term.
double reward_gap_termwise(const RewardGapSpec& spec);

struct SweepRow {
    int horizon = 0;
    double gamma = 0;
    std::string policy;
    double delta_r = 0;
    double delta_r_termwise = 0;
};

/// One row per (T, gamma, policy), ordered by T, then gamma, then policy
/// position in `policies`.
std::vector<SweepRow> sweep(const std::vector<int>& horizons, const std::vector<double>& gammas,
                            const std::vector<KSchedule>& policies,
                            const RewardModel& reward = RewardModel::coverage());

/// T in 1..10, gamma in {0.5, 0.9, 1.0}, policies full/half/single, coverage.
std::vector<SweepRow> monotonicity_sweep();

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_jsonl(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace utr
