#include "utr/rewardgap.hpp"

#include <cmath>
#include <ostream>

#include "utr/error.hpp"
#include "utr/json_util.hpp"

namespace utr {

RewardModel RewardModel::coverage() { return RewardModel{}; }

RewardModel RewardModel::table(std::map<std::pair<int, int>, double> values) {
    if (values.empty()) throw ConfigError("custom reward table is empty");
    for (const auto& [key, v] : values) {
        if (!std::isfinite(v)) {
            throw ConfigError("reward R(" + std::to_string(key.first) + "," + std::to_string(key.second) +
                              ") is not finite");
        }
    }
    RewardModel m;
    m.table_ = std::move(values);
    return m;
}

double RewardModel::operator()(int a, int t) const {
    if (table_.empty()) return static_cast<double>(t - a + 1);
    auto it = table_.find({a, t});
    if (it == table_.end()) {
        throw Error("reward table has no entry for (" + std::to_string(a) + "," + std::to_string(t) + ")");
    }
    return it->second;
}

bool RewardModel::monotone_in_prefix(int horizon) const {
    for (int t = 1; t <= horizon; ++t)
        for (int a = 2; a <= t; ++a)
            if ((*this)(a, t) > (*this)(a - 1, t)) return false;
    return true;
}

KSchedule KSchedule::full_prefix() {
    return {"full", [](int) { return 1; }};
}

KSchedule KSchedule::half() {
    return {"half", [](int t) { return (t + 1) / 2; }};
}

KSchedule KSchedule::single_frame() {
    return {"single", [](int t) { return t; }};
}

KSchedule KSchedule::by_name(const std::string& name) {
    if (name == "full") return full_prefix();
    if (name == "half") return half();
    if (name == "single") return single_frame();
    throw ConfigError("unknown k-schedule '" + name + "' (expected full, half or single)");
}

void RewardGapSpec::validate() const {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("gamma must lie in [0,1]");
    for (int t = 1; t <= horizon; ++t) {
        const int k = schedule.k(t);
        if (k < 1 || k > t) {
            throw ConfigError("k-schedule '" + schedule.name + "' gives k=" + std::to_string(k) +
                              " at t=" + std::to_string(t));
        }
    }
}

namespace {

template <typename Term>
double discounted_sum(const RewardGapSpec& spec, Term term) {
    spec.validate();
    double sum = 0;
    double discount = 1;
    for (int t = 1; t <= spec.horizon; ++t) {
        discount *= spec.gamma;
        sum += discount * term(t);
    }
    return sum;
}

}  // namespace

double objective_true(const RewardGapSpec& spec) {
    return discounted_sum(spec, [&](int t) { return spec.reward(1, t); });
}

double objective_proxy(const RewardGapSpec& spec) {
    return discounted_sum(spec, [&](int t) { return spec.reward(spec.schedule.k(t), t); });
}

double reward_gap(const RewardGapSpec& spec) { return objective_true(spec) - objective_proxy(spec); }

double reward_gap_termwise(const RewardGapSpec& spec) {
    return discounted_sum(spec, [&](int t) { return spec.reward(1, t) - spec.reward(spec.schedule.k(t), t); });
}

std::vector<SweepRow> sweep(const std::vector<int>& horizons, const std::vector<double>& gammas,
                            const std::vector<KSchedule>& policies, const RewardModel& reward) {
    if (horizons.empty() || gammas.empty() || policies.empty()) {
        throw ConfigError("sweep ranges must be non-empty");
    }
    std::vector<SweepRow> rows;
    rows.reserve(horizons.size() * gammas.size() * policies.size());
    for (int T : horizons) {
        for (double g : gammas) {
            for (const auto& p : policies) {
                RewardGapSpec spec{T, g, p, reward};
                rows.push_back({T, g, p.name, reward_gap(spec), reward_gap_termwise(spec)});
            }
        }
    }
    return rows;
}

std::vector<SweepRow> monotonicity_sweep() {
    std::vector<int> horizons;
    for (int T = 1; T <= 10; ++T) horizons.push_back(T);
    return sweep(horizons, {0.5, 0.9, 1.0},
                 {KSchedule::full_prefix(), KSchedule::half(), KSchedule::single_frame()});
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "T,gamma,policy_name,delta_r\n";
    for (const auto& r : rows) {
        out << r.horizon << ',' << json_util::Json(r.gamma).dump() << ',' << r.policy << ','
            << json_util::Json(r.delta_r).dump() << '\n';
    }
}

void write_sweep_jsonl(const std::vector<SweepRow>& rows, std::ostream& out) {
    for (const auto& r : rows) {
        json_util::OrderedJson j{{"T", r.horizon}, {"gamma", r.gamma}, {"policy_name", r.policy}, {"delta_r", r.delta_r}};
        out << j.dump() << '\n';
    }
}

}  // namespace utr
