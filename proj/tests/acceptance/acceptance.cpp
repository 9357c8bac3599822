// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "utr/assignment.hpp"
#include "utr/error.hpp"
#include "utr/filter.hpp"
#include "utr/pipeline.hpp"
#include "utr/rewardgap.hpp"
#include "utr/rng.hpp"
#include "utr/synth.hpp"
#include "utr/taskgen.hpp"
#include "utr/tpl.hpp"
#include "utr/tracker.hpp"

using namespace utr;
namespace fs = std::filesystem;

namespace {

/// Collects the first few violations of one criterion.
class Check {
public:
    void require(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (messages_.size() < 5) messages_.push_back(what);
    }
    bool ok() const { return failures_ == 0; }
    std::string summary() const {
        std::string out = std::to_string(failures_) + " violation(s)";
        for (const auto& m : messages_) out += "; " + m;
        return out;
    }

private:
    std::size_t failures_ = 0;
    std::vector<std::string> messages_;
};

struct Criterion {
    int number;
    std::string name;
    double time_limit_s;  // 0 = none
    std::function<void(Check&)> body;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// 1. Reward gap

void reward_gap_criterion(Check& c) {
    const std::vector<std::string> order{"full", "half", "single"};
    std::map<std::tuple<double, std::string, int>, double> gap;
    for (const auto& r : monotonicity_sweep()) {
        gap[{r.gamma, r.policy, r.horizon}] = r.delta_r;
        const std::string where =
            "T=" + std::to_string(r.horizon) + " gamma=" + fmt(r.gamma) + " policy=" + r.policy;
        c.require(r.delta_r >= 0, "negative gap at " + where);
        c.require(std::abs(r.delta_r - r.delta_r_termwise) <= 1e-12,
                  "termwise/difference mismatch at " + where + ": " + fmt(r.delta_r) + " vs " + fmt(r.delta_r_termwise));
        if (r.gamma == 1.0 && r.policy == "single") {
            const double closed = r.horizon * (r.horizon - 1) / 2.0;
            c.require(r.delta_r == closed, "closed form mismatch at " + where + ": " + fmt(r.delta_r));
        }
    }
    c.require(gap.size() == 90, "sweep does not cover 10 x 3 x 3 cells");
    for (double g : {0.5, 0.9, 1.0}) {
        for (int T = 1; T <= 10; ++T) {
            for (std::size_t p = 0; p < order.size(); ++p) {
                const double v = gap.at({g, order[p], T});
                if (T > 1) {
                    c.require(v >= gap.at({g, order[p], T - 1}),
                              "not non-decreasing in T at gamma=" + fmt(g) + " policy=" + order[p] + " T=" +
                                  std::to_string(T));
                }
                if (p > 0) {
                    c.require(v >= gap.at({g, order[p - 1], T}),
                              "policy ordering violated at gamma=" + fmt(g) + " T=" + std::to_string(T));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 2. Assignment

double exhaustive_min(const CostMatrix& m) {
    const bool transpose = m.rows() > m.cols();
    const std::size_t small = transpose ? m.cols() : m.rows();
    const std::size_t large = transpose ? m.rows() : m.cols();
    std::vector<std::size_t> perm(large);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0;
        for (std::size_t s = 0; s < small; ++s) total += transpose ? m(perm[s], s) : m(s, perm[s]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

void assignment_criterion(Check& c) {
    Rng rng(0xA551);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 6));
        const auto m = static_cast<std::size_t>(rng.uniform_int(1, 6));
        CostMatrix cost(n, m);
        // Costs on a 1/64 grid keep every partial sum exact in double.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) cost(i, j) = static_cast<double>(rng.uniform_int(0, 640)) / 64.0;
        const auto a = assign(cost);
        const double want = exhaustive_min(cost);
        c.require(a.pairs.size() == std::min(n, m), "trial " + std::to_string(trial) + ": incomplete matching");
        c.require(a.total == want, "trial " + std::to_string(trial) + ": total " + fmt(a.total) + " != " + fmt(want));
        std::set<std::size_t> rows, cols;
        for (const auto& [r, col] : a.pairs) {
            rows.insert(r);
            cols.insert(col);
        }
        c.require(rows.size() == a.pairs.size() && cols.size() == a.pairs.size(),
                  "trial " + std::to_string(trial) + ": row or column used twice");
    }
}

// ---------------------------------------------------------------------------
// 3. Tracker identity

void tracker_criterion(Check& c) {
    Rng rng(0x7AC3);
    for (int scene_no = 0; scene_no < 200; ++scene_no) {
        DisjointLayout layout;
        layout.num_objects = static_cast<int>(rng.uniform_int(2, 4));
        layout.num_frames = static_cast<int>(rng.uniform_int(8, 32));
        layout.jitter = rng.uniform(0, 2);
        layout.seed = rng.next();
        layout.video_id = "scene" + std::to_string(scene_no);
        const auto scene = synth_scene(disjoint_scene_config(layout));
        const auto tracks = associate(scene.frames, TrackerParams{});
        const std::string where = "scene " + std::to_string(scene_no);

        // Each detection box identifies its ground-truth object.
        std::map<std::pair<std::int64_t, std::vector<double>>, int> owner;
        std::size_t truth_entries = 0;
        for (const auto& t : scene.truth) {
            for (const auto& e : t.entries) owner[{e.frame_index, {e.box.x1, e.box.y1, e.box.x2, e.box.y2}}] = t.subject_id;
            truth_entries += t.entries.size();
        }
        // Overlap counts between predicted and true identities.
        std::map<std::pair<int, int>, std::size_t> overlap;
        std::size_t predicted_entries = 0;
        for (const auto& t : tracks) {
            for (const auto& e : t.entries) {
                auto it = owner.find({e.frame_index, {e.box.x1, e.box.y1, e.box.x2, e.box.y2}});
                if (it != owner.end()) ++overlap[{t.subject_id, it->second}];
            }
            predicted_entries += t.entries.size();
        }
        // Best one-to-one identity mapping, as a min-cost assignment.
        CostMatrix cost(tracks.size(), scene.truth.size());
        for (std::size_t i = 0; i < tracks.size(); ++i)
            for (std::size_t j = 0; j < scene.truth.size(); ++j)
                cost(i, j) = -static_cast<double>(overlap[{tracks[i].subject_id, scene.truth[j].subject_id}]);
        const double idtp = -assign(cost).total;
        const double idf1 = 2 * idtp / static_cast<double>(predicted_entries + truth_entries);
        c.require(tracks.size() == scene.truth.size(),
                  where + ": " + std::to_string(tracks.size()) + " trajectories for " +
                      std::to_string(scene.truth.size()) + " objects");
        c.require(idf1 == 1.0, where + ": identity F1 " + fmt(idf1));
    }
}

// ---------------------------------------------------------------------------
// 4. Grammar round trip

const std::vector<std::string> kCategories{"person", "car", "traffic light", "dog", "hand-bag", "x"};
const std::vector<std::string> kCaptions{"", "a man in red", "two, maybe <three> dogs", "a car; blue", "[odd] text"};
const std::vector<std::string> kActions{"", "walking", "turning, slowly", "idle"};

std::vector<std::size_t> tag_bytes(const std::string& answer) {
    std::vector<std::size_t> out;
    const std::size_t start = parse_answer(answer).prefix.empty() ? 0 : parse_answer(answer).prefix.size() + 2;
    for (std::size_t i = start; i < answer.size(); ++i) {
        if (answer[i] != '<') continue;
        const std::size_t close = answer.find('>', i);
        for (std::size_t k = i; k <= close; ++k) out.push_back(k);
        i = close;
    }
    return out;
}

void grammar_criterion(Check& c) {
    Rng rng(0x6A3);
    const auto templates = default_templates();
    std::size_t mutations = 0;
    for (int n = 0; n < 1000; ++n) {
        const int count = static_cast<int>(rng.uniform_int(1, 16));
        ClipSpec clip;
        clip.video_id = "fuzz";
        clip.clip_id = "fuzz#" + std::to_string(n);
        clip.count = count;
        std::int64_t at = rng.uniform_int(0, 20);
        for (int i = 0; i < count; ++i) {
            clip.frame_indices.push_back(at);
            at += rng.uniform_int(1, 5);
        }
        const ClipContext ctx{clip, static_cast<int>(rng.uniform_int(16, 3840)), static_cast<int>(rng.uniform_int(16, 2160))};

        std::vector<SubjectTrajectory> tracks;
        const int subjects = static_cast<int>(rng.uniform_int(1, 5));
        for (int s = 0; s < subjects; ++s) {
            SubjectTrajectory t;
            t.video_id = clip.video_id;
            t.clip_id = clip.clip_id;
            t.subject_id = s + 1 + static_cast<int>(rng.uniform_int(0, 3)) * 10;
            t.category = kCategories[rng.index(kCategories.size())];
            for (int p = 1; p <= count; ++p) {
                if (p > 1 && !rng.bernoulli(0.7)) continue;
                const double x1 = rng.uniform(0, ctx.width - 2), y1 = rng.uniform(0, ctx.height - 2);
                const BoundingBox b{x1, y1, rng.uniform(x1 + 1, ctx.width), rng.uniform(y1 + 1, ctx.height)};
                t.entries.push_back({clip.frame_indices[static_cast<std::size_t>(p - 1)], b, rng.uniform01(),
                                     kCaptions[rng.index(kCaptions.size())], kActions[rng.index(kActions.size())]});
            }
            tracks.push_back(std::move(t));
        }
        std::sort(tracks.begin(), tracks.end(), [](auto& a, auto& b) { return a.subject_id < b.subject_id; });
        tracks.erase(std::unique(tracks.begin(), tracks.end(),
                                 [](auto& a, auto& b) { return a.subject_id == b.subject_id; }),
                     tracks.end());

        QueryConfig qc;
        qc.max_subjects = static_cast<int>(rng.uniform_int(1, 4));
        qc.max_query_frames = static_cast<int>(rng.uniform_int(1, 3));
        qc.extra_kind_probability = rng.uniform01();
        const std::string id = clip.clip_id + "#q0";
        const std::string where = "record " + std::to_string(n);
        try {
            const auto query = sample_query(tracks, ctx, qc, rng.next());
            const auto record = build_conversation(tracks, ctx, *query, templates, id);
            const auto parsed = parse_answer(record.answer);
            c.require(parsed.subjects == answer_projection(tracks, ctx, *query), where + ": round trip differs");
            const auto back = parse_conversation_line(serialize_conversation(record), 1);
            c.require(back.answer == record.answer && back.query == record.query, where + ": record round trip differs");

            const auto bytes = tag_bytes(record.answer);
            for (int k = 0; k < 8; ++k) {
                std::string mutated = record.answer;
                const std::size_t pos = bytes[rng.index(bytes.size())];
                char replacement;
                do {
                    replacement = static_cast<char>(rng.uniform_int(32, 126));
                } while (replacement == mutated[pos]);
                mutated[pos] = replacement;
                ++mutations;
                bool rejected = false;
                try {
                    parse_answer(mutated);
                } catch (const GrammarError&) {
                    rejected = true;
                }
                c.require(rejected, where + ": mutation accepted: " + mutated.substr(0, 80));
            }
        } catch (const Error& e) {
            c.require(false, where + ": " + e.what());
        }
    }
    c.require(mutations == 8000, "mutation count " + std::to_string(mutations));
}

// ---------------------------------------------------------------------------
// 5. TPL contract

void tpl_criterion(Check& c) {
    Rng rng(0x7F1);
    for (int i = 0; i < 10000; ++i) {
        // NLLs and shifts on a 2^-10 grid below 2^10, so every sum and
        // difference is exactly representable.
        const double a = static_cast<double>(rng.uniform_int(0, 1 << 20)) / 1024.0;
        const double b = static_cast<double>(rng.uniform_int(0, 1 << 20)) / 1024.0;
        const double shift = static_cast<double>(rng.uniform_int(-(1 << 19), 1 << 19)) / 1024.0;
        c.require(tpl_score(a, b) == -tpl_score(b, a), "antisymmetry fails for " + fmt(a) + ", " + fmt(b));
        c.require(tpl_score(a + shift, b + shift) == tpl_score(a, b),
                  "shift invariance fails for " + fmt(a) + ", " + fmt(b) + ", " + fmt(shift));
    }

    // Oracle monotonicity in density, for several clip lengths.
    for (int T : {2, 4, 8, 16, 32}) {
        const OracleScorerConfig cfg{3.0, 0.1, T};
        double prev = -std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 200; ++k) {
            const double d = 0.1 * k;
            const auto recs = oracle_records("s", d, T, cfg, "oracle");
            const double t = tpl_score(recs[0].mean_nll, recs[1].mean_nll);
            c.require(t > prev || (k == 0), "oracle TPL not increasing at T=" + std::to_string(T) + " d=" + fmt(d));
            prev = t;
        }
    }

    // Subsets with distinct density levels: subset means follow density order.
    const OracleScorerConfig cfg{3.0, 0.1, 16};
    const std::vector<std::pair<std::string, double>> levels{{"sparse", 0.5}, {"medium", 1.2}, {"dense", 2.5}, {"packed", 3.1}};
    std::vector<NllRecord> records;
    std::map<std::string, std::string> tags;
    for (const auto& [name, base] : levels) {
        for (int i = 0; i < 50; ++i) {
            const std::string id = name + std::to_string(i);
            const double density = base + rng.uniform(0, 0.3);
            for (auto& r : oracle_records(id, density, 16, cfg, "oracle")) records.push_back(std::move(r));
            tags[id] = name;
        }
    }
    const auto paired = pair_and_score(records);
    c.require(paired.reports.empty(), "oracle records did not pair completely");
    const auto stats = subset_stats(paired.scores, tags);
    std::vector<std::string> got;
    for (const auto& s : stats) got.push_back(s.subset);
    c.require(got == std::vector<std::string>{"packed", "dense", "medium", "sparse"}, "subset order does not follow density");
}

// ---------------------------------------------------------------------------
// 6. Tercile bucketing

void bucket_criterion(Check& c) {
    Rng rng(0xB0C);
    for (std::size_t n : {9u, 10u, 100u}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<TplScore> scores;
            for (std::size_t i = 0; i < n; ++i) {
                TplScore s;
                char id[16];
                std::snprintf(id, sizeof id, "s%03zu", rng.index(1000) * 1000 + i);
                s.sample_id = id;
                // Coarse values force ties across boundaries.
                s.tpl = static_cast<double>(rng.uniform_int(-4, 4)) / 4.0;
                scores.push_back(s);
            }
            const auto b = bucketize(scores, 3);
            const std::string where = "n=" + std::to_string(n) + " trial " + std::to_string(trial);
            const std::size_t base = n / 3, extra = n % 3;
            std::map<TplBucket, std::vector<const TplScore*>> groups;
            for (const auto& s : b) groups[s.bucket].push_back(&s);
            const std::vector<TplBucket> order{TplBucket::High, TplBucket::Medium, TplBucket::Low};
            for (std::size_t g = 0; g < 3; ++g) {
                c.require(groups[order[g]].size() == base + (g < extra ? 1 : 0), where + ": wrong bucket size");
            }
            c.require(groups.size() == 3 && b.size() == n, where + ": buckets do not partition the scores");
            std::multiset<std::string> in, out;
            for (const auto& s : scores) in.insert(s.sample_id);
            for (const auto& s : b) out.insert(s.sample_id);
            c.require(in == out, where + ": sample ids changed");
            for (std::size_t g = 0; g + 1 < 3; ++g) {
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (auto* s : groups[order[g]]) lo = std::min(lo, s->tpl);
                for (auto* s : groups[order[g + 1]]) hi = std::max(hi, s->tpl);
                c.require(lo >= hi, where + ": boundary ordering violated");
            }
            // Ties at a boundary are split by sample id.
            for (std::size_t i = 0; i + 1 < b.size(); ++i) {
                if (b[i].tpl == b[i + 1].tpl) c.require(b[i].sample_id < b[i + 1].sample_id, where + ": tie order");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 7. Filters

SubjectTrajectory random_track(Rng& rng, int id) {
    SubjectTrajectory t;
    t.subject_id = id;
    t.category = "obj";
    const int n = static_cast<int>(rng.uniform_int(1, 10));
    for (int k = 0; k < n; ++k) {
        const double w = rng.uniform(0.5, 32), h = rng.uniform(0.5, 32);
        t.entries.push_back({k, {0, 0, w, h}, rng.uniform01(), "", ""});
    }
    return t;
}

std::set<int> ids_of(const std::vector<SubjectTrajectory>& ts) {
    std::set<int> out;
    for (const auto& t : ts) out.insert(t.subject_id);
    return out;
}

std::string lines_of(const std::vector<SubjectTrajectory>& ts) {
    std::string out;
    for (const auto& t : ts) out += serialize_trajectory(t) + "\n";
    return out;
}

void filter_criterion(Check& c) {
    auto single = [](double w, double h) {
        SubjectTrajectory t;
        t.subject_id = 1;
        t.category = "obj";
        t.entries.push_back({0, {0, 0, w, h}, 0.9, "", ""});
        return t;
    };
    c.require(filter_small({single(5, 6)}, 32, 32, 1.0 / 32).empty(), "area-30 entry survived");
    c.require(filter_small({single(3, 11)}, 32, 32, 1.0 / 32).size() == 1, "area-33 entry removed");

    Rng rng(0xF17);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<SubjectTrajectory> ts;
        for (int i = 0; i < 30; ++i) ts.push_back(random_track(rng, i + 1));
        const std::string where = "trial " + std::to_string(trial);
        const double f1 = rng.uniform(0.001, 0.5), f2 = rng.uniform(f1, 0.6);
        const int l1 = static_cast<int>(rng.uniform_int(1, 10)), l2 = static_cast<int>(rng.uniform_int(l1, 11));
        const double s1 = rng.uniform01(), s2 = rng.uniform(s1, 1.0);
        const auto mode = rng.bernoulli(0.5) ? SizeMode::Area : SizeMode::Side;
        const auto rule = rng.bernoulli(0.5) ? EntryRule::Any : EntryRule::All;

        const std::vector<std::pair<std::string, std::function<std::vector<SubjectTrajectory>(
                                                     const std::vector<SubjectTrajectory>&, bool)>>>
            filters{
                {"small", [&](const auto& x, bool high) { return filter_small(x, 32, 32, high ? f2 : f1, mode, rule); }},
                {"short", [&](const auto& x, bool high) { return filter_short(x, high ? l2 : l1); }},
                {"low_conf", [&](const auto& x, bool high) { return filter_low_conf(x, high ? s2 : s1); }},
            };
        for (const auto& [name, f] : filters) {
            const auto once = f(ts, false);
            c.require(lines_of(f(once, false)) == lines_of(once), where + ": " + name + " not idempotent");
            const auto low = ids_of(once), high = ids_of(f(ts, true));
            c.require(std::includes(low.begin(), low.end(), high.begin(), high.end()),
                      where + ": " + name + " not threshold-monotone");
            for (const auto& t : once) {
                c.require(serialize_trajectory(t) == serialize_trajectory(ts[static_cast<std::size_t>(t.subject_id - 1)]),
                          where + ": " + name + " modified a survivor");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 8. End-to-end determinism

void pipeline_criterion(Check& c) {
    const fs::path data = UTR_TEST_DATA;
    const auto cfg = PipelineConfig::from_json(load_config(data / "corpus" / "config.json"));
    const fs::path det = data / "corpus" / "detections.jsonl";
    const fs::path tmp = fs::temp_directory_path() / "utr_acceptance";
    fs::remove_all(tmp);
    const auto a = run_pipeline(cfg, {det}, tmp / "a");
    const auto b = run_pipeline(cfg, {det}, tmp / "b");
    c.require(a["outputs"] == b["outputs"], "output digests differ between runs");
    for (const auto& [name, digest] : a["outputs"].items()) {
        c.require(sha256_file(tmp / "b" / name) == digest.get<std::string>(), name + " digest does not match file");
    }
    const auto golden = nlohmann::ordered_json::parse(read_file(data / "corpus" / "expected_counts.json"));
    c.require(a["counts"] == golden, "counts " + a["counts"].dump() + " differ from golden " + golden.dump());
    c.require(a["counts"]["clips"] == 20, "corpus does not yield 20 clips");
    fs::remove_all(tmp);
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "reward-gap monotonicity and closed form", 1.0, reward_gap_criterion},
        {2, "assignment equals exhaustive search on 1000 matrices", 5.0, assignment_criterion},
        {3, "tracker identity F1 = 1 on 200 disjoint scenes", 10.0, tracker_criterion},
        {4, "answer grammar round trip and tag mutations", 0.0, grammar_criterion},
        {5, "TPL antisymmetry, shift invariance, oracle ordering", 0.0, tpl_criterion},
        {6, "tercile bucketing for 9, 10, 100 scores", 0.0, bucket_criterion},
        {7, "filter cutoffs, idempotence, threshold monotonicity", 0.0, filter_criterion},
        {8, "end-to-end determinism on the bundled corpus", 30.0, pipeline_criterion},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            cr.body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (cr.time_limit_s > 0) {
            check.require(seconds < cr.time_limit_s,
                          "took " + fmt(seconds) + " s, limit " + fmt(cr.time_limit_s) + " s");
        }
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.3f s", seconds);
        std::cout << (check.ok() ? "PASS" : "FAIL") << " criterion " << cr.number << ": " << cr.name << " ("
                  << timing << ")";
        if (!check.ok()) {
            std::cout << " -- " << check.summary();
            ++failed;
        }
        std::cout << '\n';
    }
    std::cout << "SKIP criterion 9 (secondary): scorer bridge is not part of this build; "
                 "oracle scorer and nll fixtures stand in\n";
    std::cout << (failed == 0 ? "all primary criteria passed" : std::to_string(failed) + " primary criteria failed")
              << '\n';
    return failed == 0 ? 0 : 1;
}
