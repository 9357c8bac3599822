#include "utr/tpl.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

#include "utr/json_util.hpp"
#include "utr/rng.hpp"

namespace utr {

using json_util::Json;
using json_util::OrderedJson;

std::string ContextMode::str() const { return full ? "full" : "single:" + std::to_string(position); }

ContextMode ContextMode::parse(std::string_view s) {
    if (s == "full") return whole();
    constexpr std::string_view prefix = "single:";
    if (s.substr(0, prefix.size()) == prefix) {
        const std::string_view digits = s.substr(prefix.size());
        if (!digits.empty() && digits.size() <= 9 && digits.front() != '0' &&
            std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return single(std::stoi(std::string(digits)));
        }
    }
    throw Error("invalid context '" + std::string(s) + "', expected full or single:<position>");
}

const char* to_string(TplBucket b) noexcept {
    switch (b) {
        case TplBucket::High: return "high";
        case TplBucket::Medium: return "medium";
        case TplBucket::Low: return "low";
        case TplBucket::Unassigned: return "unassigned";
    }
    return "unassigned";
}

int bucket_level(TplBucket b) noexcept {
    switch (b) {
        case TplBucket::High: return 3;
        case TplBucket::Medium: return 2;
        case TplBucket::Low: return 1;
        case TplBucket::Unassigned: return 0;
    }
    return 0;
}

void OracleScorerConfig::validate(double density) const {
    if (!(base_nll > 0)) throw ConfigError("oracle base_nll must be positive");
    if (!(alpha > 0)) throw ConfigError("oracle alpha must be positive");
    if (clip_length < 1) throw ConfigError("oracle clip_length must be >= 1");
    if (density < 0) throw ConfigError("oracle density must be non-negative");
    if (base_nll - alpha * density < 0) throw ConfigError("oracle NLL would go negative");
}

double oracle_nll(double density, const ContextMode& mode, const OracleScorerConfig& config) {
    config.validate(density);
    const double coverage = mode.full ? 1.0 : 1.0 / config.clip_length;
    return config.base_nll - config.alpha * coverage * density;
}

std::vector<NllRecord> oracle_records(const std::string& sample_id, double density, int keyframe,
                                      const OracleScorerConfig& config, const std::string& scorer_id) {
    const ContextMode single = ContextMode::single(keyframe);
    return {
        {sample_id, ContextMode::whole(), oracle_nll(density, ContextMode::whole(), config), 1, scorer_id},
        {sample_id, single, oracle_nll(density, single, config), 1, scorer_id},
    };
}

PairingResult pair_and_score(const std::vector<NllRecord>& records, KeyframePolicy policy,
                             std::uint64_t seed) {
    PairingResult result;
    if (records.empty()) return result;

    const std::string& scorer = records.front().scorer_id;
    std::map<std::string, std::map<ContextMode, const NllRecord*>> by_sample;
    for (const auto& r : records) {
        if (r.scorer_id != scorer) {
            throw Error("mixed scorer ids '" + scorer + "' and '" + r.scorer_id + "' in one tpl run");
        }
        if (!by_sample[r.sample_id].emplace(r.context, &r).second) {
            throw Error("duplicate record for sample '" + r.sample_id + "' context " + r.context.str());
        }
    }

    for (const auto& [id, modes] : by_sample) {
        const NllRecord* full = nullptr;
        std::vector<const NllRecord*> singles;
        for (const auto& [mode, rec] : modes) {
            if (mode.full) {
                full = rec;
            } else {
                singles.push_back(rec);  // ascending position
            }
        }
        if (!full || singles.empty()) {
            result.reports.push_back({id, full ? "missing single-frame record" : "missing full record"});
            continue;
        }
        std::size_t chosen = singles.size() - 1;
        if (policy == KeyframePolicy::Random) {
            Rng rng(derive_seed(seed, "keyframe", id));
            chosen = static_cast<std::size_t>(rng.index(singles.size()));
        }
        for (std::size_t i = 0; i < singles.size(); ++i) {
            if (i != chosen) {
                result.reports.push_back({id, "unused " + singles[i]->context.str() + " record"});
            }
        }
        TplScore s;
        s.sample_id = id;
        s.tpl = tpl_score(full->mean_nll, singles[chosen]->mean_nll);
        s.scorer_id = scorer;
        s.keyframe = singles[chosen]->context.position;
        result.scores.push_back(std::move(s));
    }
    return result;
}

std::vector<std::size_t> bucket_sizes(std::size_t n, int groups) {
    if (groups < 1) throw Error("bucket count must be positive");
    const auto g = static_cast<std::size_t>(groups);
    std::vector<std::size_t> sizes(g, n / g);
    for (std::size_t i = 0; i < n % g; ++i) ++sizes[i];
    return sizes;
}

std::vector<TplScore> bucketize(std::vector<TplScore> scores, int groups) {
    if (groups < 1) throw Error("bucket count must be positive");
    if (scores.size() < static_cast<std::size_t>(groups)) {
        throw Error("cannot split " + std::to_string(scores.size()) + " scores into " +
                    std::to_string(groups) + " groups");
    }
    std::sort(scores.begin(), scores.end(), [](const TplScore& a, const TplScore& b) {
        if (a.tpl != b.tpl) return a.tpl > b.tpl;
        return a.sample_id < b.sample_id;
    });
    static constexpr TplBucket kLabels[] = {TplBucket::High, TplBucket::Medium, TplBucket::Low};
    std::size_t at = 0;
    const auto sizes = bucket_sizes(scores.size(), groups);
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        for (std::size_t i = 0; i < sizes[g]; ++i, ++at) {
            scores[at].level = groups - static_cast<int>(g);
            scores[at].bucket = groups == 3 ? kLabels[g] : TplBucket::Unassigned;
        }
    }
    return scores;
}

std::vector<SubsetStats> subset_stats(const std::vector<TplScore>& scores,
                                      const std::map<std::string, std::string>& tags) {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& s : scores) {
        auto it = tags.find(s.sample_id);
        if (it == tags.end()) throw Error("scored sample '" + s.sample_id + "' has no subset tag");
        groups[it->second].push_back(s.tpl);
    }
    std::vector<SubsetStats> out;
    for (const auto& [name, values] : groups) {
        SubsetStats st;
        st.subset = name;
        st.count = values.size();
        double sum = 0;
        for (double v : values) sum += v;
        st.mean = sum / static_cast<double>(values.size());
        double ss = 0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        st.stdev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        st.min = *std::min_element(values.begin(), values.end());
        st.max = *std::max_element(values.begin(), values.end());
        out.push_back(std::move(st));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SubsetStats& a, const SubsetStats& b) { return a.mean > b.mean; });
    return out;
}

// ---------------------------------------------------------------------------

NllRecord parse_nll_line(const std::string& text, std::size_t line) {
    const Json j = json_util::parse_object(text, line);
    NllRecord r;
    r.sample_id = json_util::get_string(j, "sample_id", line);
    try {
        r.context = ContextMode::parse(json_util::get_string(j, "context", line));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(line, "context", e.what());
    }
    if (!r.context.full && r.context.position < 1) throw ParseError(line, "context", "position must be >= 1");
    r.mean_nll = json_util::get_number(j, "mean_nll", line);
    if (!(r.mean_nll >= 0) || !std::isfinite(r.mean_nll)) throw ParseError(line, "mean_nll", "must be finite and >= 0");
    r.token_count = json_util::get_int(j, "token_count", line);
    if (r.token_count < 1) throw ParseError(line, "token_count", "must be positive");
    r.scorer_id = json_util::get_string(j, "scorer_id", line);
    return r;
}

std::vector<NllRecord> parse_nll(std::istream& in) {
    std::vector<NllRecord> out;
    json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
        out.push_back(parse_nll_line(text, line));
    });
    return out;
}

std::string serialize_nll(const NllRecord& r) {
    OrderedJson j{{"sample_id", r.sample_id},
                  {"context", r.context.str()},
                  {"mean_nll", r.mean_nll},
                  {"token_count", r.token_count},
                  {"scorer_id", r.scorer_id}};
    return j.dump();
}

std::string serialize_tpl(const TplScore& s) {
    OrderedJson j{{"sample_id", s.sample_id},
                  {"tpl", s.tpl},
                  {"bucket", to_string(s.bucket)},
                  {"scorer_id", s.scorer_id}};
    return j.dump();
}

TplScore parse_tpl_line(const std::string& text, std::size_t line) {
    const Json j = json_util::parse_object(text, line);
    TplScore s;
    s.sample_id = json_util::get_string(j, "sample_id", line);
    s.tpl = json_util::get_number(j, "tpl", line);
    const std::string bucket = json_util::get_string_or(j, "bucket", line, "unassigned");
    if (bucket == "high") {
        s.bucket = TplBucket::High;
    } else if (bucket == "medium") {
        s.bucket = TplBucket::Medium;
    } else if (bucket == "low") {
        s.bucket = TplBucket::Low;
    } else if (bucket != "unassigned") {
        throw ParseError(line, "bucket", "expected high, medium or low");
    }
    s.level = bucket_level(s.bucket);
    s.scorer_id = json_util::get_string_or(j, "scorer_id", line, "");
    return s;
}

std::vector<TplScore> parse_tpl(std::istream& in) {
    std::vector<TplScore> out;
    json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
        out.push_back(parse_tpl_line(text, line));
    });
    return out;
}

std::map<std::string, std::string> parse_tags(std::istream& in) {
    std::map<std::string, std::string> tags;
    json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
        const Json j = json_util::parse_object(text, line);
        tags[json_util::get_string(j, "sample_id", line)] = json_util::get_string(j, "subset", line);
    });
    return tags;
}

}  // namespace utr
