#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "utr/taskgen.hpp"

namespace utr {

/// Conditioning used when a sample's mean NLL was measured: the whole clip,
/// or a single frame at 1-based position `position`.
struct ContextMode {
    bool full = true;
    int position = 0;

    static ContextMode whole() { return {true, 0}; }
    static ContextMode single(int p) { return {false, p}; }

    std::string str() const;
    static ContextMode parse(std::string_view s);

    friend bool operator==(const ContextMode&, const ContextMode&) = default;
    friend auto operator<=>(const ContextMode&, const ContextMode&) = default;
};

/// Mean per-token negative log-likelihood (natural log) of one sample's text.
struct NllRecord {
    std::string sample_id;
    ContextMode context;
    double mean_nll = 0;
    std::int64_t token_count = 1;
    std::string scorer_id;
};

enum class TplBucket { High, Medium, Low, Unassigned };

const char* to_string(TplBucket b) noexcept;
/// Level used in human-consistency tables: high 3, medium 2, low 1.
int bucket_level(TplBucket b) noexcept;

struct TplScore {
    std::string sample_id;
    double tpl = 0;
    TplBucket bucket = TplBucket::Unassigned;
    /// 1-based group rank from the bottom (groups .. 1); 0 before bucketing.
    int level = 0;
    std::string scorer_id;
    /// Frame position of the single-frame record that was used.
    int keyframe = 0;
};

/// Temporal perplexity: how much the full clip lowers the text's NLL compared
/// with one frame. Positive when the whole clip helps.
constexpr double tpl_score(double nll_full, double nll_single) noexcept { return nll_single - nll_full; }

/// Synthetic scorer: NLL falls linearly with the information the context
/// covers, mean_nll = base_nll - alpha * coverage * density, where coverage is
/// 1 for the full clip and 1/clip_length for a single frame.
struct OracleScorerConfig {
    double base_nll = 3.0;
    double alpha = 0.1;
    int clip_length = 16;

    void validate(double density) const;
};

double oracle_nll(double density, const ContextMode& mode, const OracleScorerConfig& config);

/// Both records of an oracle-scored sample (full, then single at `keyframe`).
std::vector<NllRecord> oracle_records(const std::string& sample_id, double density, int keyframe,
                                      const OracleScorerConfig& config, const std::string& scorer_id);

struct PairingReport {
    std::string sample_id;
    std::string reason;
};

struct PairingResult {
    std::vector<TplScore> scores;
    std::vector<PairingReport> reports;
};

/// Pairs each sample's full record with its single-frame record and scores
/// them. Samples lacking either mode are reported. When several single
/// records exist, the keyframe policy picks one (last: highest position;
/// random: seeded by sample id) and the rest are reported.
/// Throws on duplicate (sample_id, context) or on mixed scorer ids.
PairingResult pair_and_score(const std::vector<NllRecord>& records,
                             KeyframePolicy policy = KeyframePolicy::Last, std::uint64_t seed = 0);

/// Sorts by TPL descending (ties by sample_id ascending) and splits into
/// `groups` contiguous parts, earlier parts taking the remainder.
/// Three groups are labeled high/medium/low.
std::vector<TplScore> bucketize(std::vector<TplScore> scores, int groups = 3);

/// Size of each bucket for `n` items in `groups` parts.
std::vector<std::size_t> bucket_sizes(std::size_t n, int groups);

struct SubsetStats {
    std::string subset;
    std::size_t count = 0;
    double mean = 0;
    /// Sample standard deviation (n - 1 denominator); 0 for a single item.
    double stdev = 0;
    double min = 0;
    double max = 0;
};

/// Per-subset statistics ordered by mean descending (ties by name).
std::vector<SubsetStats> subset_stats(const std::vector<TplScore>& scores,
                                      const std::map<std::string, std::string>& tags);

// ---------------------------------------------------------------------------
// nll / tpl files

NllRecord parse_nll_line(const std::string& text, std::size_t line);
std::vector<NllRecord> parse_nll(std::istream& in);
std::string serialize_nll(const NllRecord& r);

std::string serialize_tpl(const TplScore& s);
TplScore parse_tpl_line(const std::string& text, std::size_t line);
std::vector<TplScore> parse_tpl(std::istream& in);

/// Lines of {"sample_id": str, "subset": str}.
std::map<std::string, std::string> parse_tags(std::istream& in);

}  // namespace utr
