#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "utr/ingest.hpp"
#include "utr/tracker.hpp"

namespace utr {

enum class AttributeKind { Location, Appearance, Action };
enum class QueryDirection { SpatialToTemporal, TemporalToSpatial };

const char* to_string(AttributeKind k) noexcept;
const char* to_string(QueryDirection d) noexcept;
AttributeKind parse_attribute_kind(std::string_view s);
QueryDirection parse_direction(std::string_view s);

/// A clip together with the frame geometry needed to normalize boxes.
struct ClipContext {
    ClipSpec clip;
    int width = 0;
    int height = 0;

    /// 1-based position of a raw frame index inside the clip, 0 if absent.
    int position_of(std::int64_t frame_index) const;
};

/// Which subjects, frames and attributes form the query side of a sample.
/// Ids, frames (1-based clip positions) and kinds are kept sorted.
struct QuerySpec {
    std::string clip_id;
    std::vector<int> subject_ids;
    std::vector<int> query_frames;
    std::vector<AttributeKind> attribute_kinds;
    QueryDirection direction = QueryDirection::SpatialToTemporal;
    std::uint64_t seed = 0;

    friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

struct QueryConfig {
    int max_subjects = 3;
    int max_query_frames = 2;
    double weight_location = 1.0;
    double weight_appearance = 1.0;
    double weight_action = 1.0;
    /// Chance that each further present kind joins the primary one.
    double extra_kind_probability = 0.25;
    double temporal_to_spatial_probability = 0.5;

    void validate() const;
};

/// Draws a query over the clip's trajectories. Returns nullopt when the clip
/// has no trajectories. Query frames are drawn from positions where every
/// chosen subject is present; when none exist the last drawn subject is
/// dropped and the search repeats.
std::optional<QuerySpec> sample_query(const std::vector<SubjectTrajectory>& tracks,
                                      const ClipContext& ctx, const QueryConfig& config,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Box payload: corners normalized to integers in [0, 1000], round half up.

struct NormalizedBox {
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    friend bool operator==(const NormalizedBox&, const NormalizedBox&) = default;
};

NormalizedBox normalize_box(const BoundingBox& box, int width, int height);
std::string serialize_box(const BoundingBox& box, int width, int height);

// ---------------------------------------------------------------------------
// Answer grammar
//
//   answer   := [prefix ", "] block (", " block)*
//   block    := category "<id" N ">" frame (";" frame)* "</id" N ">"
//   frame    := "Frame" P ":<box>[" I "," I "," I "," I "]</box>"
//
// Subject ids ascend across blocks and frame positions ascend within one.

std::string render_answer(const std::vector<SubjectTrajectory>& tracks, const ClipContext& ctx,
                          const QuerySpec& query);

struct ParsedSubject {
    std::string category;
    int subject_id = 0;
    std::map<int, NormalizedBox> frames;

    friend bool operator==(const ParsedSubject&, const ParsedSubject&) = default;
};

struct ParsedAnswer {
    std::string prefix;
    std::vector<ParsedSubject> subjects;
};

/// Strict inverse of render_answer. Throws GrammarError with a byte offset.
ParsedAnswer parse_answer(std::string_view answer);

/// The (subject, frame, box) content an answer for `query` must carry.
std::vector<ParsedSubject> answer_projection(const std::vector<SubjectTrajectory>& tracks,
                                             const ClipContext& ctx, const QuerySpec& query);

// ---------------------------------------------------------------------------
// Conversations

/// Question templates. Cue templates describe one subject at one query frame
/// and may use {category} {frame} {box} {caption} {action}; question templates
/// wrap the joined cues through {cues} and {frames}.
struct TemplateSet {
    std::string system_prompt;
    std::map<AttributeKind, std::vector<std::string>> cues;
    std::map<QueryDirection, std::vector<std::string>> questions;

    void validate() const;
};

TemplateSet default_templates();
TemplateSet parse_templates(const std::string& json_text);
std::string serialize_templates(const TemplateSet& templates);

/// Replaces every {name} in `tmpl`. Throws Error naming the placeholder when a
/// value is missing or empty.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct ConversationRecord {
    std::string id;
    std::string video_id;
    std::vector<std::int64_t> clip_frames;
    std::string system_prompt;
    std::string question;
    std::string answer;
    QuerySpec query;
    std::uint64_t seed = 0;
};

ConversationRecord build_conversation(const std::vector<SubjectTrajectory>& tracks,
                                      const ClipContext& ctx, const QuerySpec& query,
                                      const TemplateSet& templates, const std::string& id);

/// Checks the answer round-trips to the query projection; throws on mismatch.
void verify_conversation(const ConversationRecord& record, const std::vector<SubjectTrajectory>& tracks,
                         const ClipContext& ctx);

std::string serialize_conversation(const ConversationRecord& r);
ConversationRecord parse_conversation_line(const std::string& text, std::size_t line);

// ---------------------------------------------------------------------------
// Scoring jobs for an external language-model scorer

enum class KeyframePolicy { Last, Random };

KeyframePolicy parse_keyframe_policy(std::string_view s);
const char* to_string(KeyframePolicy p) noexcept;

struct ScoringJob {
    std::string sample_id;
    std::string target;
    std::string context_full;
    std::string context_single;
    /// Clip position described by context_single.
    int keyframe = 0;
};

/// Keyframe position (1-based) for a record's single-frame context.
int scoring_keyframe(const ConversationRecord& record, KeyframePolicy policy);

/// Text-proxy contexts for one record: every clip frame's subject attributes,
/// and the same for a single keyframe chosen by `policy`.
ScoringJob make_scoring_job(const ConversationRecord& record, const std::vector<SubjectTrajectory>& tracks,
                            const ClipContext& ctx, KeyframePolicy policy);

std::string serialize_scoring_job(const ScoringJob& job);

}  // namespace utr
