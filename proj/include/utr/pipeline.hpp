#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "utr/filter.hpp"
#include "utr/ingest.hpp"
#include "utr/synth.hpp"
#include "utr/taskgen.hpp"
#include "utr/tpl.hpp"
#include "utr/tracker.hpp"

namespace utr {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration: one JSON object with a section per stage. default_config()
// holds every default; files and --set overrides may only touch known keys.

nlohmann::json default_config();

/// Loads a config file (or a run manifest, whose "config" member is used)
/// and merges it over the defaults.
nlohmann::json load_config(const std::filesystem::path& path);

/// Merges `patch` into `base`, rejecting keys absent from `base`.
void merge_config(nlohmann::json& base, const nlohmann::json& patch, const std::string& where = "");

/// Applies "stage.key=value". The value is read as JSON when it parses,
/// otherwise as a plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

struct SamplerParams {
    int count = 16;
    GapPolicy gap = GapPolicy::fixed(3);
    int clips_per_video = 1;
    bool skip_short_videos = true;
};

struct TaskgenParams {
    QueryConfig query;
    int queries_per_clip = 1;
    std::string templates_path;
    KeyframePolicy keyframe_policy = KeyframePolicy::Last;
};

enum class TplSource { None, File, Oracle };

struct TplParams {
    TplSource source = TplSource::None;
    KeyframePolicy keyframe_policy = KeyframePolicy::Last;
    int groups = 3;
    double oracle_base_nll = 3.0;
    double oracle_alpha = 0.1;
    std::string scorer_id = "oracle-v1";
};

struct SynthCorpusParams {
    int videos = 10;
    int frames_per_video = 120;
    int width = 640;
    int height = 480;
    int min_objects = 2;
    int max_objects = 4;
    double jitter = 1.5;
    double max_speed = 4.0;
    /// Chance that a video carries one extra small, short-lived, or
    /// low-confidence object.
    double distractor_probability = 0.6;
    /// Regular objects are sized to pass a size filter at this fraction.
    double min_area_fraction = 1.0 / 32;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    SamplerParams sampler;
    TrackerParams tracker;
    FilterParams filter;
    TaskgenParams taskgen;
    TplParams tpl;
    SynthCorpusParams synth;
    nlohmann::json raw;

    static PipelineConfig from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Stages. Each is a pure function of its inputs and the run seed.

struct Report {
    std::string stage;
    std::string item;
    std::string reason;
};

std::string serialize_report(const Report& r);

struct IngestResult {
    std::vector<FrameRecord> frames;
    std::vector<ClipRecord> clips;
    std::vector<Report> reports;
};

IngestResult run_ingest(std::vector<FrameRecord> frames, const SamplerParams& params, std::uint64_t seed);

std::vector<SubjectTrajectory> run_track(const std::vector<FrameRecord>& frames,
                                         const std::vector<ClipRecord>& clips, const TrackerParams& params);

struct FilterStageResult {
    std::vector<SubjectTrajectory> kept;
    std::vector<Removal> removed;
};

FilterStageResult run_filter(const std::vector<SubjectTrajectory>& tracks, const std::vector<ClipRecord>& clips,
                             const FilterParams& params);

struct TaskgenResult {
    std::vector<ConversationRecord> records;
    std::vector<ScoringJob> jobs;
    std::vector<Report> reports;
};

TaskgenResult run_gen_tasks(const std::vector<SubjectTrajectory>& tracks, const std::vector<ClipRecord>& clips,
                            const TaskgenParams& params, std::uint64_t seed);

/// Oracle NLL records for generated conversations: density is the number of
/// answer boxes per clip frame.
std::vector<NllRecord> oracle_score_conversations(const std::vector<ConversationRecord>& records,
                                                  const TplParams& params);

struct TplStageResult {
    std::vector<TplScore> scores;
    std::vector<PairingReport> reports;
};

TplStageResult run_tpl(const std::vector<NllRecord>& records, const TplParams& params, std::uint64_t seed);

struct SynthCorpus {
    std::vector<FrameRecord> frames;
    std::vector<SubjectTrajectory> truth;
};

SynthCorpus synth_corpus(const SynthCorpusParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Files

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

template <typename T, typename Fn>
std::string to_lines(const std::vector<T>& items, Fn&& serialize) {
    std::string out;
    for (const auto& item : items) {
        out += serialize(item);
        out += '\n';
    }
    return out;
}

/// Runs ingest -> track -> filter -> gen-tasks (-> tpl) and writes every
/// stage output plus manifest.json into `out_dir`. `inputs[0]` is the
/// detections file; with tpl.source = "file", `inputs[1]` is the nll file.
/// Returns the manifest. On a stage failure the outputs written so far are
/// removed, a failed manifest is written, and the error is rethrown.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config, const std::vector<std::filesystem::path>& inputs,
                                    const std::filesystem::path& out_dir);

}  // namespace utr
