#include "utr/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <openssl/evp.h>

#include "utr/json_util.hpp"
#include "utr/rng.hpp"

namespace utr {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

json default_config() {
    return json::parse(R"({
  "seed": 0,
  "sampler": {
    "count": 16,
    "gap": 3,
    "gap_min": 3,
    "gap_max": 5,
    "clips_per_video": 1,
    "skip_short_videos": true
  },
  "tracker": {
    "high_score_threshold": 0.6,
    "low_score_threshold": 0.1,
    "iou_match_threshold_stage1": 0.5,
    "iou_match_threshold_stage2": 0.5,
    "max_lost_frames": 2,
    "motion": "constant_velocity"
  },
  "filter": {
    "min_area_fraction": 0.03125,
    "size_mode": "area",
    "entry_rule": "any",
    "min_length": 4,
    "min_mean_score": 0.5
  },
  "taskgen": {
    "queries_per_clip": 1,
    "max_subjects": 3,
    "max_query_frames": 2,
    "weight_location": 1.0,
    "weight_appearance": 1.0,
    "weight_action": 1.0,
    "extra_kind_probability": 0.25,
    "temporal_to_spatial_probability": 0.5,
    "templates": "",
    "keyframe_policy": "last"
  },
  "tpl": {
    "source": "none",
    "keyframe_policy": "last",
    "groups": 3,
    "oracle_base_nll": 3.0,
    "oracle_alpha": 0.1,
    "scorer_id": "oracle-v1"
  },
  "rewardgap": {
    "horizons": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    "gammas": [0.5, 0.9, 1.0],
    "policies": ["full", "half", "single"]
  },
  "synth": {
    "videos": 10,
    "frames_per_video": 120,
    "width": 640,
    "height": 480,
    "min_objects": 2,
    "max_objects": 4,
    "jitter": 1.5,
    "max_speed": 4.0,
    "distractor_probability": 0.6,
    "min_area_fraction": 0.03125
  }
})");
}

void merge_config(json& base, const json& patch, const std::string& where) {
    if (!patch.is_object()) throw ConfigError("config" + (where.empty() ? "" : " section '" + where + "'") + " must be an object");
    for (const auto& [key, value] : patch.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        auto it = base.find(key);
        if (it == base.end()) throw ConfigError("unknown config key '" + path + "'");
        if (it->is_object()) {
            merge_config(*it, value, path);
        } else {
            *it = value;
        }
    }
}

json load_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    json file;
    try {
        file = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (file.is_object() && file.contains("config") && file.contains("outputs")) file = file["config"];
    json cfg = default_config();
    merge_config(cfg, file);
    return cfg;
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json patch = value;
    std::string rest = key;
    std::vector<std::string> parts;
    for (std::size_t dot; (dot = rest.find('.')) != std::string::npos; rest = rest.substr(dot + 1)) {
        parts.push_back(rest.substr(0, dot));
    }
    parts.push_back(rest);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
    merge_config(config, patch);
}

namespace {

template <typename T>
T get(const json& j, const char* section, const char* key) {
    try {
        return j.at(section).at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config ") + section + "." + key + ": " + e.what());
    }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    c.raw = j;
    try {
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config seed: ") + e.what());
    }

    c.sampler.count = get<int>(j, "sampler", "count");
    const json& gap = j.at("sampler").at("gap");
    if (gap.is_string()) {
        if (gap.get<std::string>() != "random") throw ConfigError("sampler.gap must be an integer or \"random\"");
        c.sampler.gap = GapPolicy::uniform(get<int>(j, "sampler", "gap_min"), get<int>(j, "sampler", "gap_max"));
    } else {
        c.sampler.gap = GapPolicy::fixed(get<int>(j, "sampler", "gap"));
    }
    c.sampler.clips_per_video = get<int>(j, "sampler", "clips_per_video");
    c.sampler.skip_short_videos = get<bool>(j, "sampler", "skip_short_videos");
    if (c.sampler.clips_per_video < 1) throw ConfigError("sampler.clips_per_video must be >= 1");

    auto& t = c.tracker;
    t.high_score_threshold = get<double>(j, "tracker", "high_score_threshold");
    t.low_score_threshold = get<double>(j, "tracker", "low_score_threshold");
    t.iou_match_threshold_stage1 = get<double>(j, "tracker", "iou_match_threshold_stage1");
    t.iou_match_threshold_stage2 = get<double>(j, "tracker", "iou_match_threshold_stage2");
    t.max_lost_frames = get<int>(j, "tracker", "max_lost_frames");
    const auto motion = get<std::string>(j, "tracker", "motion");
    if (motion == "static") {
        t.motion = MotionModel::Static;
    } else if (motion == "constant_velocity") {
        t.motion = MotionModel::ConstantVelocity;
    } else {
        throw ConfigError("tracker.motion must be static or constant_velocity");
    }
    t.validate();

    auto& f = c.filter;
    f.min_area_fraction = get<double>(j, "filter", "min_area_fraction");
    const auto mode = get<std::string>(j, "filter", "size_mode");
    if (mode != "area" && mode != "side") throw ConfigError("filter.size_mode must be area or side");
    f.size_mode = mode == "area" ? SizeMode::Area : SizeMode::Side;
    const auto rule = get<std::string>(j, "filter", "entry_rule");
    if (rule != "any" && rule != "all") throw ConfigError("filter.entry_rule must be any or all");
    f.entry_rule = rule == "any" ? EntryRule::Any : EntryRule::All;
    f.min_length = get<int>(j, "filter", "min_length");
    f.min_mean_score = get<double>(j, "filter", "min_mean_score");
    f.validate();

    auto& g = c.taskgen;
    g.queries_per_clip = get<int>(j, "taskgen", "queries_per_clip");
    if (g.queries_per_clip < 1) throw ConfigError("taskgen.queries_per_clip must be >= 1");
    g.query.max_subjects = get<int>(j, "taskgen", "max_subjects");
    g.query.max_query_frames = get<int>(j, "taskgen", "max_query_frames");
    g.query.weight_location = get<double>(j, "taskgen", "weight_location");
    g.query.weight_appearance = get<double>(j, "taskgen", "weight_appearance");
    g.query.weight_action = get<double>(j, "taskgen", "weight_action");
    g.query.extra_kind_probability = get<double>(j, "taskgen", "extra_kind_probability");
    g.query.temporal_to_spatial_probability = get<double>(j, "taskgen", "temporal_to_spatial_probability");
    g.query.validate();
    g.templates_path = get<std::string>(j, "taskgen", "templates");
    g.keyframe_policy = parse_keyframe_policy(get<std::string>(j, "taskgen", "keyframe_policy"));

    auto& p = c.tpl;
    const auto source = get<std::string>(j, "tpl", "source");
    if (source == "none") {
        p.source = TplSource::None;
    } else if (source == "file") {
        p.source = TplSource::File;
    } else if (source == "oracle") {
        p.source = TplSource::Oracle;
    } else {
        throw ConfigError("tpl.source must be none, file or oracle");
    }
    p.keyframe_policy = parse_keyframe_policy(get<std::string>(j, "tpl", "keyframe_policy"));
    p.groups = get<int>(j, "tpl", "groups");
    if (p.groups < 1) throw ConfigError("tpl.groups must be >= 1");
    p.oracle_base_nll = get<double>(j, "tpl", "oracle_base_nll");
    p.oracle_alpha = get<double>(j, "tpl", "oracle_alpha");
    p.scorer_id = get<std::string>(j, "tpl", "scorer_id");

    auto& s = c.synth;
    s.videos = get<int>(j, "synth", "videos");
    s.frames_per_video = get<int>(j, "synth", "frames_per_video");
    s.width = get<int>(j, "synth", "width");
    s.height = get<int>(j, "synth", "height");
    s.min_objects = get<int>(j, "synth", "min_objects");
    s.max_objects = get<int>(j, "synth", "max_objects");
    s.jitter = get<double>(j, "synth", "jitter");
    s.max_speed = get<double>(j, "synth", "max_speed");
    s.distractor_probability = get<double>(j, "synth", "distractor_probability");
    s.min_area_fraction = get<double>(j, "synth", "min_area_fraction");
    if (s.videos < 0 || s.min_objects < 1 || s.max_objects < s.min_objects) {
        throw ConfigError("synth object/video counts are inconsistent");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Stages

std::string serialize_report(const Report& r) {
    return ordered_json{{"stage", r.stage}, {"item", r.item}, {"reason", r.reason}}.dump();
}

IngestResult run_ingest(std::vector<FrameRecord> frames, const SamplerParams& params, std::uint64_t seed) {
    IngestResult out;
    std::stable_sort(frames.begin(), frames.end(), [](const FrameRecord& a, const FrameRecord& b) {
        return std::tie(a.video_id, a.frame_index) < std::tie(b.video_id, b.frame_index);
    });
    for (std::size_t i = 0; i < frames.size();) {
        std::size_t end = i;
        while (end < frames.size() && frames[end].video_id == frames[i].video_id) ++end;
        const std::string& video = frames[i].video_id;
        const std::int64_t total = frames[end - 1].frame_index + 1;
        for (int k = 0; k < params.clips_per_video; ++k) {
            const std::string clip_id = video + "#c" + std::to_string(k);
            const std::uint64_t clip_seed = derive_seed(seed, "sample_clip", clip_id);
            try {
                ClipRecord rec{sample_clip(total, params.count, params.gap, clip_seed), frames[i].width,
                               frames[i].height};
                rec.clip.video_id = video;
                rec.clip.clip_id = clip_id;
                out.clips.push_back(std::move(rec));
            } catch (const Error& e) {
                if (!params.skip_short_videos) throw Error("video '" + video + "': " + e.what());
                out.reports.push_back({"ingest", clip_id, e.what()});
            }
        }
        i = end;
    }
    out.frames = std::move(frames);
    return out;
}

namespace {

std::map<std::string, std::vector<FrameRecord>> group_by_video(const std::vector<FrameRecord>& frames) {
    std::map<std::string, std::vector<FrameRecord>> out;
    for (const auto& f : frames) out[f.video_id].push_back(f);
    return out;
}

std::map<std::string, std::vector<SubjectTrajectory>> group_by_clip(const std::vector<SubjectTrajectory>& tracks) {
    std::map<std::string, std::vector<SubjectTrajectory>> out;
    for (const auto& t : tracks) out[t.clip_id].push_back(t);
    return out;
}

}  // namespace

std::vector<SubjectTrajectory> run_track(const std::vector<FrameRecord>& frames,
                                         const std::vector<ClipRecord>& clips, const TrackerParams& params) {
    const auto videos = group_by_video(frames);
    std::vector<SubjectTrajectory> out;
    for (const auto& rec : clips) {
        auto it = videos.find(rec.clip.video_id);
        if (it == videos.end()) throw Error("clip '" + rec.clip.clip_id + "': video has no frames");
        try {
            auto tracks = associate(clip_frames(it->second, rec.clip), params);
            for (auto& t : tracks) {
                t.clip_id = rec.clip.clip_id;
                out.push_back(std::move(t));
            }
        } catch (const Error& e) {
            throw Error("clip '" + rec.clip.clip_id + "': " + e.what());
        }
    }
    return out;
}

FilterStageResult run_filter(const std::vector<SubjectTrajectory>& tracks, const std::vector<ClipRecord>& clips,
                             const FilterParams& params) {
    std::map<std::string, const ClipRecord*> by_id;
    for (const auto& c : clips) by_id[c.clip.clip_id] = &c;
    FilterStageResult out;
    // Keep input order; each trajectory is judged against its own clip's frame size.
    for (const auto& t : tracks) {
        auto it = by_id.find(t.clip_id);
        if (it == by_id.end()) throw Error("trajectory " + std::to_string(t.subject_id) + ": unknown clip '" + t.clip_id + "'");
        FilterResult r = apply_filters({t}, it->second->width, it->second->height, params);
        for (auto& k : r.kept) out.kept.push_back(std::move(k));
        for (auto& rm : r.removed) out.removed.push_back(std::move(rm));
    }
    return out;
}

TaskgenResult run_gen_tasks(const std::vector<SubjectTrajectory>& tracks, const std::vector<ClipRecord>& clips,
                            const TaskgenParams& params, std::uint64_t seed) {
    const TemplateSet templates =
        params.templates_path.empty() ? default_templates() : parse_templates(read_file(params.templates_path));
    const auto by_clip = group_by_clip(tracks);
    TaskgenResult out;
    for (const auto& rec : clips) {
        const ClipContext ctx{rec.clip, rec.width, rec.height};
        auto it = by_clip.find(rec.clip.clip_id);
        static const std::vector<SubjectTrajectory> kNone;
        const auto& clip_tracks = it == by_clip.end() ? kNone : it->second;
        for (int q = 0; q < params.queries_per_clip; ++q) {
            const std::string id = rec.clip.clip_id + "#q" + std::to_string(q);
            try {
                const auto query = sample_query(clip_tracks, ctx, params.query, derive_seed(seed, "sample_query", id));
                if (!query) {
                    out.reports.push_back({"gen-tasks", id, "no trajectories survived filtering"});
                    break;
                }
                ConversationRecord r = build_conversation(clip_tracks, ctx, *query, templates, id);
                verify_conversation(r, clip_tracks, ctx);
                out.jobs.push_back(make_scoring_job(r, clip_tracks, ctx, params.keyframe_policy));
                out.records.push_back(std::move(r));
            } catch (const Error& e) {
                throw Error("record '" + id + "': " + e.what());
            }
        }
    }
    return out;
}

std::vector<NllRecord> oracle_score_conversations(const std::vector<ConversationRecord>& records,
                                                  const TplParams& params) {
    std::vector<NllRecord> out;
    for (const auto& r : records) {
        const int length = static_cast<int>(r.clip_frames.size());
        std::size_t boxes = 0;
        for (const auto& s : parse_answer(r.answer).subjects) boxes += s.frames.size();
        const double density = static_cast<double>(boxes) / length;
        const int keyframe = scoring_keyframe(r, params.keyframe_policy);
        const OracleScorerConfig cfg{params.oracle_base_nll, params.oracle_alpha, length};
        for (auto& n : oracle_records(r.id, density, keyframe, cfg, params.scorer_id)) out.push_back(std::move(n));
    }
    return out;
}

TplStageResult run_tpl(const std::vector<NllRecord>& records, const TplParams& params, std::uint64_t seed) {
    PairingResult paired = pair_and_score(records, params.keyframe_policy, seed);
    TplStageResult out;
    out.reports = std::move(paired.reports);
    if (paired.scores.size() >= static_cast<std::size_t>(params.groups)) {
        out.scores = bucketize(std::move(paired.scores), params.groups);
    } else {
        for (const auto& s : paired.scores) out.reports.push_back({s.sample_id, "too few scores to bucket"});
        out.scores = std::move(paired.scores);
    }
    return out;
}

SynthCorpus synth_corpus(const SynthCorpusParams& params, std::uint64_t seed) {
    SynthCorpus corpus;
    for (int v = 0; v < params.videos; ++v) {
        char name[32];
        std::snprintf(name, sizeof name, "synth_%03d", v);
        const std::string video_id = name;
        Rng rng(derive_seed(seed, "synth_corpus", video_id));
        const int objects = static_cast<int>(rng.uniform_int(params.min_objects, params.max_objects));
        const bool distractor = rng.bernoulli(params.distractor_probability);

        DisjointLayout layout;
        layout.num_objects = objects + (distractor ? 1 : 0);
        layout.num_frames = params.frames_per_video;
        layout.width = params.width;
        layout.height = params.height;
        layout.jitter = params.jitter;
        layout.max_speed = params.max_speed;
        layout.min_area_fraction = params.min_area_fraction;
        layout.seed = seed;
        layout.video_id = video_id;
        SyntheticSceneConfig cfg = disjoint_scene_config(layout);

        if (distractor) {
            SyntheticObject& o = cfg.objects.back();
            switch (rng.index(3)) {
                case 0:  // 1/128 of a 640x480 frame
                    o.start.x2 = o.start.x1 + 60;
                    o.start.y2 = o.start.y1 + 40;
                    o.vx = o.vy = 0;
                    break;
                case 1: {  // visible for a handful of frames only
                    o.first_frame = static_cast<int>(rng.uniform_int(0, params.frames_per_video - 8));
                    o.last_frame = o.first_frame + 5;
                    break;
                }
                default:  // weak detector confidence
                    o.score_min = 0.2;
                    o.score_max = 0.65;
                    break;
            }
        }
        SyntheticScene scene = synth_scene(cfg);
        for (auto& f : scene.frames) corpus.frames.push_back(std::move(f));
        for (auto& t : scene.truth) corpus.truth.push_back(std::move(t));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Files

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------

namespace {

class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        write_file_atomic(dir_ / name, content);
        written_.push_back(name);
        digests_[name] = sha256_hex(content);
    }

    void remove_all() {
        for (const auto& name : written_) {
            std::error_code ec;
            fs::remove(dir_ / name, ec);
        }
        written_.clear();
        digests_.clear();
    }

    ordered_json digests() const {
        ordered_json j = ordered_json::object();
        for (const auto& name : written_) j[name] = digests_.at(name);
        return j;
    }

private:
    fs::path dir_;
    std::vector<std::string> written_;
    std::map<std::string, std::string> digests_;
};

}  // namespace

ordered_json run_pipeline(const PipelineConfig& config, const std::vector<fs::path>& inputs, const fs::path& out_dir) {
    if (inputs.empty()) throw Error("run: a detections file is required");
    for (const auto& p : inputs) {
        if (!fs::exists(p)) throw Error("input not found: " + p.string());
    }
    if (config.tpl.source == TplSource::File && inputs.size() < 2) {
        throw Error("run: tpl.source = file needs an nll file as second input");
    }

    ordered_json manifest;
    manifest["tool"] = "utr";
    manifest["version"] = kToolVersion;
    manifest["seed"] = config.seed;
    manifest["config"] = config.raw;
    ordered_json in = ordered_json::array();
    for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    manifest["inputs"] = in;

    fs::create_directories(out_dir);
    OutputSet outputs(out_dir);
    ordered_json counts;
    std::string stage = "ingest";
    try {
        std::vector<FrameRecord> parsed;
        {
            std::ifstream det(inputs[0]);
            parsed = parse_detections(det);
        }
        IngestResult ingest = run_ingest(std::move(parsed), config.sampler, config.seed);
        outputs.write("frames.jsonl", to_lines(ingest.frames, serialize_frame));
        outputs.write("clips.jsonl", to_lines(ingest.clips, [](const ClipRecord& c) {
                          return serialize_clip(c.clip, c.width, c.height);
                      }));
        outputs.write("ingest_report.jsonl", to_lines(ingest.reports, serialize_report));
        std::set<std::string> videos;
        for (const auto& f : ingest.frames) videos.insert(f.video_id);
        counts["videos"] = videos.size();
        counts["frames"] = ingest.frames.size();
        counts["clips"] = ingest.clips.size();
        counts["clips_skipped"] = ingest.reports.size();

        stage = "track";
        const auto tracks = run_track(ingest.frames, ingest.clips, config.tracker);
        outputs.write("tracks.jsonl", to_lines(tracks, serialize_trajectory));
        counts["trajectories"] = tracks.size();

        stage = "filter";
        const auto filtered = run_filter(tracks, ingest.clips, config.filter);
        outputs.write("tracks.filtered.jsonl", to_lines(filtered.kept, serialize_trajectory));
        outputs.write("filter_report.jsonl", to_lines(filtered.removed, serialize_removal));
        std::map<std::string, std::size_t> removed{{"small", 0}, {"short", 0}, {"low_conf", 0}};
        for (const auto& r : filtered.removed) ++removed[to_string(r.reason)];
        counts["trajectories_kept"] = filtered.kept.size();
        counts["removed_small"] = removed["small"];
        counts["removed_short"] = removed["short"];
        counts["removed_low_conf"] = removed["low_conf"];

        stage = "gen-tasks";
        const auto tasks = run_gen_tasks(filtered.kept, ingest.clips, config.taskgen, config.seed);
        outputs.write("conversations.jsonl", to_lines(tasks.records, serialize_conversation));
        outputs.write("scoring_jobs.jsonl", to_lines(tasks.jobs, serialize_scoring_job));
        outputs.write("taskgen_report.jsonl", to_lines(tasks.reports, serialize_report));
        counts["conversations"] = tasks.records.size();
        counts["conversations_skipped"] = tasks.reports.size();

        if (config.tpl.source != TplSource::None) {
            stage = "tpl";
            std::vector<NllRecord> nll;
            if (config.tpl.source == TplSource::Oracle) {
                nll = oracle_score_conversations(tasks.records, config.tpl);
                outputs.write("nll.jsonl", to_lines(nll, serialize_nll));
            } else {
                std::ifstream nf(inputs[1]);
                nll = parse_nll(nf);
            }
            const auto tpl = run_tpl(nll, config.tpl, config.seed);
            outputs.write("tpl.jsonl", to_lines(tpl.scores, serialize_tpl));
            outputs.write("tpl_report.jsonl", to_lines(tpl.reports, [](const PairingReport& r) {
                              return ordered_json{{"sample_id", r.sample_id}, {"reason", r.reason}}.dump();
                          }));
            std::map<TplBucket, std::size_t> per;
            for (const auto& s : tpl.scores) ++per[s.bucket];
            counts["tpl_scores"] = tpl.scores.size();
            counts["tpl_high"] = per[TplBucket::High];
            counts["tpl_medium"] = per[TplBucket::Medium];
            counts["tpl_low"] = per[TplBucket::Low];
            counts["tpl_unpaired"] = tpl.reports.size();
        }
    } catch (const std::exception& e) {
        outputs.remove_all();
        manifest["status"] = "failed";
        manifest["failed_stage"] = stage;
        manifest["error"] = e.what();
        write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
        throw Error("stage '" + stage + "' failed: " + e.what());
    }

    manifest["status"] = "ok";
    manifest["counts"] = counts;
    manifest["outputs"] = outputs.digests();
    write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace utr
