// utr: command-line front end for the dataset pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "utr/json_util.hpp"
#include "utr/pipeline.hpp"
#include "utr/rewardgap.hpp"

namespace fs = std::filesystem;
using namespace utr;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::vector<std::string> inputs;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_input = true) {
    cmd->add_option("--config", o.config_path, "Config file (JSON); a run manifest also works")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Run seed (overrides the config)");
    cmd->add_option("--out", o.out_dir, "Output directory");
    auto* in = cmd->add_option("--input", o.inputs, "Input files");
    if (needs_input) in->required();
    cmd->add_option("--set", o.overrides, "Override a config value: stage.key=value");
}

PipelineConfig resolve(const CommonOptions& o) {
    nlohmann::json cfg = o.config_path.empty() ? default_config() : load_config(o.config_path);
    for (const auto& s : o.overrides) apply_override(cfg, s);
    if (o.seed) cfg["seed"] = *o.seed;
    return PipelineConfig::from_json(cfg);
}

std::ifstream open_input(const CommonOptions& o, std::size_t i, const char* what) {
    if (o.inputs.size() <= i) throw Error(std::string("missing input: ") + what);
    std::ifstream in(o.inputs[i]);
    if (!in) throw Error("input not found: " + o.inputs[i]);
    return in;
}

void write_out(const CommonOptions& o, const std::string& name, const std::string& content) {
    write_file_atomic(fs::path(o.out_dir) / name, content);
}

std::vector<ClipRecord> read_clips(const CommonOptions& o, std::size_t i) {
    auto in = open_input(o, i, "clips file");
    return parse_clips(in);
}

std::vector<SubjectTrajectory> read_tracks(const CommonOptions& o, std::size_t i) {
    auto in = open_input(o, i, "tracks file");
    return parse_tracks(in);
}

int cmd_ingest(const CommonOptions& o) {
    const auto cfg = resolve(o);
    auto in = open_input(o, 0, "detections file");
    auto result = run_ingest(parse_detections(in), cfg.sampler, cfg.seed);
    write_out(o, "frames.jsonl", to_lines(result.frames, serialize_frame));
    write_out(o, "clips.jsonl",
              to_lines(result.clips, [](const ClipRecord& c) { return serialize_clip(c.clip, c.width, c.height); }));
    write_out(o, "ingest_report.jsonl", to_lines(result.reports, serialize_report));
    std::cerr << result.clips.size() << " clips, " << result.reports.size() << " skipped\n";
    return 0;
}

int cmd_track(const CommonOptions& o) {
    const auto cfg = resolve(o);
    auto in = open_input(o, 0, "frames file");
    const auto frames = parse_detections(in);
    const auto tracks = run_track(frames, read_clips(o, 1), cfg.tracker);
    write_out(o, "tracks.jsonl", to_lines(tracks, serialize_trajectory));
    std::cerr << tracks.size() << " trajectories\n";
    return 0;
}

int cmd_filter(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto result = run_filter(read_tracks(o, 0), read_clips(o, 1), cfg.filter);
    write_out(o, "tracks.filtered.jsonl", to_lines(result.kept, serialize_trajectory));
    write_out(o, "filter_report.jsonl", to_lines(result.removed, serialize_removal));
    std::cerr << result.kept.size() << " kept, " << result.removed.size() << " removed\n";
    return 0;
}

int cmd_gen_tasks(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto result = run_gen_tasks(read_tracks(o, 0), read_clips(o, 1), cfg.taskgen, cfg.seed);
    write_out(o, "conversations.jsonl", to_lines(result.records, serialize_conversation));
    write_out(o, "scoring_jobs.jsonl", to_lines(result.jobs, serialize_scoring_job));
    write_out(o, "taskgen_report.jsonl", to_lines(result.reports, serialize_report));
    std::cerr << result.records.size() << " conversations\n";
    return 0;
}

// With tpl.source = oracle the input is a conversations file; otherwise an nll file.
int cmd_tpl(const CommonOptions& o) {
    const auto cfg = resolve(o);
    std::vector<NllRecord> nll;
    auto in = open_input(o, 0, cfg.tpl.source == TplSource::Oracle ? "conversations file" : "nll file");
    if (cfg.tpl.source == TplSource::Oracle) {
        std::vector<ConversationRecord> records;
        json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
            records.push_back(parse_conversation_line(text, line));
        });
        nll = oracle_score_conversations(records, cfg.tpl);
        write_out(o, "nll.jsonl", to_lines(nll, serialize_nll));
    } else {
        nll = parse_nll(in);
    }
    const auto result = run_tpl(nll, cfg.tpl, cfg.seed);
    write_out(o, "tpl.jsonl", to_lines(result.scores, serialize_tpl));
    write_out(o, "tpl_report.jsonl", to_lines(result.reports, [](const PairingReport& r) {
                  return nlohmann::ordered_json{{"sample_id", r.sample_id}, {"reason", r.reason}}.dump();
              }));
    std::cerr << result.scores.size() << " scores, " << result.reports.size() << " reports\n";
    return 0;
}

int cmd_stats(const CommonOptions& o) {
    auto scores_in = open_input(o, 0, "tpl file");
    const auto scores = parse_tpl(scores_in);
    auto tags_in = open_input(o, 1, "subset tags file");
    const auto stats = subset_stats(scores, parse_tags(tags_in));
    std::cout << std::left << std::setw(24) << "subset" << std::right << std::setw(8) << "n" << std::setw(12)
              << "mean" << std::setw(12) << "stdev" << std::setw(12) << "min" << std::setw(12) << "max" << '\n';
    std::cout << std::fixed << std::setprecision(6);
    for (const auto& s : stats) {
        std::cout << std::left << std::setw(24) << s.subset << std::right << std::setw(8) << s.count << std::setw(12)
                  << s.mean << std::setw(12) << s.stdev << std::setw(12) << s.min << std::setw(12) << s.max << '\n';
    }
    return 0;
}

int cmd_reward_gap(const CommonOptions& o, const std::string& preset, const std::string& format) {
    std::vector<SweepRow> rows;
    if (preset == "paper-monotonicity") {
        rows = monotonicity_sweep();
    } else if (preset.empty()) {
        const auto cfg = resolve(o);
        const auto& rg = cfg.raw.at("rewardgap");
        std::vector<KSchedule> policies;
        for (const auto& name : rg.at("policies")) policies.push_back(KSchedule::by_name(name.get<std::string>()));
        rows = sweep(rg.at("horizons").get<std::vector<int>>(), rg.at("gammas").get<std::vector<double>>(), policies);
    } else {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    std::ostringstream out;
    if (format == "jsonl") {
        write_sweep_jsonl(rows, out);
    } else {
        write_sweep_csv(rows, out);
    }
    if (o.out_dir == "-") {
        std::cout << out.str();
    } else {
        write_out(o, format == "jsonl" ? "reward_gap.jsonl" : "reward_gap.csv", out.str());
    }
    return 0;
}

int cmd_synth(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto corpus = synth_corpus(cfg.synth, cfg.seed);
    write_out(o, "detections.jsonl", to_lines(corpus.frames, serialize_frame));
    write_out(o, "truth.jsonl", to_lines(corpus.truth, serialize_trajectory));
    std::cerr << corpus.frames.size() << " frames, " << corpus.truth.size() << " objects\n";
    return 0;
}

int cmd_run(const CommonOptions& o) {
    const auto cfg = resolve(o);
    std::vector<fs::path> inputs(o.inputs.begin(), o.inputs.end());
    const auto manifest = run_pipeline(cfg, inputs, o.out_dir);
    std::cout << manifest["counts"].dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"utr: trajectory-grounded video QA dataset pipeline"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonOptions o;
    std::string preset;
    std::string format = "csv";

    auto* ingest = app.add_subcommand("ingest", "Parse detections and sample clips");
    add_common(ingest, o);
    auto* track = app.add_subcommand("track", "Associate detections into trajectories (--input frames clips)");
    add_common(track, o);
    auto* filter = app.add_subcommand("filter", "Drop small, short and low-confidence trajectories (--input tracks clips)");
    add_common(filter, o);
    auto* gen = app.add_subcommand("gen-tasks", "Generate query/answer records (--input tracks clips)");
    add_common(gen, o);
    auto* tpl = app.add_subcommand("tpl", "Compute TPL scores and buckets from an nll file");
    add_common(tpl, o);
    auto* stats = app.add_subcommand("stats", "Per-subset TPL statistics (--input tpl tags)");
    add_common(stats, o);
    auto* rg = app.add_subcommand("reward-gap", "Reward-gap sweep table");
    add_common(rg, o, false);
    rg->add_option("--preset", preset, "Named sweep, e.g. paper-monotonicity");
    rg->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    auto* synth = app.add_subcommand("synth", "Generate a synthetic detections corpus with ground truth");
    add_common(synth, o, false);
    auto* run = app.add_subcommand("run", "Run ingest, track, filter, gen-tasks and optionally tpl");
    add_common(run, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(o);
        if (*track) return cmd_track(o);
        if (*filter) return cmd_filter(o);
        if (*gen) return cmd_gen_tasks(o);
        if (*tpl) return cmd_tpl(o);
        if (*stats) return cmd_stats(o);
        if (*rg) return cmd_reward_gap(o, preset, format);
        if (*synth) return cmd_synth(o);
        if (*run) return cmd_run(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
