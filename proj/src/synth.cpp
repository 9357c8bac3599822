#include "utr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "utr/rng.hpp"

namespace utr {

namespace {

BoundingBox position(const SyntheticObject& o, int frame) {
    return o.start.translated(o.vx * frame, o.vy * frame);
}

int last_visible(const SyntheticObject& o, int num_frames) {
    return o.last_frame ? std::min(*o.last_frame, num_frames - 1) : num_frames - 1;
}

struct Appearance {
    const char* category;
    std::array<const char*, 3> captions;
    std::array<const char*, 3> actions;
};

constexpr std::array<Appearance, 4> kAppearances{{
    {"person", {"a man in a red jacket", "a woman with a blue backpack", "a child in a yellow coat"},
     {"walking", "running", "waving"}},
    {"car", {"a white sedan", "a black SUV", "a red hatchback"},
     {"driving", "turning", "parking"}},
    {"dog", {"a brown terrier", "a black labrador", "a spotted dalmatian"},
     {"trotting", "sniffing the ground", "chasing a ball"}},
    {"bicycle", {"a green mountain bike", "a silver road bike", "an orange city bike"},
     {"moving forward", "leaning on a turn", "braking"}},
}};

}  // namespace

void SyntheticSceneConfig::validate() const {
    if (num_frames < 1) throw ConfigError("synthetic scene needs at least one frame");
    if (width <= 0 || height <= 0) throw ConfigError("synthetic scene dimensions must be positive");
    if (jitter < 0) throw ConfigError("jitter amplitude must be non-negative");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        const std::string who = "object " + std::to_string(i);
        if (!o.start.valid()) throw ConfigError(who + " has an invalid start box");
        if (o.category.empty()) throw ConfigError(who + " has an empty category");
        if (!(o.score_min >= 0 && o.score_min <= o.score_max && o.score_max <= 1)) {
            throw ConfigError(who + " has an invalid score range");
        }
        if (o.first_frame < 0 || o.first_frame > last_visible(o, num_frames)) {
            throw ConfigError(who + " has an empty visibility span");
        }
        for (int f = o.first_frame; f <= last_visible(o, num_frames); ++f) {
            const BoundingBox b = position(o, f);
            if (b.x1 - jitter < 0 || b.y1 - jitter < 0 || b.x2 + jitter > width ||
                b.y2 + jitter > height) {
                throw ConfigError(who + " leaves the image at frame " + std::to_string(f));
            }
        }
    }
}

SyntheticScene synth_scene(const SyntheticSceneConfig& config) {
    config.validate();
    Rng rng(config.seed);
    SyntheticScene scene;

    for (std::size_t i = 0; i < config.objects.size(); ++i) {
        const auto& o = config.objects[i];
        SubjectTrajectory t;
        t.video_id = config.video_id;
        t.subject_id = static_cast<int>(i) + 1;
        t.category = o.category;
        t.state = TrackState::Finished;
        scene.truth.push_back(std::move(t));
    }

    for (int f = 0; f < config.num_frames; ++f) {
        FrameRecord frame{config.video_id, f, config.width, config.height, {}};
        for (std::size_t i = 0; i < config.objects.size(); ++i) {
            const auto& o = config.objects[i];
            if (f < o.first_frame || f > last_visible(o, config.num_frames)) continue;
            BoundingBox box = position(o, f);
            if (config.jitter > 0) {
                const double dx = rng.uniform(-config.jitter, config.jitter);
                const double dy = rng.uniform(-config.jitter, config.jitter);
                box = box.translated(dx, dy);
            }
            const double score =
                o.score_min == o.score_max ? o.score_min : rng.uniform(o.score_min, o.score_max);
            Detection d{box, score, o.category, o.caption, o.action};
            scene.truth[i].entries.push_back({f, box, score, o.caption, o.action});
            frame.detections.push_back(std::move(d));
        }
        rng.shuffle(frame.detections);
        scene.frames.push_back(std::move(frame));
    }
    return scene;
}

SyntheticSceneConfig disjoint_scene_config(const DisjointLayout& layout) {
    if (layout.num_objects < 1) throw ConfigError("layout needs at least one object");
    if (layout.num_frames < 1) throw ConfigError("layout needs at least one frame");
    Rng rng(derive_seed(layout.seed, "disjoint_scene_config", layout.video_id));

    SyntheticSceneConfig cfg;
    cfg.video_id = layout.video_id;
    cfg.num_frames = layout.num_frames;
    cfg.width = layout.width;
    cfg.height = layout.height;
    cfg.jitter = layout.jitter;
    cfg.seed = derive_seed(layout.seed, "synth_scene", layout.video_id);

    const double lane_h = static_cast<double>(layout.height) / layout.num_objects;
    const double span = std::max(1, layout.num_frames - 1);
    const double margin = layout.jitter + 1.0;
    const double usable_w = layout.width - 2 * margin;
    const double usable_h = lane_h - 2 * margin;
    if (usable_h < 8 || usable_w < 16) throw ConfigError("image too small for the requested lanes");

    for (int i = 0; i < layout.num_objects; ++i) {
        const auto& look = kAppearances[rng.index(kAppearances.size())];
        SyntheticObject o;
        o.category = look.category;
        o.caption = look.captions[rng.index(look.captions.size())];
        o.action = look.actions[rng.index(look.actions.size())];
        o.score_min = layout.score_min;
        o.score_max = layout.score_max;

        const double bh = std::floor(usable_h * rng.uniform(0.5, 0.8));
        double bw = std::floor(usable_w * rng.uniform(0.15, 0.3));
        if (layout.min_area_fraction > 0) {
            const double needed = std::ceil(1.25 * layout.min_area_fraction * layout.width * layout.height / bh);
            bw = std::max(bw, std::min(needed, std::floor(0.6 * usable_w)));
        }
        const double slack_x = usable_w - bw;
        const double slack_y = usable_h - bh;
        const double vmax_x = std::min(layout.max_speed, slack_x / span);
        const double vmax_y = std::min(layout.max_speed / 2, slack_y / span);
        o.vx = rng.uniform(-vmax_x, vmax_x);
        o.vy = rng.uniform(-vmax_y, vmax_y);

        const double lane_top = i * lane_h + margin;
        const double travel_x = o.vx * span;
        const double travel_y = o.vy * span;
        const double x_lo = margin - std::min(0.0, travel_x);
        const double x_hi = margin + slack_x - std::max(0.0, travel_x);
        const double y_lo = lane_top - std::min(0.0, travel_y);
        const double y_hi = lane_top + slack_y - std::max(0.0, travel_y);
        const double x0 = rng.uniform(x_lo, x_hi);
        const double y0 = rng.uniform(y_lo, y_hi);
        o.start = {x0, y0, x0 + bw, y0 + bh};
        cfg.objects.push_back(std::move(o));
    }
    return cfg;
}

}  // namespace utr
