#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "utr/ingest.hpp"
#include "utr/tracker.hpp"

namespace utr {

/// One scripted object: its box at frame 0 moves by (vx, vy) pixels per
/// frame. The object is visible on frames [first_frame, last_frame].
struct SyntheticObject {
    BoundingBox start;
    double vx = 0;
    double vy = 0;
    std::string category = "person";
    std::string caption;
    std::string action;
    double score_min = 0.9;
    double score_max = 0.9;
    int first_frame = 0;
    std::optional<int> last_frame;
};

struct SyntheticSceneConfig {
    std::string video_id = "synth";
    int num_frames = 1;
    int width = 640;
    int height = 480;
    /// Every box is translated by a uniform offset in [-jitter, jitter]^2.
    double jitter = 0;
    std::uint64_t seed = 0;
    std::vector<SyntheticObject> objects;

    /// Throws ConfigError if any object could leave the image.
    void validate() const;
};

struct SyntheticScene {
    std::vector<FrameRecord> frames;
    /// One trajectory per object, subject_id = object index + 1.
    std::vector<SubjectTrajectory> truth;
};

/// Renders the scene. Detection order inside a frame is shuffled with the
/// seed, so consumers cannot rely on it to recover identities.
SyntheticScene synth_scene(const SyntheticSceneConfig& config);

struct DisjointLayout {
    int num_objects = 2;
    int num_frames = 16;
    int width = 640;
    int height = 480;
    double jitter = 0;
    double score_min = 0.7;
    double score_max = 1.0;
    double max_speed = 6.0;
    /// Boxes are widened until their area reaches 1.25x this fraction of the
    /// image (capped at 60% of the lane width).
    double min_area_fraction = 0;
    std::uint64_t seed = 0;
    std::string video_id = "synth";
};

/// Random scene whose objects move inside separate horizontal lanes, so they
/// are pairwise IoU-disjoint in every frame (jitter included).
SyntheticSceneConfig disjoint_scene_config(const DisjointLayout& layout);

}  // namespace utr
