#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "utr/ingest.hpp"

namespace utr {

enum class TrackState { Active, Lost, Finished };

struct TrackEntry {
    std::int64_t frame_index = 0;
    BoundingBox box;
    double score = 0;
    std::string caption;
    std::string action;

    friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

/// One subject's per-frame attributes with a stable identity. Entries are
/// sorted by frame_index without duplicates, and every entry shares the
/// trajectory's category.
struct SubjectTrajectory {
    std::string video_id;
    std::string clip_id;
    int subject_id = 0;
    std::string category;
    std::vector<TrackEntry> entries;
    TrackState state = TrackState::Active;

    const TrackEntry* entry_at(std::int64_t frame_index) const;
};

enum class MotionModel { Static, ConstantVelocity };

struct TrackerParams {
    double high_score_threshold = 0.6;
    double low_score_threshold = 0.1;
    double iou_match_threshold_stage1 = 0.5;
    double iou_match_threshold_stage2 = 0.5;
    int max_lost_frames = 2;
    MotionModel motion = MotionModel::ConstantVelocity;

    void validate() const;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Box expected at `to_frame`. Constant-velocity mode extrapolates the
/// per-frame displacement between the last two entries (scaled by their raw
/// frame gap); a single entry, or static mode, returns the last box.
BoundingBox predict(const SubjectTrajectory& trajectory, std::int64_t to_frame,
                    MotionModel motion = MotionModel::ConstantVelocity);

/// Two-stage confidence-gated IoU association over consecutive clip frames.
/// Subject ids start at 1 in creation order. Trajectories are returned in id
/// order with their final state.
std::vector<SubjectTrajectory> associate(const std::vector<FrameRecord>& frames,
                                         const TrackerParams& params);

// ---------------------------------------------------------------------------
// Tracks file (one trajectory per line)

std::string serialize_trajectory(const SubjectTrajectory& t);
SubjectTrajectory parse_trajectory_line(const std::string& text, std::size_t line);
std::vector<SubjectTrajectory> parse_tracks(std::istream& in);
void serialize_tracks(const std::vector<SubjectTrajectory>& tracks, std::ostream& out);

}  // namespace utr
