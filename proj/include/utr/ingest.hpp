#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "utr/error.hpp"

namespace utr {

/// Axis-aligned box in absolute pixel corner format, origin top-left.
struct BoundingBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    double width() const noexcept { return x2 - x1; }
    double height() const noexcept { return y2 - y1; }
    double area() const noexcept { return width() * height(); }
    bool valid() const noexcept { return x1 < x2 && y1 < y2 && x1 >= 0 && y1 >= 0; }
    bool inside(double frame_width, double frame_height) const noexcept {
        return valid() && x2 <= frame_width && y2 <= frame_height;
    }
    BoundingBox translated(double dx, double dy) const noexcept {
        return {x1 + dx, y1 + dy, x2 + dx, y2 + dy};
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
    BoundingBox box;
    double score = 0;
    std::string category;
    std::string caption;
    std::string action;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameRecord {
    std::string video_id;
    std::int64_t frame_index = 0;
    int width = 0;
    int height = 0;
    std::vector<Detection> detections;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

// ---------------------------------------------------------------------------
// Detections file (one JSON object per line)

/// Parses a detections stream. Output is grouped by video_id (ascending) and
/// sorted by frame_index; detection order within a frame is preserved.
/// Throws ParseError naming the line and field on any invalid record.
std::vector<FrameRecord> parse_detections(std::istream& in);

/// Parses one record. `line` is only used for error messages.
FrameRecord parse_detection_line(const std::string& text, std::size_t line);

std::string serialize_frame(const FrameRecord& frame);
void serialize_detections(const std::vector<FrameRecord>& frames, std::ostream& out);

// ---------------------------------------------------------------------------
// Clip sampling

/// Gap between consecutive sampled frames: fixed when min_gap == max_gap,
/// otherwise each gap is drawn uniformly from [min_gap, max_gap].
struct GapPolicy {
    int min_gap = 3;
    int max_gap = 3;
    bool random = false;

    static GapPolicy fixed(int gap) { return {gap, gap, false}; }
    static GapPolicy uniform(int lo, int hi) { return {lo, hi, true}; }

    friend bool operator==(const GapPolicy&, const GapPolicy&) = default;
};

struct ClipSpec {
    std::string video_id;
    std::string clip_id;
    std::vector<std::int64_t> frame_indices;
    int count = 0;
    GapPolicy gap;
    std::uint64_t seed = 0;

    friend bool operator==(const ClipSpec&, const ClipSpec&) = default;
};

/// Minimum video length able to host `count` frames under `gap`.
std::int64_t min_frames_required(int count, const GapPolicy& gap);

/// Samples `count` strictly increasing frame indices from [0, total_frames).
/// The start is drawn uniformly from the valid range unless `start` forces it.
/// Throws Error("... requires >= N frames ...") when the video is too short.
ClipSpec sample_clip(std::int64_t total_frames, int count, const GapPolicy& gap, std::uint64_t seed,
                     std::optional<std::int64_t> start = std::nullopt);

std::string serialize_clip(const ClipSpec& clip, int width, int height);

struct ClipRecord {
    ClipSpec clip;
    int width = 0;
    int height = 0;
};

ClipRecord parse_clip_line(const std::string& text, std::size_t line);
std::vector<ClipRecord> parse_clips(std::istream& in);

/// The frames of `video` selected by `clip`, in clip order. Indices with no
/// record become empty frames with the video's dimensions.
std::vector<FrameRecord> clip_frames(const std::vector<FrameRecord>& video, const ClipSpec& clip);

}  // namespace utr
