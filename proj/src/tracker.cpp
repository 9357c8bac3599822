#include "utr/tracker.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "utr/assignment.hpp"
#include "utr/json_util.hpp"

namespace utr {

using json_util::Json;
using json_util::OrderedJson;

const TrackEntry* SubjectTrajectory::entry_at(std::int64_t frame_index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), frame_index,
                               [](const TrackEntry& e, std::int64_t f) { return e.frame_index < f; });
    return it != entries.end() && it->frame_index == frame_index ? &*it : nullptr;
}

void TrackerParams::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(high_score_threshold) || !unit(low_score_threshold) ||
        !unit(iou_match_threshold_stage1) || !unit(iou_match_threshold_stage2)) {
        throw ConfigError("tracker thresholds must lie in [0,1]");
    }
    if (low_score_threshold > high_score_threshold) {
        throw ConfigError("tracker low_score_threshold exceeds high_score_threshold");
    }
    if (max_lost_frames < 0) throw ConfigError("tracker max_lost_frames must be non-negative");
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

BoundingBox predict(const SubjectTrajectory& trajectory, std::int64_t to_frame, MotionModel motion) {
    const auto& entries = trajectory.entries;
    const TrackEntry& last = entries.back();
    if (motion == MotionModel::Static || entries.size() < 2) return last.box;
    const TrackEntry& prev = entries[entries.size() - 2];
    const double span = static_cast<double>(last.frame_index - prev.frame_index);
    const double steps = static_cast<double>(to_frame - last.frame_index);
    const double dx = (last.box.x1 - prev.box.x1) / span;
    const double dy = (last.box.y1 - prev.box.y1) / span;
    const double dw = (last.box.x2 - prev.box.x2) / span;
    const double dh = (last.box.y2 - prev.box.y2) / span;
    return {last.box.x1 + dx * steps, last.box.y1 + dy * steps, last.box.x2 + dw * steps,
            last.box.y2 + dh * steps};
}

namespace {

// Cost assigned to category-mismatched pairs; above every reachable limit.
constexpr double kForbidden = 2.0;

struct LiveTrack {
    std::size_t index;  // into the output vector
    int missed = 0;
};

TrackEntry make_entry(std::int64_t frame_index, const Detection& d) {
    return {frame_index, d.box, d.score, d.caption, d.action};
}

/// Matches `candidates` (indices into `live`) to detections `dets` (indices
/// into `frame.detections`). Returns matched pairs as (live idx, det idx).
std::vector<std::pair<std::size_t, std::size_t>> match_stage(
    const std::vector<SubjectTrajectory>& tracks, const std::vector<LiveTrack>& live,
    const std::vector<std::size_t>& candidates, const FrameRecord& frame,
    const std::vector<std::size_t>& dets, double iou_threshold, MotionModel motion) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (candidates.empty() || dets.empty()) return out;
    CostMatrix cost(candidates.size(), dets.size());
    for (std::size_t r = 0; r < candidates.size(); ++r) {
        const SubjectTrajectory& t = tracks[live[candidates[r]].index];
        const BoundingBox predicted = predict(t, frame.frame_index, motion);
        for (std::size_t c = 0; c < dets.size(); ++c) {
            const Detection& d = frame.detections[dets[c]];
            cost(r, c) = d.category == t.category ? 1.0 - iou(predicted, d.box) : kForbidden;
        }
    }
    const Assignment a = assign(cost, 1.0 - iou_threshold);
    out.reserve(a.pairs.size());
    for (auto [r, c] : a.pairs) out.emplace_back(candidates[r], dets[c]);
    return out;
}

}  // namespace

std::vector<SubjectTrajectory> associate(const std::vector<FrameRecord>& frames,
                                         const TrackerParams& params) {
    params.validate();
    std::vector<SubjectTrajectory> tracks;
    std::vector<LiveTrack> live;

    for (const FrameRecord& frame : frames) {
        std::vector<std::size_t> high, low;
        for (std::size_t i = 0; i < frame.detections.size(); ++i) {
            const double s = frame.detections[i].score;
            if (s >= params.high_score_threshold) {
                high.push_back(i);
            } else if (s >= params.low_score_threshold) {
                low.push_back(i);
            }
        }

        std::vector<std::size_t> candidates(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) candidates[i] = i;
        std::vector<char> track_matched(live.size(), 0);
        std::vector<char> det_matched(frame.detections.size(), 0);

        auto apply = [&](const std::vector<std::pair<std::size_t, std::size_t>>& matches) {
            for (auto [l, d] : matches) {
                SubjectTrajectory& t = tracks[live[l].index];
                t.entries.push_back(make_entry(frame.frame_index, frame.detections[d]));
                t.state = TrackState::Active;
                live[l].missed = 0;
                track_matched[l] = 1;
                det_matched[d] = 1;
            }
        };

        apply(match_stage(tracks, live, candidates, frame, high, params.iou_match_threshold_stage1,
                          params.motion));

        std::vector<std::size_t> remaining;
        for (auto l : candidates)
            if (!track_matched[l]) remaining.push_back(l);
        apply(match_stage(tracks, live, remaining, frame, low, params.iou_match_threshold_stage2,
                          params.motion));

        std::vector<LiveTrack> next_live;
        next_live.reserve(live.size());
        for (std::size_t l = 0; l < live.size(); ++l) {
            if (track_matched[l]) {
                next_live.push_back(live[l]);
                continue;
            }
            SubjectTrajectory& t = tracks[live[l].index];
            LiveTrack lt = live[l];
            ++lt.missed;
            if (lt.missed > params.max_lost_frames) {
                t.state = TrackState::Finished;
            } else {
                t.state = TrackState::Lost;
                next_live.push_back(lt);
            }
        }

        for (auto d : high) {
            if (det_matched[d]) continue;
            const Detection& det = frame.detections[d];
            SubjectTrajectory t;
            t.video_id = frame.video_id;
            t.subject_id = static_cast<int>(tracks.size()) + 1;
            t.category = det.category;
            t.entries.push_back(make_entry(frame.frame_index, det));
            next_live.push_back({tracks.size(), 0});
            tracks.push_back(std::move(t));
        }
        live = std::move(next_live);
    }
    return tracks;
}

// ---------------------------------------------------------------------------

std::string serialize_trajectory(const SubjectTrajectory& t) {
    OrderedJson entries = OrderedJson::array();
    for (const auto& e : t.entries) {
        entries.push_back(OrderedJson{{"frame_index", e.frame_index},
                                      {"bbox", OrderedJson::array({e.box.x1, e.box.y1, e.box.x2, e.box.y2})},
                                      {"score", e.score},
                                      {"caption", e.caption},
                                      {"action", e.action}});
    }
    OrderedJson j{{"video_id", t.video_id},
                  {"clip_id", t.clip_id},
                  {"subject_id", t.subject_id},
                  {"category", t.category},
                  {"entries", std::move(entries)}};
    return j.dump();
}

SubjectTrajectory parse_trajectory_line(const std::string& text, std::size_t line) {
    const Json j = json_util::parse_object(text, line);
    SubjectTrajectory t;
    t.video_id = json_util::get_string(j, "video_id", line);
    t.clip_id = json_util::get_string(j, "clip_id", line);
    t.subject_id = static_cast<int>(json_util::get_int(j, "subject_id", line));
    if (t.subject_id < 1) throw ParseError(line, "subject_id", "must be >= 1");
    t.category = json_util::get_string(j, "category", line);
    if (t.category.empty()) throw ParseError(line, "category", "empty");
    const Json& entries = json_util::require(j, "entries", line);
    if (!entries.is_array()) throw ParseError(line, "entries", "expected array");
    for (const auto& e : entries) {
        if (!e.is_object()) throw ParseError(line, "entries", "entry is not an object");
        TrackEntry te;
        te.frame_index = json_util::get_int(e, "frame_index", line);
        if (!t.entries.empty() && te.frame_index <= t.entries.back().frame_index) {
            throw ParseError(line, "frame_index", "entries not strictly increasing");
        }
        const Json& b = json_util::require(e, "bbox", line);
        if (!b.is_array() || b.size() != 4) throw ParseError(line, "bbox", "expected [x1,y1,x2,y2]");
        te.box = {json_util::as_number(b[0], "x1", line), json_util::as_number(b[1], "y1", line),
                  json_util::as_number(b[2], "x2", line), json_util::as_number(b[3], "y2", line)};
        if (!te.box.valid()) throw ParseError(line, "bbox", "invalid box");
        te.score = json_util::get_number(e, "score", line);
        te.caption = json_util::get_string_or(e, "caption", line, "");
        te.action = json_util::get_string_or(e, "action", line, "");
        t.entries.push_back(std::move(te));
    }
    return t;
}

std::vector<SubjectTrajectory> parse_tracks(std::istream& in) {
    std::vector<SubjectTrajectory> out;
    json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
        out.push_back(parse_trajectory_line(text, line));
    });
    return out;
}

void serialize_tracks(const std::vector<SubjectTrajectory>& tracks, std::ostream& out) {
    for (const auto& t : tracks) out << serialize_trajectory(t) << '\n';
}

}  // namespace utr
