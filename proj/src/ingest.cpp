#include "utr/ingest.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <utility>

#include "utr/json_util.hpp"
#include "utr/rng.hpp"

namespace utr {

using json_util::Json;
using json_util::OrderedJson;

namespace {

BoundingBox parse_box(const Json& v, std::size_t line) {
    if (!v.is_array() || v.size() != 4) throw ParseError(line, "bbox", "expected [x1,y1,x2,y2]");
    BoundingBox b{json_util::as_number(v[0], "x1", line), json_util::as_number(v[1], "y1", line),
                  json_util::as_number(v[2], "x2", line), json_util::as_number(v[3], "y2", line)};
    if (b.x1 < 0) throw ParseError(line, "x1", "negative coordinate");
    if (b.y1 < 0) throw ParseError(line, "y1", "negative coordinate");
    if (!(b.x2 > b.x1)) throw ParseError(line, "x2", "x2 must exceed x1");
    if (!(b.y2 > b.y1)) throw ParseError(line, "y2", "y2 must exceed y1");
    return b;
}

Detection parse_detection(const Json& v, std::size_t line) {
    if (!v.is_object()) throw ParseError(line, "detections", "entry is not an object");
    Detection d;
    d.box = parse_box(json_util::require(v, "bbox", line), line);
    d.score = json_util::get_number(v, "score", line);
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw ParseError(line, "score", "outside [0,1]");
    d.category = json_util::get_string(v, "category", line);
    if (d.category.empty()) throw ParseError(line, "category", "empty");
    d.caption = json_util::get_string_or(v, "caption", line, "");
    d.action = json_util::get_string_or(v, "action", line, "");
    return d;
}

OrderedJson box_json(const BoundingBox& b) { return OrderedJson::array({b.x1, b.y1, b.x2, b.y2}); }

}  // namespace

FrameRecord parse_detection_line(const std::string& text, std::size_t line) {
    const Json j = json_util::parse_object(text, line);
    FrameRecord f;
    f.video_id = json_util::get_string(j, "video_id", line);
    f.frame_index = json_util::get_int(j, "frame_index", line);
    if (f.frame_index < 0) throw ParseError(line, "frame_index", "negative");
    const auto w = json_util::get_int(j, "width", line);
    const auto h = json_util::get_int(j, "height", line);
    if (w <= 0) throw ParseError(line, "width", "must be positive");
    if (h <= 0) throw ParseError(line, "height", "must be positive");
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    const Json& dets = json_util::require(j, "detections", line);
    if (!dets.is_array()) throw ParseError(line, "detections", "expected array");
    f.detections.reserve(dets.size());
    for (const auto& d : dets) {
        Detection det = parse_detection(d, line);
        if (!det.box.inside(f.width, f.height)) {
            throw ParseError(line, "bbox",
                             "box outside frame at frame_index " + std::to_string(f.frame_index));
        }
        f.detections.push_back(std::move(det));
    }
    return f;
}

std::vector<FrameRecord> parse_detections(std::istream& in) {
    std::vector<FrameRecord> frames;
    std::set<std::pair<std::string, std::int64_t>> seen;
    json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
        FrameRecord f = parse_detection_line(text, line);
        if (!seen.emplace(f.video_id, f.frame_index).second) {
            throw ParseError(line, "frame_index",
                             "duplicate frame " + std::to_string(f.frame_index) + " for video '" +
                                 f.video_id + "'");
        }
        frames.push_back(std::move(f));
    });
    std::stable_sort(frames.begin(), frames.end(), [](const FrameRecord& a, const FrameRecord& b) {
        return std::tie(a.video_id, a.frame_index) < std::tie(b.video_id, b.frame_index);
    });
    return frames;
}

std::string serialize_frame(const FrameRecord& f) {
    OrderedJson dets = OrderedJson::array();
    for (const auto& d : f.detections) {
        dets.push_back(OrderedJson{{"bbox", box_json(d.box)},
                                   {"score", d.score},
                                   {"category", d.category},
                                   {"caption", d.caption},
                                   {"action", d.action}});
    }
    OrderedJson j{{"video_id", f.video_id},
                  {"frame_index", f.frame_index},
                  {"width", f.width},
                  {"height", f.height},
                  {"detections", std::move(dets)}};
    return j.dump();
}

void serialize_detections(const std::vector<FrameRecord>& frames, std::ostream& out) {
    for (const auto& f : frames) out << serialize_frame(f) << '\n';
}

std::int64_t min_frames_required(int count, const GapPolicy& gap) {
    return 1 + static_cast<std::int64_t>(count - 1) * gap.max_gap;
}

ClipSpec sample_clip(std::int64_t total_frames, int count, const GapPolicy& gap, std::uint64_t seed,
                     std::optional<std::int64_t> start) {
    if (count < 1) throw Error("clip count must be positive");
    if (gap.min_gap < 1 || gap.max_gap < gap.min_gap) {
        throw Error("invalid gap range [" + std::to_string(gap.min_gap) + "," +
                    std::to_string(gap.max_gap) + "]");
    }
    const std::int64_t required = min_frames_required(count, gap);
    if (total_frames < required) {
        throw Error("clip of " + std::to_string(count) + " frames at gap " +
                    (gap.random ? "up to " : "") + std::to_string(gap.max_gap) + " requires >= " +
                    std::to_string(required) + " frames, video has " + std::to_string(total_frames));
    }

    Rng rng(seed);
    std::vector<std::int64_t> gaps(static_cast<std::size_t>(count - 1), gap.min_gap);
    if (gap.random) {
        for (auto& g : gaps) g = rng.uniform_int(gap.min_gap, gap.max_gap);
    }
    std::int64_t span = 0;
    for (auto g : gaps) span += g;

    std::int64_t s = 0;
    if (start) {
        if (*start < 0 || *start + span >= total_frames) {
            throw Error("forced clip start " + std::to_string(*start) + " does not fit in " +
                        std::to_string(total_frames) + " frames");
        }
        s = *start;
    } else {
        s = rng.uniform_int(0, total_frames - 1 - span);
    }

    ClipSpec clip;
    clip.count = count;
    clip.gap = gap;
    clip.seed = seed;
    clip.frame_indices.reserve(static_cast<std::size_t>(count));
    clip.frame_indices.push_back(s);
    for (auto g : gaps) clip.frame_indices.push_back(clip.frame_indices.back() + g);
    return clip;
}

std::string serialize_clip(const ClipSpec& clip, int width, int height) {
    OrderedJson gap = clip.gap.random ? OrderedJson("random") : OrderedJson(clip.gap.min_gap);
    OrderedJson j{{"video_id", clip.video_id},
                  {"clip_id", clip.clip_id},
                  {"frame_indices", clip.frame_indices},
                  {"count", clip.count},
                  {"gap", gap},
                  {"gap_min", clip.gap.min_gap},
                  {"gap_max", clip.gap.max_gap},
                  {"seed", clip.seed},
                  {"width", width},
                  {"height", height}};
    return j.dump();
}

ClipRecord parse_clip_line(const std::string& text, std::size_t line) {
    const Json j = json_util::parse_object(text, line);
    ClipRecord r;
    r.clip.video_id = json_util::get_string(j, "video_id", line);
    r.clip.clip_id = json_util::get_string(j, "clip_id", line);
    const Json& idx = json_util::require(j, "frame_indices", line);
    if (!idx.is_array()) throw ParseError(line, "frame_indices", "expected array");
    for (const auto& v : idx) {
        if (!v.is_number_integer()) throw ParseError(line, "frame_indices", "expected integers");
        const auto i = v.get<std::int64_t>();
        if (!r.clip.frame_indices.empty() && i <= r.clip.frame_indices.back()) {
            throw ParseError(line, "frame_indices", "not strictly increasing");
        }
        r.clip.frame_indices.push_back(i);
    }
    r.clip.count = static_cast<int>(json_util::get_int(j, "count", line));
    if (r.clip.count != static_cast<int>(r.clip.frame_indices.size())) {
        throw ParseError(line, "count", "does not match frame_indices length");
    }
    const Json& gap = json_util::require(j, "gap", line);
    r.clip.gap.min_gap = static_cast<int>(json_util::get_int(j, "gap_min", line));
    r.clip.gap.max_gap = static_cast<int>(json_util::get_int(j, "gap_max", line));
    r.clip.gap.random = gap.is_string();
    const Json& seed = json_util::require(j, "seed", line);
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw ParseError(line, "seed", "expected integer");
    r.clip.seed = seed.get<std::uint64_t>();
    r.width = static_cast<int>(json_util::get_int(j, "width", line));
    r.height = static_cast<int>(json_util::get_int(j, "height", line));
    if (r.width <= 0 || r.height <= 0) throw ParseError(line, "width", "dimensions must be positive");
    return r;
}

std::vector<ClipRecord> parse_clips(std::istream& in) {
    std::vector<ClipRecord> clips;
    json_util::for_each_line(in, [&](const std::string& text, std::size_t line) {
        clips.push_back(parse_clip_line(text, line));
    });
    return clips;
}

std::vector<FrameRecord> clip_frames(const std::vector<FrameRecord>& video, const ClipSpec& clip) {
    std::map<std::int64_t, const FrameRecord*> by_index;
    int width = 0, height = 0;
    for (const auto& f : video) {
        if (f.video_id != clip.video_id) continue;
        by_index[f.frame_index] = &f;
        width = f.width;
        height = f.height;
    }
    std::vector<FrameRecord> out;
    out.reserve(clip.frame_indices.size());
    for (auto idx : clip.frame_indices) {
        if (auto it = by_index.find(idx); it != by_index.end()) {
            out.push_back(*it->second);
        } else {
            out.push_back(FrameRecord{clip.video_id, idx, width, height, {}});
        }
    }
    return out;
}

}  // namespace utr
