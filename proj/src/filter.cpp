#include "utr/filter.hpp"

#include <algorithm>
#include <iterator>
#include <limits>

#include "utr/json_util.hpp"

namespace utr {

void FilterParams::validate() const {
    if (!(min_area_fraction > 0 && min_area_fraction < 1)) {
        throw ConfigError("filter min_area_fraction must lie in (0,1)");
    }
    if (min_length < 1) throw ConfigError("filter min_length must be >= 1");
    if (!(min_mean_score >= 0 && min_mean_score <= 1)) {
        throw ConfigError("filter min_mean_score must lie in [0,1]");
    }
}

const char* to_string(RemovalReason r) noexcept {
    switch (r) {
        case RemovalReason::Small: return "small";
        case RemovalReason::Short: return "short";
        case RemovalReason::LowConf: return "low_conf";
    }
    return "unknown";
}

namespace {

/// Size of a box relative to the frame, in the units the mode compares.
double size_fraction(const BoundingBox& b, int width, int height, SizeMode mode) {
    if (mode == SizeMode::Area) return b.area() / (static_cast<double>(width) * height);
    return std::min(b.width() / width, b.height() / height);
}

bool entry_small(const BoundingBox& b, int width, int height, double fraction, SizeMode mode) {
    if (mode == SizeMode::Area) {
        return b.area() < fraction * static_cast<double>(width) * height;
    }
    return b.width() < fraction * width || b.height() < fraction * height;
}

double smallest_fraction(const SubjectTrajectory& t, int width, int height, SizeMode mode) {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& e : t.entries) v = std::min(v, size_fraction(e.box, width, height, mode));
    return v;
}

template <typename Pred>
std::vector<SubjectTrajectory> keep_if(const std::vector<SubjectTrajectory>& tracks, Pred keep) {
    std::vector<SubjectTrajectory> out;
    std::copy_if(tracks.begin(), tracks.end(), std::back_inserter(out), keep);
    return out;
}

}  // namespace

bool is_small(const SubjectTrajectory& t, int width, int height, double fraction, SizeMode mode,
              EntryRule rule) {
    if (t.entries.empty()) return false;
    auto small = [&](const TrackEntry& e) { return entry_small(e.box, width, height, fraction, mode); };
    return rule == EntryRule::Any ? std::any_of(t.entries.begin(), t.entries.end(), small)
                                  : std::all_of(t.entries.begin(), t.entries.end(), small);
}

double mean_score(const SubjectTrajectory& t) {
    if (t.entries.empty()) return 0.0;
    double sum = 0;
    for (const auto& e : t.entries) sum += e.score;
    return sum / static_cast<double>(t.entries.size());
}

std::vector<SubjectTrajectory> filter_small(const std::vector<SubjectTrajectory>& tracks, int width,
                                            int height, double min_area_fraction, SizeMode mode,
                                            EntryRule rule) {
    if (width <= 0 || height <= 0) throw Error("filter_small: frame dimensions must be positive");
    return keep_if(tracks, [&](const SubjectTrajectory& t) {
        return !is_small(t, width, height, min_area_fraction, mode, rule);
    });
}

std::vector<SubjectTrajectory> filter_short(const std::vector<SubjectTrajectory>& tracks, int min_length) {
    return keep_if(tracks, [&](const SubjectTrajectory& t) {
        return static_cast<long>(t.entries.size()) >= min_length;
    });
}

std::vector<SubjectTrajectory> filter_low_conf(const std::vector<SubjectTrajectory>& tracks,
                                               double min_mean_score) {
    return keep_if(tracks, [&](const SubjectTrajectory& t) { return mean_score(t) >= min_mean_score; });
}

FilterResult apply_filters(const std::vector<SubjectTrajectory>& tracks, int width, int height,
                           const FilterParams& params) {
    params.validate();
    FilterResult result;
    for (const auto& t : tracks) {
        Removal r{t.clip_id, t.subject_id, RemovalReason::Small, 0};
        if (is_small(t, width, height, params.min_area_fraction, params.size_mode, params.entry_rule)) {
            r.value = smallest_fraction(t, width, height, params.size_mode);
        } else if (static_cast<long>(t.entries.size()) < params.min_length) {
            r.reason = RemovalReason::Short;
            r.value = static_cast<double>(t.entries.size());
        } else if (mean_score(t) < params.min_mean_score) {
            r.reason = RemovalReason::LowConf;
            r.value = mean_score(t);
        } else {
            result.kept.push_back(t);
            continue;
        }
        result.removed.push_back(std::move(r));
    }
    return result;
}

std::string serialize_removal(const Removal& r) {
    json_util::OrderedJson j{{"subject_id", r.subject_id},
                             {"reason", to_string(r.reason)},
                             {"value", r.value},
                             {"clip_id", r.clip_id}};
    return j.dump();
}

}  // namespace utr
