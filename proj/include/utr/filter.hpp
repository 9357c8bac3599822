#pragma once

#include <string>
#include <vector>

#include "utr/tracker.hpp"

namespace utr {

/// How an entry is judged "too small".
enum class SizeMode {
    Area,  ///< box area < fraction * width * height
    Side,  ///< box width < fraction * width, or box height < fraction * height
};

/// Which entries must be small for the trajectory to go.
enum class EntryRule { Any, All };

struct FilterParams {
    double min_area_fraction = 1.0 / 32.0;
    SizeMode size_mode = SizeMode::Area;
    EntryRule entry_rule = EntryRule::Any;
    int min_length = 4;
    double min_mean_score = 0.5;

    void validate() const;
};

enum class RemovalReason { Small, Short, LowConf };

const char* to_string(RemovalReason r) noexcept;

struct Removal {
    std::string clip_id;
    int subject_id = 0;
    RemovalReason reason = RemovalReason::Small;
    /// Offending measurement: smallest size fraction, entry count, or mean score.
    double value = 0;
};

// Each filter keeps the trajectories for which its predicate holds (>= keeps,
// < removes) and never modifies survivors.

std::vector<SubjectTrajectory> filter_small(const std::vector<SubjectTrajectory>& tracks, int width,
                                            int height, double min_area_fraction,
                                            SizeMode mode = SizeMode::Area,
                                            EntryRule rule = EntryRule::Any);
std::vector<SubjectTrajectory> filter_short(const std::vector<SubjectTrajectory>& tracks, int min_length);
std::vector<SubjectTrajectory> filter_low_conf(const std::vector<SubjectTrajectory>& tracks,
                                               double min_mean_score);

bool is_small(const SubjectTrajectory& t, int width, int height, double fraction, SizeMode mode,
              EntryRule rule);
double mean_score(const SubjectTrajectory& t);

struct FilterResult {
    std::vector<SubjectTrajectory> kept;
    std::vector<Removal> removed;
};

/// All three gates. A removed trajectory is reported once, under the first
/// failing gate in the order small, short, low_conf.
FilterResult apply_filters(const std::vector<SubjectTrajectory>& tracks, int width, int height,
                           const FilterParams& params);

std::string serialize_removal(const Removal& r);

}  // namespace utr
