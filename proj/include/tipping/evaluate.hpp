// Evaluation against listener annotations: popular tipping points (grid scan
// of symmetric coverage windows), matching of model predictions to popular
// intervals, and the across-piece annotation spread statistic.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tipping/changepoint.hpp"
#include "tipping/common.hpp"
#include "tipping/ingest.hpp"
#include "tipping/timing.hpp"

namespace tipping {

struct popular_point {
    double interval_start_s = 0;
    double interval_end_s = 0;
    double peak_fraction = 0;
    std::vector<std::string> supporter_ids;
};

enum class match_status { model1_only, model2_only, both, neither };

inline const char* match_status_name(match_status s) {
    switch (s) {
        case match_status::model1_only: return "model1_only";
        case match_status::model2_only: return "model2_only";
        case match_status::both: return "both";
        case match_status::neither: return "neither";
    }
    return "?";
}

struct match_report {
    std::string piece_id;
    std::vector<popular_point> popular;
    std::vector<match_status> per_point_status;
    // Fractions over popular points; all zero when there are none.
    double prop_model1_only = 0;
    double prop_model2_only = 0;
    double prop_both = 0;
    double prop_neither = 0;
    // Sample std of mark times; absent with fewer than 2 marks.
    std::optional<double> spread_s;
};

struct evaluate_config {
    double half_window_s = 2.0;   // symmetric 4 s interval
    double threshold = 0.25;      // fraction of listeners
    double grid_step_s = 0.5;
};

// A candidate time is popular when at least `threshold` of the listeners
// marked within +-half_window of it. Candidates run on a grid anchored at the
// earliest mark (so shifting every mark shifts the output intervals exactly);
// maximal runs of qualifying candidates merge into one popular point whose
// interval spans the qualifying centers.
inline std::vector<popular_point> popular_points(const annotation_set& annotations,
                                                 double half_window_s = 2.0,
                                                 double threshold = 0.25,
                                                 double grid_step_s = 0.5) {
    if (annotations.n_listeners < 1)
        throw domain_error(errc::bad_config, "popular_points needs n_listeners >= 1");
    if (!(half_window_s > 0) || !(grid_step_s > 0) || !(threshold > 0))
        throw domain_error(errc::bad_config,
                           "half_window_s, grid_step_s and threshold must be positive");
    std::vector<popular_point> out;
    if (annotations.marks.empty()) return out;  // caller decides how loudly to warn

    auto [lo_it, hi_it] = std::minmax_element(
        annotations.marks.begin(), annotations.marks.end(),
        [](const listener_mark& a, const listener_mark& b) { return a.time_s < b.time_s; });
    const double start = lo_it->time_s - half_window_s;
    const double stop = hi_it->time_s + half_window_s;
    const double denom = static_cast<double>(annotations.n_listeners);

    bool in_run = false;
    double run_start = 0, run_end = 0, run_peak = 0;
    auto close_run = [&]() {
        if (!in_run) return;
        popular_point p;
        p.interval_start_s = run_start;
        p.interval_end_s = run_end;
        p.peak_fraction = run_peak;
        std::set<std::string> ids;
        for (const auto& m : annotations.marks)
            if (m.time_s >= run_start - half_window_s && m.time_s <= run_end + half_window_s)
                ids.insert(m.listener_id);
        p.supporter_ids.assign(ids.begin(), ids.end());
        out.push_back(std::move(p));
        in_run = false;
    };

    for (long j = 0;; ++j) {
        double c = start + static_cast<double>(j) * grid_step_s;
        if (c > stop + 1e-12) break;
        int count = 0;
        for (const auto& m : annotations.marks)
            if (std::abs(m.time_s - c) <= half_window_s) ++count;
        double coverage = static_cast<double>(count) / denom;
        if (coverage >= threshold) {
            if (!in_run) {
                in_run = true;
                run_start = c;
                run_peak = 0;
            }
            run_end = c;
            run_peak = std::max(run_peak, coverage);
        } else {
            close_run();
        }
    }
    close_run();
    return out;
}

namespace detail {

inline bool located_by(double lo, double hi, std::span<const double> prediction_times,
                       double half_window_s) {
    for (double t : prediction_times)
        if (t >= lo - half_window_s && t <= hi + half_window_s) return true;
    return false;
}

inline std::optional<double> sample_std(std::span<const double> xs) {
    if (xs.size() < 2) return std::nullopt;
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

// Scores each popular point against both models' predictions. A point is
// located by a model when any prediction time falls inside the popular
// interval widened by the same half-window.
inline match_report match_predictions(const annotation_set& annotations,
                                      const std::vector<popular_point>& popular,
                                      const std::vector<predicted_point>& model1,
                                      const std::vector<changepoint>& model2,
                                      double half_window_s = 2.0) {
    match_report rep;
    rep.piece_id = annotations.piece_id;
    rep.popular = popular;

    std::vector<double> m1_times, m2_times, mark_times;
    for (const auto& p : model1) m1_times.push_back(p.time_s);
    for (const auto& c : model2) m2_times.push_back(c.time_s);
    for (const auto& m : annotations.marks) mark_times.push_back(m.time_s);
    rep.spread_s = detail::sample_std(mark_times);

    int counts[4] = {0, 0, 0, 0};
    for (const auto& p : popular) {
        bool m1 = detail::located_by(p.interval_start_s, p.interval_end_s, m1_times, half_window_s);
        bool m2 = detail::located_by(p.interval_start_s, p.interval_end_s, m2_times, half_window_s);
        match_status s = m1 && m2   ? match_status::both
                         : m1       ? match_status::model1_only
                         : m2       ? match_status::model2_only
                                    : match_status::neither;
        rep.per_point_status.push_back(s);
        ++counts[static_cast<int>(s)];
    }
    if (!popular.empty()) {
        double n = static_cast<double>(popular.size());
        rep.prop_model1_only = counts[static_cast<int>(match_status::model1_only)] / n;
        rep.prop_model2_only = counts[static_cast<int>(match_status::model2_only)] / n;
        rep.prop_both = counts[static_cast<int>(match_status::both)] / n;
        rep.prop_neither = counts[static_cast<int>(match_status::neither)] / n;
    }
    return rep;
}

// Mean over pieces of the per-piece sample standard deviation of mark times.
// Pieces with fewer than two marks are skipped (count reported through
// `skipped`); it is an error if no piece qualifies.
inline double annotation_spread(std::span<const annotation_set> pieces, size_t* skipped = nullptr) {
    double sum = 0;
    size_t used = 0, skip = 0;
    for (const auto& set : pieces) {
        std::vector<double> times;
        times.reserve(set.marks.size());
        for (const auto& m : set.marks) times.push_back(m.time_s);
        if (auto sd = detail::sample_std(times)) {
            sum += *sd;
            ++used;
        } else {
            ++skip;
        }
    }
    if (skipped) *skipped = skip;
    if (used == 0)
        throw domain_error(errc::too_few_marks,
                           "no piece has the two marks needed for a spread statistic");
    return sum / static_cast<double>(used);
}

}  // namespace tipping
