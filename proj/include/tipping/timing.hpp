// Time-based tipping point detector: flags beats whose performed duration
// exceeds the sample mean by a multiple of the sample standard deviation,
// skipping detections in the opening and closing bars.
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "tipping/common.hpp"
#include "tipping/ingest.hpp"

namespace tipping {

// Durations d_i = t_{i+1} - t_i with the start time and bar of each beat.
// `sample_std` uses the n-1 denominator (0 when there is a single duration).
struct beat_duration_series {
    std::vector<double> durations;
    std::vector<double> start_times;
    std::vector<int> bar_numbers;
    double mean = 0;
    double sample_std = 0;
};

enum class prediction_source { model1, model2 };

struct predicted_point {
    double time_s = 0;
    prediction_source source = prediction_source::model1;
    std::optional<channel> chan;
    // model1: (d_i - mean)/std; model2: mean_before - mean_after.
    double score = 0;
};

inline beat_duration_series beat_durations(const beat_grid& beats) {
    if (beats.entries.size() < 2)
        throw domain_error(errc::too_few_beats, "need at least 2 beats to form durations");
    beat_duration_series s;
    size_t n = beats.entries.size() - 1;
    s.durations.reserve(n);
    s.start_times.reserve(n);
    s.bar_numbers.reserve(n);
    double sum = 0;
    for (size_t i = 0; i < n; ++i) {
        double d = beats.entries[i + 1].time_s - beats.entries[i].time_s;
        s.durations.push_back(d);
        s.start_times.push_back(beats.entries[i].time_s);
        s.bar_numbers.push_back(beats.entries[i].bar_number);
        sum += d;
    }
    s.mean = sum / static_cast<double>(n);
    if (n > 1) {
        double ss = 0;
        for (double d : s.durations) ss += (d - s.mean) * (d - s.mean);
        s.sample_std = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return s;
}

// Flags beat i when d_i > mean + multiplier * std (strict) and beat i's bar
// lies strictly inside the edge exclusion zone. The mean and std are computed
// over all beats; the edge rule suppresses detections only.
inline std::vector<predicted_point> model1_predict(const beat_grid& beats,
                                                   double multiplier = 2.5,
                                                   int edge_bars = 3) {
    auto s = beat_durations(beats);
    double threshold = s.mean + multiplier * s.sample_std;
    std::vector<predicted_point> out;
    for (size_t i = 0; i < s.durations.size(); ++i) {
        if (!(s.durations[i] > threshold)) continue;
        int bar = s.bar_numbers[i];
        if (bar <= edge_bars || bar > beats.n_bars - edge_bars) continue;
        predicted_point p;
        p.time_s = s.start_times[i];
        p.source = prediction_source::model1;
        p.chan = channel::beat_duration;
        p.score = s.sample_std > 0 ? (s.durations[i] - s.mean) / s.sample_std : 0.0;
        out.push_back(p);
    }
    return out;
}

}  // namespace tipping
