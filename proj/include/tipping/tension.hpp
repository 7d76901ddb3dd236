// Tonal tension signals over beat-aligned note clouds: cloud diameter
// (dissonance), cloud momentum (harmonic change) and tensile strain (distance
// from key). Each analysis window covers a fixed number of beats; a note
// contributes to a window with weight equal to their overlap in seconds.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tipping/common.hpp"
#include "tipping/ingest.hpp"
#include "tipping/spiral.hpp"

namespace tipping {

struct cloud_window {
    size_t window_index = 0;
    double start_s = 0;
    double end_s = 0;
    // (line-of-fifths index, overlap seconds) per sounding note.
    std::vector<std::pair<int, double>> members;
    point3 ce{};
    bool carried = false;  // window was silent; ce carried from the left
};

struct tension_series {
    std::string piece_id;
    std::vector<double> window_times;  // window start times, performance seconds
    std::vector<double> diameter;
    std::vector<double> momentum;
    std::vector<double> strain;
    bool used_key_fallback = false;  // strain anchored to the global CE, not a named key
};

namespace detail {

inline int resolve_fifths(const note_event& n, const std::optional<key_spec>& key) {
    if (n.spelled_fifths) return *n.spelled_fifths;
    // No key: spell in the neutral window around C. Flagged upstream through
    // the key-fallback marker.
    return spell_pitch(n.midi_pitch, key.value_or(key_spec{0, mode::major}));
}

// Strain anchor: the key's CE when a key is named, otherwise the
// duration-weighted CE of every note in the piece (global tonal center).
inline point3 strain_anchor(const piece_bundle& bundle, const helix_params& params,
                            bool* used_fallback = nullptr) {
    if (used_fallback) *used_fallback = !bundle.key.has_value();
    if (bundle.key) return key_ce(*bundle.key, params);
    if (bundle.notes.empty())
        throw domain_error(errc::no_key_and_no_notes,
                           "cannot anchor tension: no key given and the piece has no notes");
    std::vector<std::pair<point3, double>> weighted;
    weighted.reserve(bundle.notes.size());
    for (const auto& n : bundle.notes)
        weighted.emplace_back(pitch_position(detail::resolve_fifths(n, bundle.key), params),
                              n.duration_s);
    return weighted_ce(weighted);
}

}  // namespace detail

// Builds one cloud per run of `window_beats` consecutive beats (hop = window
// size; the final window may be shorter). Empty windows carry the previous
// CE forward; an empty first window starts from the strain anchor.
inline std::vector<cloud_window> build_clouds(const piece_bundle& bundle, int window_beats,
                                              const helix_params& params = {}) {
    if (window_beats < 1)
        throw domain_error(errc::bad_config, "window_beats must be >= 1");
    if (bundle.beats.entries.size() < 2)
        throw domain_error(errc::too_few_beats, "cloud windows need at least 2 beats");

    const auto& beats = bundle.beats.entries;
    const size_t last = beats.size() - 1;
    point3 prev_ce = detail::strain_anchor(bundle, params);

    std::vector<cloud_window> out;
    size_t w = 0;
    for (size_t i0 = 0; i0 < last; i0 += static_cast<size_t>(window_beats), ++w) {
        size_t i1 = std::min(i0 + static_cast<size_t>(window_beats), last);
        cloud_window cw;
        cw.window_index = w;
        cw.start_s = beats[i0].time_s;
        cw.end_s = beats[i1].time_s;
        for (const auto& n : bundle.notes) {
            double overlap = std::min(cw.end_s, n.onset_s + n.duration_s) -
                             std::max(cw.start_s, n.onset_s);
            if (overlap > 0)
                cw.members.emplace_back(detail::resolve_fifths(n, bundle.key), overlap);
        }
        if (cw.members.empty()) {
            cw.carried = true;
            cw.ce = prev_ce;
        } else {
            std::vector<std::pair<point3, double>> pts;
            pts.reserve(cw.members.size());
            for (const auto& [fifths, weight] : cw.members)
                pts.emplace_back(pitch_position(fifths, params), weight);
            cw.ce = weighted_ce(pts);
        }
        prev_ce = cw.ce;
        out.push_back(std::move(cw));
    }
    return out;
}

// Maximum pairwise distance among the distinct pitch positions present in the
// cloud; 0 for silent or single-pitch clouds.
inline double cloud_diameter(const cloud_window& cloud, const helix_params& params = {}) {
    std::vector<int> fifths;
    for (const auto& [k, w] : cloud.members)
        if (w > 0) fifths.push_back(k);
    std::sort(fifths.begin(), fifths.end());
    fifths.erase(std::unique(fifths.begin(), fifths.end()), fifths.end());
    double best = 0;
    for (size_t a = 0; a < fifths.size(); ++a)
        for (size_t b = a + 1; b < fifths.size(); ++b)
            best = std::max(best, distance(pitch_position(fifths[a], params),
                                           pitch_position(fifths[b], params)));
    return best;
}

inline double cloud_momentum(const cloud_window& prev, const cloud_window& cur) {
    return distance(cur.ce, prev.ce);
}

inline double tensile_strain(const cloud_window& cloud, key_spec key,
                             const helix_params& params = {}) {
    return distance(cloud.ce, key_ce(key, params));
}

struct tension_config {
    int window_beats = 1;
    helix_params params{};
};

// Full Model 2 signal pipeline: clouds, then the three aligned series.
inline tension_series compute_tension(const piece_bundle& bundle,
                                      const tension_config& cfg = {}) {
    bool fallback = false;
    point3 anchor = detail::strain_anchor(bundle, cfg.params, &fallback);
    auto clouds = build_clouds(bundle, cfg.window_beats, cfg.params);

    tension_series t;
    t.piece_id = bundle.piece_id;
    t.used_key_fallback = fallback;
    t.window_times.reserve(clouds.size());
    t.diameter.reserve(clouds.size());
    t.momentum.reserve(clouds.size());
    t.strain.reserve(clouds.size());
    for (size_t w = 0; w < clouds.size(); ++w) {
        t.window_times.push_back(clouds[w].start_s);
        t.diameter.push_back(cloud_diameter(clouds[w], cfg.params));
        t.momentum.push_back(w == 0 ? 0.0 : cloud_momentum(clouds[w - 1], clouds[w]));
        t.strain.push_back(distance(clouds[w].ce, anchor));
    }
    return t;
}

inline constexpr const char* tension_csv_header =
    "window_index,start_s,diameter,momentum,strain";

inline void write_tension_csv(std::ostream& out, const tension_series& t) {
    out << tension_csv_header << "\n";
    for (size_t w = 0; w < t.window_times.size(); ++w)
        out << w << ',' << format_fixed(t.window_times[w]) << ',' << format_fixed(t.diameter[w])
            << ',' << format_fixed(t.momentum[w]) << ',' << format_fixed(t.strain[w]) << "\n";
}

}  // namespace tipping
