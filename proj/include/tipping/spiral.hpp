// Spiral-array pitch geometry: pitches live on a helix indexed by the line of
// fifths, and chords/keys/note clouds are represented by weighted centroids
// ("centers of effect") of pitch positions. Tonal closeness maps to Euclidean
// distance in this space.
#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <utility>

#include "tipping/common.hpp"

namespace tipping {

struct point3 {
    double x = 0, y = 0, z = 0;

    friend point3 operator+(point3 a, point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend point3 operator-(point3 a, point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend point3 operator*(double s, point3 p) { return {s * p.x, s * p.y, s * p.z}; }
    friend point3 operator/(point3 p, double s) { return {p.x / s, p.y / s, p.z / s}; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance(point3 a, point3 b) { return (a - b).norm(); }

enum class mode { major, minor };

// Key named by the line-of-fifths index of its tonic (C=0, G=+1, F=-1, ...).
struct key_spec {
    int tonic_fifths = 0;
    mode key_mode = mode::major;
};

// Helix calibration. With rise h = sqrt(2/15) the distance between pitches a
// fifth apart equals the distance between pitches a major third apart
// (sqrt(2 + h^2) = 4h), which is the usual calibration of the model. Chord
// and key weights must each sum to 1; the minor-key alpha/beta mix the major
// and minor forms of the dominant and subdominant chords.
struct helix_params {
    double radius = 1.0;
    double rise = 0.3651483716701107;  // sqrt(2/15)
    std::array<double, 3> chord_weights{0.536, 0.274, 0.190};
    std::array<double, 3> key_weights{0.516, 0.315, 0.168};
    double minor_alpha = 0.75;
    double minor_beta = 0.75;

    void validate() const {
        if (!(radius > 0) || !(rise > 0))
            throw domain_error(errc::bad_config, "helix radius and rise must be positive");
        auto check_triple = [](const std::array<double, 3>& w, const char* name) {
            double sum = 0;
            for (double v : w) {
                if (!(v > 0))
                    throw domain_error(errc::bad_config,
                                       std::string(name) + " weights must be positive");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw domain_error(errc::bad_config,
                                   std::string(name) + " weights must sum to 1");
        };
        check_triple(chord_weights, "chord");
        check_triple(key_weights, "key");
        if (minor_alpha < 0 || minor_alpha > 1 || minor_beta < 0 || minor_beta > 1)
            throw domain_error(errc::bad_config, "minor alpha/beta must lie in [0,1]");
    }
};

// Position of the pitch with line-of-fifths index k:
//   P(k) = (r sin(k pi/2), r cos(k pi/2), k h).
// sin/cos at multiples of pi/2 come from a lookup table so the geometry is
// bit-stable; four steps along the line of fifths is one full turn.
inline point3 pitch_position(int fifths, const helix_params& p = {}) {
    static constexpr int sin_tab[4] = {0, 1, 0, -1};
    static constexpr int cos_tab[4] = {1, 0, -1, 0};
    int q = ((fifths % 4) + 4) % 4;
    return {p.radius * sin_tab[q], p.radius * cos_tab[q], fifths * p.rise};
}

// Weighted centroid of a set of positions. Scale of the weights is
// irrelevant; all-zero weights are an error.
inline point3 weighted_ce(std::span<const std::pair<point3, double>> points) {
    double wsum = 0;
    point3 acc{0, 0, 0};
    for (const auto& [pt, w] : points) {
        acc = acc + w * pt;
        wsum += w;
    }
    if (!(wsum > 0))
        throw domain_error(errc::all_weights_zero, "center of effect needs a positive weight");
    return acc / wsum;
}

// Triad center of effect. A major triad combines root, fifth (k+1) and major
// third (k+4); a minor triad combines root, fifth and minor third (k-3).
inline point3 chord_ce(int root_fifths, mode quality, const helix_params& p = {}) {
    const auto& w = p.chord_weights;
    int third = quality == mode::major ? root_fifths + 4 : root_fifths - 3;
    return w[0] * pitch_position(root_fifths, p) + w[1] * pitch_position(root_fifths + 1, p) +
           w[2] * pitch_position(third, p);
}

// Key center of effect: tonic, dominant and subdominant chords combined with
// the key weights. Minor keys blend major and minor forms of the dominant
// (alpha) and subdominant (beta) chords.
inline point3 key_ce(key_spec key, const helix_params& p = {}) {
    const auto& w = p.key_weights;
    int t = key.tonic_fifths;
    if (key.key_mode == mode::major) {
        return w[0] * chord_ce(t, mode::major, p) + w[1] * chord_ce(t + 1, mode::major, p) +
               w[2] * chord_ce(t - 1, mode::major, p);
    }
    point3 dominant = p.minor_alpha * chord_ce(t + 1, mode::major, p) +
                      (1.0 - p.minor_alpha) * chord_ce(t + 1, mode::minor, p);
    point3 subdominant = p.minor_beta * chord_ce(t - 1, mode::minor, p) +
                         (1.0 - p.minor_beta) * chord_ce(t - 1, mode::major, p);
    return w[0] * chord_ce(t, mode::minor, p) + w[1] * dominant + w[2] * subdominant;
}

// Deterministic pitch spelling: the unique line-of-fifths index k in the
// key-relative window [tonic-5, tonic+6] whose pitch class matches the MIDI
// pitch class. (7k mod 12 enumerates all twelve classes as k runs over any
// window of twelve consecutive indices.)
inline int spell_pitch(int midi_pitch, key_spec key) {
    int pc = ((midi_pitch % 12) + 12) % 12;
    int k0 = (7 * pc) % 12;  // 7 is its own inverse mod 12
    int lo = key.tonic_fifths - 5;
    return lo + ((k0 - lo) % 12 + 12) % 12;
}

}  // namespace tipping
