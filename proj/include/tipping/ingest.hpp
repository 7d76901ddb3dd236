// Input parsing: performed notes, the beat grid, and listener annotations.
// All three formats are headered CSV; see the README for the exact columns.
#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tipping/csv.hpp"
#include "tipping/spiral.hpp"

namespace tipping {

// One performed note. `spelled_fifths` is the optional line-of-fifths index
// of the spelling (C=0, G=+1, F=-1); when absent the pitch is spelled later
// relative to the key.
struct note_event {
    double onset_s = 0;
    double duration_s = 0;
    int midi_pitch = 0;
    std::optional<int> spelled_fifths;
};

struct beat_entry {
    int beat_index = 0;
    double time_s = 0;
    int bar_number = 1;
};

struct beat_grid {
    std::vector<beat_entry> entries;
    int n_bars = 0;

    double first_time() const { return entries.front().time_s; }
    double last_time() const { return entries.back().time_s; }
};

struct listener_mark {
    std::string listener_id;
    double time_s = 0;
    std::optional<double> anticipation_s;
    std::optional<double> tension_rating;
};

struct annotation_set {
    std::string piece_id;
    std::vector<listener_mark> marks;
    int n_listeners = 0;
};

struct piece_bundle {
    std::string piece_id;
    std::vector<note_event> notes;
    beat_grid beats;
    std::optional<annotation_set> annotations;
    std::optional<key_spec> key;
};

// Performed onsets may precede the first tapped beat and ring past the last;
// anything beyond this slack around the beat span fails validation.
inline constexpr double note_span_slack_s = 5.0;

inline constexpr const char* notes_header = "onset_s,duration_s,midi_pitch,spelled_fifths";
inline constexpr const char* beats_header = "beat_index,time_s,bar_number";
inline constexpr const char* annotations_header =
    "listener_id,time_s,anticipation_s,tension_rating";

inline std::vector<note_event> parse_notes(std::istream& in) {
    auto tbl = csv::read_table(in, notes_header);
    std::vector<note_event> notes;
    notes.reserve(tbl.rows.size());
    for (const auto& r : tbl.rows) {
        if (r.fields.size() != 4)
            throw parse_error(errc::malformed_row, r.line_no,
                              "expected 4 fields, got " + std::to_string(r.fields.size()));
        note_event n;
        n.onset_s = csv::parse_double(r.fields[0], r.line_no, "onset_s");
        n.duration_s = csv::parse_double(r.fields[1], r.line_no, "duration_s");
        long long pitch = csv::parse_int(r.fields[2], r.line_no, "midi_pitch");
        if (n.onset_s < 0)
            throw parse_error(errc::negative_time, r.line_no, "onset_s must be >= 0");
        if (!(n.duration_s > 0))
            throw parse_error(errc::non_positive_duration, r.line_no,
                              "duration_s must be > 0");
        if (pitch < 0 || pitch > 127)
            throw parse_error(errc::pitch_out_of_range, r.line_no,
                              "midi_pitch must be in [0,127]");
        n.midi_pitch = static_cast<int>(pitch);
        if (!r.fields[3].empty()) {
            long long k = csv::parse_int(r.fields[3], r.line_no, "spelled_fifths");
            if (k < -64 || k > 64)
                throw parse_error(errc::pitch_out_of_range, r.line_no,
                                  "spelled_fifths out of supported range [-64,64]");
            // A spelling is only legal if it names the same pitch class.
            if (((7 * k) % 12 + 12) % 12 != n.midi_pitch % 12)
                throw parse_error(errc::spelling_mismatch, r.line_no,
                                  "spelled_fifths " + std::to_string(k) +
                                      " does not match midi pitch class " +
                                      std::to_string(n.midi_pitch % 12));
            n.spelled_fifths = static_cast<int>(k);
        }
        notes.push_back(n);
    }
    std::stable_sort(notes.begin(), notes.end(),
                     [](const note_event& a, const note_event& b) { return a.onset_s < b.onset_s; });
    return notes;
}

inline beat_grid parse_beats(std::istream& in) {
    auto tbl = csv::read_table(in, beats_header);
    beat_grid grid;
    grid.entries.reserve(tbl.rows.size());
    for (const auto& r : tbl.rows) {
        if (r.fields.size() != 3)
            throw parse_error(errc::malformed_row, r.line_no,
                              "expected 3 fields, got " + std::to_string(r.fields.size()));
        beat_entry b;
        b.beat_index = static_cast<int>(csv::parse_int(r.fields[0], r.line_no, "beat_index"));
        b.time_s = csv::parse_double(r.fields[1], r.line_no, "time_s");
        b.bar_number = static_cast<int>(csv::parse_int(r.fields[2], r.line_no, "bar_number"));
        if (b.beat_index < 0)
            throw parse_error(errc::malformed_row, r.line_no, "beat_index must be >= 0");
        if (b.bar_number < 1)
            throw parse_error(errc::malformed_row, r.line_no, "bar_number must be >= 1");
        if (!grid.entries.empty()) {
            const auto& prev = grid.entries.back();
            if (b.beat_index <= prev.beat_index)
                throw parse_error(errc::malformed_row, r.line_no,
                                  "beat_index must be strictly increasing");
            if (!(b.time_s > prev.time_s))
                throw parse_error(errc::non_monotonic_time, r.line_no,
                                  "time_s must be strictly increasing");
            if (b.bar_number < prev.bar_number)
                throw parse_error(errc::decreasing_bar, r.line_no,
                                  "bar_number must be non-decreasing");
        }
        grid.entries.push_back(b);
        grid.n_bars = std::max(grid.n_bars, b.bar_number);
    }
    if (grid.entries.size() < 2)
        throw parse_error(errc::too_few_beats, 0, "a beat grid needs at least 2 beats");
    return grid;
}

inline annotation_set parse_annotations(std::istream& in, std::string piece_id = {}) {
    auto tbl = csv::read_table(in, annotations_header);
    annotation_set set;
    set.piece_id = std::move(piece_id);
    std::set<std::string> seen;
    for (const auto& r : tbl.rows) {
        if (r.fields.size() != 4)
            throw parse_error(errc::malformed_row, r.line_no,
                              "expected 4 fields, got " + std::to_string(r.fields.size()));
        listener_mark m;
        m.listener_id = r.fields[0];
        if (m.listener_id.empty())
            throw parse_error(errc::malformed_row, r.line_no, "listener_id must not be empty");
        if (!seen.insert(m.listener_id).second)
            throw parse_error(errc::duplicate_listener, r.line_no,
                              "listener '" + m.listener_id + "' marked more than once");
        m.time_s = csv::parse_double(r.fields[1], r.line_no, "time_s");
        if (m.time_s < 0)
            throw parse_error(errc::negative_time, r.line_no, "time_s must be >= 0");
        if (!r.fields[2].empty()) {
            double a = csv::parse_double(r.fields[2], r.line_no, "anticipation_s");
            if (a < 0)
                throw parse_error(errc::malformed_row, r.line_no,
                                  "anticipation_s must be >= 0");
            m.anticipation_s = a;
        }
        if (!r.fields[3].empty())
            m.tension_rating = csv::parse_double(r.fields[3], r.line_no, "tension_rating");
        set.marks.push_back(std::move(m));
    }
    if (auto meta = csv::comment_value(tbl.comments, "n_listeners")) {
        long long n = csv::parse_int(*meta, 0, "n_listeners");
        if (n < static_cast<long long>(set.marks.size()))
            throw parse_error(errc::malformed_row, 0,
                              "n_listeners metadata is less than the number of marks");
        set.n_listeners = static_cast<int>(n);
    } else {
        set.n_listeners = static_cast<int>(set.marks.size());
    }
    return set;
}

// Cross-checks the parsed pieces and assembles the bundle. Notes may start a
// little before the first beat or ring past the last one; anything further
// out is reported (all offending note indices in one error).
inline piece_bundle validate_bundle(std::vector<note_event> notes, beat_grid beats,
                                    std::optional<annotation_set> annotations = {},
                                    std::optional<key_spec> key = {},
                                    std::string piece_id = {}) {
    std::stable_sort(notes.begin(), notes.end(),
                     [](const note_event& a, const note_event& b) { return a.onset_s < b.onset_s; });
    double lo = beats.first_time() - note_span_slack_s;
    double hi = beats.last_time() + note_span_slack_s;
    std::string offenders;
    for (size_t i = 0; i < notes.size(); ++i) {
        if (notes[i].onset_s < lo || notes[i].onset_s > hi) {
            if (!offenders.empty()) offenders += ",";
            offenders += std::to_string(i);
        }
    }
    if (!offenders.empty())
        throw domain_error(errc::note_outside_span,
                           "note onsets outside the beat span (note indices " + offenders + ")");
    piece_bundle b;
    b.piece_id = std::move(piece_id);
    b.notes = std::move(notes);
    b.beats = std::move(beats);
    b.annotations = std::move(annotations);
    b.key = key;
    return b;
}

// Serializers for the same three formats (used for round-tripping and by the
// CLI when echoing resolved inputs). Numeric fields carry 6 decimal places.
inline void write_notes_csv(std::ostream& out, std::span<const note_event> notes) {
    out << notes_header << "\n";
    for (const auto& n : notes) {
        out << format_fixed(n.onset_s) << ',' << format_fixed(n.duration_s) << ','
            << n.midi_pitch << ',';
        if (n.spelled_fifths) out << *n.spelled_fifths;
        out << "\n";
    }
}

inline void write_beats_csv(std::ostream& out, const beat_grid& grid) {
    out << beats_header << "\n";
    for (const auto& b : grid.entries)
        out << b.beat_index << ',' << format_fixed(b.time_s) << ',' << b.bar_number << "\n";
}

inline void write_annotations_csv(std::ostream& out, const annotation_set& set) {
    out << "# n_listeners=" << set.n_listeners << "\n";
    out << annotations_header << "\n";
    for (const auto& m : set.marks) {
        out << m.listener_id << ',' << format_fixed(m.time_s) << ',';
        if (m.anticipation_s) out << format_fixed(*m.anticipation_s);
        out << ',';
        if (m.tension_rating) out << format_fixed(*m.tension_rating);
        out << "\n";
    }
}

}  // namespace tipping
