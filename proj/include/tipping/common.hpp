// Shared error types and small formatting helpers.
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace tipping {

inline constexpr const char* version_string = "0.1.0";

// Signal channel a prediction or changepoint refers to.
enum class channel { diameter, momentum, strain, beat_duration };

inline const char* channel_name(channel c) {
    switch (c) {
        case channel::diameter: return "diameter";
        case channel::momentum: return "momentum";
        case channel::strain: return "strain";
        case channel::beat_duration: return "beat_duration";
    }
    return "?";
}

enum class errc {
    // input / parse
    malformed_row,
    pitch_out_of_range,
    non_positive_duration,
    spelling_mismatch,
    non_monotonic_time,
    decreasing_bar,
    too_few_beats,
    duplicate_listener,
    negative_time,
    io_error,
    bad_config,
    // validation / domain
    note_outside_span,
    all_weights_zero,
    no_key_and_no_notes,
    segment_too_short,
    series_too_short,
    too_few_marks,
};

inline const char* errc_name(errc e) {
    switch (e) {
        case errc::malformed_row: return "MalformedRow";
        case errc::pitch_out_of_range: return "PitchOutOfRange";
        case errc::non_positive_duration: return "NonPositiveDuration";
        case errc::spelling_mismatch: return "SpellingMismatch";
        case errc::non_monotonic_time: return "NonMonotonicTime";
        case errc::decreasing_bar: return "DecreasingBar";
        case errc::too_few_beats: return "TooFewBeats";
        case errc::duplicate_listener: return "DuplicateListener";
        case errc::negative_time: return "NegativeTime";
        case errc::io_error: return "IoError";
        case errc::bad_config: return "BadConfig";
        case errc::note_outside_span: return "NoteOutsideSpan";
        case errc::all_weights_zero: return "AllWeightsZero";
        case errc::no_key_and_no_notes: return "NoKeyAndNoNotes";
        case errc::segment_too_short: return "SegmentTooShort";
        case errc::series_too_short: return "SeriesTooShort";
        case errc::too_few_marks: return "TooFewMarks";
    }
    return "Unknown";
}

// True for errors raised while reading input text (CLI exit code 2);
// everything else is a semantic/validation failure (exit code 3).
inline bool is_input_error(errc e) {
    switch (e) {
        case errc::malformed_row:
        case errc::pitch_out_of_range:
        case errc::non_positive_duration:
        case errc::spelling_mismatch:
        case errc::non_monotonic_time:
        case errc::decreasing_bar:
        case errc::too_few_beats:
        case errc::duplicate_listener:
        case errc::negative_time:
        case errc::io_error:
        case errc::bad_config:
            return true;
        default:
            return false;
    }
}

// Failure while parsing input text. `line` is the 1-based line number in the
// source stream (0 when the error is not tied to a specific line).
class parse_error : public std::runtime_error {
public:
    parse_error(errc kind, long line, const std::string& what)
        : std::runtime_error(line > 0 ? std::string(errc_name(kind)) + " (line " +
                                            std::to_string(line) + "): " + what
                                      : std::string(errc_name(kind)) + ": " + what),
          kind_(kind),
          line_(line) {}

    errc kind() const noexcept { return kind_; }
    long line() const noexcept { return line_; }

private:
    errc kind_;
    long line_;
};

// Failure of a semantic precondition or invariant on already-parsed data.
class domain_error : public std::runtime_error {
public:
    domain_error(errc kind, const std::string& what)
        : std::runtime_error(std::string(errc_name(kind)) + ": " + what), kind_(kind) {}

    errc kind() const noexcept { return kind_; }

private:
    errc kind_;
};

// Fixed-point decimal formatting. Used for all CSV/SVG numeric output so that
// files are byte-stable across runs and platforms.
inline std::string format_fixed(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Shortest-ish representation for metadata and SVG labels.
inline std::string format_general(double v, int significant = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

}  // namespace tipping
