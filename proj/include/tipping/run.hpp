// Command layer behind the CLI: resolve a run configuration, load a piece,
// run the models, and emit the CSV/SVG/JSON artifacts. All files are written
// atomically (temp + rename) and start with a metadata block of the resolved
// parameters, so every artifact records how to reproduce itself.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tipping/changepoint.hpp"
#include "tipping/common.hpp"
#include "tipping/evaluate.hpp"
#include "tipping/ingest.hpp"
#include "tipping/svg.hpp"
#include "tipping/tension.hpp"
#include "tipping/timing.hpp"

namespace tipping {

struct run_config {
    std::string notes_path;
    std::string beats_path;
    std::string annotations_path;
    std::string manifest_path;  // pipeline/evaluate multi-piece mode
    std::string piece_id;       // default: notes file stem
    std::string key = "auto";   // "C:maj", "a:min", ... or "auto"
    int window_beats = 1;
    std::string cost_model_name = "meanvar";  // mean | variance | meanvar
    std::string penalty_name = "bic";         // "bic" or a positive number
    double multiplier = 2.5;
    int edge_bars = 3;
    int min_seg_len = 2;
    int min_buildup = 4;
    double threshold = 0.25;
    double half_window_s = 2.0;
    double grid_step_s = 0.5;
    std::string out_dir = ".";
};

// ---- key strings ----------------------------------------------------------

inline std::optional<key_spec> parse_key_string(const std::string& text) {
    if (text == "auto" || text.empty()) return std::nullopt;
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw domain_error(errc::bad_config,
                           "key must look like 'C:maj', 'a:min' or 'auto', got '" + text + "'");
    std::string name = text.substr(0, colon);
    std::string mode_str = text.substr(colon + 1);
    for (auto& c : mode_str) c = static_cast<char>(std::tolower(c));
    mode m;
    if (mode_str == "maj" || mode_str == "major") m = mode::major;
    else if (mode_str == "min" || mode_str == "minor") m = mode::minor;
    else
        throw domain_error(errc::bad_config, "unknown mode '" + mode_str + "' in key");
    if (name.empty())
        throw domain_error(errc::bad_config, "empty key name");
    int base;
    switch (std::toupper(name[0])) {
        case 'C': base = 0; break;
        case 'D': base = 2; break;
        case 'E': base = 4; break;
        case 'F': base = -1; break;
        case 'G': base = 1; break;
        case 'A': base = 3; break;
        case 'B': base = 5; break;
        default:
            throw domain_error(errc::bad_config, "unknown tonic letter in key '" + text + "'");
    }
    for (size_t i = 1; i < name.size(); ++i) {
        if (name[i] == '#') base += 7;
        else if (name[i] == 'b') base -= 7;
        else
            throw domain_error(errc::bad_config, "unexpected accidental '" +
                                                     std::string(1, name[i]) + "' in key");
    }
    if (base < -15 || base > 15)
        throw domain_error(errc::bad_config, "key tonic out of range on the line of fifths");
    return key_spec{base, m};
}

inline std::string fifths_to_name(int fifths) {
    static constexpr const char* letters = "FCGDAEB";
    int idx = fifths + 1;
    int pos = ((idx % 7) + 7) % 7;
    int acc = (idx - pos) / 7;
    std::string name(1, letters[pos]);
    for (int i = 0; i < acc; ++i) name += '#';
    for (int i = 0; i < -acc; ++i) name += 'b';
    return name;
}

inline std::string key_to_string(const std::optional<key_spec>& key) {
    if (!key) return "fallback-global-ce";
    return fifths_to_name(key->tonic_fifths) +
           (key->key_mode == mode::major ? ":maj" : ":min");
}

// ---- resolved parameters --------------------------------------------------

struct resolved_config {
    std::optional<key_spec> key;
    cost_model model = cost_model::meanvar_normal;
    penalty pen{};
    helix_params params{};
    run_config raw;
};

inline resolved_config resolve_config(const run_config& cfg) {
    resolved_config r;
    r.raw = cfg;
    r.key = parse_key_string(cfg.key);
    if (cfg.cost_model_name == "mean") r.model = cost_model::mean_normal;
    else if (cfg.cost_model_name == "variance") r.model = cost_model::variance_normal;
    else if (cfg.cost_model_name == "meanvar") r.model = cost_model::meanvar_normal;
    else
        throw domain_error(errc::bad_config,
                           "cost model must be mean|variance|meanvar, got '" +
                               cfg.cost_model_name + "'");
    if (cfg.penalty_name == "bic") {
        r.pen = penalty::bic();
    } else {
        try {
            size_t used = 0;
            double v = std::stod(cfg.penalty_name, &used);
            if (used != cfg.penalty_name.size()) throw std::invalid_argument("trailing");
            r.pen = penalty::manual(v);
        } catch (const domain_error&) {
            throw;
        } catch (const std::exception&) {
            throw domain_error(errc::bad_config,
                               "penalty must be 'bic' or a positive number, got '" +
                                   cfg.penalty_name + "'");
        }
    }
    if (cfg.window_beats < 1) throw domain_error(errc::bad_config, "window_beats must be >= 1");
    if (!(cfg.multiplier > 0)) throw domain_error(errc::bad_config, "multiplier must be > 0");
    if (cfg.edge_bars < 0) throw domain_error(errc::bad_config, "edge_bars must be >= 0");
    if (cfg.min_seg_len < 1) throw domain_error(errc::bad_config, "min_seg_len must be >= 1");
    if (cfg.min_buildup < 1) throw domain_error(errc::bad_config, "min_buildup must be >= 1");
    if (!(cfg.threshold > 0 && cfg.threshold <= 1))
        throw domain_error(errc::bad_config, "threshold must lie in (0,1]");
    if (!(cfg.half_window_s > 0)) throw domain_error(errc::bad_config, "half_window must be > 0");
    if (!(cfg.grid_step_s > 0)) throw domain_error(errc::bad_config, "grid_step must be > 0");
    return r;
}

// ---- file helpers ----------------------------------------------------------

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw parse_error(errc::io_error, 0, "cannot open '" + tmp.string() + "' for writing");
        f << content;
        f.flush();
        if (!f)
            throw parse_error(errc::io_error, 0, "failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string slurp_file(const std::string& path, const char* role) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw parse_error(errc::io_error, 0,
                          std::string("cannot open ") + role + " file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---- piece loading ----------------------------------------------------------

struct piece_paths {
    std::string piece_id;
    std::string notes, beats, annotations;  // annotations may be empty
    std::string key;                        // empty = inherit run config
};

inline std::string default_piece_id(const std::string& notes_path) {
    auto stem = std::filesystem::path(notes_path).stem().string();
    return stem.empty() ? "piece" : stem;
}

inline piece_bundle load_piece(const resolved_config& rc, const piece_paths& paths) {
    if (paths.notes.empty())
        throw parse_error(errc::io_error, 0, "missing required input: notes file");
    if (paths.beats.empty())
        throw parse_error(errc::io_error, 0, "missing required input: beats file");
    std::string piece_id = paths.piece_id.empty() ? default_piece_id(paths.notes) : paths.piece_id;

    std::istringstream notes_in(slurp_file(paths.notes, "notes"));
    auto notes = parse_notes(notes_in);
    std::istringstream beats_in(slurp_file(paths.beats, "beats"));
    auto beats = parse_beats(beats_in);
    std::optional<annotation_set> annotations;
    if (!paths.annotations.empty()) {
        std::istringstream ann_in(slurp_file(paths.annotations, "annotations"));
        annotations = parse_annotations(ann_in, piece_id);
    }
    auto key = paths.key.empty() ? rc.key : parse_key_string(paths.key);
    return validate_bundle(std::move(notes), std::move(beats), std::move(annotations), key,
                           piece_id);
}

// Manifest: one piece per line, `piece_id,notes,beats[,annotations[,key]]`,
// paths relative to the manifest file. `#` comments and blank lines ignored.
inline std::vector<piece_paths> parse_manifest(const std::string& manifest_path) {
    std::istringstream in(slurp_file(manifest_path, "manifest"));
    auto base = std::filesystem::path(manifest_path).parent_path();
    auto rel = [&](const std::string& p) {
        if (p.empty()) return p;
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    std::vector<piece_paths> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto t = csv::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = csv::split_fields(t);
        if (fields.size() < 3 || fields.size() > 5)
            throw parse_error(errc::malformed_row, line_no,
                              "manifest rows are piece_id,notes,beats[,annotations[,key]]");
        piece_paths p;
        p.piece_id = fields[0];
        p.notes = rel(fields[1]);
        p.beats = rel(fields[2]);
        if (fields.size() > 3) p.annotations = rel(fields[3]);
        if (fields.size() > 4) p.key = fields[4];
        out.push_back(std::move(p));
    }
    if (out.empty())
        throw parse_error(errc::malformed_row, 0, "manifest lists no pieces");
    return out;
}

// ---- metadata --------------------------------------------------------------

inline std::vector<std::string> metadata_lines(const resolved_config& rc,
                                               const piece_bundle& bundle) {
    const auto& c = rc.raw;
    std::vector<std::string> m;
    m.push_back(std::string("generator=tipping ") + version_string);
    m.push_back("piece_id=" + bundle.piece_id);
    m.push_back("key=" + key_to_string(bundle.key));
    m.push_back("window_beats=" + std::to_string(c.window_beats));
    m.push_back(std::string("cost_model=") + cost_model_name(rc.model));
    m.push_back("penalty=" + c.penalty_name);
    m.push_back("min_seg_len=" + std::to_string(c.min_seg_len));
    m.push_back("min_buildup=" + std::to_string(c.min_buildup));
    m.push_back("multiplier=" + format_general(c.multiplier));
    m.push_back("edge_bars=" + std::to_string(c.edge_bars));
    m.push_back("threshold=" + format_general(c.threshold));
    m.push_back("half_window_s=" + format_general(c.half_window_s));
    m.push_back("grid_step_s=" + format_general(c.grid_step_s));
    m.push_back("stats_include_edge_bars=true");
    m.push_back("cloud_weighting=performance-seconds");
    return m;
}

// ---- per-piece computation ---------------------------------------------------

struct piece_results {
    piece_bundle bundle;
    tension_series tension;
    beat_duration_series beat_series;
    std::vector<predicted_point> model1;
    std::vector<changepoint> model2;
};

inline piece_results analyze_piece(const resolved_config& rc, piece_bundle bundle) {
    piece_results r{std::move(bundle), {}, {}, {}, {}};
    tension_config tc;
    tc.window_beats = rc.raw.window_beats;
    tc.params = rc.params;
    r.tension = compute_tension(r.bundle, tc);
    r.beat_series = beat_durations(r.bundle.beats);
    r.model1 = model1_predict(r.bundle.beats, rc.raw.multiplier, rc.raw.edge_bars);
    model2_config mc;
    mc.model = rc.model;
    mc.pen = rc.pen;
    mc.min_seg_len = static_cast<size_t>(rc.raw.min_seg_len);
    mc.min_buildup = static_cast<size_t>(rc.raw.min_buildup);
    r.model2 = model2_predict(r.tension, mc);
    return r;
}

// ---- artifact emission -------------------------------------------------------

namespace detail {

inline std::string with_comments(const std::vector<std::string>& meta, const std::string& body) {
    std::string out;
    for (const auto& m : meta) out += "# " + m + "\n";
    out += body;
    return out;
}

inline std::string tension_csv(const resolved_config& rc, const piece_results& pr) {
    std::ostringstream body;
    write_tension_csv(body, pr.tension);
    auto meta = metadata_lines(rc, pr.bundle);
    meta.push_back("n_windows=" + std::to_string(pr.tension.window_times.size()));
    return with_comments(meta, body.str());
}

inline std::string model1_csv(const resolved_config& rc, const piece_results& pr) {
    auto meta = metadata_lines(rc, pr.bundle);
    meta.push_back("beat_mean_s=" + format_general(pr.beat_series.mean, 17));
    meta.push_back("beat_sample_std_s=" + format_general(pr.beat_series.sample_std, 17));
    double thr = pr.beat_series.mean + rc.raw.multiplier * pr.beat_series.sample_std;
    meta.push_back("duration_threshold_s=" + format_general(thr, 17));
    std::ostringstream body;
    body << "time_s,score,bar_number\n";
    for (const auto& p : pr.model1) {
        int bar = 0;
        for (size_t i = 0; i < pr.beat_series.start_times.size(); ++i) {
            if (pr.beat_series.start_times[i] == p.time_s) {
                bar = pr.beat_series.bar_numbers[i];
                break;
            }
        }
        body << format_fixed(p.time_s) << ',' << format_fixed(p.score) << ',' << bar << "\n";
    }
    return with_comments(meta, body.str());
}

inline std::string model2_csv(const resolved_config& rc, const piece_results& pr) {
    auto meta = metadata_lines(rc, pr.bundle);
    meta.push_back("resolved_penalty=" +
                   format_general(rc.pen.resolve(rc.model, pr.tension.strain.size()), 17));
    std::ostringstream body;
    body << "channel,index,time_s,mean_before,mean_after,direction\n";
    for (const auto& c : pr.model2)
        body << channel_name(c.chan) << ',' << c.index << ',' << format_fixed(c.time_s) << ','
             << format_fixed(c.mean_before) << ',' << format_fixed(c.mean_after) << ','
             << (c.direction == shift_direction::high_to_low ? "high_to_low" : "low_to_high")
             << "\n";
    return with_comments(meta, body.str());
}

inline std::string tension_svg(const resolved_config& rc, const piece_results& pr) {
    std::vector<svg::panel> panels(3);
    const char* titles[3] = {"cloud diameter", "cloud momentum", "tensile strain"};
    const char* colors[3] = {"#1b9e77", "#d95f02", "#7570b3"};
    const std::vector<double>* series[3] = {&pr.tension.diameter, &pr.tension.momentum,
                                            &pr.tension.strain};
    for (int i = 0; i < 3; ++i) {
        panels[i].title = titles[i];
        panels[i].lines.push_back({pr.tension.window_times, *series[i], colors[i]});
    }
    std::ostringstream out;
    svg::write_figure(out, panels, "time (s)", metadata_lines(rc, pr.bundle));
    return out.str();
}

inline std::string predictions_svg(const resolved_config& rc, const piece_results& pr) {
    std::vector<svg::panel> panels;
    svg::panel beats;
    beats.title = "beat durations";
    beats.y_label = "s";
    beats.lines.push_back({pr.beat_series.start_times, pr.beat_series.durations, "#34495e"});
    beats.hline = pr.beat_series.mean + rc.raw.multiplier * pr.beat_series.sample_std;
    svg::scatter_series flagged;
    flagged.color = "#c0392b";
    for (const auto& p : pr.model1) {
        flagged.x.push_back(p.time_s);
        for (size_t i = 0; i < pr.beat_series.start_times.size(); ++i)
            if (pr.beat_series.start_times[i] == p.time_s)
                flagged.y.push_back(pr.beat_series.durations[i]);
    }
    beats.points.push_back(std::move(flagged));
    panels.push_back(std::move(beats));

    const char* titles[3] = {"cloud diameter", "cloud momentum", "tensile strain"};
    const char* colors[3] = {"#1b9e77", "#d95f02", "#7570b3"};
    const std::vector<double>* series[3] = {&pr.tension.diameter, &pr.tension.momentum,
                                            &pr.tension.strain};
    const channel chans[3] = {channel::diameter, channel::momentum, channel::strain};
    for (int i = 0; i < 3; ++i) {
        svg::panel p;
        p.title = titles[i];
        p.lines.push_back({pr.tension.window_times, *series[i], colors[i]});
        for (const auto& c : pr.model2)
            if (c.chan == chans[i]) p.vlines.push_back(c.time_s);
        panels.push_back(std::move(p));
    }
    std::ostringstream out;
    svg::write_figure(out, panels, "time (s)", metadata_lines(rc, pr.bundle));
    return out.str();
}

inline std::string annotations_svg(const resolved_config& rc, const piece_bundle& bundle) {
    const auto& set = *bundle.annotations;
    svg::panel p;
    p.title = "perceived tipping points (" + set.piece_id + ")";
    p.y_label = "listener";
    svg::scatter_series marks;
    for (size_t i = 0; i < set.marks.size(); ++i) {
        marks.x.push_back(set.marks[i].time_s);
        marks.y.push_back(static_cast<double>(i + 1));
    }
    p.points.push_back(std::move(marks));
    std::ostringstream out;
    svg::write_figure(out, {p}, "time (s)", metadata_lines(rc, bundle), 900, 280);
    return out.str();
}

inline nlohmann::json params_json(const resolved_config& rc) {
    const auto& c = rc.raw;
    return nlohmann::json{{"key", c.key},
                          {"window_beats", c.window_beats},
                          {"cost_model", cost_model_name(rc.model)},
                          {"penalty", c.penalty_name},
                          {"min_seg_len", c.min_seg_len},
                          {"min_buildup", c.min_buildup},
                          {"multiplier", c.multiplier},
                          {"edge_bars", c.edge_bars},
                          {"threshold", c.threshold},
                          {"half_window_s", c.half_window_s},
                          {"grid_step_s", c.grid_step_s}};
}

inline nlohmann::json piece_json(const piece_results& pr, const match_report& rep,
                                 const std::vector<popular_point>& popular) {
    nlohmann::json j;
    j["piece_id"] = pr.bundle.piece_id;
    j["key"] = key_to_string(pr.bundle.key);
    j["n_listeners"] = pr.bundle.annotations ? pr.bundle.annotations->n_listeners : 0;
    j["n_marks"] = pr.bundle.annotations ? pr.bundle.annotations->marks.size() : 0;
    if (rep.spread_s) j["spread_s"] = *rep.spread_s;
    else j["spread_s"] = nullptr;

    auto points = nlohmann::json::array();
    for (size_t i = 0; i < popular.size(); ++i) {
        points.push_back({{"start_s", popular[i].interval_start_s},
                          {"end_s", popular[i].interval_end_s},
                          {"peak_fraction", popular[i].peak_fraction},
                          {"n_supporters", popular[i].supporter_ids.size()},
                          {"status", match_status_name(rep.per_point_status[i])}});
    }
    j["popular_points"] = points;

    auto m1 = nlohmann::json::array();
    for (const auto& p : pr.model1) m1.push_back({{"time_s", p.time_s}, {"score", p.score}});
    j["model1"] = m1;
    auto m2 = nlohmann::json::array();
    for (const auto& c : pr.model2)
        m2.push_back({{"channel", channel_name(c.chan)},
                      {"index", c.index},
                      {"time_s", c.time_s},
                      {"mean_before", c.mean_before},
                      {"mean_after", c.mean_after},
                      {"direction", c.direction == shift_direction::high_to_low ? "high_to_low"
                                                                                : "low_to_high"}});
    j["model2"] = m2;
    j["proportions"] = {{"model1_only", rep.prop_model1_only},
                        {"model2_only", rep.prop_model2_only},
                        {"both", rep.prop_both},
                        {"neither", rep.prop_neither}};
    return j;
}

}  // namespace detail

// ---- commands ---------------------------------------------------------------

// Exit codes: 0 ok, 2 input error, 3 validation error, 4 internal error.
template <typename Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return is_input_error(e.kind()) ? 2 : 3;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return is_input_error(e.kind()) ? 2 : 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 4;
    }
}

inline piece_paths paths_from_config(const run_config& cfg) {
    piece_paths p;
    p.piece_id = cfg.piece_id;
    p.notes = cfg.notes_path;
    p.beats = cfg.beats_path;
    p.annotations = cfg.annotations_path;
    return p;
}

inline int cmd_tension(const run_config& cfg, std::ostream& err = std::cerr) {
    return run_guarded(err, [&] {
        auto rc = resolve_config(cfg);
        auto pr = analyze_piece(rc, load_piece(rc, paths_from_config(cfg)));
        std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        write_file_atomic(out / "tension.csv", detail::tension_csv(rc, pr));
        write_file_atomic(out / "tension.svg", detail::tension_svg(rc, pr));
    });
}

inline int cmd_predict(const run_config& cfg, std::ostream& err = std::cerr) {
    return run_guarded(err, [&] {
        auto rc = resolve_config(cfg);
        auto pr = analyze_piece(rc, load_piece(rc, paths_from_config(cfg)));
        std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        write_file_atomic(out / "model1.csv", detail::model1_csv(rc, pr));
        write_file_atomic(out / "model2.csv", detail::model2_csv(rc, pr));
        write_file_atomic(out / "predictions.svg", detail::predictions_svg(rc, pr));
    });
}

namespace detail {

struct evaluated_piece {
    piece_results results;
    std::vector<popular_point> popular;
    match_report report;
};

inline evaluated_piece evaluate_one(const resolved_config& rc, piece_bundle bundle,
                                    std::ostream& err) {
    if (!bundle.annotations)
        throw parse_error(errc::io_error, 0,
                          "missing required input: annotations file (piece '" +
                              bundle.piece_id + "')");
    evaluated_piece ep{analyze_piece(rc, std::move(bundle)), {}, {}};
    const auto& ann = *ep.results.bundle.annotations;
    if (ann.marks.empty())
        err << "warning: piece '" << ann.piece_id << "' has no annotation marks\n";
    ep.popular = popular_points(ann, rc.raw.half_window_s, rc.raw.threshold, rc.raw.grid_step_s);
    ep.report =
        match_predictions(ann, ep.popular, ep.results.model1, ep.results.model2,
                          rc.raw.half_window_s);
    return ep;
}

inline void write_evaluation_files(const resolved_config& rc,
                                   const std::vector<evaluated_piece>& pieces,
                                   const std::filesystem::path& out) {
    // summary.csv: one row per popular point across all pieces.
    std::ostringstream body;
    body << "piece_id,popular_start_s,popular_end_s,peak_fraction,status\n";
    for (const auto& ep : pieces)
        for (size_t i = 0; i < ep.popular.size(); ++i)
            body << ep.results.bundle.piece_id << ',' << format_fixed(ep.popular[i].interval_start_s)
                 << ',' << format_fixed(ep.popular[i].interval_end_s) << ','
                 << format_fixed(ep.popular[i].peak_fraction) << ','
                 << match_status_name(ep.report.per_point_status[i]) << "\n";
    std::vector<std::string> meta = metadata_lines(rc, pieces.front().results.bundle);
    if (pieces.size() > 1) meta[1] = "piece_id=(multiple)";
    write_file_atomic(out / "summary.csv", with_comments(meta, body.str()));

    // report.json: per-piece sections plus the pooled aggregate.
    nlohmann::json j;
    j["generator"] = std::string("tipping ") + version_string;
    j["params"] = params_json(rc);
    auto arr = nlohmann::json::array();
    int counts[4] = {0, 0, 0, 0};
    size_t total_points = 0;
    double spread_sum = 0;
    size_t spread_n = 0;
    for (const auto& ep : pieces) {
        arr.push_back(piece_json(ep.results, ep.report, ep.popular));
        for (auto s : ep.report.per_point_status) ++counts[static_cast<int>(s)];
        total_points += ep.popular.size();
        if (ep.report.spread_s) {
            spread_sum += *ep.report.spread_s;
            ++spread_n;
        }
    }
    j["pieces"] = arr;
    nlohmann::json agg;
    agg["n_pieces"] = pieces.size();
    agg["n_popular_points"] = total_points;
    double denom = total_points > 0 ? static_cast<double>(total_points) : 1.0;
    agg["proportions"] = {
        {"model1_only", counts[static_cast<int>(match_status::model1_only)] / denom},
        {"model2_only", counts[static_cast<int>(match_status::model2_only)] / denom},
        {"both", counts[static_cast<int>(match_status::both)] / denom},
        {"neither", counts[static_cast<int>(match_status::neither)] / denom}};
    if (spread_n > 0) agg["mean_spread_s"] = spread_sum / static_cast<double>(spread_n);
    else agg["mean_spread_s"] = nullptr;
    agg["n_pieces_with_spread"] = spread_n;
    j["aggregate"] = agg;
    write_file_atomic(out / "report.json", j.dump(2) + "\n");
}

}  // namespace detail

inline int cmd_evaluate(const run_config& cfg, std::ostream& err = std::cerr) {
    return run_guarded(err, [&] {
        auto rc = resolve_config(cfg);
        std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);
        std::vector<detail::evaluated_piece> pieces;
        if (!cfg.manifest_path.empty()) {
            for (const auto& pp : parse_manifest(cfg.manifest_path))
                pieces.push_back(detail::evaluate_one(rc, load_piece(rc, pp), err));
        } else {
            pieces.push_back(
                detail::evaluate_one(rc, load_piece(rc, paths_from_config(cfg)), err));
        }
        for (const auto& ep : pieces) {
            auto dir = pieces.size() > 1 ? out / ep.results.bundle.piece_id : out;
            std::filesystem::create_directories(dir);
            write_file_atomic(dir / "annotations.svg",
                              detail::annotations_svg(rc, ep.results.bundle));
        }
        detail::write_evaluation_files(rc, pieces, out);
    });
}

// Full pipeline for one piece or a manifest: tension + predictions per piece,
// then the evaluation artifacts when annotations are available.
inline int cmd_pipeline(const run_config& cfg, std::ostream& err = std::cerr) {
    return run_guarded(err, [&] {
        auto rc = resolve_config(cfg);
        std::filesystem::path out(cfg.out_dir);
        std::filesystem::create_directories(out);

        std::vector<piece_paths> all;
        if (!cfg.manifest_path.empty()) all = parse_manifest(cfg.manifest_path);
        else all.push_back(paths_from_config(cfg));

        std::vector<detail::evaluated_piece> evaluated;
        for (const auto& pp : all) {
            auto bundle = load_piece(rc, pp);
            auto dir = all.size() > 1 ? out / bundle.piece_id : out;
            std::filesystem::create_directories(dir);
            auto pr = analyze_piece(rc, std::move(bundle));
            write_file_atomic(dir / "tension.csv", detail::tension_csv(rc, pr));
            write_file_atomic(dir / "tension.svg", detail::tension_svg(rc, pr));
            write_file_atomic(dir / "model1.csv", detail::model1_csv(rc, pr));
            write_file_atomic(dir / "model2.csv", detail::model2_csv(rc, pr));
            write_file_atomic(dir / "predictions.svg", detail::predictions_svg(rc, pr));
            if (pr.bundle.annotations) {
                detail::evaluated_piece ep{std::move(pr), {}, {}};
                const auto& ann = *ep.results.bundle.annotations;
                if (ann.marks.empty())
                    err << "warning: piece '" << ann.piece_id << "' has no annotation marks\n";
                ep.popular = popular_points(ann, rc.raw.half_window_s, rc.raw.threshold,
                                            rc.raw.grid_step_s);
                ep.report = match_predictions(ann, ep.popular, ep.results.model1,
                                              ep.results.model2, rc.raw.half_window_s);
                write_file_atomic(dir / "annotations.svg",
                                  detail::annotations_svg(rc, ep.results.bundle));
                evaluated.push_back(std::move(ep));
            }
        }
        if (!evaluated.empty()) detail::write_evaluation_files(rc, evaluated, out);
    });
}

}  // namespace tipping
