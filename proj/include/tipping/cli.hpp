// CLI front end: subcommands `tension`, `predict`, `evaluate`, `pipeline`.
// All flags live on the main app (so a key=value config file can set any of
// them); the subcommand only selects the action and command-line values
// override the config file.
#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tipping/run.hpp"

namespace tipping {

inline int cli_run(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"tipping: beat-timing and tonal-tension tipping point detection"};
    app.fallthrough(true);
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags override it");

    run_config cfg;
    app.add_option("--notes", cfg.notes_path, "notes CSV (onset_s,duration_s,midi_pitch,spelled_fifths)");
    app.add_option("--beats", cfg.beats_path, "beats CSV (beat_index,time_s,bar_number)");
    app.add_option("--annotations", cfg.annotations_path,
                   "annotations CSV (listener_id,time_s,anticipation_s,tension_rating)");
    app.add_option("--manifest", cfg.manifest_path,
                   "multi-piece manifest: piece_id,notes,beats[,annotations[,key]] per line");
    app.add_option("--piece-id", cfg.piece_id, "piece identifier (default: notes file stem)");
    app.add_option("--key", cfg.key, "key such as C:maj or a:min, or 'auto' for the global-CE fallback");
    app.add_option("--window-beats", cfg.window_beats, "beats per analysis window")
        ->check(CLI::PositiveNumber);
    app.add_option("--cost-model", cfg.cost_model_name, "changepoint cost: mean|variance|meanvar");
    app.add_option("--penalty", cfg.penalty_name, "'bic' or a manual positive penalty value");
    app.add_option("--multiplier", cfg.multiplier, "beat-duration threshold multiplier");
    app.add_option("--edge-bars", cfg.edge_bars, "bars excluded from detection at each end");
    app.add_option("--min-seg-len", cfg.min_seg_len, "minimum changepoint segment length");
    app.add_option("--min-buildup", cfg.min_buildup,
                   "minimum build-up length (windows) before a high-to-low drop");
    app.add_option("--threshold", cfg.threshold, "popular-point listener fraction");
    app.add_option("--half-window", cfg.half_window_s, "half width (s) of the coverage interval");
    app.add_option("--grid-step", cfg.grid_step_s, "popularity scan grid step (s)");
    app.add_option("--out", cfg.out_dir, "output directory");

    auto* sub_tension = app.add_subcommand("tension", "emit tension.csv and tension.svg");
    auto* sub_predict =
        app.add_subcommand("predict", "emit model1.csv, model2.csv and predictions.svg");
    auto* sub_evaluate = app.add_subcommand(
        "evaluate", "match predictions against annotations; emit report.json, summary.csv");
    auto* sub_pipeline =
        app.add_subcommand("pipeline", "tension + predict + evaluate for a piece or manifest");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    if (sub_tension->parsed()) return cmd_tension(cfg, err);
    if (sub_predict->parsed()) return cmd_predict(cfg, err);
    if (sub_evaluate->parsed()) return cmd_evaluate(cfg, err);
    if (sub_pipeline->parsed()) return cmd_pipeline(cfg, err);
    err << "error: no subcommand given\n";
    return 2;
}

inline int cli_run(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    std::vector<const char*> argv;
    argv.push_back("tipping");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tipping
