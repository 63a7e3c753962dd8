#pragma once

#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
} // namespace CLI

namespace maskbench::cli {

// One parsed command line: which subcommand ran, where configuration came
// from, and the flag values CLI11 bound. Exposed (with build_app) so tests
// can reflect over the complete flag registry.
struct CliInvocation {
    std::string subcommand;
    std::string config_path;
    std::vector<std::string> overrides; // --set key=value, applied in order
    std::string out_dir;

    // synth
    std::int64_t synth_images = 20;
    std::string synth_ships = "1-4";
    std::int64_t synth_size = 64;
    std::string synth_ship_w = "6-16";
    std::string synth_ship_h = "3-8";
    std::int64_t synth_min_sep = 2;
    std::int64_t synth_margin = 0;
    std::string synth_scene = "mixed";
    std::uint64_t seed = 7;
    bool synth_pgm = false;

    // run / eval
    std::string gt_path;
    std::string scene_tag_path;
    std::string predictions_path;
    std::string backend_kind;
    std::string backend_command;
    std::int64_t backend_channels = 0; // 0: default to --jobs
    std::int64_t perturb_shift = 0;
    double perturb_drop = 0.0;
    double confidence_threshold = 0.5;
    double match_threshold = 0.5;
    std::string relaxed_radii = "0,1,2,3";
    double box_expand = 0.0;
    std::int64_t max_candidates = 3;
    std::int64_t jobs = 1;
    bool skip_failures = false;
    bool include_unmatched = false;
    bool write_timing = false;
    std::string run_id;
    std::string method;
    std::string supervision;
    std::int64_t curve_divisions = 20;

    // sweep / report / compare
    std::string run_path;
    std::string run_path_b;
    std::string sweep_radii = "0,1,2,3,4";
};

// Registers every subcommand and flag on a fresh CLI11 app bound to `inv`.
std::unique_ptr<CLI::App> build_app(CliInvocation& inv);

// Full command-line entry point: parse, dispatch, map errors to exit codes
// (0 success, 1 runtime/partial failure, 2 usage/input error).
int run_cli(int argc, const char* const* argv);

} // namespace maskbench::cli
