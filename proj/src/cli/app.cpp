#include "maskbench/cli/app.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "maskbench/cli/config.hpp"
#include "maskbench/core/log.hpp"
#include "maskbench/dataset/coco_io.hpp"
#include "maskbench/dataset/json_util.hpp"
#include "maskbench/dataset/pgm.hpp"
#include "maskbench/dataset/synthetic.hpp"
#include "maskbench/metrics/curves.hpp"
#include "maskbench/metrics/evaluate.hpp"
#include "maskbench/pipeline/backend.hpp"
#include "maskbench/pipeline/runner.hpp"
#include "maskbench/raster/ops.hpp"
#include "maskbench/report/report.hpp"

namespace maskbench::cli {

namespace {

// Failures while writing results: still exit 1 (runtime), never 2 — the
// inputs were fine.
class EmitError : public Error {
  public:
    using Error::Error;
};

bool is_input_error(const Error& e) {
    return dynamic_cast<const ConfigError*>(&e) != nullptr ||
           dynamic_cast<const ParseError*>(&e) != nullptr ||
           dynamic_cast<const IoError*>(&e) != nullptr ||
           dynamic_cast<const ReferentialIntegrityError*>(&e) != nullptr ||
           dynamic_cast<const MalformedRleError*>(&e) != nullptr ||
           dynamic_cast<const GenerationError*>(&e) != nullptr ||
           dynamic_cast<const IncompatibleRunsError*>(&e) != nullptr ||
           dynamic_cast<const UndefinedMetricError*>(&e) != nullptr ||
           dynamic_cast<const DegeneratePolygonError*>(&e) != nullptr ||
           dynamic_cast<const ShapeError*>(&e) != nullptr;
}

template <typename Fn>
auto guard_emit(Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        throw EmitError(e.what());
    }
}

std::pair<int, int> parse_range(const std::string& text, const std::string& what) {
    auto parse_one = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(what + " must be N or MIN-MAX, got \"" + text + "\"");
        }
    };
    std::size_t dash = text.find('-', 1); // a leading '-' would be a sign, not a range
    if (dash == std::string::npos) {
        int v = parse_one(text);
        return {v, v};
    }
    int lo = parse_one(text.substr(0, dash));
    int hi = parse_one(text.substr(dash + 1));
    if (hi < lo) throw ConfigError(what + " range is empty: \"" + text + "\"");
    return {lo, hi};
}

std::vector<int> parse_int_csv(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what + " must be a comma-separated integer list, got \"" + text + "\"");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string int_list_raw(const std::vector<int>& values) {
    std::string raw = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) raw += ",";
        raw += std::to_string(values[i]);
    }
    return raw + "]";
}

Config base_config(const CliInvocation& inv) {
    Config cfg;
    if (!inv.config_path.empty()) cfg = Config::from_file(inv.config_path);
    for (const std::string& assignment : inv.overrides) {
        cfg.set_override(assignment);
    }
    return cfg;
}

void ensure_key(Config& cfg, const std::string& key, const std::string& raw) {
    if (!cfg.has(key)) cfg.set(key, raw);
}

std::string require_string(const Config& cfg, const std::string& key, const std::string& flag) {
    std::string value = cfg.get_string(key, "");
    if (value.empty()) {
        throw ConfigError("missing required setting " + key + " (" + flag + ")");
    }
    return value;
}

// A path stored in a run record may be relative to where the record lives.
std::string resolve_near(const std::string& run_path, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute() || std::filesystem::exists(path)) {
        return path;
    }
    std::filesystem::path near = std::filesystem::path(run_path).parent_path() / path;
    return near.string();
}

void print_written(const std::vector<std::string>& paths) {
    for (const std::string& path : paths) {
        std::cout << path << "\n";
    }
}

// ---- synth ----------------------------------------------------------------

int cmd_synth(CliInvocation& inv, CLI::App* sub) {
    Config cfg = base_config(inv);
    if (sub->count("--images")) cfg.set("synth.images", std::to_string(inv.synth_images));
    if (sub->count("--ships")) cfg.set("synth.ships", inv.synth_ships);
    if (sub->count("--size")) cfg.set("synth.size", std::to_string(inv.synth_size));
    if (sub->count("--ship-w")) cfg.set("synth.ship_w", inv.synth_ship_w);
    if (sub->count("--ship-h")) cfg.set("synth.ship_h", inv.synth_ship_h);
    if (sub->count("--min-sep")) cfg.set("synth.min_sep", std::to_string(inv.synth_min_sep));
    if (sub->count("--margin")) cfg.set("synth.margin", std::to_string(inv.synth_margin));
    if (sub->count("--scene")) cfg.set("synth.scene", inv.synth_scene);
    if (sub->count("--seed")) cfg.set("seed", std::to_string(inv.seed));
    if (sub->count("--pgm")) cfg.set("synth.pgm", "true");
    if (inv.out_dir.empty()) throw ConfigError("synth needs --out");

    dataset::SyntheticDatasetSpec spec;
    spec.image_count = static_cast<int>(cfg.get_int("synth.images", inv.synth_images));
    auto [ships_lo, ships_hi] = parse_range(cfg.get_string("synth.ships", inv.synth_ships), "--ships");
    spec.ships_min = ships_lo;
    spec.ships_max = ships_hi;
    int size = static_cast<int>(cfg.get_int("synth.size", inv.synth_size));
    spec.scene.width = size;
    spec.scene.height = size;
    auto [w_lo, w_hi] = parse_range(cfg.get_string("synth.ship_w", inv.synth_ship_w), "--ship-w");
    spec.scene.ship_w_min = w_lo;
    spec.scene.ship_w_max = w_hi;
    auto [h_lo, h_hi] = parse_range(cfg.get_string("synth.ship_h", inv.synth_ship_h), "--ship-h");
    spec.scene.ship_h_min = h_lo;
    spec.scene.ship_h_max = h_hi;
    spec.scene.min_separation = static_cast<int>(cfg.get_int("synth.min_sep", inv.synth_min_sep));
    spec.scene.margin = static_cast<int>(cfg.get_int("synth.margin", inv.synth_margin));
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(inv.seed)));

    std::string scene = cfg.get_string("synth.scene", inv.synth_scene);
    if (scene == "mixed") {
        spec.mixed_scenes = true;
    } else {
        spec.mixed_scenes = false;
        spec.scene.scene = dataset::scene_tag_from_string(scene);
        if (spec.scene.scene == dataset::SceneTag::Unknown && scene != "unknown") {
            throw ConfigError("--scene must be inshore, offshore, or mixed, got \"" + scene + "\"");
        }
    }
    bool pgm = cfg.get_bool("synth.pgm", inv.synth_pgm);

    dataset::GroundTruth gt = dataset::generate_synthetic_dataset(spec);
    if (pgm) {
        for (auto& image : gt.images) image.file_name = "images/" + image.file_name;
    }

    guard_emit([&] {
        std::error_code ec;
        std::filesystem::create_directories(inv.out_dir + (pgm ? "/images" : ""), ec);
        if (ec) throw IoError("cannot create " + inv.out_dir + ": " + ec.message());
        dataset::write_ground_truth(gt, inv.out_dir + "/gt.json");
        dataset::write_scene_tags(gt, inv.out_dir + "/scene_tags.json");
        if (pgm) {
            for (std::size_t i = 0; i < gt.images.size(); ++i) {
                dataset::write_pgm(dataset::render_scene(gt, i),
                                   inv.out_dir + "/" + gt.images[i].file_name);
            }
        }
    });
    std::cout << inv.out_dir << "/gt.json\n" << inv.out_dir << "/scene_tags.json\n";
    maskbench::log_info("synthesized " + std::to_string(gt.images.size()) + " images, " +
                   std::to_string(gt.total_instances()) + " instances");
    return 0;
}

// ---- shared run/eval plumbing ----------------------------------------------

void apply_eval_flags(const CliInvocation& inv, CLI::App* sub, Config& cfg) {
    if (sub->count("--gt")) cfg.set("dataset.gt", inv.gt_path);
    if (sub->count("--scene-tags")) cfg.set("dataset.scene_tags", inv.scene_tag_path);
    if (sub->count("--predictions")) cfg.set("predictions.path", inv.predictions_path);
    if (sub->count("--match-thresh")) {
        cfg.set("pipeline.match_threshold", std::to_string(inv.match_threshold));
    }
    if (sub->count("--radii")) {
        cfg.set("pipeline.relaxed_radii",
                int_list_raw(parse_int_csv(inv.relaxed_radii, "--radii")));
    }
    if (sub->count("--include-unmatched")) cfg.set("eval.include_unmatched", "true");
    if (sub->count("--run-id")) cfg.set("report.run_id", inv.run_id);
    if (sub->count("--method")) cfg.set("report.method", inv.method);
    if (sub->count("--supervision")) cfg.set("report.supervision", inv.supervision);
    if (sub->count("--curve-divisions")) {
        cfg.set("report.curve_divisions", std::to_string(inv.curve_divisions));
    }
}

metrics::EvalConfig eval_config_from(const Config& cfg) {
    metrics::EvalConfig ecfg;
    ecfg.match_threshold = cfg.get_double("pipeline.match_threshold", 0.5);
    ecfg.relaxed_radii = cfg.get_int_list("pipeline.relaxed_radii", {0, 1, 2, 3});
    ecfg.include_unmatched = cfg.get_bool("eval.include_unmatched", false);
    return ecfg;
}

report::RunRecord build_record(const dataset::GroundTruth& gt, const metrics::EvalResult& eval,
                               Config& cfg, const std::string& default_id_prefix,
                               const std::string& default_method,
                               const std::string& default_supervision) {
    report::RunRecord record;
    record.run_id = cfg.get_string("report.run_id", default_id_prefix + "-" + gt.digest());
    record.created = cfg.get_string("report.created", "");
    record.method = cfg.get_string("report.method", default_method);
    record.supervision = cfg.get_string("report.supervision", default_supervision);
    record.gt_digest = gt.digest();
    record.gt_instance_count = gt.total_instances();
    record.gt_image_count = gt.images.size();
    record.map = eval.map;
    record.instances = eval.instances;
    record.scene_reports = report::build_scene_reports(eval.instances, eval.config.include_unmatched);
    record.config = cfg.snapshot();
    return record;
}

// Semantic evaluation knobs land in the snapshot even when defaulted, so a
// record is self-describing; execution knobs (--jobs, --out, pool size) stay
// out because they must not change results.
void materialize_eval_keys(Config& cfg) {
    ensure_key(cfg, "pipeline.match_threshold", "0.5");
    ensure_key(cfg, "pipeline.relaxed_radii", "[0,1,2,3]");
    ensure_key(cfg, "eval.include_unmatched", "false");
    ensure_key(cfg, "report.curve_divisions", "20");
}

// ---- run --------------------------------------------------------------------

int cmd_run(CliInvocation& inv, CLI::App* sub) {
    Config cfg = base_config(inv);
    apply_eval_flags(inv, sub, cfg);
    if (sub->count("--backend")) cfg.set("backend.kind", inv.backend_kind);
    if (sub->count("--command")) cfg.set("backend.command", inv.backend_command);
    if (sub->count("--channels")) cfg.set("backend.channels", std::to_string(inv.backend_channels));
    if (sub->count("--shift")) cfg.set("perturb.shift", std::to_string(inv.perturb_shift));
    if (sub->count("--drop")) cfg.set("perturb.drop_rate", std::to_string(inv.perturb_drop));
    if (sub->count("--seed")) cfg.set("seed", std::to_string(inv.seed));
    if (sub->count("--confidence")) {
        cfg.set("pipeline.confidence_threshold", std::to_string(inv.confidence_threshold));
    }
    if (sub->count("--box-expand")) cfg.set("pipeline.box_expand", std::to_string(inv.box_expand));
    if (sub->count("--max-candidates")) {
        cfg.set("pipeline.max_candidates", std::to_string(inv.max_candidates));
    }
    if (sub->count("--skip-failures")) cfg.set("pipeline.skip_failures", "true");
    if (inv.out_dir.empty()) throw ConfigError("run needs --out");

    std::string gt_path = require_string(cfg, "dataset.gt", "--gt");
    dataset::GroundTruth gt =
        dataset::load_ground_truth(gt_path, cfg.get_string("dataset.scene_tags", ""));
    for (const std::string& warning : gt.warnings) maskbench::log_warn(warning);

    pipeline::BackendDescriptor desc;
    desc.kind = pipeline::backend_kind_from_string(cfg.get_string("backend.kind", "synthetic-oracle"));
    switch (desc.kind) {
        case pipeline::BackendDescriptor::Kind::Replay:
            desc.predictions_path = require_string(cfg, "predictions.path", "--predictions");
            break;
        case pipeline::BackendDescriptor::Kind::SyntheticOracle:
            desc.perturb.shift = static_cast<int>(cfg.get_int("perturb.shift", 0));
            desc.perturb.drop_rate = cfg.get_double("perturb.drop_rate", 0.0);
            desc.perturb.seed =
                static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(inv.seed)));
            break;
        case pipeline::BackendDescriptor::Kind::ExternalProcess:
            desc.command = require_string(cfg, "backend.command", "--command");
            desc.channels = static_cast<int>(
                cfg.get_int("backend.channels", std::max<std::int64_t>(inv.jobs, 1)));
            break;
    }

    pipeline::PipelineConfig pcfg;
    pcfg.confidence_threshold = cfg.get_double("pipeline.confidence_threshold", 0.5);
    pcfg.max_candidates = static_cast<int>(cfg.get_int("pipeline.max_candidates", 3));
    pcfg.match_threshold = cfg.get_double("pipeline.match_threshold", 0.5);
    pcfg.relaxed_radii = cfg.get_int_list("pipeline.relaxed_radii", {0, 1, 2, 3});
    pcfg.box_expand = cfg.get_double("pipeline.box_expand", 0.0);
    pcfg.skip_failed_images = cfg.get_bool("pipeline.skip_failures", false);
    pcfg.jobs = static_cast<int>(inv.jobs);
    pcfg.validate();

    pipeline::BackendPair backend = pipeline::make_backend(desc, gt);
    pipeline::SteadyClock clock;
    pipeline::PipelineResult result =
        pipeline::run_pipeline(gt, *backend.detector, *backend.segmenter, pcfg, clock);

    guard_emit([&] {
        std::error_code ec;
        std::filesystem::create_directories(inv.out_dir, ec);
        if (ec) throw IoError("cannot create " + inv.out_dir + ": " + ec.message());
        dataset::write_predictions(result.predictions, inv.out_dir + "/predictions.json");
    });

    // The record points at its own predictions file by relative path so the
    // whole output directory can move without breaking sweep re-derivation.
    materialize_eval_keys(cfg);
    ensure_key(cfg, "backend.kind", pipeline::to_string(desc.kind));
    ensure_key(cfg, "pipeline.confidence_threshold", "0.5");
    ensure_key(cfg, "pipeline.max_candidates", "3");
    ensure_key(cfg, "pipeline.box_expand", "0");
    if (desc.kind == pipeline::BackendDescriptor::Kind::SyntheticOracle) {
        ensure_key(cfg, "perturb.shift", "0");
        ensure_key(cfg, "perturb.drop_rate", "0");
        ensure_key(cfg, "seed", std::to_string(inv.seed));
    }
    cfg.set("predictions.path", "predictions.json");

    metrics::EvalConfig ecfg = eval_config_from(cfg);
    metrics::EvalResult eval = metrics::evaluate(gt, result.predictions, ecfg);
    report::RunRecord record =
        build_record(gt, eval, cfg, "run", pipeline::to_string(desc.kind), "box-prompted");
    if (!result.timings.empty()) record.timing = pipeline::summarize_timing(result.timings);

    int divisions = static_cast<int>(cfg.get_int("report.curve_divisions", inv.curve_divisions));
    std::vector<std::string> written =
        guard_emit([&] { return report::emit_run(record, inv.out_dir, divisions); });
    written.push_back(inv.out_dir + "/predictions.json");
    if (inv.write_timing && record.timing) {
        guard_emit([&] {
            report::write_timing(*record.timing, result.timings, inv.out_dir + "/timing.json");
        });
        written.push_back(inv.out_dir + "/timing.json");
    }
    std::sort(written.begin(), written.end());
    print_written(written);

    if (!result.skipped_images.empty()) {
        std::cerr << "skipped " << result.skipped_images.size() << " image(s):\n";
        for (const std::string& error : result.errors) std::cerr << "  " << error << "\n";
        return 1;
    }
    return 0;
}

// ---- eval -------------------------------------------------------------------

int cmd_eval(CliInvocation& inv, CLI::App* sub) {
    Config cfg = base_config(inv);
    apply_eval_flags(inv, sub, cfg);
    if (inv.out_dir.empty()) throw ConfigError("eval needs --out");

    std::string gt_path = require_string(cfg, "dataset.gt", "--gt");
    std::string pred_path = require_string(cfg, "predictions.path", "--predictions");
    dataset::GroundTruth gt =
        dataset::load_ground_truth(gt_path, cfg.get_string("dataset.scene_tags", ""));
    for (const std::string& warning : gt.warnings) maskbench::log_warn(warning);
    dataset::PredictionSet preds = dataset::load_predictions(pred_path, gt);

    materialize_eval_keys(cfg);
    metrics::EvalConfig ecfg = eval_config_from(cfg);
    metrics::EvalResult eval = metrics::evaluate(gt, preds, ecfg);
    report::RunRecord record = build_record(gt, eval, cfg, "eval", "offline-eval", "stored");

    int divisions = static_cast<int>(cfg.get_int("report.curve_divisions", inv.curve_divisions));
    std::vector<std::string> written =
        guard_emit([&] { return report::emit_run(record, inv.out_dir, divisions); });
    print_written(written);
    return 0;
}

// ---- sweep ------------------------------------------------------------------

int cmd_sweep(CliInvocation& inv, CLI::App* sub) {
    Config cfg = base_config(inv);
    if (inv.run_path.empty()) throw ConfigError("sweep needs --run pointing at a run.json");
    if (inv.out_dir.empty()) throw ConfigError("sweep needs --out");
    report::RunRecord run = report::load_run_record(inv.run_path);

    int divisions = sub->count("--grid-divisions")
                        ? static_cast<int>(inv.curve_divisions)
                        : static_cast<int>(run.config.value("report.curve_divisions", 20));
    std::vector<int> radii = parse_int_csv(inv.sweep_radii, "--radii");

    // Threshold curves come straight from the stored per-instance IoUs.
    std::error_code ec;
    std::filesystem::create_directories(inv.out_dir, ec);
    if (ec) throw EmitError("cannot create " + inv.out_dir + ": " + ec.message());
    metrics::ThresholdGrid grid = metrics::ThresholdGrid::uniform(divisions);
    std::vector<std::string> written;
    for (const auto& rep : run.scene_reports) {
        std::vector<double> ious;
        for (const auto& inst : run.instances) {
            if (rep.scene == "overall" || dataset::to_string(inst.scene) == rep.scene) {
                ious.push_back(inst.mask_iou);
            }
        }
        if (ious.empty()) continue;
        std::string path = inv.out_dir + "/threshold_curve_" + rep.scene + ".csv";
        guard_emit([&] {
            dataset::write_text_file(
                path, report::render_threshold_curve_csv(metrics::threshold_curve(ious, grid)));
        });
        written.push_back(path);
    }

    // Relaxed sweeps need masks, which records do not store; rebuild the
    // matched pairs from the files the record names.
    std::string gt_key = run.config.value("dataset.gt", "");
    std::string pred_key = run.config.value("predictions.path", "");
    if (gt_key.empty() || pred_key.empty()) {
        throw ConfigError("run record does not name its ground truth and predictions files; "
                          "relaxed sweeps need re-derivable mask pairs");
    }
    if (sub->count("--gt")) gt_key = inv.gt_path;
    if (sub->count("--predictions")) pred_key = inv.predictions_path;
    std::string scene_key = run.config.value("dataset.scene_tags", "");
    if (sub->count("--scene-tags")) scene_key = inv.scene_tag_path;

    dataset::GroundTruth gt = dataset::load_ground_truth(
        resolve_near(inv.run_path, gt_key),
        scene_key.empty() ? "" : resolve_near(inv.run_path, scene_key));
    dataset::PredictionSet preds =
        dataset::load_predictions(resolve_near(inv.run_path, pred_key), gt);
    double match_threshold = run.config.value("pipeline.match_threshold", 0.5);

    std::map<std::string, std::vector<std::pair<raster::BinaryMask, raster::BinaryMask>>> pairs;
    for (std::size_t idx = 0; idx < gt.images.size(); ++idx) {
        const dataset::GtImage& image = gt.images[idx];
        auto pit = preds.by_image.find(image.id);
        if (pit == preds.by_image.end()) continue;
        std::vector<dataset::Detection> detections;
        for (const auto& p : pit->second) detections.push_back(p.detection);
        metrics::MatchSet ms =
            metrics::match_instances(detections, gt.instances[idx], match_threshold);
        for (const auto& pair : ms.pairs) {
            const dataset::PredictedInstance& pred = pit->second[pair.detection_index];
            if (pred.segmentation_failed) continue;
            const dataset::GtInstance* inst = nullptr;
            for (const auto& candidate : gt.instances[idx]) {
                if (candidate.instance_id == pair.gt_instance_id) inst = &candidate;
            }
            raster::BinaryMask gt_mask(image.width, image.height);
            for (const auto& poly : inst->polygons) {
                raster::BinaryMask one = raster::rasterize_polygon(poly, image.width, image.height);
                for (std::size_t i = 0; i < one.data().size(); ++i) {
                    if (one.data()[i]) gt_mask.data()[i] = 1;
                }
            }
            auto masks = std::make_pair(raster::rle_decode(pred.mask), std::move(gt_mask));
            pairs["overall"].push_back(masks);
            pairs[dataset::to_string(inst->scene)].push_back(std::move(masks));
        }
    }
    for (const auto& [scene, scene_pairs] : pairs) {
        std::string path = inv.out_dir + "/relaxed_sweep_" + scene + ".csv";
        guard_emit([&] {
            dataset::write_text_file(
                path, report::render_relaxed_sweep_csv(metrics::relaxed_sweep(scene_pairs, radii)));
        });
        written.push_back(path);
    }
    std::sort(written.begin(), written.end());
    print_written(written);
    return 0;
}

// ---- report / compare ---------------------------------------------------------

int cmd_report(CliInvocation& inv, CLI::App* sub) {
    if (inv.run_path.empty()) throw ConfigError("report needs --run pointing at a run.json");
    if (inv.out_dir.empty()) throw ConfigError("report needs --out");
    report::RunRecord run = report::load_run_record(inv.run_path);
    int divisions = sub->count("--curve-divisions")
                        ? static_cast<int>(inv.curve_divisions)
                        : static_cast<int>(run.config.value("report.curve_divisions", 20));
    std::vector<std::string> written =
        guard_emit([&] { return report::emit_run(run, inv.out_dir, divisions); });
    print_written(written);
    return 0;
}

int cmd_compare(CliInvocation& inv, CLI::App*) {
    if (inv.run_path.empty() || inv.run_path_b.empty()) {
        throw ConfigError("compare needs --run-a and --run-b");
    }
    report::RunRecord a = report::load_run_record(inv.run_path);
    report::RunRecord b = report::load_run_record(inv.run_path_b);
    report::Comparison cmp = report::compare(a, b);
    std::string csv = report::render_comparison_csv(cmp);
    std::cout << csv;
    if (!inv.out_dir.empty()) {
        guard_emit([&] {
            std::error_code ec;
            std::filesystem::create_directories(inv.out_dir, ec);
            if (ec) throw IoError("cannot create " + inv.out_dir + ": " + ec.message());
            dataset::write_text_file(inv.out_dir + "/comparison.csv", csv);
        });
    }
    return 0;
}

} // namespace

std::unique_ptr<CLI::App> build_app(CliInvocation& inv) {
    auto app = std::make_unique<CLI::App>("detect-and-prompt segmentation harness", "maskbench");
    app->require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", inv.config_path, "TOML configuration file");
        sub->add_option("--set", inv.overrides, "Override a config key (key=value), repeatable");
    };

    CLI::App* synth = app->add_subcommand("synth", "Generate a synthetic rectangle-ship dataset");
    add_common(synth);
    synth->add_option("--out", inv.out_dir, "Output directory")->required();
    synth->add_option("--images", inv.synth_images, "Number of images");
    synth->add_option("--ships", inv.synth_ships, "Ships per image: N or MIN-MAX");
    synth->add_option("--size", inv.synth_size, "Square image size in pixels");
    synth->add_option("--ship-w", inv.synth_ship_w, "Ship width range: N or MIN-MAX");
    synth->add_option("--ship-h", inv.synth_ship_h, "Ship height range: N or MIN-MAX");
    synth->add_option("--min-sep", inv.synth_min_sep, "Minimum Chebyshev separation in pixels");
    synth->add_option("--margin", inv.synth_margin, "Keep-out border in pixels");
    synth->add_option("--scene", inv.synth_scene, "Scene tag: inshore, offshore, or mixed");
    synth->add_option("--seed", inv.seed, "Random seed");
    synth->add_flag("--pgm", inv.synth_pgm, "Also write PGM images");

    CLI::App* run = app->add_subcommand("run", "Run the detect-and-prompt pipeline and evaluate");
    add_common(run);
    run->add_option("--out", inv.out_dir, "Output directory")->required();
    run->add_option("--gt", inv.gt_path, "Ground-truth annotation JSON");
    run->add_option("--scene-tags", inv.scene_tag_path, "Scene tag sidecar JSON");
    run->add_option("--backend", inv.backend_kind,
                    "Backend kind: replay, synthetic-oracle, or external-process");
    run->add_option("--predictions", inv.predictions_path, "Stored predictions (replay backend)");
    run->add_option("--command", inv.backend_command, "Backend command line (external-process)");
    run->add_option("--channels", inv.backend_channels, "Process pool size (external-process)");
    run->add_option("--shift", inv.perturb_shift, "Oracle horizontal shift in pixels");
    run->add_option("--drop", inv.perturb_drop, "Oracle drop rate in [0,1]");
    run->add_option("--seed", inv.seed, "Random seed");
    run->add_option("--confidence", inv.confidence_threshold, "Detection confidence threshold");
    run->add_option("--match-thresh", inv.match_threshold, "Box IoU matching threshold");
    run->add_option("--radii", inv.relaxed_radii, "Relaxed IoU radii, comma-separated from 0");
    run->add_option("--box-expand", inv.box_expand, "Fractional box growth per side before prompting");
    run->add_option("--max-candidates", inv.max_candidates, "Candidates considered per prompt");
    run->add_option("--jobs", inv.jobs, "Worker threads");
    run->add_flag("--skip-failures", inv.skip_failures, "Skip images whose backend calls fail");
    run->add_flag("--include-unmatched", inv.include_unmatched,
                  "Pool unmatched ground truth into distribution statistics as zeros");
    run->add_flag("--timing", inv.write_timing, "Also write timing.json (not byte-deterministic)");
    run->add_option("--run-id", inv.run_id, "Run identifier");
    run->add_option("--method", inv.method, "Method label for reports");
    run->add_option("--supervision", inv.supervision, "Supervision label for reports");
    run->add_option("--curve-divisions", inv.curve_divisions, "Threshold curve grid divisions");

    CLI::App* eval = app->add_subcommand("eval", "Evaluate stored predictions against ground truth");
    add_common(eval);
    eval->add_option("--out", inv.out_dir, "Output directory")->required();
    eval->add_option("--gt", inv.gt_path, "Ground-truth annotation JSON");
    eval->add_option("--scene-tags", inv.scene_tag_path, "Scene tag sidecar JSON");
    eval->add_option("--predictions", inv.predictions_path, "Predictions JSON to score");
    eval->add_option("--match-thresh", inv.match_threshold, "Box IoU matching threshold");
    eval->add_option("--radii", inv.relaxed_radii, "Relaxed IoU radii, comma-separated from 0");
    eval->add_flag("--include-unmatched", inv.include_unmatched,
                   "Pool unmatched ground truth into distribution statistics as zeros");
    eval->add_option("--run-id", inv.run_id, "Run identifier");
    eval->add_option("--method", inv.method, "Method label for reports");
    eval->add_option("--supervision", inv.supervision, "Supervision label for reports");
    eval->add_option("--curve-divisions", inv.curve_divisions, "Threshold curve grid divisions");

    CLI::App* sweep = app->add_subcommand("sweep", "Regenerate curves from a stored run record");
    add_common(sweep);
    sweep->add_option("--run", inv.run_path, "run.json to sweep")->required();
    sweep->add_option("--out", inv.out_dir, "Output directory")->required();
    sweep->add_option("--radii", inv.sweep_radii, "Relaxed sweep radii, comma-separated from 0");
    sweep->add_option("--grid-divisions", inv.curve_divisions, "Threshold curve grid divisions");
    sweep->add_option("--gt", inv.gt_path, "Override the record's ground-truth path");
    sweep->add_option("--scene-tags", inv.scene_tag_path, "Override the record's scene tag path");
    sweep->add_option("--predictions", inv.predictions_path, "Override the record's predictions path");

    CLI::App* rep = app->add_subcommand("report", "Re-emit tables and curves from a run record");
    add_common(rep);
    rep->add_option("--run", inv.run_path, "run.json to render")->required();
    rep->add_option("--out", inv.out_dir, "Output directory")->required();
    rep->add_option("--curve-divisions", inv.curve_divisions, "Threshold curve grid divisions");

    CLI::App* cmp = app->add_subcommand("compare", "Compare two run records over the same ground truth");
    add_common(cmp);
    cmp->add_option("--run-a", inv.run_path, "First run.json")->required();
    cmp->add_option("--run-b", inv.run_path_b, "Second run.json")->required();
    cmp->add_option("--out", inv.out_dir, "Optional directory for comparison.csv");

    for (const std::string& name : {"synth", "run", "eval", "sweep", "report", "compare"}) {
        app->get_subcommand(name)->callback([&inv, name] { inv.subcommand = name; });
    }
    return app;
}

int run_cli(int argc, const char* const* argv) {
    CliInvocation inv;
    std::unique_ptr<CLI::App> app = build_app(inv);
    try {
        app->parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app->exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app->exit(e);
    } catch (const CLI::ParseError& e) {
        app->exit(e);
        return 2;
    }

    try {
        if (inv.subcommand == "synth") return cmd_synth(inv, app->get_subcommand("synth"));
        if (inv.subcommand == "run") return cmd_run(inv, app->get_subcommand("run"));
        if (inv.subcommand == "eval") return cmd_eval(inv, app->get_subcommand("eval"));
        if (inv.subcommand == "sweep") return cmd_sweep(inv, app->get_subcommand("sweep"));
        if (inv.subcommand == "report") return cmd_report(inv, app->get_subcommand("report"));
        if (inv.subcommand == "compare") return cmd_compare(inv, app->get_subcommand("compare"));
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const EmitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_input_error(e) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace maskbench::cli
