#include "maskbench/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "maskbench/metrics/curves.hpp"

namespace maskbench::report {

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

double population_std(const std::vector<double>& values, double mean) {
    if (values.empty()) return 0.0;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size()));
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

} // namespace

SceneReport aggregate(const std::vector<metrics::InstanceResult>& stratum, const std::string& label,
                      bool include_unmatched) {
    if (stratum.empty()) {
        throw UndefinedMetricError("aggregate undefined: stratum \"" + label + "\" has no instances");
    }
    SceneReport rep;
    rep.scene = label;
    rep.n = stratum.size();

    std::size_t matched = 0;
    std::vector<double> ious, dices, precisions, recalls, relaxed_r1, all_ious;
    all_ious.reserve(stratum.size());
    for (const auto& inst : stratum) {
        if (inst.matched) ++matched;
        all_ious.push_back(inst.mask_iou);
        bool in_population = include_unmatched || (inst.matched && !inst.segmentation_failed);
        if (!in_population) continue;
        ious.push_back(inst.mask_iou);
        dices.push_back(inst.dice);
        precisions.push_back(inst.pixel_precision);
        recalls.push_back(inst.pixel_recall);
        for (const auto& [radius, value] : inst.relaxed) {
            if (radius == 1) relaxed_r1.push_back(value);
        }
    }

    rep.detection_rate = static_cast<double>(matched) / static_cast<double>(rep.n);
    rep.iou_mean = mean_of(ious);
    rep.iou_std = population_std(ious, rep.iou_mean);
    rep.iou_median = median_of(ious);
    rep.dice = mean_of(dices);
    rep.precision = mean_of(precisions);
    rep.recall = mean_of(recalls);
    rep.relaxed_iou_r1 = mean_of(relaxed_r1);
    rep.iou_at_50 = metrics::fraction_at(all_ious, 50 / 100.0);
    rep.iou_at_75 = metrics::fraction_at(all_ious, 75 / 100.0);
    return rep;
}

std::vector<SceneReport> build_scene_reports(const std::vector<metrics::InstanceResult>& instances,
                                             bool include_unmatched) {
    if (instances.empty()) {
        throw UndefinedMetricError("cannot report on an evaluation with zero instances");
    }
    std::vector<SceneReport> reports;
    const dataset::SceneTag order[] = {dataset::SceneTag::Inshore, dataset::SceneTag::Offshore,
                                       dataset::SceneTag::Unknown};
    for (dataset::SceneTag tag : order) {
        std::vector<metrics::InstanceResult> stratum;
        for (const auto& inst : instances) {
            if (inst.scene == tag) stratum.push_back(inst);
        }
        if (!stratum.empty()) {
            reports.push_back(aggregate(stratum, dataset::to_string(tag), include_unmatched));
        }
    }
    reports.push_back(aggregate(instances, "overall", include_unmatched));
    return reports;
}

namespace {

dataset::ordered_json scene_report_to_json(const SceneReport& rep) {
    dataset::ordered_json j;
    j["scene"] = rep.scene;
    j["n"] = rep.n;
    j["iou_mean"] = rep.iou_mean;
    j["iou_std"] = rep.iou_std;
    j["iou_median"] = rep.iou_median;
    j["dice"] = rep.dice;
    j["precision"] = rep.precision;
    j["recall"] = rep.recall;
    j["iou_at_50"] = rep.iou_at_50;
    j["iou_at_75"] = rep.iou_at_75;
    j["relaxed_iou_r1"] = rep.relaxed_iou_r1;
    j["detection_rate"] = rep.detection_rate;
    return j;
}

SceneReport scene_report_from_json(const dataset::json& j, const std::string& where) {
    SceneReport rep;
    try {
        rep.scene = j.at("scene").get<std::string>();
        rep.n = j.at("n").get<std::size_t>();
        rep.iou_mean = j.at("iou_mean").get<double>();
        rep.iou_std = j.at("iou_std").get<double>();
        rep.iou_median = j.at("iou_median").get<double>();
        rep.dice = j.at("dice").get<double>();
        rep.precision = j.at("precision").get<double>();
        rep.recall = j.at("recall").get<double>();
        rep.iou_at_50 = j.at("iou_at_50").get<double>();
        rep.iou_at_75 = j.at("iou_at_75").get<double>();
        rep.relaxed_iou_r1 = j.at("relaxed_iou_r1").get<double>();
        rep.detection_rate = j.at("detection_rate").get<double>();
    } catch (const dataset::json::exception& e) {
        throw ParseError(where + ": malformed scene report: " + e.what());
    }
    return rep;
}

dataset::ordered_json instance_to_json(const metrics::InstanceResult& inst) {
    dataset::ordered_json j;
    j["instance_id"] = inst.instance_id;
    j["image_id"] = inst.image_id;
    j["scene"] = dataset::to_string(inst.scene);
    j["matched"] = inst.matched;
    j["segmentation_failed"] = inst.segmentation_failed;
    j["box_mask"] = inst.box_mask;
    j["box_iou"] = inst.box_iou;
    j["mask_iou"] = inst.mask_iou;
    j["dice"] = inst.dice;
    j["pixel_precision"] = inst.pixel_precision;
    j["pixel_recall"] = inst.pixel_recall;
    dataset::ordered_json relaxed = dataset::ordered_json::array();
    for (const auto& [radius, value] : inst.relaxed) {
        relaxed.push_back(dataset::ordered_json{{"radius", radius}, {"iou", value}});
    }
    j["relaxed"] = std::move(relaxed);
    return j;
}

metrics::InstanceResult instance_from_json(const dataset::json& j, const std::string& where) {
    metrics::InstanceResult inst;
    try {
        inst.instance_id = j.at("instance_id").get<std::int64_t>();
        inst.image_id = j.at("image_id").get<std::int64_t>();
        inst.scene = dataset::scene_tag_from_string(j.at("scene").get<std::string>());
        inst.matched = j.at("matched").get<bool>();
        inst.segmentation_failed = j.at("segmentation_failed").get<bool>();
        inst.box_mask = j.at("box_mask").get<bool>();
        inst.box_iou = j.at("box_iou").get<double>();
        inst.mask_iou = j.at("mask_iou").get<double>();
        inst.dice = j.at("dice").get<double>();
        inst.pixel_precision = j.at("pixel_precision").get<double>();
        inst.pixel_recall = j.at("pixel_recall").get<double>();
        for (const auto& jr : j.at("relaxed")) {
            inst.relaxed.emplace_back(jr.at("radius").get<int>(), jr.at("iou").get<double>());
        }
    } catch (const dataset::json::exception& e) {
        throw ParseError(where + ": malformed instance result: " + e.what());
    }
    return inst;
}

} // namespace

dataset::ordered_json run_record_to_json(const RunRecord& run) {
    dataset::ordered_json j;
    j["run_id"] = run.run_id;
    j["created"] = run.created;
    j["method"] = run.method;
    j["supervision"] = run.supervision;
    j["config"] = run.config;
    j["gt"] = dataset::ordered_json{{"digest", run.gt_digest},
                                    {"instances", run.gt_instance_count},
                                    {"images", run.gt_image_count}};
    dataset::ordered_json aps = dataset::ordered_json::array();
    for (const auto& [t, ap] : run.map.ap_per_threshold) {
        aps.push_back(dataset::ordered_json{{"threshold", t}, {"ap", ap}});
    }
    j["map"] = dataset::ordered_json{{"map", run.map.map}, {"ap_per_threshold", std::move(aps)}};
    dataset::ordered_json reports = dataset::ordered_json::array();
    for (const auto& rep : run.scene_reports) reports.push_back(scene_report_to_json(rep));
    j["scene_reports"] = std::move(reports);
    dataset::ordered_json instances = dataset::ordered_json::array();
    for (const auto& inst : run.instances) instances.push_back(instance_to_json(inst));
    j["instances"] = std::move(instances);
    return j;
}

RunRecord load_run_record(const std::string& path) {
    dataset::json j = dataset::read_json_file(path);
    RunRecord run;
    try {
        run.run_id = j.at("run_id").get<std::string>();
        run.created = j.at("created").get<std::string>();
        run.method = j.at("method").get<std::string>();
        run.supervision = j.at("supervision").get<std::string>();
        run.config = j.at("config").get<dataset::ordered_json>();
        run.gt_digest = j.at("gt").at("digest").get<std::string>();
        run.gt_instance_count = j.at("gt").at("instances").get<std::size_t>();
        run.gt_image_count = j.at("gt").at("images").get<std::size_t>();
        run.map.map = j.at("map").at("map").get<double>();
        for (const auto& ja : j.at("map").at("ap_per_threshold")) {
            run.map.ap_per_threshold.emplace_back(ja.at("threshold").get<double>(),
                                                  ja.at("ap").get<double>());
        }
    } catch (const dataset::json::exception& e) {
        throw ParseError(path + ": malformed run record: " + e.what());
    }
    for (const auto& jr : j.at("scene_reports")) {
        run.scene_reports.push_back(scene_report_from_json(jr, path));
    }
    for (const auto& ji : j.at("instances")) {
        run.instances.push_back(instance_from_json(ji, path));
    }
    return run;
}

std::string render_report_csv(const std::vector<SceneReport>& reports) {
    std::string csv =
        "scene,n,iou_mean,iou_std,iou_median,dice,precision,recall,"
        "iou_at_50,iou_at_75,relaxed_iou_r1,detection_rate\n";
    for (const auto& r : reports) {
        csv += r.scene + "," + std::to_string(r.n) + "," + fmt3(r.iou_mean) + "," + fmt3(r.iou_std) +
               "," + fmt3(r.iou_median) + "," + fmt3(r.dice) + "," + fmt3(r.precision) + "," +
               fmt3(r.recall) + "," + fmt3(r.iou_at_50) + "," + fmt3(r.iou_at_75) + "," +
               fmt3(r.relaxed_iou_r1) + "," + fmt3(r.detection_rate) + "\n";
    }
    return csv;
}

std::string render_threshold_curve_csv(const std::vector<std::pair<double, double>>& curve) {
    std::string csv = "threshold,fraction\n";
    for (const auto& [t, fraction] : curve) {
        csv += fmt3(t) + "," + fmt3(fraction) + "\n";
    }
    return csv;
}

std::string render_relaxed_sweep_csv(const std::vector<std::pair<int, double>>& sweep) {
    std::string csv = "radius,mean_relaxed_iou\n";
    for (const auto& [radius, value] : sweep) {
        csv += std::to_string(radius) + "," + fmt3(value) + "\n";
    }
    return csv;
}

namespace {

// Per-stratum curve inputs: IoUs over all instances (zeros included), mean
// relaxed IoU over the population that has mask statistics.
std::vector<double> stratum_ious(const std::vector<metrics::InstanceResult>& instances,
                                 const std::string& scene) {
    std::vector<double> ious;
    for (const auto& inst : instances) {
        if (scene == "overall" || dataset::to_string(inst.scene) == scene) {
            ious.push_back(inst.mask_iou);
        }
    }
    return ious;
}

std::vector<std::pair<int, double>> stratum_sweep(
    const std::vector<metrics::InstanceResult>& instances, const std::string& scene) {
    std::map<int, std::pair<double, std::size_t>> acc; // radius -> (sum, count)
    for (const auto& inst : instances) {
        if (scene != "overall" && dataset::to_string(inst.scene) != scene) continue;
        if (!inst.matched || inst.segmentation_failed) continue;
        for (const auto& [radius, value] : inst.relaxed) {
            acc[radius].first += value;
            acc[radius].second += 1;
        }
    }
    std::vector<std::pair<int, double>> sweep;
    for (const auto& [radius, sum_count] : acc) {
        sweep.emplace_back(radius, sum_count.first / static_cast<double>(sum_count.second));
    }
    return sweep;
}

} // namespace

std::vector<std::string> emit_run(const RunRecord& run, const std::string& out_dir,
                                  int curve_divisions) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    std::vector<std::string> written;
    auto emit_file = [&](const std::string& name, const std::string& content) {
        std::string path = out_dir + "/" + name;
        dataset::write_text_file(path, content);
        written.push_back(path);
    };

    emit_file("run.json", run_record_to_json(run).dump(2) + "\n");
    emit_file("report.csv", render_report_csv(run.scene_reports));

    metrics::ThresholdGrid grid = metrics::ThresholdGrid::uniform(curve_divisions);
    for (const auto& rep : run.scene_reports) {
        std::vector<double> ious = stratum_ious(run.instances, rep.scene);
        if (!ious.empty()) {
            emit_file("threshold_curve_" + rep.scene + ".csv",
                      render_threshold_curve_csv(metrics::threshold_curve(ious, grid)));
        }
        std::vector<std::pair<int, double>> sweep = stratum_sweep(run.instances, rep.scene);
        if (!sweep.empty()) {
            emit_file("relaxed_sweep_" + rep.scene + ".csv", render_relaxed_sweep_csv(sweep));
        }
    }
    std::sort(written.begin(), written.end());
    return written;
}

void write_timing(const pipeline::TimingSummary& summary,
                  const std::vector<pipeline::TimingRecord>& records, const std::string& path) {
    dataset::ordered_json j;
    j["images"] = summary.image_count;
    j["prompts"] = summary.prompt_count;
    j["detect_ms"] = dataset::ordered_json{{"mean", summary.detect_mean}, {"std", summary.detect_std}};
    j["segment_ms"] =
        dataset::ordered_json{{"mean", summary.segment_mean}, {"std", summary.segment_std}};
    dataset::ordered_json modeled = dataset::ordered_json::array();
    for (int ships : {1, 2, 4}) {
        modeled.push_back(dataset::ordered_json{
            {"ships", ships}, {"total_ms", modeled_total(summary, static_cast<double>(ships))}});
    }
    j["modeled_totals"] = std::move(modeled);
    dataset::ordered_json per_image = dataset::ordered_json::array();
    for (const auto& rec : records) {
        per_image.push_back(dataset::ordered_json{{"image_id", rec.image_id},
                                                  {"detect_ms", rec.detect_ms},
                                                  {"segment_ms", rec.segment_ms},
                                                  {"ship_count", rec.ship_count}});
    }
    j["per_image"] = std::move(per_image);
    dataset::write_text_file(path, j.dump(2) + "\n");
}

Comparison compare(const RunRecord& a, const RunRecord& b) {
    if (a.gt_digest != b.gt_digest || a.gt_instance_count != b.gt_instance_count) {
        throw IncompatibleRunsError(
            "runs evaluated different ground truth (digest " + a.gt_digest + " over " +
            std::to_string(a.gt_instance_count) + " instances vs digest " + b.gt_digest + " over " +
            std::to_string(b.gt_instance_count) + " instances)");
    }
    Comparison cmp;
    cmp.method_a = a.method;
    cmp.supervision_a = a.supervision;
    cmp.method_b = b.method;
    cmp.supervision_b = b.supervision;
    for (const auto& rep_a : a.scene_reports) {
        for (const auto& rep_b : b.scene_reports) {
            if (rep_a.scene != rep_b.scene) continue;
            ComparisonRow row;
            row.scene = rep_a.scene;
            row.iou_a = rep_a.iou_mean;
            row.dice_a = rep_a.dice;
            row.iou_b = rep_b.iou_mean;
            row.dice_b = rep_b.dice;
            row.iou_delta = rep_a.iou_mean - rep_b.iou_mean;
            row.dice_delta = rep_a.dice - rep_b.dice;
            cmp.rows.push_back(row);
        }
    }
    return cmp;
}

std::string render_comparison_csv(const Comparison& cmp) {
    std::string csv = "scene,method,supervision,iou,dice\n";
    for (const auto& row : cmp.rows) {
        csv += row.scene + "," + cmp.method_a + "," + cmp.supervision_a + "," + fmt3(row.iou_a) + "," +
               fmt3(row.dice_a) + "\n";
        csv += row.scene + "," + cmp.method_b + "," + cmp.supervision_b + "," + fmt3(row.iou_b) + "," +
               fmt3(row.dice_b) + "\n";
        csv += row.scene + ",delta,," + fmt3(row.iou_delta) + "," + fmt3(row.dice_delta) + "\n";
    }
    return csv;
}

} // namespace maskbench::report
