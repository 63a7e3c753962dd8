#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maskbench/dataset/json_util.hpp"
#include "maskbench/metrics/evaluate.hpp"
#include "maskbench/pipeline/runner.hpp"

namespace maskbench::report {

// One stratum row of the headline table. `scene` is "inshore", "offshore",
// "unknown", or "overall".
struct SceneReport {
    std::string scene;
    std::size_t n = 0;
    double iou_mean = 0.0;
    double iou_std = 0.0;
    double iou_median = 0.0;
    double dice = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double iou_at_50 = 0.0;
    double iou_at_75 = 0.0;
    double relaxed_iou_r1 = 0.0;
    double detection_rate = 0.0;
};

// Distribution statistics run over matched instances whose segmentation
// succeeded unless include_unmatched pools every instance in as zeros;
// IoU@t operating points always count all instances. Raises
// UndefinedMetricError for an empty stratum.
SceneReport aggregate(const std::vector<metrics::InstanceResult>& stratum, const std::string& label,
                      bool include_unmatched);

// Per-scene rows for every populated stratum, in inshore/offshore/unknown
// order, followed by the overall row.
std::vector<SceneReport> build_scene_reports(const std::vector<metrics::InstanceResult>& instances,
                                             bool include_unmatched);

struct RunRecord {
    std::string run_id;
    std::string created; // empty by default: timestamps are opt-in, determinism is not
    std::string method;
    std::string supervision;
    dataset::ordered_json config = dataset::ordered_json::object();
    std::string gt_digest;
    std::size_t gt_instance_count = 0;
    std::size_t gt_image_count = 0;
    metrics::MapResult map;
    std::vector<metrics::InstanceResult> instances;
    std::vector<SceneReport> scene_reports;
    // Kept out of the deterministic JSON; written separately on request.
    std::optional<pipeline::TimingSummary> timing;
};

// Full-precision JSON serialization of everything except timing.
dataset::ordered_json run_record_to_json(const RunRecord& run);
RunRecord load_run_record(const std::string& path);

// report.csv: one row per stratum, 3-decimal rendering, columns in headline
// table order.
std::string render_report_csv(const std::vector<SceneReport>& reports);

// threshold_curve_<scene>.csv / relaxed_sweep_<scene>.csv payloads.
std::string render_threshold_curve_csv(const std::vector<std::pair<double, double>>& curve);
std::string render_relaxed_sweep_csv(const std::vector<std::pair<int, double>>& sweep);

// Writes run.json, report.csv, and per-stratum curve CSVs into out_dir.
// Returns the written file paths (for logging), sorted.
std::vector<std::string> emit_run(const RunRecord& run, const std::string& out_dir,
                                  int curve_divisions = 20);

// Timing summary as its own JSON file; separate because wall-clock numbers
// vary run to run while every other artifact is byte-deterministic.
void write_timing(const pipeline::TimingSummary& summary,
                  const std::vector<pipeline::TimingRecord>& records, const std::string& path);

struct ComparisonRow {
    std::string scene;
    double iou_a = 0.0, dice_a = 0.0;
    double iou_b = 0.0, dice_b = 0.0;
    double iou_delta = 0.0, dice_delta = 0.0; // a minus b
};

struct Comparison {
    std::string method_a, supervision_a;
    std::string method_b, supervision_b;
    std::vector<ComparisonRow> rows; // strata present in both runs
};

// Verifies the two runs share ground truth (digest + instance count), then
// lines their per-scene IoU/Dice up with deltas (run A minus run B).
Comparison compare(const RunRecord& a, const RunRecord& b);

std::string render_comparison_csv(const Comparison& cmp);

} // namespace maskbench::report
