#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskbench/pipeline/backend.hpp"
#include "maskbench/pipeline/clock.hpp"

namespace maskbench::pipeline {

struct PipelineConfig {
    double confidence_threshold = 0.5; // inclusive: score >= threshold survives
    int max_candidates = 3;
    double match_threshold = 0.5;
    std::vector<int> relaxed_radii = {0, 1, 2, 3};
    int jobs = 1;
    // Fractional box growth per side before prompting (0 = raw detector box).
    double box_expand = 0.0;
    // On a backend failure: skip the image and keep going, or abort the run.
    bool skip_failed_images = false;

    void validate() const;
};

struct TimingRecord {
    std::int64_t image_id = 0;
    double detect_ms = 0.0;
    std::vector<double> segment_ms; // one entry per surviving prompt
    int ship_count = 0;             // detections after the confidence filter
};

struct PipelineResult {
    dataset::PredictionSet predictions;
    std::vector<TimingRecord> timings;        // ascending image_id
    std::vector<std::int64_t> skipped_images; // ascending image_id
    std::vector<std::string> errors;          // one diagnostic per skipped image
};

// Score filter, inclusive at the threshold, input order preserved.
std::vector<dataset::Detection> filter_detections(const std::vector<dataset::Detection>& detections,
                                                  double threshold);

// Picks the candidate with maximum quality; ties go to the lowest index.
const MaskCandidate& select_mask(const std::vector<MaskCandidate>& candidates);

// detect -> filter -> per-box segment -> select, per image, with per-stage
// wall time from the injected clock. Deterministic given deterministic
// backends: results are merged in image order regardless of worker count.
PipelineResult run_pipeline(const dataset::GroundTruth& gt, Detector& detector, Segmenter& segmenter,
                            const PipelineConfig& cfg, Clock& clock);

struct TimingSummary {
    std::size_t image_count = 0;
    std::size_t prompt_count = 0;
    double detect_mean = 0.0;  // per image
    double detect_std = 0.0;   // population
    double segment_mean = 0.0; // per prompt, pooled over all images
    double segment_std = 0.0;
};

TimingSummary summarize_timing(const std::vector<TimingRecord>& records);

// Additive latency model: expected wall time for an image with `ships`
// detections given the measured stage means.
double modeled_total(const TimingSummary& summary, double ships);

} // namespace maskbench::pipeline
