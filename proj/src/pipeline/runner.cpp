#include "maskbench/pipeline/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>

#include "maskbench/core/log.hpp"
#include "maskbench/raster/ops.hpp"

namespace maskbench::pipeline {

void PipelineConfig::validate() const {
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
        throw ConfigError("confidence threshold must lie in [0, 1]");
    }
    if (!(match_threshold >= 0.0 && match_threshold <= 1.0)) {
        throw ConfigError("match threshold must lie in [0, 1]");
    }
    if (max_candidates < 1) throw ConfigError("max_candidates must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (box_expand < 0.0) throw ConfigError("box_expand must be non-negative");
}

std::vector<dataset::Detection> filter_detections(const std::vector<dataset::Detection>& detections,
                                                  double threshold) {
    std::vector<dataset::Detection> kept;
    kept.reserve(detections.size());
    for (const auto& det : detections) {
        if (det.score >= threshold) kept.push_back(det);
    }
    return kept;
}

const MaskCandidate& select_mask(const std::vector<MaskCandidate>& candidates) {
    if (candidates.empty()) {
        throw EmptyCandidateError("cannot select a mask from zero candidates");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].quality > candidates[best].quality) best = i;
    }
    return candidates[best];
}

namespace {

// Grows the box by a fraction of its size per side, then clips to the image.
// A box already inside the image with no expansion passes through bit-exact,
// which replay-style backends rely on for prompt lookup.
std::optional<raster::BBox> prompt_box(const raster::BBox& box, int width, int height,
                                       double expand) {
    raster::BBox b = box;
    if (expand > 0.0) {
        b.x -= expand * b.w;
        b.y -= expand * b.h;
        b.w += 2.0 * expand * b.w;
        b.h += 2.0 * expand * b.h;
    }
    double w = static_cast<double>(width);
    double h = static_cast<double>(height);
    if (b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= w && b.y + b.h <= h) return b;
    double x0 = std::clamp(b.x, 0.0, w);
    double y0 = std::clamp(b.y, 0.0, h);
    double x1 = std::clamp(b.x + b.w, 0.0, w);
    double y1 = std::clamp(b.y + b.h, 0.0, h);
    if (x1 <= x0 || y1 <= y0) return std::nullopt; // nothing of the box is in frame
    return raster::BBox{x0, y0, x1 - x0, y1 - y0};
}

struct ImageOutcome {
    std::vector<dataset::PredictedInstance> predictions;
    TimingRecord timing;
    std::string error; // non-empty marks a skipped/failed image
};

} // namespace

PipelineResult run_pipeline(const dataset::GroundTruth& gt, Detector& detector, Segmenter& segmenter,
                            const PipelineConfig& cfg, Clock& clock) {
    cfg.validate();
    if (gt.images.empty()) {
        throw ConfigError("pipeline needs a dataset with at least one image");
    }

    const bool exclusive = (!detector.concurrency_safe() || !segmenter.concurrency_safe()) &&
                           cfg.jobs > 1;
    std::mutex backend_mu;
    std::mutex clock_mu;

    auto process_image = [&](std::size_t idx) -> ImageOutcome {
        const dataset::GtImage& image = gt.images[idx];
        ImageRef ref{image.id, image.width, image.height,
                     gt.source_dir.empty() ? image.file_name : gt.source_dir + "/" + image.file_name};
        ImageOutcome outcome;
        outcome.timing.image_id = image.id;

        auto now = [&] {
            std::lock_guard lock(clock_mu);
            return clock.now_ms();
        };
        auto run_detect = [&] {
            if (exclusive) {
                std::lock_guard lock(backend_mu);
                return detector.detect(ref);
            }
            return detector.detect(ref);
        };
        auto run_segment = [&](const raster::BBox& box) {
            if (exclusive) {
                std::lock_guard lock(backend_mu);
                return segmenter.segment(ref, box);
            }
            return segmenter.segment(ref, box);
        };

        try {
            double t0 = now();
            std::vector<dataset::Detection> detections = run_detect();
            outcome.timing.detect_ms = now() - t0;

            std::vector<dataset::Detection> kept =
                filter_detections(detections, cfg.confidence_threshold);
            outcome.timing.ship_count = static_cast<int>(kept.size());

            for (const dataset::Detection& det : kept) {
                std::optional<raster::BBox> box =
                    prompt_box(det.bbox, image.width, image.height, cfg.box_expand);
                if (!box) {
                    maskbench::log_warn("image " + std::to_string(image.id) +
                                   ": detection box entirely outside the image, skipping prompt");
                    outcome.timing.ship_count -= 1;
                    continue;
                }
                dataset::PredictedInstance inst;
                inst.detection = det;
                inst.detection.bbox = *box;

                double s0 = now();
                try {
                    std::vector<MaskCandidate> candidates = run_segment(*box);
                    if (candidates.size() > static_cast<std::size_t>(cfg.max_candidates)) {
                        candidates.resize(static_cast<std::size_t>(cfg.max_candidates));
                    }
                    const MaskCandidate& chosen = select_mask(candidates);
                    inst.mask = chosen.mask;
                    inst.quality = chosen.quality;
                } catch (const EmptyCandidateError& e) {
                    maskbench::log_warn("image " + std::to_string(image.id) +
                                   ": segmentation failed: " + e.what());
                    inst.segmentation_failed = true;
                    inst.quality = 0.0;
                    inst.mask.height = image.height;
                    inst.mask.width = image.width;
                    inst.mask.counts = {static_cast<std::uint64_t>(image.height) *
                                        static_cast<std::uint64_t>(image.width)};
                }
                outcome.timing.segment_ms.push_back(now() - s0);
                outcome.predictions.push_back(std::move(inst));
            }
        } catch (const std::exception& e) {
            outcome.error = "image " + std::to_string(image.id) + ": " + e.what();
        }
        return outcome;
    };

    std::vector<ImageOutcome> outcomes(gt.images.size());
    int jobs = std::min<int>(cfg.jobs, static_cast<int>(gt.images.size()));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < gt.images.size(); ++i) {
            outcomes[i] = process_image(i);
            if (!outcomes[i].error.empty() && !cfg.skip_failed_images) {
                throw BackendError(outcomes[i].error);
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> abort{false};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= gt.images.size() || abort.load()) return;
                    outcomes[i] = process_image(i);
                    if (!outcomes[i].error.empty() && !cfg.skip_failed_images) abort.store(true);
                }
            });
        }
        for (auto& t : workers) t.join();
        if (!cfg.skip_failed_images) {
            for (const auto& outcome : outcomes) {
                if (!outcome.error.empty()) throw BackendError(outcome.error);
            }
        }
    }

    PipelineResult result;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        ImageOutcome& outcome = outcomes[i];
        if (!outcome.error.empty()) {
            result.skipped_images.push_back(gt.images[i].id);
            result.errors.push_back(outcome.error);
            continue;
        }
        if (!outcome.predictions.empty()) {
            result.predictions.by_image[gt.images[i].id] = std::move(outcome.predictions);
        }
        result.timings.push_back(std::move(outcome.timing));
    }
    return result;
}

TimingSummary summarize_timing(const std::vector<TimingRecord>& records) {
    if (records.empty()) {
        throw UndefinedMetricError("timing summary undefined: no records");
    }
    TimingSummary s;
    s.image_count = records.size();
    double detect_sum = 0.0;
    double segment_sum = 0.0;
    for (const auto& rec : records) {
        detect_sum += rec.detect_ms;
        for (double ms : rec.segment_ms) {
            segment_sum += ms;
            ++s.prompt_count;
        }
    }
    s.detect_mean = detect_sum / static_cast<double>(s.image_count);
    if (s.prompt_count > 0) s.segment_mean = segment_sum / static_cast<double>(s.prompt_count);

    double detect_var = 0.0;
    double segment_var = 0.0;
    for (const auto& rec : records) {
        detect_var += (rec.detect_ms - s.detect_mean) * (rec.detect_ms - s.detect_mean);
        for (double ms : rec.segment_ms) {
            segment_var += (ms - s.segment_mean) * (ms - s.segment_mean);
        }
    }
    s.detect_std = std::sqrt(detect_var / static_cast<double>(s.image_count));
    if (s.prompt_count > 0) {
        s.segment_std = std::sqrt(segment_var / static_cast<double>(s.prompt_count));
    }
    return s;
}

double modeled_total(const TimingSummary& summary, double ships) {
    return summary.detect_mean + ships * summary.segment_mean;
}

} // namespace maskbench::pipeline
