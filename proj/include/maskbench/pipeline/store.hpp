#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "maskbench/pipeline/backend.hpp"

namespace maskbench::pipeline {

// Immutable per-image prediction store backing the replay and
// synthetic-oracle backends: both answer detect() from stored detections and
// segment() by exact prompt-box lookup.
class PredictionStore {
  public:
    struct StoredPrediction {
        dataset::Detection detection;
        std::vector<MaskCandidate> candidates;
    };

    // Replay: reads a predictions JSON file. Records may carry a
    // "candidates" array (several masks per detection); otherwise the
    // record's own segmentation/quality becomes the single candidate.
    static PredictionStore from_file(const std::string& predictions_path,
                                     const dataset::GroundTruth& gt);

    // Synthetic oracle: perturbs the ground truth; each detection carries
    // one candidate, the perturbed mask at quality 1.0.
    static PredictionStore from_perturbation(const dataset::GroundTruth& gt,
                                             const dataset::PerturbationSpec& spec);

    const std::vector<StoredPrediction>& for_image(std::int64_t image_id) const;

    // First stored prediction on the image whose box equals the prompt box
    // exactly; nullptr when nothing matches. Exact equality is sound because
    // the runner forwards unmodified detector boxes whenever they are
    // already inside the image.
    const StoredPrediction* find_by_box(std::int64_t image_id, const raster::BBox& box) const;

  private:
    std::map<std::int64_t, std::vector<StoredPrediction>> by_image_;
    static const std::vector<StoredPrediction> kEmpty;
};

class StoreDetector final : public Detector {
  public:
    explicit StoreDetector(std::shared_ptr<const PredictionStore> store) : store_(std::move(store)) {}
    std::vector<dataset::Detection> detect(const ImageRef& image) override;
    bool concurrency_safe() const override { return true; }

  private:
    std::shared_ptr<const PredictionStore> store_;
};

class StoreSegmenter final : public Segmenter {
  public:
    explicit StoreSegmenter(std::shared_ptr<const PredictionStore> store) : store_(std::move(store)) {}
    std::vector<MaskCandidate> segment(const ImageRef& image, const raster::BBox& box) override;
    bool concurrency_safe() const override { return true; }

  private:
    std::shared_ptr<const PredictionStore> store_;
};

} // namespace maskbench::pipeline
