#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "maskbench/dataset/types.hpp"
#include "maskbench/raster/types.hpp"

namespace maskbench::pipeline {

// What a backend gets to identify an image: the id for bookkeeping, the
// dimensions for mask shaping, and a filesystem path for backends that
// actually look at pixels.
struct ImageRef {
    std::int64_t image_id = 0;
    int width = 0;
    int height = 0;
    std::string path;
};

struct MaskCandidate {
    raster::RleMask mask;
    double quality = 0.0;
};

class Detector {
  public:
    virtual ~Detector() = default;
    virtual std::vector<dataset::Detection> detect(const ImageRef& image) = 0;
    // Backends that are safe to call from several workers at once say so;
    // everything else gets wrapped in exclusive access by the runner.
    virtual bool concurrency_safe() const { return false; }
};

class Segmenter {
  public:
    virtual ~Segmenter() = default;
    // Returns candidates in backend order; empty results must be raised as
    // EmptyCandidateError by the implementation, not returned.
    virtual std::vector<MaskCandidate> segment(const ImageRef& image, const raster::BBox& box) = 0;
    virtual bool concurrency_safe() const { return false; }
};

struct BackendDescriptor {
    enum class Kind { Replay, SyntheticOracle, ExternalProcess };
    Kind kind = Kind::Replay;
    std::string predictions_path;     // replay: stored detections + masks
    dataset::PerturbationSpec perturb; // synthetic-oracle
    std::string command;              // external-process: shell command line
    int channels = 1;                 // external-process: process pool size
};

std::string to_string(BackendDescriptor::Kind kind);
BackendDescriptor::Kind backend_kind_from_string(const std::string& value);

struct BackendPair {
    std::shared_ptr<Detector> detector;
    std::shared_ptr<Segmenter> segmenter;
};

// Builds both halves of a backend from one descriptor. The ground truth is
// needed by the synthetic oracle (it perturbs it) and by replay (mask
// synthesis for box-only records requires image dimensions).
BackendPair make_backend(const BackendDescriptor& desc, const dataset::GroundTruth& gt);

} // namespace maskbench::pipeline
