#pragma once

#include <cstdint>
#include <vector>

#include "maskbench/dataset/types.hpp"
#include "maskbench/raster/types.hpp"

namespace maskbench::dataset {

// Places axis-aligned rectangular ships with integer corners. Equal specs
// yield bit-identical geometry; an infeasible packing raises GenerationError
// naming the constraint that could not be met.
std::vector<GtInstance> generate_synthetic(const SyntheticSceneSpec& spec,
                                           std::int64_t image_id = 1,
                                           std::int64_t first_instance_id = 1);

// Multi-image wrapper: per-image seeds derive from the dataset seed, ship
// counts are drawn uniformly from [ships_min, ships_max], and scene tags
// alternate offshore/inshore when mixed_scenes is set.
GroundTruth generate_synthetic_dataset(const SyntheticDatasetSpec& spec);

// Translates every kept instance by (shift, 0), clips to the image, and draws
// scores deterministically from the seed. Shift 0 / drop 0 reproduces the GT
// exactly; instances shifted fully out of frame are dropped.
PredictionSet perturb_gt(const GroundTruth& gt, const PerturbationSpec& spec);

// Rasterizes all instances of one image into a single flat mask.
raster::BinaryMask render_scene(const GroundTruth& gt, std::size_t image_index);

} // namespace maskbench::dataset
