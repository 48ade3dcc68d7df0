#pragma once

#include "similoc/features.hpp"
#include "similoc/planned_path.hpp"
#include "similoc/prototypes.hpp"
#include "similoc/raster.hpp"

namespace similoc {

// Per-pixel max cosine similarity against the prototypes, clamped to
// [0, 1]; hole (zero-feature) pixels become 0 and hole-masked. Throws
// DegenerateInput on an empty prototype set, std::invalid_argument on
// dimension mismatch.
GeoRaster similarity_map(const FeatureMap& fm, const PrototypeSet& ps);

struct SimimapParams {
  double sample_interval = 50.0;  // meters between reference points
  int patch_px = 1000;
  PrototypeParams prototypes;
};

// Offline global road-similarity map: reference points sampled along the
// planned path, one axis-aligned satellite patch per reference point,
// per-patch prototypes clustered from the path pixels inside the patch,
// per-patch similarity maps merged into the satellite grid by per-pixel
// max. Uncovered pixels are holes. Throws DegenerateInput when the path
// has fewer than two points inside the satellite extent.
GeoRaster build_global_simimap(const GeoRaster& satellite, const PlannedPath& path,
                               const SimimapParams& params, const Embedder& embedder);

}  // namespace similoc
