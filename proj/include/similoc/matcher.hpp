#pragma once

#include <vector>

#include "similoc/pose.hpp"
#include "similoc/raster.hpp"

namespace similoc {

struct MatchScore {
  double value = 0.0;  // in [0, 1] for non-negative rasters
};

struct ScanMatchResult {
  WorldPose pose;
  MatchScore score;
  MatchScore second_best;
};

// Normalized correlation without mean subtraction:
//   R = sum(G*S) / sqrt(sum(G^2) * sum(S^2))
// summed over every pixel (and channel), accumulated in double; R = 0 when
// either denominator sum is zero. Throws std::invalid_argument on shape
// mismatch.
MatchScore ncc(const GeoRaster& g, const GeoRaster& s);

// Score from precomputed sums, with the zero-denominator and clamp rules.
double ncc_value(double gs, double gg, double ss);

// Patch-scoring sums of an oriented raster `g` (pixel (n/2, n/2) on
// `pose`, up = pose forward) against the same-size patch of `map` at
// `pose`, sampled on the fly: gs += sum(g * patch), ss += sum(patch^2)
// restricted to g's observed (non-zero) support. Scoring over the observed
// support keeps the correlation peak centered when the template has large
// never-observed regions (beyond-range corners, occlusion shadows).
void patch_ncc_sums(const GeoRaster& map, const GeoRaster& g, const WorldPose& pose,
                    double& gs, double& ss);

// Same, but sampling from a pre-rotated window produced by
// resample_oriented(map, win_pose, w, h). Cheap when pose.heading is close
// to win_pose.heading (near-axis sampling).
void patch_ncc_sums_window(const GeoRaster& win, const WorldPose& win_pose,
                           const GeoRaster& g, const WorldPose& pose,
                           double& gs, double& ss);

// Exhaustive coarse matching: evaluates the observed-support correlation
// of bev_sim against patch(candidate) over
// a translation lattice aligned with each candidate heading (spacing
// step_m, extent +-radius_m in both lattice axes) crossed with
// center.heading + heading_offsets (empty list means {0}). Returns the
// argmax pose with best and second-best scores; ties break by smallest
// distance to center, then smallest |heading offset|, then scan order
// (heading-major, then lattice row, then column).
// Throws DegenerateInput when bev_sim is all-zero.
ScanMatchResult scan_match(const GeoRaster& bev_sim, const GeoRaster& global_sim,
                           const WorldPose& center, double radius_m, double step_m,
                           const std::vector<double>& heading_offsets);

}  // namespace similoc
