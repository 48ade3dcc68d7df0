#pragma once

// Brute-force reference implementations used to derive expected test
// values. Everything here is written directly from the defining formulas
// and stays independent of the library's optimized paths.

#include <cstdint>
#include <vector>

#include "similoc/matcher.hpp"
#include "similoc/pose.hpp"
#include "similoc/raster.hpp"
#include "similoc/trajectory.hpp"

namespace similoc::oracle {

double ncc_brute(const std::vector<float>& g, const std::vector<float>& s);

// Bilinear with zero outside [0,w-1]x[0,h-1], all in double.
double bilinear_brute(const GeoRaster& r, int ch, double col, double row);

// Rotated patch via per-pixel world-point evaluation + bilinear_brute.
GeoRaster extract_patch_brute(const GeoRaster& src, const WorldPose& center, int size_px);

// Exhaustive candidate evaluation with the brute patch/ncc pair; the
// translation lattice is heading-aligned like the library's.
ScanMatchResult scan_match_brute(const GeoRaster& bev, const GeoRaster& map,
                                 const WorldPose& center, double radius, double step,
                                 const std::vector<double>& heading_offsets);

double neff_brute(const std::vector<double>& weights);

double ate_brute(const Trajectory& pred, const Trajectory& gt, double tol_sec);
double lpe_brute(const Trajectory& pred, const Trajectory& gt);

// Dead reckoning: cumulative sum of world-frame deltas from a start pose.
Trajectory integrate_world_deltas(const WorldPose& start,
                                  const std::vector<double>& ts,
                                  const std::vector<double>& dx,
                                  const std::vector<double>& dy,
                                  const std::vector<double>& dth);

// Spherical k-means (cosine distance) for prototype cross-checks; returns
// unit-norm centers.
std::vector<std::vector<double>> kmeans_cosine(const std::vector<std::vector<float>>& vecs,
                                               int k, int iterations, std::uint64_t seed);

}  // namespace similoc::oracle
