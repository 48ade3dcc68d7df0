#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "similoc/angles.hpp"
#include "similoc/pose.hpp"
#include "similoc/raster.hpp"
#include "similoc/rng.hpp"

namespace similoc {

struct Particle {
  double x = 0.0;      // easting
  double y = 0.0;      // northing
  double theta = 0.0;  // (-pi, pi]
  double w = 0.0;
};

// World-frame relative motion between consecutive steps.
struct MotionDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

struct NoiseParams {
  double sigma_x = 0.15;                    // meters per step
  double sigma_y = 0.15;
  double sigma_theta = 0.3 * kPi / 180.0;   // radians per step
};

struct FilterConfig {
  int num_particles = 100;
  double init_radius = 5.0;                      // meters
  double init_heading_range = 1.0 * kPi / 180.0; // +- radians
  double neff_threshold = 0.5;                   // fraction of N
  NoiseParams noise;
  std::uint64_t seed = 1;
  // Compose odometry deltas in the particle body frame instead of the
  // world frame (off: world-frame addition, the default motion model).
  bool body_frame_deltas = false;
};

// Monte-Carlo pose filter: weighted particles scored by normalized
// correlation between the live BEV similarity raster and per-particle
// patches of the global similarity map.
class ParticleFilter {
 public:
  struct WeightStats {
    double weight_sum = 0.0;   // pre-normalization sum
    double best_score = 0.0;
    bool degenerate = false;   // all scores zero -> weights reset uniform
  };
  struct PoseEstimate {
    WorldPose pose;
    bool heading_ambiguous = false;
  };
  struct StepResult {
    WorldPose pose;
    double neff = 0.0;
    double best_score = 0.0;
    bool resampled = false;
    bool degenerate = false;
  };

  ParticleFilter(const WorldPose& prior, const FilterConfig& cfg);

  // Advances every particle by delta plus per-axis Gaussian noise.
  void predict(const MotionDelta& delta);

  // Per-particle patch extraction + correlation against bev_sim, weight
  // multiply and renormalization. Throws std::invalid_argument on raster
  // shape mismatch.
  WeightStats update_weights(const GeoRaster& bev_sim, const GeoRaster& global_sim);

  double effective_count() const;  // 1 / sum(w^2), weights normalized
  void resample();                 // systematic, one uniform draw
  PoseEstimate estimate_pose() const;

  // predict -> update_weights -> conditional resample -> estimate.
  StepResult step(const MotionDelta& delta, const GeoRaster& bev_sim,
                  const GeoRaster& global_sim);

  // Rigid correction from path alignment: rotate about pivot, translate.
  void apply_correction(const WorldPose& pivot, double rot, double de, double dn);

  const std::vector<Particle>& particles() const { return particles_; }
  const FilterConfig& config() const { return cfg_; }
  long step_index() const { return t_; }

  // Debug dump, one "i,x,y,theta,w" row per particle.
  void dump_csv(std::ostream& out) const;

 private:
  void normalize_or_reset(WeightStats& stats);

  FilterConfig cfg_;
  std::vector<Particle> particles_;
  Rng rng_;
  long t_ = 0;
};

}  // namespace similoc
