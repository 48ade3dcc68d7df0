#include "similoc/filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "similoc/kernels/kernels.hpp"
#include "similoc/matcher.hpp"

namespace similoc {

ParticleFilter::ParticleFilter(const WorldPose& prior, const FilterConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed) {
  if (cfg.num_particles < 1)
    throw std::invalid_argument("ParticleFilter: need at least one particle");
  if (!(cfg.init_radius > 0.0))
    throw std::invalid_argument("ParticleFilter: init_radius must be positive");
  if (!(cfg.neff_threshold > 0.0) || cfg.neff_threshold > 1.0)
    throw std::invalid_argument("ParticleFilter: neff_threshold must be in (0, 1]");

  const int n = cfg.num_particles;
  particles_.resize(n);
  for (Particle& p : particles_) {
    const double r = cfg.init_radius * std::sqrt(rng_.uniform());
    const double phi = rng_.uniform(0.0, 2.0 * kPi);
    const double dh = rng_.uniform(-cfg.init_heading_range, cfg.init_heading_range);
    p.x = prior.easting + r * std::cos(phi);
    p.y = prior.northing + r * std::sin(phi);
    p.theta = wrap_angle(prior.heading + dh);
    p.w = 1.0 / n;
  }
}

void ParticleFilter::predict(const MotionDelta& delta) {
  const NoiseParams& s = cfg_.noise;
  for (Particle& p : particles_) {
    const double nx = rng_.gaussian() * s.sigma_x;
    const double ny = rng_.gaussian() * s.sigma_y;
    const double nt = rng_.gaussian() * s.sigma_theta;
    double dx = delta.dx, dy = delta.dy;
    if (cfg_.body_frame_deltas) rotate_offset(p.theta, delta.dx, delta.dy, dx, dy);
    p.x += dx + nx;
    p.y += dy + ny;
    p.theta = wrap_angle(p.theta + delta.dtheta + nt);
  }
}

ParticleFilter::WeightStats ParticleFilter::update_weights(const GeoRaster& bev_sim,
                                                           const GeoRaster& global_sim) {
  if (bev_sim.width != bev_sim.height)
    throw std::invalid_argument("update_weights: square BEV required");
  if (bev_sim.channels != global_sim.channels)
    throw std::invalid_argument("update_weights: channel mismatch");
  if (bev_sim.georef.resolution != global_sim.georef.resolution)
    throw std::invalid_argument("update_weights: resolution mismatch");

  WeightStats stats;
  double gg = 0.0;
  kernels::active().sum_sq_accum(bev_sim.values.data(), bev_sim.values.size(), gg);
  if (gg <= 0.0) {
    // Featureless BEV carries no evidence.
    for (Particle& p : particles_) p.w = 1.0 / particles_.size();
    stats.degenerate = true;
    return stats;
  }

  // Particles score against pre-rotated windows of the global map so the
  // fused kernel samples near-axis-aligned. Headings are bucketed; each
  // bucket gets its own window, keeping every particle within ~0.5 deg of
  // its window rotation even while the cloud's heading spread is wide.
  double me = 0.0, mn = 0.0, sh = 0.0, ch = 0.0;
  for (const Particle& p : particles_) {
    me += p.x;
    mn += p.y;
    sh += std::sin(p.theta);
    ch += std::cos(p.theta);
  }
  me /= particles_.size();
  mn /= particles_.size();
  const double mean_heading = (sh == 0.0 && ch == 0.0) ? particles_[0].theta
                                                       : std::atan2(sh, ch);

  const double res = global_sim.georef.resolution;
  const int n = bev_sim.width;
  double max_off = 0.0;
  double min_rot = 0.0, max_rot = 0.0;
  std::vector<double> rel(particles_.size());
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    const Particle& p = particles_[i];
    max_off = std::max(max_off, std::hypot(p.x - me, p.y - mn));
    rel[i] = wrap_angle(p.theta - mean_heading);
    min_rot = std::min(min_rot, rel[i]);
    max_rot = std::max(max_rot, rel[i]);
  }

  std::vector<double> scores(particles_.size());
  if (max_off / res < 3.0 * n) {
    constexpr double kBucketWidth = 0.8 * kPi / 180.0;
    const int buckets = std::max(1, int(std::ceil((max_rot - min_rot) / kBucketWidth)));
    std::vector<std::vector<std::size_t>> members(buckets);
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      int b = int((rel[i] - min_rot) / kBucketWidth);
      if (b >= buckets) b = buckets - 1;
      members[b].push_back(i);
    }
    for (int b = 0; b < buckets; ++b) {
      if (members[b].empty()) continue;
      const double bucket_heading =
          wrap_angle(mean_heading + min_rot + (b + 0.5) * kBucketWidth);
      const WorldPose win_pose(me, mn, bucket_heading);
      const int margin =
          int(std::ceil(max_off / res + 0.7072 * n * (0.5 * kBucketWidth))) + 2;
      const int W = n + 2 * margin;
      const GeoRaster win = resample_oriented(global_sim, win_pose, W, W);
      for (const std::size_t i : members[b]) {
        const Particle& p = particles_[i];
        double gs = 0.0, ss = 0.0;
        patch_ncc_sums_window(win, win_pose, bev_sim, WorldPose(p.x, p.y, p.theta), gs, ss);
        scores[i] = ncc_value(gs, gg, ss);
      }
    }
  } else {
    // Scattered cloud: sample the map directly.
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      const Particle& p = particles_[i];
      double gs = 0.0, ss = 0.0;
      patch_ncc_sums(global_sim, bev_sim, WorldPose(p.x, p.y, p.theta), gs, ss);
      scores[i] = ncc_value(gs, gg, ss);
    }
  }

  for (std::size_t i = 0; i < particles_.size(); ++i) {
    particles_[i].w *= scores[i];
    stats.weight_sum += particles_[i].w;
    stats.best_score = std::max(stats.best_score, scores[i]);
  }
  normalize_or_reset(stats);
  return stats;
}

void ParticleFilter::normalize_or_reset(WeightStats& stats) {
  if (stats.weight_sum > 0.0) {
    const double inv = 1.0 / stats.weight_sum;
    for (Particle& p : particles_) p.w *= inv;
  } else {
    for (Particle& p : particles_) p.w = 1.0 / particles_.size();
    stats.degenerate = true;
  }
}

double ParticleFilter::effective_count() const {
  double sum_sq = 0.0;
  for (const Particle& p : particles_) sum_sq += p.w * p.w;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

void ParticleFilter::resample() {
  const std::size_t n = particles_.size();
  const double u0 = rng_.uniform() / double(n);
  std::vector<Particle> out;
  out.reserve(n);
  double cum = particles_[0].w;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = u0 + double(k) / double(n);
    while (cum < target && i + 1 < n) {
      ++i;
      cum += particles_[i].w;
    }
    Particle p = particles_[i];
    p.w = 1.0 / double(n);
    out.push_back(p);
  }
  particles_ = std::move(out);
}

ParticleFilter::PoseEstimate ParticleFilter::estimate_pose() const {
  double x = 0.0, y = 0.0, sh = 0.0, ch = 0.0;
  for (const Particle& p : particles_) {
    x += p.w * p.x;
    y += p.w * p.y;
    sh += p.w * std::sin(p.theta);
    ch += p.w * std::cos(p.theta);
  }
  PoseEstimate est;
  if (std::hypot(sh, ch) < 1e-12) {
    // Perfectly opposed headings: fall back to the heaviest particle.
    std::size_t best = 0;
    for (std::size_t i = 1; i < particles_.size(); ++i)
      if (particles_[i].w > particles_[best].w) best = i;
    est.pose = WorldPose(x, y, particles_[best].theta);
    est.heading_ambiguous = true;
  } else {
    est.pose = WorldPose(x, y, std::atan2(sh, ch));
  }
  return est;
}

ParticleFilter::StepResult ParticleFilter::step(const MotionDelta& delta,
                                                const GeoRaster& bev_sim,
                                                const GeoRaster& global_sim) {
  predict(delta);
  const WeightStats ws = update_weights(bev_sim, global_sim);
  StepResult out;
  out.best_score = ws.best_score;
  out.degenerate = ws.degenerate;
  out.neff = effective_count();
  if (out.neff < cfg_.neff_threshold * particles_.size()) {
    resample();
    out.resampled = true;
  }
  out.pose = estimate_pose().pose;
  ++t_;
  return out;
}

void ParticleFilter::apply_correction(const WorldPose& pivot, double rot, double de,
                                      double dn) {
  const double c = std::cos(rot), s = std::sin(rot);
  for (Particle& p : particles_) {
    const double rx = p.x - pivot.easting, ry = p.y - pivot.northing;
    p.x = pivot.easting + c * rx - s * ry + de;
    p.y = pivot.northing + s * rx + c * ry + dn;
    p.theta = wrap_angle(p.theta + rot);
  }
}

void ParticleFilter::dump_csv(std::ostream& out) const {
  out << "i,x,y,theta,w\n";
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    const Particle& p = particles_[i];
    out << i << ',' << p.x << ',' << p.y << ',' << p.theta << ',' << p.w << '\n';
  }
}

}  // namespace similoc
