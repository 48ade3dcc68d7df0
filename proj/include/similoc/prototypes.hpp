#pragma once

#include <vector>

#include "similoc/features.hpp"
#include "similoc/pose.hpp"

namespace similoc {

struct PrototypeParams {
  int k_max = 4;
  double tau_new = 0.85;  // spawn threshold on cosine similarity
  double eta = 0.05;      // moving-average rate
};

// Online clustering of traversability vectors into unit-norm road
// prototypes. Updates are order-dependent by definition; feed vectors
// sequentially.
class PrototypeSet {
 public:
  PrototypeSet() = default;
  PrototypeSet(int dim, PrototypeParams params = {});

  int dim() const { return dim_; }
  int size() const { return int(counts_.size()); }
  bool empty() const { return counts_.empty(); }
  const PrototypeParams& params() const { return params_; }

  const float* prototype(int k) const { return protos_.data() + std::size_t(k) * dim_; }
  const std::vector<float>& flat() const { return protos_; }
  long count(int k) const { return counts_[k]; }

  // For one vector: L2-normalize (zero vectors are skipped); merge into the
  // most similar prototype when cosine >= tau_new, spawn a new prototype
  // while below k_max, otherwise merge into the nearest anyway.
  // Throws std::invalid_argument on dimension mismatch.
  void update(const float* vec, int dim);
  void update(const std::vector<std::vector<float>>& vecs);

  // Direct reconstruction (e.g. from file); vectors are normalized.
  static PrototypeSet from_raw(int dim, PrototypeParams params,
                               const std::vector<std::vector<float>>& protos,
                               const std::vector<long>& counts);

 private:
  int dim_ = 0;
  PrototypeParams params_;
  std::vector<float> protos_;  // [k][dim], each unit norm
  std::vector<long> counts_;
};

// Text format: one prototype per line, observation count then components.
void save_prototypes(const PrototypeSet& ps, const std::string& path);
PrototypeSet load_prototypes(const std::string& path, PrototypeParams params = {});

// Feature vectors at the nearest pixels under the trajectory poses; poses
// outside the map and zero (hole) vectors are skipped.
std::vector<std::vector<float>> sample_traversability_vectors(
    const FeatureMap& fm, const std::vector<WorldPose>& trajectory);

}  // namespace similoc
