#include "similoc/prototypes.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "similoc/errors.hpp"

namespace similoc {

PrototypeSet::PrototypeSet(int dim, PrototypeParams params) : dim_(dim), params_(params) {
  if (dim < 1) throw std::invalid_argument("PrototypeSet: dim must be positive");
  if (params.k_max < 1) throw std::invalid_argument("PrototypeSet: k_max must be positive");
}

void PrototypeSet::update(const float* vec, int dim) {
  if (dim != dim_) throw std::invalid_argument("PrototypeSet::update: dimension mismatch");

  double norm_sq = 0.0;
  for (int d = 0; d < dim_; ++d) norm_sq += double(vec[d]) * double(vec[d]);
  if (norm_sq < 1e-12) return;  // hole vector
  const double inv = 1.0 / std::sqrt(norm_sq);

  // Cosine against every prototype; prototypes are unit norm.
  int best = -1;
  double best_cos = -2.0;
  for (int k = 0; k < size(); ++k) {
    const float* p = prototype(k);
    double dot = 0.0;
    for (int d = 0; d < dim_; ++d) dot += double(p[d]) * double(vec[d]);
    dot *= inv;
    if (dot > best_cos) {
      best_cos = dot;
      best = k;
    }
  }

  if (best < 0 || (best_cos < params_.tau_new && size() < params_.k_max)) {
    for (int d = 0; d < dim_; ++d) protos_.push_back(float(vec[d] * inv));
    counts_.push_back(1);
    return;
  }

  float* p = protos_.data() + std::size_t(best) * dim_;
  double new_norm_sq = 0.0;
  std::vector<double> mixed(dim_);
  for (int d = 0; d < dim_; ++d) {
    mixed[d] = (1.0 - params_.eta) * double(p[d]) + params_.eta * (vec[d] * inv);
    new_norm_sq += mixed[d] * mixed[d];
  }
  const double renorm = new_norm_sq > 0.0 ? 1.0 / std::sqrt(new_norm_sq) : 0.0;
  for (int d = 0; d < dim_; ++d) p[d] = float(mixed[d] * renorm);
  ++counts_[best];
}

void PrototypeSet::update(const std::vector<std::vector<float>>& vecs) {
  for (const auto& v : vecs) update(v.data(), int(v.size()));
}

PrototypeSet PrototypeSet::from_raw(int dim, PrototypeParams params,
                                    const std::vector<std::vector<float>>& protos,
                                    const std::vector<long>& counts) {
  PrototypeSet ps(dim, params);
  for (std::size_t k = 0; k < protos.size(); ++k) {
    if (int(protos[k].size()) != dim)
      throw std::invalid_argument("PrototypeSet::from_raw: dimension mismatch");
    double norm_sq = 0.0;
    for (float v : protos[k]) norm_sq += double(v) * double(v);
    if (norm_sq < 1e-12)
      throw std::invalid_argument("PrototypeSet::from_raw: zero prototype");
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (float v : protos[k]) ps.protos_.push_back(float(v * inv));
    ps.counts_.push_back(k < counts.size() ? counts[k] : 1);
  }
  return ps;
}

void save_prototypes(const PrototypeSet& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[40];
  for (int k = 0; k < ps.size(); ++k) {
    out << ps.count(k);
    const float* p = ps.prototype(k);
    for (int d = 0; d < ps.dim(); ++d) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p[d]);
      (void)ec;
      out << ' ' << std::string_view(buf, std::size_t(end - buf));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

PrototypeSet load_prototypes(const std::string& path, PrototypeParams params) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::vector<float>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    long count = 0;
    if (!(ss >> count)) throw ParseError("malformed prototype line in " + path);
    std::vector<float> row{float(count)};
    double v;
    while (ss >> v) row.push_back(float(v));
    if (row.size() < 2) throw ParseError("prototype with no components in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty prototype file: " + path);
  const int dim = int(rows.front().size()) - 1;
  for (const auto& r : rows)
    if (int(r.size()) - 1 != dim) throw ParseError("inconsistent prototype dims in " + path);

  std::vector<std::vector<float>> protos;
  std::vector<long> counts;
  for (const auto& r : rows) {
    counts.push_back(long(r.front()));
    protos.emplace_back(r.begin() + 1, r.end());
  }
  if (params.k_max < int(protos.size())) params.k_max = int(protos.size());
  return PrototypeSet::from_raw(dim, params, protos, counts);
}

std::vector<std::vector<float>> sample_traversability_vectors(
    const FeatureMap& fm, const std::vector<WorldPose>& trajectory) {
  std::vector<std::vector<float>> out;
  for (const WorldPose& pose : trajectory) {
    double col, row;
    fm.world_to_pixel(pose.easting, pose.northing, col, row);
    const int ci = int(std::floor(col + 0.5)), ri = int(std::floor(row + 0.5));
    if (ci < 0 || ri < 0 || ci >= fm.width || ri >= fm.height) continue;
    std::vector<float> v = fm.vector_at(ri, ci);
    double norm_sq = 0.0;
    for (float x : v) norm_sq += double(x) * double(x);
    if (norm_sq < 1e-12) continue;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace similoc
