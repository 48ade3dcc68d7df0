#include "similoc/evaluation.hpp"

#include <cmath>
#include <limits>

#include "similoc/errors.hpp"

namespace similoc {

double Trajectory::travel_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    len += std::hypot(points[i].easting - points[i - 1].easting,
                      points[i].northing - points[i - 1].northing);
  return len;
}

namespace {

// Index of the gt point with the nearest timestamp (timestamps
// non-decreasing); two-pointer walk amortizes to O(n + m).
struct TimePairer {
  const Trajectory& gt;
  std::size_t cursor = 0;

  std::size_t nearest(double t) {
    while (cursor + 1 < gt.points.size() &&
           std::abs(gt.points[cursor + 1].t - t) <= std::abs(gt.points[cursor].t - t))
      ++cursor;
    return cursor;
  }
};

}  // namespace

ErrorSeries error_series(const Trajectory& pred, const Trajectory& gt) {
  if (pred.empty()) throw DegenerateInput("error_series: empty predicted trajectory");
  if (gt.empty()) throw DegenerateInput("error_series: empty ground-truth trajectory");

  ErrorSeries out;
  out.records.reserve(pred.size());
  TimePairer pairer{gt};
  double euclid_sum = 0.0, lateral_sum = 0.0;

  for (const auto& p : pred.points) {
    ErrorRecord rec;
    rec.t = p.t;

    const std::size_t j = pairer.nearest(p.t);
    if (std::abs(gt.points[j].t - p.t) <= kPairingToleranceSec) {
      rec.euclidean = std::hypot(p.easting - gt.points[j].easting,
                                 p.northing - gt.points[j].northing);
      euclid_sum += rec.euclidean;
      ++out.paired;
    } else {
      rec.euclidean = std::numeric_limits<double>::quiet_NaN();
      ++out.dropped;
    }

    double best_sq = std::numeric_limits<double>::infinity();
    for (const auto& q : gt.points) {
      const double de = p.easting - q.easting, dn = p.northing - q.northing;
      const double d = de * de + dn * dn;
      if (d < best_sq) best_sq = d;
    }
    rec.lateral = std::sqrt(best_sq);
    lateral_sum += rec.lateral;
    out.records.push_back(rec);
  }

  if (out.paired == 0) throw DegenerateInput("error_series: no time-paired steps");
  out.ate = euclid_sum / out.paired;
  out.lpe = lateral_sum / double(pred.size());
  return out;
}

double ate(const Trajectory& pred, const Trajectory& gt) {
  return error_series(pred, gt).ate;
}

double lpe(const Trajectory& pred, const Trajectory& gt) {
  if (pred.empty()) throw DegenerateInput("lpe: empty predicted trajectory");
  if (gt.empty()) throw DegenerateInput("lpe: empty ground-truth trajectory");
  double sum = 0.0;
  for (const auto& p : pred.points) {
    double best_sq = std::numeric_limits<double>::infinity();
    for (const auto& q : gt.points) {
      const double de = p.easting - q.easting, dn = p.northing - q.northing;
      const double d = de * de + dn * dn;
      if (d < best_sq) best_sq = d;
    }
    sum += std::sqrt(best_sq);
  }
  return sum / double(pred.size());
}

}  // namespace similoc
