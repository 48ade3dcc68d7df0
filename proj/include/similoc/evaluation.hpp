#pragma once

#include <vector>

#include "similoc/trajectory.hpp"

namespace similoc {

inline constexpr double kPairingToleranceSec = 0.05;  // half the 10 Hz frame period

// Mean Euclidean distance over time-paired steps (nearest timestamp within
// kPairingToleranceSec; unpaired predictions dropped). Throws
// DegenerateInput when no step pairs.
double ate(const Trajectory& pred, const Trajectory& gt);

// Mean over predicted steps of the distance to the closest ground-truth
// position (point-to-point, brute force). Throws DegenerateInput on empty
// inputs.
double lpe(const Trajectory& pred, const Trajectory& gt);

struct ErrorRecord {
  double t = 0.0;
  double euclidean = 0.0;  // NaN when the step has no time pairing
  double lateral = 0.0;
};

struct ErrorSeries {
  std::vector<ErrorRecord> records;  // one per predicted step
  int paired = 0;
  int dropped = 0;
  double ate = 0.0;
  double lpe = 0.0;
};

ErrorSeries error_series(const Trajectory& pred, const Trajectory& gt);

}  // namespace similoc
