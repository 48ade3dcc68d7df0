#pragma once

#include <string>
#include <vector>

#include "similoc/filter.hpp"
#include "similoc/planned_path.hpp"
#include "similoc/trajectory.hpp"

namespace similoc {

// Trajectory CSV: header "t,easting,northing" or "t,easting,northing,heading".
Trajectory load_trajectory_csv(const std::string& path);
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

// Odometry CSV: header "t,dx,dy,dtheta", one relative motion per frame.
struct OdomRecord {
  double t = 0.0;
  MotionDelta delta;
};
std::vector<OdomRecord> load_odometry_csv(const std::string& path);
void save_odometry_csv(const std::vector<OdomRecord>& records, const std::string& path);

// Planned path CSV: header "easting,northing", one waypoint per row.
PlannedPath load_path_csv(const std::string& path);
void save_path_csv(const PlannedPath& path_points, const std::string& path);

}  // namespace similoc
