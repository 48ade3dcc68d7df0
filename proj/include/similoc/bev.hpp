#pragma once

#include <deque>
#include <string>
#include <vector>

#include "similoc/pose.hpp"
#include "similoc/raster.hpp"

namespace similoc {

struct PlainPoint {
  float x = 0, y = 0, z = 0;
};

struct ColoredPoint {
  float x = 0, y = 0, z = 0;
  float r = 0, g = 0, b = 0;
};

// One synchronized scan: sensor-frame colored points plus the odometry pose
// at the scan timestamp.
struct ScanFrame {
  double timestamp = 0.0;
  WorldPose pose;
  std::vector<ColoredPoint> points;
};

// 3x4 homogeneous projection (intrinsics * extrinsics), row-major.
struct CameraProjection {
  double p[12] = {0};
  int image_width = 0;
  int image_height = 0;
};

// Projects sensor points into the image and keeps those that land inside
// with positive depth, colored from the nearest pixel.
std::vector<ColoredPoint> colorize_scan(const std::vector<PlainPoint>& points,
                                        const GeoRaster& image,
                                        const CameraProjection& proj);

// Rolling world-frame point buffer over the most recent frames. Points are
// transformed into the world frame when a frame is pushed (planar rigid
// transform of x,y by the frame pose; z passes through) and bucketed into
// coarse world tiles so rasterization walks memory tile-locally.
class PointAccumulator {
 public:
  struct FrameData {
    double timestamp = 0.0;
    std::vector<float> x, y, z, r, g, b;  // world frame, tile-sorted
  };

  explicit PointAccumulator(int window_frames = 300);

  // Throws std::invalid_argument if the timestamp is not newer than all
  // buffered frames.
  void push(const ScanFrame& frame);

  const std::deque<FrameData>& frames() const { return frames_; }
  int window_frames() const { return window_; }
  std::size_t point_count() const;
  bool empty() const { return frames_.empty(); }

 private:
  std::deque<FrameData> frames_;
  int window_;
};

// Top-down color raster oriented with the vehicle heading up, vehicle at
// pixel (size_px/2, size_px/2). Within a bin the highest-z point wins
// (first-come on exact z ties); empty bins are holes.
GeoRaster rasterize_bev(const PointAccumulator& acc, const WorldPose& center,
                        int size_px = 500, double res = 0.2);

// Scan file format: two header lines "# timestamp <t>" and
// "# pose <e> <n> <heading>", then one "x y z r g b" line per point
// (positions at mm precision, colors at 1e-4).
void write_scan_file(const ScanFrame& frame, const std::string& path);
ScanFrame read_scan_file(const std::string& path);

}  // namespace similoc
