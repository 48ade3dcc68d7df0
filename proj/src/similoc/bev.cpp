#include "similoc/bev.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "similoc/errors.hpp"
#include "similoc/kernels/kernels.hpp"

namespace similoc {

std::vector<ColoredPoint> colorize_scan(const std::vector<PlainPoint>& points,
                                        const GeoRaster& image,
                                        const CameraProjection& proj) {
  if (image.width != proj.image_width || image.height != proj.image_height)
    throw std::invalid_argument("colorize_scan: image dimensions do not match projection");
  if (image.channels != 3)
    throw std::invalid_argument("colorize_scan: color image required");

  std::vector<ColoredPoint> out;
  out.reserve(points.size());
  const double* p = proj.p;
  for (const PlainPoint& pt : points) {
    const double u = p[0] * pt.x + p[1] * pt.y + p[2] * pt.z + p[3];
    const double v = p[4] * pt.x + p[5] * pt.y + p[6] * pt.z + p[7];
    const double w = p[8] * pt.x + p[9] * pt.y + p[10] * pt.z + p[11];
    if (w <= 0.0) continue;
    const long col = std::lround(u / w);
    const long row = std::lround(v / w);
    if (col < 0 || row < 0 || col >= image.width || row >= image.height) continue;
    ColoredPoint cp;
    cp.x = pt.x;
    cp.y = pt.y;
    cp.z = pt.z;
    cp.r = image.at(0, int(row), int(col));
    cp.g = image.at(1, int(row), int(col));
    cp.b = image.at(2, int(row), int(col));
    out.push_back(cp);
  }
  return out;
}

PointAccumulator::PointAccumulator(int window_frames) : window_(window_frames) {
  if (window_frames < 1)
    throw std::invalid_argument("PointAccumulator: window must be at least one frame");
}

void PointAccumulator::push(const ScanFrame& frame) {
  if (!frames_.empty() && frame.timestamp <= frames_.back().timestamp)
    throw std::invalid_argument("PointAccumulator: out-of-order frame timestamp");

  FrameData data;
  data.timestamp = frame.timestamp;
  const std::size_t n = frame.points.size();
  data.x.resize(n);
  data.y.resize(n);
  data.z.resize(n);
  data.r.resize(n);
  data.g.resize(n);
  data.b.resize(n);
  const double c = std::cos(frame.pose.heading), s = std::sin(frame.pose.heading);
  const double te = frame.pose.easting, tn = frame.pose.northing;

  // Transform, then counting-sort by 8 m world tile; rasterization then
  // touches each raster region once per tile instead of hopping randomly.
  std::vector<float> wx(n), wy(n);
  std::vector<std::uint16_t> tile(n);
  constexpr double kInvTile = 1.0 / 8.0;
  constexpr int kTileGrid = 64;  // 512 m x 512 m of tiles, wrapped
  for (std::size_t i = 0; i < n; ++i) {
    const ColoredPoint& pt = frame.points[i];
    const double x = c * pt.x - s * pt.y + te;
    const double y = s * pt.x + c * pt.y + tn;
    wx[i] = float(x);
    wy[i] = float(y);
    const int txi = int(std::floor(x * kInvTile)) & (kTileGrid - 1);
    const int tyi = int(std::floor(y * kInvTile)) & (kTileGrid - 1);
    tile[i] = std::uint16_t(tyi * kTileGrid + txi);
  }
  std::vector<std::uint32_t> counts(kTileGrid * kTileGrid + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[tile[i] + 1];
  for (std::size_t t = 1; t < counts.size(); ++t) counts[t] += counts[t - 1];
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t slot = counts[tile[i]]++;
    data.x[slot] = wx[i];
    data.y[slot] = wy[i];
    data.z[slot] = frame.points[i].z;
    data.r[slot] = frame.points[i].r;
    data.g[slot] = frame.points[i].g;
    data.b[slot] = frame.points[i].b;
  }

  frames_.push_back(std::move(data));
  while (int(frames_.size()) > window_) frames_.pop_front();
}

std::size_t PointAccumulator::point_count() const {
  std::size_t n = 0;
  for (const auto& f : frames_) n += f.x.size();
  return n;
}

GeoRaster rasterize_bev(const PointAccumulator& acc, const WorldPose& center,
                        int size_px, double res) {
  if (size_px <= 0 || !(res > 0.0))
    throw std::invalid_argument("rasterize_bev: size and resolution must be positive");

  GeoRaster bev(size_px, size_px, 3,
                GeoRef::centered(center.easting, center.northing, res, size_px, size_px));
  bev.orientation = center.heading;
  bev.ensure_hole_mask(1);

  // Interleaved (z, r, g, b) bins keep the max-z merge on one cache line
  // per hit; unpacked into planes at the end. The scratch persists across
  // calls.
  struct Bin {
    float z, r, g, b;
  };
  thread_local std::vector<Bin> bins;
  bins.assign(bev.plane_size(), Bin{-std::numeric_limits<float>::infinity(), 0, 0, 0});

  // right = (ct, st), up = (-st, ct); world -> bin transform.
  const double ct = std::cos(center.heading), st = std::sin(center.heading);
  const double inv_res = 1.0 / res;
  const float a_col = float(ct * inv_res), b_col = float(st * inv_res);
  const float a_row = float(st * inv_res), b_row = float(-ct * inv_res);
  const float cc = float(size_px / 2);
  const float ce = float(center.easting), cn = float(center.northing);

  const auto& kn = kernels::active();
  std::vector<int> cols, rows;
  for (const auto& f : acc.frames()) {
    const std::size_t n = f.x.size();
    cols.resize(n);
    rows.resize(n);
    kn.bin_points(f.x.data(), f.y.data(), n, a_col, b_col, a_row, b_row, ce, cn, cc,
                  size_px, cols.data(), rows.data());
    const float* zs = f.z.data();
    for (std::size_t i = 0; i < n; ++i) {
      if (cols[i] < 0) continue;
      Bin& bin = bins[std::size_t(rows[i]) * size_px + cols[i]];
      if (zs[i] > bin.z) bin = Bin{zs[i], f.r[i], f.g[i], f.b[i]};
    }
  }

  float* pr = bev.plane(0);
  float* pg = bev.plane(1);
  float* pb = bev.plane(2);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].z != -std::numeric_limits<float>::infinity()) {
      pr[i] = bins[i].r;
      pg[i] = bins[i].g;
      pb[i] = bins[i].b;
      bev.holes[i] = 0;
    }
  }
  return bev;
}

void write_scan_file(const ScanFrame& frame, const std::string& path) {
  std::string buf;
  buf.reserve(64 + frame.points.size() * 48);
  char line[160];
  std::snprintf(line, sizeof(line), "# timestamp %.6f\n", frame.timestamp);
  buf += line;
  std::snprintf(line, sizeof(line), "# pose %.6f %.6f %.9f\n", frame.pose.easting,
                frame.pose.northing, frame.pose.heading);
  buf += line;
  for (const ColoredPoint& p : frame.points) {
    std::snprintf(line, sizeof(line), "%.3f %.3f %.3f %.4f %.4f %.4f\n",
                  double(p.x), double(p.y), double(p.z),
                  double(p.r), double(p.g), double(p.b));
    buf += line;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw IoError("write failed: " + path);
}

namespace {

// Fixed-point fast path for the common "[-]digits.digits" tokens the scan
// writer emits; anything else (exponents, long mantissas) falls back to
// from_chars. The fast path stays within 2 ulp of correct rounding which
// is exact after narrowing to float.
double parse_double_token(const char*& p, const char* end, const std::string& path) {
  while (p < end && (*p == ' ' || *p == '\t')) ++p;
  const char* s = p;
  bool neg = false;
  if (s < end && (*s == '-' || *s == '+')) {
    neg = (*s == '-');
    ++s;
  }
  std::uint64_t ip = 0;
  int idig = 0;
  while (s < end && *s >= '0' && *s <= '9' && idig < 17) {
    ip = ip * 10 + std::uint64_t(*s - '0');
    ++s;
    ++idig;
  }
  if (idig > 0 && idig < 17) {
    static constexpr double kScale[10] = {1.0, 1e-1, 1e-2, 1e-3, 1e-4,
                                          1e-5, 1e-6, 1e-7, 1e-8, 1e-9};
    if (s < end && *s == '.') {
      const char* f = s + 1;
      std::uint64_t fp = 0;
      int fdig = 0;
      while (f < end && *f >= '0' && *f <= '9' && fdig < 9) {
        fp = fp * 10 + std::uint64_t(*f - '0');
        ++f;
        ++fdig;
      }
      if (fdig > 0 && (f >= end || (*f != 'e' && *f != 'E' && !(*f >= '0' && *f <= '9')))) {
        p = f;
        const double v = double(ip) + double(fp) * kScale[fdig];
        return neg ? -v : v;
      }
    } else if (s >= end || (*s != 'e' && *s != 'E' && *s != '.')) {
      p = s;
      const double v = double(ip);
      return neg ? -v : v;
    }
  }
  double v = 0.0;
  auto [next, ec] = std::from_chars(p, end, v);
  if (ec != std::errc()) throw ParseError("malformed number in " + path);
  p = next;
  return v;
}

}  // namespace

ScanFrame read_scan_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open: " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::string data(std::size_t(size), '\0');
  in.read(data.data(), size);
  if (!in) throw IoError("read failed: " + path);

  ScanFrame frame;
  const char* p = data.data();
  const char* end = p + data.size();

  const auto expect_prefix = [&](const char* prefix) {
    const std::size_t len = std::strlen(prefix);
    if (std::size_t(end - p) < len || std::strncmp(p, prefix, len) != 0)
      throw ParseError(std::string("expected '") + prefix + "' header in " + path);
    p += len;
  };
  expect_prefix("# timestamp");
  frame.timestamp = parse_double_token(p, end, path);
  while (p < end && *p != '\n') ++p;
  if (p < end) ++p;
  expect_prefix("# pose");
  const double e = parse_double_token(p, end, path);
  const double n = parse_double_token(p, end, path);
  const double h = parse_double_token(p, end, path);
  frame.pose = WorldPose(e, n, h);
  while (p < end && *p != '\n') ++p;
  if (p < end) ++p;

  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == '\n')) ++p;
    if (p >= end) break;
    ColoredPoint pt;
    pt.x = float(parse_double_token(p, end, path));
    pt.y = float(parse_double_token(p, end, path));
    pt.z = float(parse_double_token(p, end, path));
    pt.r = float(parse_double_token(p, end, path));
    pt.g = float(parse_double_token(p, end, path));
    pt.b = float(parse_double_token(p, end, path));
    frame.points.push_back(pt);
  }
  return frame;
}

}  // namespace similoc
