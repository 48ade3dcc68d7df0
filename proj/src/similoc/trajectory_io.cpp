#include "similoc/trajectory_io.hpp"

#include <charconv>
#include <fstream>

#include "similoc/errors.hpp"

namespace similoc {
namespace {

std::string fmt(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

struct CsvReader {
  std::string data;
  const char* p = nullptr;
  const char* end = nullptr;
  std::string path;

  explicit CsvReader(const std::string& file_path) : path(file_path) {
    std::ifstream in(file_path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open: " + file_path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    data.resize(std::size_t(size));
    in.read(data.data(), size);
    if (!in) throw IoError("read failed: " + file_path);
    p = data.data();
    end = p + data.size();
  }

  std::string header_line() {
    const char* start = p;
    while (p < end && *p != '\n') ++p;
    std::string line(start, p);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (p < end) ++p;
    return line;
  }

  bool at_end() {
    while (p < end && (*p == '\n' || *p == '\r' || *p == ' ')) ++p;
    return p >= end;
  }

  // Parses `n` comma-separated doubles from the current row into out;
  // returns the actual count (rows may have optional trailing columns).
  int row(double* out, int n) {
    int got = 0;
    while (got < n) {
      auto [next, ec] = std::from_chars(p, end, out[got]);
      if (ec != std::errc()) throw ParseError("malformed number in " + path);
      p = next;
      ++got;
      if (p < end && *p == ',') {
        ++p;
        continue;
      }
      break;
    }
    if (p < end && *p == '\r') ++p;
    if (p < end && *p == '\n') ++p;
    else if (p < end) throw ParseError("malformed row in " + path);
    return got;
  }
};

}  // namespace

Trajectory load_trajectory_csv(const std::string& path) {
  CsvReader reader(path);
  const std::string header = reader.header_line();
  Trajectory traj;
  if (header == "t,easting,northing,heading") traj.has_heading = true;
  else if (header != "t,easting,northing")
    throw ParseError("unexpected trajectory header '" + header + "' in " + path);

  const int cols = traj.has_heading ? 4 : 3;
  while (!reader.at_end()) {
    double v[4] = {0, 0, 0, 0};
    if (reader.row(v, cols) != cols) throw ParseError("short trajectory row in " + path);
    traj.points.push_back({v[0], v[1], v[2], v[3]});
  }
  return traj;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << (traj.has_heading ? "t,easting,northing,heading\n" : "t,easting,northing\n");
  for (const auto& p : traj.points) {
    out << fmt(p.t) << ',' << fmt(p.easting) << ',' << fmt(p.northing);
    if (traj.has_heading) out << ',' << fmt(p.heading);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<OdomRecord> load_odometry_csv(const std::string& path) {
  CsvReader reader(path);
  if (reader.header_line() != "t,dx,dy,dtheta")
    throw ParseError("unexpected odometry header in " + path);
  std::vector<OdomRecord> out;
  while (!reader.at_end()) {
    double v[4];
    if (reader.row(v, 4) != 4) throw ParseError("short odometry row in " + path);
    out.push_back({v[0], MotionDelta{v[1], v[2], v[3]}});
  }
  return out;
}

void save_odometry_csv(const std::vector<OdomRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "t,dx,dy,dtheta\n";
  for (const auto& r : records)
    out << fmt(r.t) << ',' << fmt(r.delta.dx) << ',' << fmt(r.delta.dy) << ','
        << fmt(r.delta.dtheta) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

PlannedPath load_path_csv(const std::string& path) {
  CsvReader reader(path);
  if (reader.header_line() != "easting,northing")
    throw ParseError("unexpected path header in " + path);
  std::vector<PlannedPath::Waypoint> pts;
  while (!reader.at_end()) {
    double v[2];
    if (reader.row(v, 2) != 2) throw ParseError("short path row in " + path);
    pts.push_back({v[0], v[1]});
  }
  return PlannedPath::from_points(pts);
}

void save_path_csv(const PlannedPath& path_points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "easting,northing\n";
  for (const auto& p : path_points.points)
    out << fmt(p.easting) << ',' << fmt(p.northing) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace similoc
