#include "similoc/raster_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "similoc/errors.hpp"

namespace similoc {
namespace {

std::string format_double(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(data.data(), std::streamsize(data.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string read_whole_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open: " + path);
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::string data(std::size_t(size), '\0');
  in.read(data.data(), size);
  if (!in) throw IoError("read failed: " + path);
  return data;
}

// PNM token scanning: whitespace-separated, '#' comments to end of line.
struct PnmScanner {
  const char* p;
  const char* end;
  const std::string& path;

  void skip_space() {
    while (p < end) {
      if (*p == '#') {
        while (p < end && *p != '\n') ++p;
      } else if (*p == ' ' || *p == '\t' || *p == '\r' || *p == '\n') {
        ++p;
      } else {
        break;
      }
    }
  }
  long next_int() {
    skip_space();
    long v = 0;
    const char* start = p;
    while (p < end && *p >= '0' && *p <= '9') v = v * 10 + (*p++ - '0');
    if (p == start) throw ParseError("malformed PNM header in " + path);
    return v;
  }
};

void parse_pnm_header(const std::string& data, const std::string& path,
                      const char* magic, int& w, int& h, long& maxval,
                      std::size_t& payload_off) {
  if (data.size() < 2 || data[0] != magic[0] || data[1] != magic[1])
    throw ParseError(std::string("expected ") + magic + " magic in " + path);
  PnmScanner sc{data.data() + 2, data.data() + data.size(), path};
  w = int(sc.next_int());
  h = int(sc.next_int());
  maxval = sc.next_int();
  if (w <= 0 || h <= 0) throw ParseError("bad PNM dimensions in " + path);
  // Single whitespace byte separates header from payload.
  sc.skip_space();
  payload_off = std::size_t(sc.p - data.data());
}

GeoRef load_geo_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("missing geo sidecar: " + path);
  GeoRef g;
  bool got_e = false, got_n = false, got_r = false;
  std::string key;
  double value;
  while (in >> key >> value) {
    if (key == "origin_easting") { g.origin_easting = value; got_e = true; }
    else if (key == "origin_northing") { g.origin_northing = value; got_n = true; }
    else if (key == "resolution") { g.resolution = value; got_r = true; }
    else throw ParseError("unknown key '" + key + "' in " + path);
  }
  if (!got_e || !got_n || !got_r)
    throw ParseError("incomplete geo sidecar: " + path);
  if (!std::isfinite(g.origin_easting) || !std::isfinite(g.origin_northing) ||
      !(g.resolution > 0.0))
    throw ParseError("invalid geo sidecar values: " + path);
  return g;
}

}  // namespace

std::string sidecar_path(const std::string& raster_path, const std::string& ext) {
  const auto slash = raster_path.find_last_of('/');
  const auto dot = raster_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return raster_path + "." + ext;
  return raster_path.substr(0, dot) + "." + ext;
}

void save_raster(const GeoRaster& raster, const std::string& path) {
  if (raster.width <= 0 || raster.height <= 0)
    throw std::invalid_argument("save_raster: empty raster");
  const std::size_t n = raster.plane_size();
  std::string data;
  char header[64];

  if (raster.channels == 3) {
    std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", raster.width, raster.height);
    data = header;
    data.reserve(data.size() + n * 3);
    const float* r = raster.plane(0);
    const float* g = raster.plane(1);
    const float* b = raster.plane(2);
    for (std::size_t i = 0; i < n; ++i) {
      const float px[3] = {r[i], g[i], b[i]};
      for (float v : px) {
        long q = std::lround(double(v) * 255.0);
        if (q < 0) q = 0;
        if (q > 255) q = 255;
        data.push_back(char(static_cast<unsigned char>(q)));
      }
    }
  } else if (raster.channels == 1) {
    std::snprintf(header, sizeof(header), "P5\n%d %d\n65535\n", raster.width, raster.height);
    data = header;
    data.reserve(data.size() + n * 2);
    const float* v = raster.plane(0);
    for (std::size_t i = 0; i < n; ++i) {
      long q = std::lround(double(v[i]) * 65535.0);
      if (q < 0) q = 0;
      if (q > 65535) q = 65535;
      data.push_back(char(static_cast<unsigned char>(q >> 8)));  // big-endian
      data.push_back(char(static_cast<unsigned char>(q & 0xff)));
    }
  } else {
    throw std::invalid_argument("save_raster: only 1- or 3-channel rasters are supported");
  }
  write_file(path, data);

  std::string geo = "origin_easting " + format_double(raster.georef.origin_easting) +
                    "\norigin_northing " + format_double(raster.georef.origin_northing) +
                    "\nresolution " + format_double(raster.georef.resolution) + "\n";
  write_file(sidecar_path(path, "geo"), geo);

  if (raster.has_holes()) {
    std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", raster.width, raster.height);
    std::string holes = header;
    holes.reserve(holes.size() + n);
    for (std::size_t i = 0; i < n; ++i)
      holes.push_back(char(static_cast<unsigned char>(raster.holes[i] ? 255 : 0)));
    write_file(sidecar_path(path, "holes"), holes);
  }
}

GeoRaster load_raster(const std::string& path) {
  const std::string data = read_whole_file(path);
  if (data.size() < 2) throw ParseError("truncated raster file: " + path);

  int w = 0, h = 0;
  long maxval = 0;
  std::size_t off = 0;
  GeoRaster raster;

  if (data[0] == 'P' && data[1] == '6') {
    parse_pnm_header(data, path, "P6", w, h, maxval, off);
    if (maxval != 255) throw ParseError("unsupported PPM maxval in " + path);
    const std::size_t need = std::size_t(w) * h * 3;
    if (data.size() - off < need) throw ParseError("truncated PPM payload: " + path);
    raster = GeoRaster(w, h, 3, GeoRef{});
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + off);
    float* r = raster.plane(0);
    float* g = raster.plane(1);
    float* b = raster.plane(2);
    const std::size_t n = raster.plane_size();
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = p[i * 3 + 0] / 255.0f;
      g[i] = p[i * 3 + 1] / 255.0f;
      b[i] = p[i * 3 + 2] / 255.0f;
    }
  } else if (data[0] == 'P' && data[1] == '5') {
    parse_pnm_header(data, path, "P5", w, h, maxval, off);
    if (maxval != 65535) throw ParseError("unsupported PGM maxval in " + path);
    const std::size_t need = std::size_t(w) * h * 2;
    if (data.size() - off < need) throw ParseError("truncated PGM payload: " + path);
    raster = GeoRaster(w, h, 1, GeoRef{});
    const auto* p = reinterpret_cast<const unsigned char*>(data.data() + off);
    float* v = raster.plane(0);
    const std::size_t n = raster.plane_size();
    for (std::size_t i = 0; i < n; ++i)
      v[i] = float((p[i * 2] << 8 | p[i * 2 + 1]) / 65535.0);
  } else {
    throw ParseError("unrecognized raster magic in " + path);
  }

  raster.georef = load_geo_sidecar(sidecar_path(path, "geo"));

  const std::string holes_path = sidecar_path(path, "holes");
  if (std::ifstream probe(holes_path, std::ios::binary); probe) {
    const std::string hdata = read_whole_file(holes_path);
    int hw = 0, hh = 0;
    long hmax = 0;
    std::size_t hoff = 0;
    parse_pnm_header(hdata, holes_path, "P5", hw, hh, hmax, hoff);
    if (hmax != 255) throw ParseError("unsupported holes maxval in " + holes_path);
    if (hw != w || hh != h) throw ParseError("holes dimensions mismatch: " + holes_path);
    if (hdata.size() - hoff < std::size_t(w) * h)
      throw ParseError("truncated holes payload: " + holes_path);
    raster.ensure_hole_mask();
    const auto* p = reinterpret_cast<const unsigned char*>(hdata.data() + hoff);
    for (std::size_t i = 0; i < raster.plane_size(); ++i) {
      if (p[i] != 0) {
        raster.holes[i] = 1;
        for (int ch = 0; ch < raster.channels; ++ch)
          raster.values[raster.plane_size() * ch + i] = 0.0f;
      }
    }
  }
  return raster;
}

}  // namespace similoc
