#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "similoc/errors.hpp"
#include "similoc/pipeline.hpp"

namespace similoc {
namespace {

struct Series {
  const char* label;
  const char* color;
  const char* dash;  // nullptr = solid
  std::vector<std::pair<double, double>> pts;  // easting, northing
};

std::string fmt(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  (void)ec;
  return std::string(buf, end);
}

}  // namespace

void run_plot(const std::string& steps_csv, const std::string& out_svg) {
  std::ifstream in(steps_csv, std::ios::binary);
  if (!in) throw IoError("cannot open: " + steps_csv);
  std::string header;
  if (!std::getline(in, header) || header.rfind("t,odo_e", 0) != 0)
    throw ParseError("unexpected steps header in " + steps_csv);

  Series gt{"ground truth", "#000000", nullptr, {}};
  Series odo{"odometry", "#1f6fd0", "6,4", {}};
  Series est{"estimate", "#d03030", nullptr, {}};

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double x = std::nan("");
      auto [next, ec] = std::from_chars(p, end, x);
      if (ec == std::errc()) p = next;
      else {
        // allow "nan"
        if (end - p >= 3 && std::equal(p, p + 3, "nan")) p += 3;
        else throw ParseError("malformed steps row in " + steps_csv);
      }
      v.push_back(x);
      if (p < end && *p == ',') ++p;
    }
    if (v.size() < 13) throw ParseError("short steps row in " + steps_csv);
    odo.pts.emplace_back(v[1], v[2]);
    est.pts.emplace_back(v[4], v[5]);
    if (!std::isnan(v[7]) && !std::isnan(v[8])) gt.pts.emplace_back(v[7], v[8]);
  }
  if (est.pts.empty()) throw DegenerateInput("plot: no rows in " + steps_csv);

  double min_e = 1e300, max_e = -1e300, min_n = 1e300, max_n = -1e300;
  for (const Series* s : {&gt, &odo, &est})
    for (const auto& [e, n] : s->pts) {
      min_e = std::min(min_e, e);
      max_e = std::max(max_e, e);
      min_n = std::min(min_n, n);
      max_n = std::max(max_n, n);
    }
  const double span = std::max({max_e - min_e, max_n - min_n, 1.0});
  const double pad = 0.06 * span;
  min_e -= pad; max_e += pad; min_n -= pad; max_n += pad;

  const double width = 800.0;
  const double scale = width / (max_e - min_e);
  const double height = (max_n - min_n) * scale;
  const auto X = [&](double e) { return (e - min_e) * scale; };
  const auto Y = [&](double n) { return (max_n - n) * scale; };

  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + out_svg);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  for (const Series* s : {&gt, &odo, &est}) {
    if (s->pts.empty()) continue;
    if (s->pts.size() == 1) {
      out << "<circle cx=\"" << fmt(X(s->pts[0].first)) << "\" cy=\""
          << fmt(Y(s->pts[0].second)) << "\" r=\"4\" fill=\"" << s->color << "\"/>\n";
      continue;
    }
    out << "<polyline fill=\"none\" stroke=\"" << s->color << "\" stroke-width=\"1.5\"";
    if (s->dash) out << " stroke-dasharray=\"" << s->dash << "\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s->pts.size(); ++i) {
      if (i) out << ' ';
      out << fmt(X(s->pts[i].first)) << ',' << fmt(Y(s->pts[i].second));
    }
    out << "\"/>\n";
  }

  // Scale bar: a round number near 1/5 of the view width.
  double bar_m = std::pow(10.0, std::floor(std::log10(span / 5.0)));
  if (span / 5.0 / bar_m >= 5.0) bar_m *= 5.0;
  else if (span / 5.0 / bar_m >= 2.0) bar_m *= 2.0;
  const double bar_px = bar_m * scale;
  const double bx = 20.0, by = height - 20.0;
  out << "<line x1=\"" << fmt(bx) << "\" y1=\"" << fmt(by) << "\" x2=\"" << fmt(bx + bar_px)
      << "\" y2=\"" << fmt(by) << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << fmt(bx) << "\" y=\"" << fmt(by - 6.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(bar_m) << " m</text>\n";

  // Legend.
  double ly = 24.0;
  for (const Series* s : {&gt, &odo, &est}) {
    if (s->pts.empty()) continue;
    out << "<line x1=\"20\" y1=\"" << fmt(ly - 4.0) << "\" x2=\"50\" y2=\"" << fmt(ly - 4.0)
        << "\" stroke=\"" << s->color << "\" stroke-width=\"2\"";
    if (s->dash) out << " stroke-dasharray=\"" << s->dash << "\"";
    out << "/>\n<text x=\"58\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s->label << "</text>\n";
    ly += 18.0;
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + out_svg);
}

}  // namespace similoc
