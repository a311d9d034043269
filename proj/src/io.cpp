#include "awvd/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace awvd {

namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ls(line);
  std::vector<std::string> toks;
  for (std::string t; ls >> t;) toks.push_back(t);
  return toks;
}

double to_real(const std::string& tok, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || !std::isfinite(v))
    throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace

SitesFile parse_sites(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> head;
  while (head.empty() && std::getline(in, line)) {
    ++line_no;
    head = tokens_of(line);
  }
  if (head.size() != 2) throw Error(ErrorCode::Parse, "sites header must be `d n`");
  SitesFile f;
  char* end = nullptr;
  f.d = static_cast<int>(std::strtol(head[0].c_str(), &end, 10));
  const long n = std::strtol(head[1].c_str(), &end, 10);
  if (f.d < 2 || f.d > kMaxDim || n < 1) throw Error(ErrorCode::Parse, "bad sites header");
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) != f.d + 1)
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected d+1 numbers");
    Point p(f.d);
    for (int k = 0; k < f.d; ++k) p[k] = to_real(toks[k], line_no);
    const double w = to_real(toks[f.d], line_no);
    if (!(w > 0.0)) throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": weight must be positive");
    f.coords.push_back(p);
    f.weights.push_back(w);
  }
  if (static_cast<long>(f.coords.size()) != n)
    throw Error(ErrorCode::Parse, "header promises " + std::to_string(n) + " sites, found " +
                                      std::to_string(f.coords.size()));
  return f;
}

std::string format_sites(std::span<const Point> coords, std::span<const double> weights) {
  std::string out = std::to_string(coords.empty() ? 0 : coords.front().dim()) + " " +
                    std::to_string(coords.size()) + "\n";
  for (std::size_t s = 0; s < coords.size(); ++s) {
    for (int k = 0; k < coords[s].dim(); ++k) out += fmt_real(coords[s][k]) + " ";
    out += fmt_real(weights[s]) + "\n";
  }
  return out;
}

std::vector<Point> parse_points(const std::string& text, int d) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = tokens_of(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (static_cast<int>(toks.size()) != d)
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(d) + " coordinates");
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = to_real(toks[k], line_no);
    pts.push_back(p);
  }
  return pts;
}

std::string render_svg(const Diagram& diagram) {
  if (diagram.grid.dim != 2) throw Error(ErrorCode::OutOfRange, "rendering needs d = 2");
  constexpr double kSize = 800.0;
  const Box root = diagram.grid.root_box();
  const double px = kSize / diagram.grid.scale;
  auto sx = [&](double x) { return (x - root.lo[0]) * px; };
  auto sy = [&](double y) { return kSize - (y - root.lo[1]) * px; };

  auto color = [](int label) {
    // Golden-angle hue walk, fixed saturation and lightness.
    const int hue = static_cast<int>(std::fmod(label * 137.50776405, 360.0));
    return "hsl(" + std::to_string(hue) + ",65%,62%)";
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
  for (const auto& node : diagram.tree.nodes()) {
    const Box b = diagram.grid.box_of(node.cube);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.6f\" y=\"%.6f\" width=\"%.6f\" height=\"%.6f\" fill=\"%s\" "
                  "stroke=\"#333\" stroke-width=\"0.2\"/>\n",
                  sx(b.lo[0]), sy(b.hi[1]), (b.hi[0] - b.lo[0]) * px, (b.hi[1] - b.lo[1]) * px,
                  color(node.label).c_str());
    out += buf;
  }
  double wmax = 0.0;
  for (const Site& s : diagram.sites.all()) wmax = std::max(wmax, s.weight);
  for (const Site& s : diagram.sites.all()) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.6f\" cy=\"%.6f\" r=\"%.3f\" fill=\"black\"><title>%d</title></circle>\n",
                  sx(s.coords[0]), sy(s.coords[1]), 1.5 + 3.5 * s.weight / wmax, s.index);
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Parse, "cannot write " + path);
  out << contents;
}

}  // namespace awvd
