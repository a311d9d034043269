#pragma once

#include <span>
#include <string>
#include <vector>

#include "awvd/diagram.hpp"

namespace awvd {

struct SitesFile {
  int d = 0;
  std::vector<Point> coords;
  std::vector<double> weights;
};

/// Header `d n`, then n lines of d coordinates and a weight. Throws Parse.
SitesFile parse_sites(const std::string& text);
std::string format_sites(std::span<const Point> coords, std::span<const double> weights);

/// Whitespace-separated points, d coordinates per line. Throws Parse.
std::vector<Point> parse_points(const std::string& text, int d);

/// d = 2 only: one rectangle per tree cell (pre-order, so children paint
/// over their parents), filled by label, and one marker per site.
std::string render_svg(const Diagram& diagram);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace awvd
