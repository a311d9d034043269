#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "awvd/diagram.hpp"

namespace awvd {

struct Nearest {
  int site = 0;
  double distance = 0.0;
};

/// Exact weighted nearest neighbor; lowest index on ties.
Nearest brute_nn(const SiteSet& sites, const Point& p);

enum class WeightLaw { Uniform, TwoClass, Equal };

std::string_view to_string(WeightLaw law) noexcept;
/// Accepts "uniform", "two-class" and "equal". Throws Parse.
WeightLaw parse_weight_law(std::string_view text);

struct Instance {
  int d = 0;
  int n = 0;
  std::uint64_t seed = 0;
  WeightLaw law = WeightLaw::Uniform;
  double max_weight = 4.0;
  std::vector<Point> coords;  // generation order
  std::vector<double> weights;

  SiteSet sites() const { return SiteSet::from_unsorted(coords, weights); }
};

/// Sites uniform in [0,1]^d. Weights uniform in [1, W], in {1, W} with equal
/// odds, or all 1.
Instance gen_instance(int n, int d, WeightLaw law, std::uint64_t seed, double max_weight = 4.0);

/// Uniform double in [0, 1) from the top 53 bits.
double unit_uniform(std::uint64_t bits) noexcept;

/// Plain breadth-first splitting under the same halting conditions, without
/// zoom-in. Output in z-order. Throws BudgetExceeded past `budget` cubes.
std::vector<CanonicalCube> brute_refinement_oracle(const CoreRegion& core, double eps_A,
                                                   const GridConfig& grid, long budget = 1000000);

struct RatioReport {
  long queries = 0;
  double max_ratio = 1.0;
  double mean_ratio = 1.0;
  Point worst;
  int worst_label = 0;
  int worst_exact = 0;
  double eps = 0.0;
  std::vector<long> histogram;  // 10 bins over [1, 1+eps], then overflow
  int max_comparisons = 0;
  long comparison_overruns = 0;  // queries above 2 log2(cells) + 16

  bool within(double eps_bound) const noexcept { return max_ratio <= 1.0 + eps_bound; }
};

/// d_label / d_exact with 0/0 = 1, over the given points.
RatioReport ratio_check(const Diagram& diagram, std::span<const Point> points);
/// m points uniform in the site bounding box inflated 1.5x about its center.
std::vector<Point> uniform_queries(const SiteSet& sites, int m, std::uint64_t seed);
/// m corners of randomly chosen tree cells.
std::vector<Point> corner_queries(const Diagram& diagram, int m, std::uint64_t seed);

/// One `key=value` line per metric.
std::string format_report(const RatioReport& r);

}  // namespace awvd
