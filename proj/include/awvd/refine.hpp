#pragma once

#include <optional>
#include <span>
#include <vector>

#include "awvd/cube_system.hpp"
#include "awvd/geom_core.hpp"

namespace awvd {

/// Intersection of Apollonian balls sharing apex s_i, optionally clipped to a box.
struct CoreRegion {
  int apex = 0;
  Point apex_point;
  std::vector<EffectiveBall> balls;
  std::optional<Box> clip;
};

/// Core of site i against the given partners (all > i), gamma floored at 1+eps_S.
CoreRegion make_core(const SiteSet& sites, int i, std::span<const int> partners, double eps_S);

enum class Verdict { Inside, Outside, Boundary };

/// Outside is only returned with a certificate of emptiness: a single
/// disjoint ball, a separating quadratic from the weighted probe, or an
/// exhaustive face enumeration that found no feasible point.
Verdict classify_cube(const CoreRegion& core, const Box& box);
Verdict classify_cube(const CoreRegion& core, const CanonicalCube& cube, const GridConfig& grid);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-axis extent of core ∩ box. Throws EmptyOverlap.
std::vector<Interval> axis_projection(const CoreRegion& core, const Box& box);

/// Smallest canonical cube inside `cube` holding core ∩ cube. Throws EmptyOverlap.
CanonicalCube zoom_in(const CoreRegion& core, const CanonicalCube& cube, const GridConfig& grid);

enum class HaltReason { Inside, Small };

struct RefinementOutput {
  int apex = 0;
  CanonicalCube start;
  std::vector<CanonicalCube> cubes;  // z-order
  std::vector<HaltReason> reasons;
  long type_one_splits = 0;
  long type_two_splits = 0;

  long total_splits() const noexcept { return type_one_splits + type_two_splits; }
};

/// Halting condition 3: side length at most eps_A times the box's distance to the apex.
bool halts_small(const CoreRegion& core, const CanonicalCube& cube, const GridConfig& grid,
                 double eps_A);

/// Smallest canonical cube covering B(s_i, r1_bound) (or the clip box), cut to the root.
CanonicalCube refinement_start(const CoreRegion& core, const GridConfig& grid);

/// Throws RefinementDepthExceeded when a Boundary cube would need splitting below level B.
RefinementOutput refine_core(const CoreRegion& core, double eps_A, const GridConfig& grid);

struct FatnessRadii {
  double r2 = 0.0;
  double r1_bound = 0.0;
};

/// Throws EmptyBallList.
FatnessRadii core_fatness_radii(const CoreRegion& core);

/// Emitted cubes (other than the start cube) whose parent satisfies a halting
/// condition under fresh classification.
std::vector<CanonicalCube> minimality_violations(const CoreRegion& core,
                                                 const RefinementOutput& out, double eps_A,
                                                 const GridConfig& grid);

}  // namespace awvd
