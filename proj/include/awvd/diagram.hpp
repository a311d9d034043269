#pragma once

#include <span>
#include <string>
#include <vector>

#include "awvd/cover.hpp"
#include "awvd/cube_system.hpp"
#include "awvd/geom_core.hpp"
#include "awvd/refine.hpp"

namespace awvd {

enum class CoverMode { Full, Reduced };

std::string_view to_string(CoverMode mode) noexcept;
CoverMode parse_cover_mode(std::string_view text);

struct BuildOptions {
  CoverMode mode = CoverMode::Reduced;
  int frac_bits = 48;
  int threads = 0;  // 0: AWVD_THREADS, else hardware concurrency
  DuplicatePolicy duplicates = DuplicatePolicy::KeepMinLabel;
  bool keep_refinements = false;
};

struct CoreStats {
  int site = 0;
  int balls = 0;
  long cubes = 0;
  long type_one_splits = 0;
  long type_two_splits = 0;
};

/// The eps-approximate weighted Voronoi diagram: a labeled compressed quadtree.
struct Diagram {
  SiteSet sites;
  ApproxParams params;
  GridConfig grid;
  CompressedQuadTree tree;
  CoverMode mode = CoverMode::Reduced;
  std::vector<CoreStats> cores;  // sites 1..n-1
  CoverStats cover_stats;
  std::vector<RefinementOutput> refinements;  // only with keep_refinements
  double build_seconds = 0.0;

  long total_cubes() const noexcept;
};

/// Worker count for parallel stages: explicit value, else AWVD_THREADS, else hardware.
int resolve_threads(int requested);

/// Throws DegenerateSites on repeated coordinates and RefinementDepthExceeded.
Diagram build_diagram(const SiteSet& sites, double eps, const BuildOptions& options = {});
/// Builds from precomputed covers (indexed by site - 1).
Diagram build_diagram(const SiteSet& sites, std::span<const CoverSet> covers,
                      const ApproxParams& params, const BuildOptions& options);

struct QueryResult {
  int site = 0;
  double distance = 0.0;
  int comparisons = 0;
  int node = -1;
};

/// Points outside the root cube are clamped onto it before location.
QueryResult query(const Diagram& diagram, const Point& p);

/// Stable-key JSON report; timing only when asked.
std::string stats_json(const Diagram& diagram, bool with_timing = true);

/// Text dump: header, one `level anchors... label` line per tree node in
/// pre-order, then the site block needed to answer distance queries.
std::string dump_diagram(const Diagram& diagram);
/// Throws Parse.
Diagram load_diagram(const std::string& text);

}  // namespace awvd
