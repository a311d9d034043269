#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "awvd/geom_core.hpp"

namespace awvd {

struct SitePair {
  std::vector<int> x;  // site indices
  std::vector<int> y;
  double diam_x = 0.0;  // exact up to 1024 points, bounding-box diagonal beyond
  double diam_y = 0.0;
  int max_x = 0;
  int max_y = 0;
};

struct PairDecomposition {
  std::vector<SitePair> pairs;
  double sigma = 0.0;

  /// Sum of |X| + |Y| over all pairs.
  long long weight() const noexcept;
};

/// Fair-split tree pairing: a pair is emitted once the smaller bounding-box
/// diagonal times sigma is at most the box gap. Throws DegenerateSites on
/// coincident sites and OutOfRange for n < 2 or sigma <= 1.
PairDecomposition build_sspd(const SiteSet& sites, double sigma);

/// Every unordered site pair as its own singleton pair.
PairDecomposition brute_sspd(const SiteSet& sites, double sigma);

struct SspdReport {
  long long uncovered = 0;
  long long separation_violations = 0;
  std::vector<std::string> messages;  // first few violations

  bool ok() const noexcept { return uncovered == 0 && separation_violations == 0; }
};

/// O(n^2) coverage check plus exact per-pair diameter and gap.
SspdReport validate_sspd(const PairDecomposition& pd, const SiteSet& sites, double sigma);

/// Partition of directions by hyperspherical coordinates. Each coordinate is
/// cut into intervals of width beta/(d-1), so two directions sharing a cone
/// are at most beta apart.
class ConeGrid {
 public:
  ConeGrid(int dim, double beta);

  int dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }
  double width() const noexcept { return width_; }
  /// Half of the per-coordinate interval width.
  double beta_eff() const noexcept { return 0.5 * width_; }
  std::int64_t cone_count() const noexcept;
  /// Per-coordinate interval indices; the last coordinate is the azimuth.
  std::vector<int> coordinates(const Point& apex, const Point& target) const;
  /// Throws CoincidentPoints.
  std::int64_t cone_index(const Point& apex, const Point& target) const;

 private:
  int dim_;
  double beta_;
  double width_;
  std::vector<int> counts_;
};

/// Apollonian ball of (i, j) for any ordered pair i != j, floored at 1+eps_S.
EffectiveBall partner_ball(const SiteSet& sites, int i, int j, double eps_S);

struct ScanEntry {
  int site = 0;
  double t_star = 0.0;
  double t_dagger = 0.0;
};

/// Interval-champion selection on one cone. Intervals of length a*eps_C/2
/// start at a = min t*; the first is closed at a. Entries with t* beyond
/// b = min t† are dropped. Ties on diameter keep the smaller site index.
std::vector<int> scan_cone_entries(std::span<const ScanEntry> entries, double eps_C);

/// scan_cone_entries over the balls (i, j), j in `partners`.
std::vector<int> scan_cone_sites(const SiteSet& sites, int i, std::span<const int> partners,
                                 double eps_S, double eps_C);

struct CoverSet {
  int site = 0;
  std::vector<int> partners;  // ascending, all > site
};

struct CoverStats {
  long long sspd_pairs = 0;
  long long sspd_weight = 0;
  long long cones_used = 0;
  std::size_t max_cover = 0;
};

/// One CoverSet per site, indexed by site - 1; the cover of site n is empty.
std::vector<CoverSet> build_covers(const SiteSet& sites, const ApproxParams& params,
                                   const PairDecomposition& pd, CoverStats* stats = nullptr);
std::vector<CoverSet> build_covers(const SiteSet& sites, const ApproxParams& params,
                                   CoverStats* stats = nullptr);
/// A_i = B_i = {i+1, ..., n}.
std::vector<CoverSet> full_covers(const SiteSet& sites);

struct CoverViolation {
  Point direction;
  int partner = 0;
};

struct CoverReport {
  long long samples = 0;
  long long violations = 0;
  std::vector<int> degenerate;  // partners whose gamma/alpha <= 1
  std::vector<CoverViolation> examples;

  bool ok() const noexcept { return violations == 0; }
};

/// Shoots `samples` random rays from s_i to the boundary of core(A_i) and
/// checks each hit against every alpha-ball (i, k), k in B_i.
CoverReport cover_spotcheck(const SiteSet& sites, int i, std::span<const int> cover,
                            std::span<const int> full, double alpha, double eps_S, int samples,
                            std::uint64_t seed);

/// Text form `i: j1 j2 ...`, one line per site.
std::string format_covers(std::span<const CoverSet> covers);

}  // namespace awvd
