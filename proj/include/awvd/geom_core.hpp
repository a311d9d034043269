#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "awvd/error.hpp"

namespace awvd {

inline constexpr int kMaxDim = 4;

/// Fixed-capacity point in R^d, d <= kMaxDim.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  Point(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    assert(dim_ <= kMaxDim);
    int k = 0;
    for (double x : xs) c_[k++] = x;
  }
  explicit Point(std::span<const double> xs) : dim_(static_cast<int>(xs.size())) {
    assert(dim_ <= kMaxDim);
    for (int k = 0; k < dim_; ++k) c_[k] = xs[k];
  }

  int dim() const noexcept { return dim_; }
  double& operator[](int k) noexcept { return c_[k]; }
  double operator[](int k) const noexcept { return c_[k]; }
  std::span<const double> coords() const noexcept { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  Point& operator+=(const Point& o) noexcept {
    for (int k = 0; k < dim_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Point& operator-=(const Point& o) noexcept {
    for (int k = 0; k < dim_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Point& operator*=(double s) noexcept {
    for (int k = 0; k < dim_; ++k) c_[k] *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
  friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
  friend Point operator*(Point a, double s) noexcept { return a *= s; }
  friend Point operator*(double s, Point a) noexcept { return a *= s; }
  friend Point operator/(Point a, double s) noexcept { return a *= 1.0 / s; }
  friend bool operator==(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    for (int k = 0; k < a.dim_; ++k)
      if (a.c_[k] != b.c_[k]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double dot(const Point& a, const Point& b) noexcept {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) s += a[k] * b[k];
  return s;
}
inline double norm2(const Point& a) noexcept { return dot(a, a); }
inline double norm(const Point& a) noexcept { return std::sqrt(norm2(a)); }
inline double dist2(const Point& a, const Point& b) noexcept { return norm2(a - b); }
inline double dist(const Point& a, const Point& b) noexcept { return std::sqrt(dist2(a, b)); }

/// Axis-aligned closed box in instance coordinates.
struct Box {
  Point lo;
  Point hi;

  int dim() const noexcept { return lo.dim(); }
  bool empty_interior() const noexcept {
    for (int k = 0; k < dim(); ++k)
      if (!(lo[k] < hi[k])) return true;
    return false;
  }
};

/// Squared distance from p to the closest point of the box.
inline double point_box_dist2(const Point& p, const Box& b) noexcept {
  double s = 0.0;
  for (int k = 0; k < p.dim(); ++k) {
    double d = 0.0;
    if (p[k] < b.lo[k])
      d = b.lo[k] - p[k];
    else if (p[k] > b.hi[k])
      d = p[k] - b.hi[k];
    s += d * d;
  }
  return s;
}

/// Squared distance from p to the farthest corner of the box.
inline double point_box_far2(const Point& p, const Box& b) noexcept {
  double s = 0.0;
  for (int k = 0; k < p.dim(); ++k) {
    double d = std::max(std::abs(p[k] - b.lo[k]), std::abs(p[k] - b.hi[k]));
    s += d * d;
  }
  return s;
}

inline Point clamp_to_box(Point p, const Box& b) noexcept {
  for (int k = 0; k < p.dim(); ++k) p[k] = std::min(std::max(p[k], b.lo[k]), b.hi[k]);
  return p;
}

struct Site {
  Point coords;
  double weight = 1.0;
  int index = 0;  // 1-based rank after sorting by weight
};

/// Weighted sites, stably sorted so that weights are non-decreasing.
/// Indices are 1-based and refer to the sorted rank.
class SiteSet {
 public:
  SiteSet() = default;

  /// Validates and sorts. Throws OutOfRange on bad dimension or weight and
  /// EmptyInput on an empty list.
  static SiteSet from_unsorted(std::span<const Point> coords, std::span<const double> weights);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(sites_.size()); }
  const Site& operator[](int index) const noexcept { return sites_[index - 1]; }
  const std::vector<Site>& all() const noexcept { return sites_; }
  /// Position of sorted site `index` in the caller's original input.
  int original_position(int index) const noexcept { return original_[index - 1]; }

  Box bounding_box() const;

 private:
  std::vector<Site> sites_;
  std::vector<int> original_;
  int dim_ = 0;
};

/// Apollonian ball {p : |p - s_i| <= gamma |p - s_j|} with gamma > 1.
struct EffectiveBall {
  int i = 0;
  int j = 0;
  double gamma = 0.0;
  Point center;
  double radius = 0.0;
  double t_star = 0.0;     // nearest surface point from s_i, toward s_j
  double t_dagger = 0.0;   // farthest surface point from s_i, away from s_j
  Point apex;              // s_i
  Point axis;              // unit vector s_i -> s_j
  double partner_dist2 = 0.0;

  bool contains(const Point& p, double rel_tol = 0.0) const noexcept {
    return dist2(p, center) <= radius * radius * (1.0 + rel_tol);
  }
};

struct ApproxParams {
  double eps = 0.0;
  double eps_A = 0.0;
  double eps_S = 0.0;
  double eps_C = 0.0;
  double eps_T = 0.0;
  double eps_R = 0.0;
  double beta = 0.0;
  double sigma = 0.0;

  /// (1+eps_A)(1+eps_S)(1+eps_T)(1+eps_R)^2(1+eps_C)^2
  double budget_product() const noexcept;
};

double effective_weight(double w_i, double w_j, double eps_S) noexcept;
/// max(w_j/w_i, 1+eps_S); requires i < j.
double effective_weight(const SiteSet& sites, int i, int j, double eps_S);

EffectiveBall make_ball(const Site& s_i, const Site& s_j, double gamma);

double weighted_distance(const Point& p, const Site& s) noexcept;

/// True iff ball a is contained in ball b, for balls that share the apex and
/// whose partners lie on a common ray. Decided on squared quantities only.
bool same_ray_dominates(const EffectiveBall& a, const EffectiveBall& b);

ApproxParams derive_params(double eps);

struct EnclosingBall {
  Point center;
  double radius = 0.0;
};

/// Constant-factor approximation (factor <= 2) of the minimum enclosing ball.
EnclosingBall min_enclosing_ball_approx(std::span<const Point> points);

}  // namespace awvd
