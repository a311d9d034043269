#include "awvd/refine.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace awvd {

namespace {

constexpr double kFeasTol = 1e-9;

// A constraint surface: a ball boundary, or the plane x_axis = value.
struct Surface {
  bool sphere = false;
  Point center;
  double r2 = 0.0;
  int axis = 0;
  double value = 0.0;
};

struct Active {
  std::vector<const EffectiveBall*> balls;
  bool all_contain = true;
  bool outside = false;
};

Active active_balls(const CoreRegion& core, const Box& box) {
  Active a;
  for (const EffectiveBall& b : core.balls) {
    const double r2 = b.radius * b.radius;
    if (point_box_dist2(b.center, box) >= r2) {
      a.outside = true;
      return a;
    }
    if (point_box_far2(b.center, box) <= r2) continue;
    a.all_contain = false;
    a.balls.push_back(&b);
  }
  return a;
}

bool feasible(const Point& p, std::span<const EffectiveBall* const> balls, const Box& box) {
  double side = 0.0;
  for (int k = 0; k < box.dim(); ++k) side = std::max(side, box.hi[k] - box.lo[k]);
  const double slack = kFeasTol * side;
  for (int k = 0; k < p.dim(); ++k)
    if (p[k] < box.lo[k] - slack || p[k] > box.hi[k] + slack) return false;
  for (const EffectiveBall* b : balls) {
    const double r = b->radius * (1.0 + kFeasTol);
    if (dist2(p, b->center) > r * r) return false;
  }
  return true;
}

// Solves the m x m system M y = rhs in place; false when (numerically) singular.
bool solve_small(std::array<std::array<double, kMaxDim>, kMaxDim>& M,
                 std::array<double, kMaxDim>& rhs, int m) {
  double scale = 0.0;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) scale = std::max(scale, std::abs(M[r][c]));
  if (scale == 0.0) return m == 0;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
    if (std::abs(M[piv][col]) <= 1e-12 * scale) return false;
    std::swap(M[piv], M[col]);
    std::swap(rhs[piv], rhs[col]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = M[r][col] / M[col][col];
      for (int c = col; c < m; ++c) M[r][c] -= f * M[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int r = 0; r < m; ++r) rhs[r] /= M[r][r];
  return true;
}

// Affine flat {x : A x = b} with m rows.
struct Flat {
  int dim = 0;
  int m = 0;
  std::array<Point, kMaxDim> rows;
  std::array<double, kMaxDim> b{};

  // Orthogonal projection of p onto the flat; false if rows are dependent.
  bool project(const Point& p, Point& out) const {
    std::array<std::array<double, kMaxDim>, kMaxDim> G{};
    std::array<double, kMaxDim> rhs{};
    for (int r = 0; r < m; ++r) {
      rhs[r] = b[r] - dot(rows[r], p);
      for (int c = 0; c < m; ++c) G[r][c] = dot(rows[r], rows[c]);
    }
    if (!solve_small(G, rhs, m)) return false;
    out = p;
    for (int r = 0; r < m; ++r) out += rows[r] * rhs[r];
    return true;
  }

  // Component of direction u tangent to the flat.
  Point tangent(const Point& u) const {
    std::array<std::array<double, kMaxDim>, kMaxDim> G{};
    std::array<double, kMaxDim> rhs{};
    for (int r = 0; r < m; ++r) {
      rhs[r] = dot(rows[r], u);
      for (int c = 0; c < m; ++c) G[r][c] = dot(rows[r], rows[c]);
    }
    Point t = u;
    if (m > 0 && solve_small(G, rhs, m))
      for (int r = 0; r < m; ++r) t -= rows[r] * rhs[r];
    return t;
  }
};

Point unit_axis(int dim, int k, double sign) {
  Point u(dim);
  u[k] = sign;
  return u;
}

// Emits the critical points of every coordinate direction on every
// intersection of at most d constraint surfaces. Every extreme point of the
// (compact, convex) overlap region along a coordinate direction is among them.
// `visit` returns true to stop early.
template <class Visit>
bool for_each_candidate(std::span<const EffectiveBall* const> balls, const Box& box, Visit&& visit) {
  const int d = box.dim();
  std::vector<Surface> surfaces;
  for (const EffectiveBall* b : balls) {
    Surface s;
    s.sphere = true;
    s.center = b->center;
    s.r2 = b->radius * b->radius;
    surfaces.push_back(s);
  }
  for (int k = 0; k < d; ++k) {
    Surface lo;
    lo.axis = k;
    lo.value = box.lo[k];
    surfaces.push_back(lo);
    Surface hi = lo;
    hi.value = box.hi[k];
    surfaces.push_back(hi);
  }

  const int K = static_cast<int>(surfaces.size());
  std::array<int, kMaxDim> pick{};

  auto handle = [&](int m) -> bool {
    int first_sphere = -1;
    int plane_axes = 0;
    for (int t = 0; t < m; ++t) {
      const Surface& s = surfaces[pick[t]];
      if (s.sphere) {
        if (first_sphere < 0) first_sphere = pick[t];
      } else {
        if (plane_axes & (1 << s.axis)) return false;  // parallel planes
        plane_axes |= 1 << s.axis;
      }
    }
    if (first_sphere < 0) {
      if (m != d) return false;
      Point v(d);
      for (int t = 0; t < m; ++t) v[surfaces[pick[t]].axis] = surfaces[pick[t]].value;
      return visit(v);
    }
    const Surface& s0 = surfaces[first_sphere];
    Flat flat;
    flat.dim = d;
    for (int t = 0; t < m; ++t) {
      const Surface& s = surfaces[pick[t]];
      if (pick[t] == first_sphere) continue;
      if (s.sphere) {
        flat.rows[flat.m] = (s0.center - s.center) * 2.0;
        flat.b[flat.m] = s.r2 - s0.r2 - norm2(s.center) + norm2(s0.center);
      } else {
        flat.rows[flat.m] = unit_axis(d, s.axis, 1.0);
        flat.b[flat.m] = s.value;
      }
      ++flat.m;
    }
    Point p0;
    if (!flat.project(s0.center, p0)) return false;
    const double rr2 = s0.r2 - dist2(p0, s0.center);
    if (rr2 < -kFeasTol * s0.r2) return false;
    const double rr = std::sqrt(std::max(rr2, 0.0));
    if (rr == 0.0) return visit(p0);

    for (int k = 0; k < d; ++k) {
      const Point t = flat.tangent(unit_axis(d, k, 1.0));
      const double tn = norm(t);
      if (tn > 1e-12) {
        if (visit(p0 + t * (rr / tn))) return true;
        if (visit(p0 - t * (rr / tn))) return true;
      }
    }
    return false;
  };

  // Enumerate subsets of size 1..d in lexicographic order.
  for (int m = 1; m <= d; ++m) {
    for (int t = 0; t < m; ++t) pick[t] = t;
    if (m > K) break;
    while (true) {
      if (handle(m)) return true;
      int t = m - 1;
      while (t >= 0 && pick[t] == K - m + t) --t;
      if (t < 0) break;
      ++pick[t];
      for (int u = t + 1; u < m; ++u) pick[u] = pick[u - 1] + 1;
    }
  }
  return false;
}

// Weighted-sum certificate: for convex weights lambda, every core point x has
// sum_k lambda_k (|x - c_k|^2 - r_k^2) <= 0; this sum is |x - cbar|^2 - rho^2.
// Returns Outside, Boundary (strictly feasible point found) or nothing.
std::optional<Verdict> probe(std::span<const EffectiveBall* const> balls, const Box& box,
                             const Point& apex) {
  const std::size_t m = balls.size();
  std::vector<double> lambda(m, 1.0 / static_cast<double>(m));
  auto strictly_inside = [&](const Point& x) {
    for (const EffectiveBall* b : balls)
      if (!(dist2(x, b->center) < b->radius * b->radius)) return false;
    return true;
  };
  for (int it = 0; it < 64; ++it) {
    Point cbar(box.dim());
    double r2sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      cbar += balls[k]->center * lambda[k];
      r2sum += lambda[k] * balls[k]->radius * balls[k]->radius;
    }
    double spread = 0.0;
    for (std::size_t k = 0; k < m; ++k) spread += lambda[k] * dist2(balls[k]->center, cbar);
    const double rho2 = r2sum - spread;
    const Point x = clamp_to_box(cbar, box);
    if (dist2(x, cbar) - rho2 > 1e-9 * r2sum) return Verdict::Outside;
    if (strictly_inside(x)) return Verdict::Boundary;
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double r2 = balls[k]->radius * balls[k]->radius;
      const double v = std::clamp((dist2(x, balls[k]->center) - r2) / r2, -1.0, 1.0);
      lambda[k] *= std::exp(2.0 * v);
      total += lambda[k];
    }
    for (double& l : lambda) l /= total;
  }

  // Cyclic projections between the balls and the box.
  Point x = clamp_to_box(apex, box);
  for (int it = 0; it < 64; ++it) {
    if (strictly_inside(x)) return Verdict::Boundary;
    const EffectiveBall* worst = nullptr;
    double worst_v = 0.0;
    for (const EffectiveBall* b : balls) {
      const double v = dist(x, b->center) / b->radius;
      if (v >= worst_v) {
        worst_v = v;
        worst = b;
      }
    }
    x = worst->center + (x - worst->center) * ((1.0 - 1e-12) / worst_v);
    x = clamp_to_box(x, box);
  }
  if (strictly_inside(x)) return Verdict::Boundary;
  return std::nullopt;
}

bool box_inside(const Box& inner, const Box& outer) {
  for (int k = 0; k < inner.dim(); ++k)
    if (inner.lo[k] < outer.lo[k] || inner.hi[k] > outer.hi[k]) return false;
  return true;
}

std::optional<Box> intersect(const Box& a, const Box& b) {
  Box out = a;
  for (int k = 0; k < a.dim(); ++k) {
    out.lo[k] = std::max(a.lo[k], b.lo[k]);
    out.hi[k] = std::min(a.hi[k], b.hi[k]);
    if (!(out.lo[k] < out.hi[k])) return std::nullopt;
  }
  return out;
}

}  // namespace

CoreRegion make_core(const SiteSet& sites, int i, std::span<const int> partners, double eps_S) {
  CoreRegion core;
  core.apex = i;
  core.apex_point = sites[i].coords;
  core.balls.reserve(partners.size());
  for (int j : partners)
    core.balls.push_back(make_ball(sites[i], sites[j], effective_weight(sites, i, j, eps_S)));
  return core;
}

Verdict classify_cube(const CoreRegion& core, const Box& cube_box) {
  Box box = cube_box;
  bool clipped = false;
  if (core.clip) {
    const auto cut = intersect(cube_box, *core.clip);
    if (!cut) return Verdict::Outside;
    clipped = !box_inside(cube_box, *core.clip);
    box = *cut;
  }
  const Active act = active_balls(core, box);
  if (act.outside) return Verdict::Outside;
  if (act.all_contain) return clipped ? Verdict::Boundary : Verdict::Inside;
  if (act.balls.size() == 1) return Verdict::Boundary;
  if (const auto v = probe(act.balls, box, core.apex_point)) return *v;
  const bool nonempty =
      for_each_candidate(act.balls, box, [&](const Point& p) { return feasible(p, act.balls, box); });
  return nonempty ? Verdict::Boundary : Verdict::Outside;
}

Verdict classify_cube(const CoreRegion& core, const CanonicalCube& cube, const GridConfig& grid) {
  return classify_cube(core, grid.box_of(cube));
}

std::vector<Interval> axis_projection(const CoreRegion& core, const Box& cube_box) {
  const int d = cube_box.dim();
  Box box = cube_box;
  if (core.clip) {
    const auto cut = intersect(cube_box, *core.clip);
    if (!cut) throw Error(ErrorCode::EmptyOverlap, "box misses the clip region");
    box = *cut;
  }
  std::vector<const EffectiveBall*> balls;
  for (const EffectiveBall& b : core.balls) {
    const double r2 = b.radius * b.radius;
    if (point_box_dist2(b.center, box) > r2 * (1.0 + 2.0 * kFeasTol))
      throw Error(ErrorCode::EmptyOverlap, "box misses a ball of the core");
    if (point_box_far2(b.center, box) > r2) balls.push_back(&b);
  }
  std::vector<Interval> out(d, Interval{std::numeric_limits<double>::infinity(),
                                        -std::numeric_limits<double>::infinity()});
  bool any = false;
  for_each_candidate(balls, box, [&](const Point& p) {
    if (!feasible(p, balls, box)) return false;
    any = true;
    for (int k = 0; k < d; ++k) {
      out[k].lo = std::min(out[k].lo, std::clamp(p[k], box.lo[k], box.hi[k]));
      out[k].hi = std::max(out[k].hi, std::clamp(p[k], box.lo[k], box.hi[k]));
    }
    return false;
  });
  if (!any) throw Error(ErrorCode::EmptyOverlap, "core does not meet the box");
  return out;
}

CanonicalCube zoom_in(const CoreRegion& core, const CanonicalCube& cube, const GridConfig& grid) {
  const Box box = grid.box_of(cube);
  const auto iv = axis_projection(core, box);
  const double pad = 1e-7 * grid.side_of(cube);
  Point lo(grid.dim), hi(grid.dim);
  for (int k = 0; k < grid.dim; ++k) {
    lo[k] = iv[k].lo - pad;
    hi[k] = iv[k].hi + pad;
  }
  FixedPoint flo = grid.to_fixed_clamped(lo);
  FixedPoint fhi = grid.to_fixed_clamped(hi);
  const int shift = grid.frac_bits - cube.level;
  for (int k = 0; k < grid.dim; ++k) {
    const std::uint64_t first = cube.anchor[k] << shift;
    const std::uint64_t last = first + ((std::uint64_t{1} << shift) - 1);
    flo[k] = std::clamp(flo[k], first, last);
    fhi[k] = std::clamp(fhi[k], first, last);
  }
  return smallest_cube_covering(grid.finest_cube(flo), grid.finest_cube(fhi), grid.frac_bits);
}

bool halts_small(const CoreRegion& core, const CanonicalCube& cube, const GridConfig& grid,
                 double eps_A) {
  const double distance = std::sqrt(point_box_dist2(core.apex_point, grid.box_of(cube)));
  return grid.side_of(cube) <= eps_A * distance;
}

FatnessRadii core_fatness_radii(const CoreRegion& core) {
  if (core.balls.empty()) throw Error(ErrorCode::EmptyBallList, "core has no balls");
  const EffectiveBall* best = &core.balls.front();
  for (const EffectiveBall& b : core.balls)
    if (b.t_star < best->t_star) best = &b;
  return {best->t_star, best->t_dagger};
}

CanonicalCube refinement_start(const CoreRegion& core, const GridConfig& grid) {
  Box region = grid.root_box();
  if (!core.balls.empty()) {
    const double r1 = core_fatness_radii(core).r1_bound;
    Box around{core.apex_point, core.apex_point};
    for (int k = 0; k < grid.dim; ++k) {
      around.lo[k] -= r1;
      around.hi[k] += r1;
    }
    if (const auto cut = intersect(region, around)) region = *cut;
  }
  if (core.clip) {
    if (const auto cut = intersect(region, *core.clip)) region = *cut;
  }
  return smallest_cube_covering(grid.finest_cube(grid.to_fixed_clamped(region.lo)),
                                grid.finest_cube(grid.to_fixed_clamped(region.hi)),
                                grid.frac_bits);
}

namespace {

struct Refiner {
  const CoreRegion& core;
  double eps_A;
  const GridConfig& grid;
  RefinementOutput& out;

  void emit(const CanonicalCube& c, HaltReason why) {
    out.cubes.push_back(c);
    out.reasons.push_back(why);
  }

  void visit(const CanonicalCube& cube, Verdict verdict) {
    if (verdict == Verdict::Inside) {
      emit(cube, HaltReason::Inside);
      return;
    }
    if (halts_small(core, cube, grid, eps_A)) {
      emit(cube, HaltReason::Small);
      return;
    }
    if (cube.level >= grid.frac_bits) {
      std::ostringstream os;
      os << "core " << core.apex << " needs cubes below level " << grid.frac_bits
         << "; rebuild with more fractional bits";
      throw Error(ErrorCode::RefinementDepthExceeded, os.str());
    }
    const int count = cube.child_count();
    std::vector<std::pair<CanonicalCube, Verdict>> live;
    for (int c = 0; c < count; ++c) {
      const CanonicalCube child = cube.child(c);
      const Verdict v = classify_cube(core, child, grid);
      if (v != Verdict::Outside) live.emplace_back(child, v);
    }
    if (live.size() == 1) {
      ++out.type_one_splits;
      const auto [child, v] = live.front();
      if (v == Verdict::Boundary) {
        const CanonicalCube z = zoom_in(core, child, grid);
        if (z.level > child.level && cube_contains(child, z)) {
          for (int level = child.level; level < z.level; ++level) {
            CanonicalCube link = z;
            link.level = level;
            for (int k = 0; k < grid.dim; ++k) link.anchor[k] = z.anchor[k] >> (z.level - level);
            if (halts_small(core, link, grid, eps_A)) {
              emit(link, HaltReason::Small);
              return;
            }
          }
          visit(z, classify_cube(core, z, grid));
          return;
        }
      }
      visit(child, v);
      return;
    }
    ++out.type_two_splits;
    for (const auto& [child, v] : live) visit(child, v);
  }
};

}  // namespace

RefinementOutput refine_core(const CoreRegion& core, double eps_A, const GridConfig& grid) {
  if (!(eps_A > 0.0 && eps_A < 1.0)) throw Error(ErrorCode::OutOfRange, "eps_A must lie in (0, 1)");
  RefinementOutput out;
  out.apex = core.apex;
  out.start = refinement_start(core, grid);
  const Verdict v = classify_cube(core, out.start, grid);
  if (v != Verdict::Outside) Refiner{core, eps_A, grid, out}.visit(out.start, v);
  return out;
}

std::vector<CanonicalCube> minimality_violations(const CoreRegion& core,
                                                 const RefinementOutput& out, double eps_A,
                                                 const GridConfig& grid) {
  std::vector<CanonicalCube> bad;
  for (const CanonicalCube& c : out.cubes) {
    if (c.level <= out.start.level) continue;
    const CanonicalCube parent = c.parent();
    if (classify_cube(core, parent, grid) != Verdict::Boundary ||
        halts_small(core, parent, grid, eps_A))
      bad.push_back(c);
  }
  return bad;
}

}  // namespace awvd
