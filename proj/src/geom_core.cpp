#include "awvd/geom_core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace awvd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOrder: return "IndexOrder";
    case ErrorCode::DegenerateSites: return "DegenerateSites";
    case ErrorCode::DegenerateGamma: return "DegenerateGamma";
    case ErrorCode::NotOnCommonRay: return "NotOnCommonRay";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::OutOfRoot: return "OutOfRoot";
    case ErrorCode::CubeOutsideRoot: return "CubeOutsideRoot";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::RefinementDepthExceeded: return "RefinementDepthExceeded";
    case ErrorCode::EmptyBallList: return "EmptyBallList";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

SiteSet SiteSet::from_unsorted(std::span<const Point> coords, std::span<const double> weights) {
  if (coords.empty()) throw Error(ErrorCode::EmptyInput, "no sites");
  if (coords.size() != weights.size())
    throw Error(ErrorCode::OutOfRange, "coordinate and weight counts differ");
  const int d = coords.front().dim();
  if (d < 2 || d > kMaxDim) throw Error(ErrorCode::OutOfRange, "dimension must be in [2, 4]");

  std::vector<int> order(coords.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k].dim() != d) throw Error(ErrorCode::OutOfRange, "mixed dimensions");
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
      throw Error(ErrorCode::OutOfRange, "weights must be positive and finite");
    for (double x : coords[k].coords())
      if (!std::isfinite(x)) throw Error(ErrorCode::OutOfRange, "non-finite coordinate");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return weights[a] < weights[b]; });

  SiteSet out;
  out.dim_ = d;
  out.sites_.reserve(order.size());
  out.original_.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.sites_.push_back(Site{coords[order[r]], weights[order[r]], static_cast<int>(r) + 1});
    out.original_.push_back(order[r]);
  }
  return out;
}

Box SiteSet::bounding_box() const {
  Box b{sites_.front().coords, sites_.front().coords};
  for (const Site& s : sites_) {
    for (int k = 0; k < dim_; ++k) {
      b.lo[k] = std::min(b.lo[k], s.coords[k]);
      b.hi[k] = std::max(b.hi[k], s.coords[k]);
    }
  }
  return b;
}

double ApproxParams::budget_product() const noexcept {
  return (1 + eps_A) * (1 + eps_S) * (1 + eps_T) * (1 + eps_R) * (1 + eps_R) * (1 + eps_C) *
         (1 + eps_C);
}

double effective_weight(double w_i, double w_j, double eps_S) noexcept {
  return std::max(w_j / w_i, 1.0 + eps_S);
}

double effective_weight(const SiteSet& sites, int i, int j, double eps_S) {
  if (i >= j) throw Error(ErrorCode::IndexOrder, "effective weight needs i < j");
  return effective_weight(sites[i].weight, sites[j].weight, eps_S);
}

EffectiveBall make_ball(const Site& s_i, const Site& s_j, double gamma) {
  if (!(gamma > 1.0)) throw Error(ErrorCode::DegenerateGamma, "gamma must exceed 1");
  const Point delta = s_j.coords - s_i.coords;
  const double d2 = norm2(delta);
  if (d2 == 0.0) throw Error(ErrorCode::DegenerateSites, "coincident sites");
  const double d = std::sqrt(d2);

  EffectiveBall b;
  b.i = s_i.index;
  b.j = s_j.index;
  b.gamma = gamma;
  b.t_star = d / (gamma + 1.0);
  b.t_dagger = d / (gamma - 1.0);
  b.radius = d / (gamma - 1.0 / gamma);
  b.center = s_i.coords - delta / (gamma * gamma - 1.0);
  b.apex = s_i.coords;
  b.axis = delta / d;
  b.partner_dist2 = d2;
  return b;
}

double weighted_distance(const Point& p, const Site& s) noexcept {
  return dist(p, s.coords) / s.weight;
}

bool same_ray_dominates(const EffectiveBall& a, const EffectiveBall& b) {
  constexpr double kRayTol = 1e-9;
  const double scale = std::max({1.0, norm(a.apex), norm(b.apex)});
  if (a.i != b.i || dist(a.apex, b.apex) > kRayTol * scale || dot(a.axis, b.axis) < 1.0 - kRayTol)
    throw Error(ErrorCode::NotOnCommonRay, "balls do not share an apex ray");
  // t* = D/(gamma+1), t† = D/(gamma-1): compare D_a^2 (g_b±1)^2 against D_b^2 (g_a±1)^2.
  const double gp_a = (a.gamma + 1.0) * (a.gamma + 1.0);
  const double gp_b = (b.gamma + 1.0) * (b.gamma + 1.0);
  const double gm_a = (a.gamma - 1.0) * (a.gamma - 1.0);
  const double gm_b = (b.gamma - 1.0) * (b.gamma - 1.0);
  const bool star_ok = a.partner_dist2 * gp_b <= b.partner_dist2 * gp_a;
  const bool dagger_ok = a.partner_dist2 * gm_b <= b.partner_dist2 * gm_a;
  return star_ok && dagger_ok;
}

ApproxParams derive_params(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    std::ostringstream os;
    os << "eps must lie in (0, 1), got " << eps;
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  ApproxParams p;
  p.eps = eps;
  p.eps_S = eps / 8.0;
  p.eps_A = p.eps_C = p.eps_R = p.eps_T = eps / 16.0;
  p.beta = 2.0 * p.eps_R;
  p.sigma = std::max(2.0 / p.eps_R, 1.0 + 2.0 / p.eps_T);

  if (!(p.budget_product() <= 1.0 + eps))
    throw std::logic_error("derive_params: product budget violated");
  if (!(std::max({p.eps_R, p.eps_T, p.eps_C}) < p.eps_S))
    throw std::logic_error("derive_params: component tolerances must stay below eps_S");
  return p;
}

EnclosingBall min_enclosing_ball_approx(std::span<const Point> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "no points");
  auto farthest = [&](const Point& c) {
    std::size_t best = 0;
    double best_d2 = -1.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double d2 = dist2(c, points[k]);
      if (d2 > best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    return std::pair{best, best_d2};
  };

  // Any input point as center gives radius <= diameter <= 2 * optimum.
  EnclosingBall best{points.front(), std::sqrt(farthest(points.front()).second)};
  // Badoiu-Clarkson iterations only ever replace the answer by a smaller ball.
  Point c = points.front();
  for (int t = 1; t <= 64; ++t) {
    const auto [far, far_d2] = farthest(c);
    if (std::sqrt(far_d2) < best.radius) best = {c, std::sqrt(far_d2)};
    c += (points[far] - c) / static_cast<double>(t + 1);
  }
  const double r_final = std::sqrt(farthest(c).second);
  if (r_final < best.radius) best = {c, r_final};
  return best;
}

}  // namespace awvd
