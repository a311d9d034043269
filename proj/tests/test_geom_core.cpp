#include <doctest.h>

#include <cmath>
#include <random>

#include "awvd/geom_core.hpp"

using namespace awvd;

namespace {

Site site(Point p, double w = 1.0, int index = 1) { return Site{p, w, index}; }

// Region where s_i (weight 1) beats s_j (weight gamma): |p - s_i| / 1 <= |p - s_j| / gamma.
bool apollonian(const Point& p, const Point& si, const Point& sj, double gamma) {
  return gamma * dist(p, si) <= dist(p, sj);
}

Point random_point(std::mt19937_64& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Point p(d);
  for (int k = 0; k < d; ++k) p[k] = u(rng);
  return p;
}

}  // namespace

TEST_CASE("effective weight takes the ratio or the floor") {
  CHECK(effective_weight(1.0, 2.0, 0.1) == doctest::Approx(2.0));
  CHECK(effective_weight(1.0, 1.0, 0.1) == doctest::Approx(1.1));
  CHECK(effective_weight(4.0, 4.2, 0.1) == doctest::Approx(1.1));

  const std::vector<Point> pts{{0, 0}, {1, 0}};
  const std::vector<double> w{1.0, 2.0};
  const SiteSet s = SiteSet::from_unsorted(pts, w);
  CHECK(effective_weight(s, 1, 2, 0.1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(effective_weight(s, 2, 1, 0.1), Error);
  CHECK_THROWS_AS(effective_weight(s, 1, 1, 0.1), Error);
}

TEST_CASE("make_ball closed forms") {
  SUBCASE("gamma 2 on the x axis") {
    const EffectiveBall b = make_ball(site({0, 0}), site({3, 0}, 1, 2), 2.0);
    CHECK(b.t_star == doctest::Approx(1.0));
    CHECK(b.t_dagger == doctest::Approx(3.0));
    CHECK(b.center[0] == doctest::Approx(-1.0));
    CHECK(b.center[1] == doctest::Approx(0.0));
    CHECK(b.radius == doctest::Approx(2.0));
  }
  SUBCASE("gamma 1.1") {
    const EffectiveBall b = make_ball(site({0, 0}), site({2.1, 0}, 1, 2), 1.1);
    CHECK(b.t_star == doctest::Approx(1.0));
    CHECK(b.t_dagger == doctest::Approx(21.0));
    CHECK(b.center[0] == doctest::Approx(-10.0));
    CHECK(b.radius == doctest::Approx(11.0));
  }
  SUBCASE("rotated") {
    const EffectiveBall b = make_ball(site({0, 0}), site({0, 3}, 1, 2), 2.0);
    CHECK(b.center[0] == doctest::Approx(0.0));
    CHECK(b.center[1] == doctest::Approx(-1.0));
    CHECK(b.radius == doctest::Approx(2.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(make_ball(site({1, 1}), site({1, 1}, 1, 2), 2.0), Error);
    CHECK_THROWS_AS(make_ball(site({0, 0}), site({1, 1}, 1, 2), 1.0), Error);
    try {
      make_ball(site({0, 0}), site({1, 1}, 1, 2), 0.5);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateGamma);
    }
  }
}

TEST_CASE("make_ball agrees with the Apollonian definition") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gam(1.01, 6.0);
  for (int d = 2; d <= 4; ++d) {
    for (int trial = 0; trial < 200; ++trial) {
      const Point si = random_point(rng, d, -1, 1);
      const Point sj = random_point(rng, d, -1, 1);
      const double g = gam(rng);
      const EffectiveBall b = make_ball(site(si), site(sj, 1, 2), g);
      const double D = dist(si, sj);
      const Point u = (sj - si) / D;

      CHECK(dist(si + u * b.t_star, b.center) == doctest::Approx(b.radius).epsilon(1e-9));
      CHECK(dist(si - u * b.t_dagger, b.center) == doctest::Approx(b.radius).epsilon(1e-9));
      CHECK(b.t_star < b.t_dagger);
      CHECK(b.t_star + b.t_dagger == doctest::Approx(2 * b.radius).epsilon(1e-12));
      CHECK(dist(si, b.center) < b.radius);

      for (int s = 0; s < 50; ++s) {
        const Point p = si + random_point(rng, d, -2, 2) * b.radius;
        const double margin = std::abs(dist(p, b.center) - b.radius) / b.radius;
        if (margin < 1e-9) continue;
        CHECK(b.contains(p) == apollonian(p, si, sj, g));
      }
    }
  }
}

TEST_CASE("weighted distance") {
  CHECK(weighted_distance({3, 4}, site({0, 0}, 2.0)) == doctest::Approx(2.5));
  CHECK(weighted_distance({0, 0}, site({0, 0}, 2.0)) == 0.0);
  CHECK(weighted_distance({1, 0}, site({0, 0}, 0.5)) == doctest::Approx(2.0));
}

namespace {

// Ball with apex at the origin and partner on +x realizing the given t*, t†.
EffectiveBall ball_from_t(double ts, double td) {
  const double gamma = (td + ts) / (td - ts);
  const double D = ts * (gamma + 1.0);
  return make_ball(site({0, 0}), site({D, 0}, 1, 2), gamma);
}

}  // namespace

TEST_CASE("same-ray dominance") {
  CHECK(same_ray_dominates(ball_from_t(1, 3), ball_from_t(1, 21)));
  CHECK(same_ray_dominates(ball_from_t(1, 3), ball_from_t(1, 3)));
  CHECK_FALSE(same_ray_dominates(ball_from_t(1, 21), ball_from_t(2, 3)));

  const EffectiveBall a = make_ball(site({0, 0}), site({1, 0}, 1, 2), 2.0);
  const EffectiveBall b = make_ball(site({0, 0}), site({0, 1}, 1, 2), 2.0);
  CHECK_THROWS_AS(same_ray_dominates(a, b), Error);
}

TEST_CASE("dominance implies sampled containment") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int dominated = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Point dir = Point{u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5};
    const Point axis = dir / norm(dir);
    const Point apex{0.3, -0.2, 0.1};
    const EffectiveBall a = make_ball(site(apex), site(apex + axis * (0.5 + u(rng)), 1, 2), 1.05 + 3 * u(rng));
    const EffectiveBall b = make_ball(site(apex), site(apex + axis * (0.5 + u(rng)), 1, 3), 1.05 + 3 * u(rng));
    if (!same_ray_dominates(a, b)) continue;
    ++dominated;
    for (int s = 0; s < 10000 / 20; ++s) {
      Point v{u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5};
      const Point p = a.center + v / norm(v) * (a.radius * std::cbrt(u(rng)));
      CHECK(b.contains(p, 1e-9));
    }
  }
  CHECK(dominated > 20);
}

TEST_CASE("weight monotonicity") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Point p{u(rng), u(rng)}, q{u(rng) + 1.0, u(rng)};
    const double g = 1.0 + 2.0 * u(rng) + 1e-3;
    const double g2 = g * (1.0 + u(rng));
    const EffectiveBall small = make_ball(site(p), site(q, 1, 2), g2);
    const EffectiveBall big = make_ball(site(p), site(q, 1, 2), g);
    CHECK(small.t_star <= big.t_star);
    CHECK(small.t_dagger <= big.t_dagger);
    CHECK(same_ray_dominates(small, big));
    // Containment along the axis, including the concentric geometry.
    CHECK(dist(small.center, big.center) + small.radius <= big.radius * (1 + 1e-12));
  }
}

TEST_CASE("derive_params") {
  const ApproxParams p = derive_params(0.16);
  CHECK(p.eps_S == doctest::Approx(0.02));
  CHECK(p.eps_A == doctest::Approx(0.01));
  CHECK(p.eps_C == doctest::Approx(0.01));
  CHECK(p.eps_R == doctest::Approx(0.01));
  CHECK(p.eps_T == doctest::Approx(0.01));
  CHECK(p.beta == doctest::Approx(0.02));
  CHECK(p.sigma == doctest::Approx(201));
  CHECK(p.budget_product() == doctest::Approx(std::pow(1.01, 6) * 1.02));
  CHECK(p.budget_product() <= 1.16);

  CHECK_THROWS_AS(derive_params(1.5), Error);
  CHECK_THROWS_AS(derive_params(0.0), Error);
  CHECK_THROWS_AS(derive_params(1.0), Error);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const double eps = u(rng);
    if (!(eps < 1.0)) continue;
    const ApproxParams q = derive_params(eps);
    CHECK(q.budget_product() <= 1.0 + eps);
    CHECK(std::max({q.eps_R, q.eps_T, q.eps_C}) < q.eps_S);
    CHECK(q.sigma >= std::max(2 / q.eps_R, 1 + 2 / q.eps_T));
  }
}

TEST_CASE("approximate minimum enclosing ball") {
  const std::vector<Point> one{{0, 0}};
  const EnclosingBall b1 = min_enclosing_ball_approx(one);
  CHECK(b1.radius == 0.0);
  CHECK(b1.center == Point{0, 0});

  const std::vector<Point> two{{0, 0}, {2, 0}};
  const EnclosingBall b2 = min_enclosing_ball_approx(two);
  CHECK(b2.radius >= 1.0 - 1e-12);
  CHECK(b2.radius <= 2.0);

  std::mt19937_64 rng(1);
  std::vector<Point> pts;
  for (int s = 0; s < 100; ++s) pts.push_back(random_point(rng, 2, 0, 1));
  const EnclosingBall b = min_enclosing_ball_approx(pts);
  double diameter = 0.0;
  for (const Point& p : pts) {
    CHECK(dist(p, b.center) <= b.radius * (1 + 1e-12));
    for (const Point& q : pts) diameter = std::max(diameter, dist(p, q));
  }
  // The optimum is at least half the diameter.
  CHECK(b.radius <= diameter);

  CHECK_THROWS_AS(min_enclosing_ball_approx(std::vector<Point>{}), Error);
}

TEST_CASE("sites are sorted stably by weight") {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const std::vector<double> w{3.0, 1.0, 3.0, 1.0};
  const SiteSet s = SiteSet::from_unsorted(pts, w);
  CHECK(s[1].coords == Point{1, 0});
  CHECK(s[2].coords == Point{3, 0});
  CHECK(s[3].coords == Point{0, 0});
  CHECK(s[4].coords == Point{2, 0});
  CHECK(s.original_position(3) == 0);
  for (int i = 1; i < s.size(); ++i) CHECK(s[i].weight <= s[i + 1].weight);

  const std::vector<double> bad{1.0, 0.0, 1.0, 1.0};
  CHECK_THROWS_AS(SiteSet::from_unsorted(pts, bad), Error);
  CHECK_THROWS_AS(SiteSet::from_unsorted(std::vector<Point>{}, std::vector<double>{}), Error);
}
