#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <random>

#include "awvd/diagram.hpp"
#include "awvd/oracle_bench.hpp"

using namespace awvd;

namespace {

BuildOptions opts(CoverMode mode, int threads = 1) {
  BuildOptions o;
  o.mode = mode;
  o.threads = threads;
  return o;
}

// Independent linear scan, coded separately from brute_nn.
double exact_min(const SiteSet& s, const Point& p) {
  double best = INFINITY;
  for (const Site& site : s.all()) best = std::min(best, dist(p, site.coords) / site.weight);
  return best;
}

bool covered_by(const RefinementOutput& r, const GridConfig& g, const FixedPoint& f) {
  const CanonicalCube fine = g.finest_cube(f);
  for (const CanonicalCube& c : r.cubes)
    if (cube_contains(c, fine)) return true;
  return false;
}

}  // namespace

TEST_CASE("single site diagram") {
  const SiteSet s = SiteSet::from_unsorted(std::vector<Point>{{0.3, 0.4}}, std::vector<double>{2.0});
  const Diagram d = build_diagram(s, 0.25, opts(CoverMode::Full));
  CHECK(d.tree.size() == 1);
  CHECK(d.total_cubes() == 0);
  for (const Point& p : {Point{0.3, 0.4}, Point{5, -7}, Point{0.31, 0.4}}) CHECK(query(d, p).site == 1);
  const RatioReport r = ratio_check(d, uniform_queries(s, 100, 1));
  CHECK(r.max_ratio == 1.0);
}

TEST_CASE("two sites") {
  // Light site at the origin, heavy site to the right; the light cell is a small disc.
  const SiteSet s = SiteSet::from_unsorted(std::vector<Point>{{0, 0}, {1, 0}}, std::vector<double>{1, 3});
  for (CoverMode mode : {CoverMode::Full, CoverMode::Reduced}) {
    const Diagram d = build_diagram(s, 0.25, opts(mode));
    CHECK(query(d, {0, 0}).site == 1);
    CHECK(query(d, {0, 0}).distance == 0.0);
    CHECK(query(d, {1, 0}).site == 2);
    CHECK(query(d, {-0.6, 0}).site == 2);
    CHECK(query(d, {100, 100}).site == 2);
    const RatioReport r = ratio_check(d, uniform_queries(s, 5000, 2));
    CHECK(r.max_ratio <= 1.25);
  }
}

TEST_CASE("labels follow the lowest covering core") {
  const SiteSet s = gen_instance(25, 2, WeightLaw::Uniform, 9).sites();
  BuildOptions o = opts(CoverMode::Reduced);
  o.keep_refinements = true;
  const Diagram d = build_diagram(s, 0.5, o);
  REQUIRE(d.refinements.size() == static_cast<std::size_t>(s.size() - 1));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box root = d.grid.root_box();
  for (int q = 0; q < 3000; ++q) {
    Point p(2);
    for (int k = 0; k < 2; ++k) p[k] = root.lo[k] + (root.hi[k] - root.lo[k]) * u(rng) * 0.999;
    const FixedPoint f = d.grid.to_fixed(p);
    int expected = s.size();
    for (int i = 1; i < s.size(); ++i) {
      if (covered_by(d.refinements[i - 1], d.grid, f)) {
        expected = i;
        break;
      }
    }
    CHECK(query(d, p).site == expected);
  }
}

TEST_CASE("tree labels are monotone and complete") {
  const SiteSet s = gen_instance(40, 2, WeightLaw::TwoClass, 4).sites();
  const Diagram d = build_diagram(s, 0.25, opts(CoverMode::Reduced));
  const auto& nodes = d.tree.nodes();
  CHECK(nodes[0].label == s.size());
  for (const auto& n : nodes) {
    CHECK(n.label >= 1);
    CHECK(n.label <= s.size());
    if (n.parent >= 0) CHECK(n.label <= nodes[n.parent].label);
  }
}

TEST_CASE("approximation guarantee, both modes") {
  for (double eps : {0.5, 0.25}) {
    const SiteSet s = gen_instance(30, 2, WeightLaw::Uniform, 17).sites();
    for (CoverMode mode : {CoverMode::Full, CoverMode::Reduced}) {
      const Diagram d = build_diagram(s, eps, opts(mode));
      auto pts = uniform_queries(s, 4000, 5);
      const auto corners = corner_queries(d, 1000, 6);
      pts.insert(pts.end(), corners.begin(), corners.end());
      double worst = 1.0;
      for (const Point& p : pts) {
        const QueryResult q = query(d, p);
        const double best = exact_min(s, p);
        CHECK(q.distance == doctest::Approx(dist(p, s[q.site].coords) / s[q.site].weight));
        worst = std::max(worst, best > 0 ? q.distance / best : 1.0);
      }
      CHECK_MESSAGE(worst <= 1.0 + eps, "mode " << to_string(mode) << " eps " << eps);
      const RatioReport r = ratio_check(d, pts);
      CHECK(r.max_ratio == doctest::Approx(worst));
      CHECK(r.comparison_overruns == 0);
    }
  }
}

TEST_CASE("d = 3 build") {
  const SiteSet s = gen_instance(12, 3, WeightLaw::Uniform, 2).sites();
  const Diagram d = build_diagram(s, 0.5, opts(CoverMode::Reduced));
  const RatioReport r = ratio_check(d, uniform_queries(s, 2000, 7));
  CHECK(r.max_ratio <= 1.5);
}

TEST_CASE("reduced and full builds agree in quality") {
  const SiteSet s = gen_instance(50, 2, WeightLaw::Uniform, 21).sites();
  const Diagram full = build_diagram(s, 0.25, opts(CoverMode::Full));
  const Diagram reduced = build_diagram(s, 0.25, opts(CoverMode::Reduced));
  const auto pts = uniform_queries(s, 10000, 8);
  const RatioReport rf = ratio_check(full, pts);
  const RatioReport rr = ratio_check(reduced, pts);
  CHECK(rf.max_ratio <= 1.25);
  CHECK(rr.max_ratio <= 1.25);
  CHECK(std::abs(rf.max_ratio - rr.max_ratio) <= 0.25);
  for (std::size_t i = 0; i < reduced.cores.size(); ++i) CHECK(reduced.cores[i].balls <= full.cores[i].balls);
}

TEST_CASE("thread count does not change the result") {
  const SiteSet s = gen_instance(40, 2, WeightLaw::Uniform, 33).sites();
  const std::string one = dump_diagram(build_diagram(s, 0.25, opts(CoverMode::Reduced, 1)));
  const std::string three = dump_diagram(build_diagram(s, 0.25, opts(CoverMode::Reduced, 3)));
  const std::string again = dump_diagram(build_diagram(s, 0.25, opts(CoverMode::Reduced, 1)));
  CHECK(one == three);
  CHECK(one == again);
}

TEST_CASE("dump and load round trip") {
  for (int dim = 2; dim <= 3; ++dim) {
    const SiteSet s = gen_instance(15, dim, WeightLaw::Uniform, 40 + dim).sites();
    const Diagram d = build_diagram(s, 0.5, opts(CoverMode::Reduced));
    const std::string text = dump_diagram(d);
    const Diagram back = load_diagram(text);
    CHECK(dump_diagram(back) == text);
    CHECK(back.tree.size() == d.tree.size());
    CHECK(back.params.eps == d.params.eps);
    for (const Point& p : uniform_queries(s, 500, 9)) {
      const QueryResult a = query(d, p), b = query(back, p);
      CHECK(a.site == b.site);
      CHECK(a.distance == b.distance);
    }
  }
}

TEST_CASE("load rejects malformed dumps") {
  CHECK_THROWS_AS(load_diagram(""), Error);
  CHECK_THROWS_AS(load_diagram("AWVD v2 d=2 B=48 root=0 0 1 1\n"), Error);
  const SiteSet s = gen_instance(5, 2, WeightLaw::Uniform, 1).sites();
  std::string text = dump_diagram(build_diagram(s, 0.5, opts(CoverMode::Full)));
  CHECK(text.rfind("AWVD v1 d=2 B=48 root=", 0) == 0);
  try {
    load_diagram(text.substr(0, text.size() / 2));
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
  }
}

TEST_CASE("stats report") {
  const SiteSet s = gen_instance(20, 2, WeightLaw::Uniform, 3).sites();
  const Diagram d = build_diagram(s, 0.25, opts(CoverMode::Full));
  const auto j = nlohmann::ordered_json::parse(stats_json(d, false));
  CHECK(j["n"] == 20);
  CHECK(j["mode"] == "full");
  CHECK(j["cells"] == d.tree.size());
  CHECK(j["sum_L"] == d.total_cubes());
  CHECK_FALSE(j.contains("build_seconds"));
  CHECK(stats_json(d, false) == stats_json(d, false));
  CHECK(j.begin().key() == "n");
}

TEST_CASE("skipping min-label dedup breaks the guarantee") {
  const SiteSet s = gen_instance(50, 2, WeightLaw::Uniform, 1).sites();
  BuildOptions o = opts(CoverMode::Reduced);
  o.duplicates = DuplicatePolicy::KeepMaxLabel;
  const Diagram bad = build_diagram(s, 0.25, o);
  const RatioReport r = ratio_check(bad, uniform_queries(s, 10000, 1));
  CHECK(r.max_ratio > 1.25);
}

TEST_CASE("build errors") {
  const SiteSet dup = SiteSet::from_unsorted(std::vector<Point>{{0, 0}, {0, 0}}, std::vector<double>{1, 2});
  CHECK_THROWS_AS(build_diagram(dup, 0.25), Error);
  const SiteSet s = gen_instance(5, 2, WeightLaw::Uniform, 1).sites();
  CHECK_THROWS_AS(build_diagram(s, 1.5), Error);
  BuildOptions o;
  o.frac_bits = 4;
  try {
    build_diagram(s, 0.1, o);
    FAIL("expected RefinementDepthExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RefinementDepthExceeded);
  }
  CHECK(parse_cover_mode("full") == CoverMode::Full);
  CHECK_THROWS_AS(parse_cover_mode("partial"), Error);
}
