// awvd: generate instances, build and query approximate weighted Voronoi
// diagrams, render them, and run the validation suites.

#include <cstdio>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "awvd/cover.hpp"
#include "awvd/diagram.hpp"
#include "awvd/io.hpp"
#include "awvd/oracle_bench.hpp"
#include "awvd/refine.hpp"

namespace {

using namespace awvd;

constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDepth = 3;
constexpr int kExitRender = 4;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

SiteSet load_sites(const std::string& path) {
  const SitesFile f = parse_sites(read_file(path));
  return SiteSet::from_unsorted(f.coords, f.weights);
}

struct Suite {
  bool failed = false;
  void check(bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
    failed = failed || !ok;
  }
};

void suite_sspd(const SiteSet& sites, const ApproxParams& params, Suite& s) {
  if (sites.size() < 2) return;
  for (double sigma : {4.0, params.sigma}) {
    const PairDecomposition pd = build_sspd(sites, sigma);
    const SspdReport r = validate_sspd(pd, sites, sigma);
    s.check(r.ok(), "sspd sigma=" + std::to_string(sigma) + " pairs=" + std::to_string(pd.pairs.size()) +
                        " weight=" + std::to_string(pd.weight()));
    for (const std::string& m : r.messages) std::cout << "     " << m << '\n';
  }
  if (sites.size() <= 64) {
    const PairDecomposition pd = brute_sspd(sites, params.sigma);
    s.check(validate_sspd(pd, sites, params.sigma).ok(), "sspd brute-force fallback");
  }
}

void suite_refine(const SiteSet& sites, const ApproxParams& params, CoverMode mode, int frac_bits,
                  std::uint64_t seed, Suite& s) {
  const auto covers = mode == CoverMode::Full ? full_covers(sites) : build_covers(sites, params);
  const GridConfig grid = GridConfig::for_sites(sites, frac_bits);
  long mismatches = 0, skipped = 0, split_overruns = 0, minimality = 0, uncovered = 0;
  std::mt19937_64 rng(seed);
  for (int i = 1; i < sites.size(); ++i) {
    const CoreRegion core = make_core(sites, i, covers[i - 1].partners, params.eps_S);
    const RefinementOutput out = refine_core(core, params.eps_A, grid);
    if (out.total_splits() > 2 * static_cast<long>(out.cubes.size())) ++split_overruns;
    minimality += static_cast<long>(minimality_violations(core, out, params.eps_A, grid).size());
    try {
      if (brute_refinement_oracle(core, params.eps_A, grid, 200000) != out.cubes) ++mismatches;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
      ++skipped;
    }
    // Coverage: sampled core points must fall in some output cube.
    const Box box = grid.box_of(out.start);
    for (int t = 0; t < 200; ++t) {
      Point p(sites.dim());
      for (int k = 0; k < sites.dim(); ++k)
        p[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit_uniform(rng());
      bool in_core = grid.in_root(p);
      for (const EffectiveBall& b : core.balls) in_core = in_core && b.contains(p);
      if (!in_core) continue;
      const CanonicalCube cell = grid.finest_cube(grid.to_fixed(p));
      bool hit = false;
      for (const CanonicalCube& c : out.cubes) hit = hit || cube_contains(c, cell);
      if (!hit) ++uncovered;
    }
  }
  s.check(mismatches == 0, "refine equals the splitting oracle (" + std::to_string(skipped) +
                               " cores over budget skipped)");
  s.check(split_overruns == 0, "splits <= 2|L| on every core");
  s.check(minimality == 0, "every emitted cube has a splittable parent");
  s.check(uncovered == 0, "sampled core points covered");
}

void suite_cover(const SiteSet& sites, const ApproxParams& params, int directions,
                 std::uint64_t seed, Suite& s) {
  if (sites.size() < 2) return;
  const auto covers = build_covers(sites, params);
  const auto full = full_covers(sites);
  const double alpha = (1.0 + params.eps) / (1.0 + params.eps_A);
  long long violations = 0;
  for (int i = 1; i < sites.size(); ++i) {
    const CoverReport r = cover_spotcheck(sites, i, covers[i - 1].partners, full[i - 1].partners,
                                          alpha, params.eps_S, directions, seed + i);
    violations += r.violations;
  }
  s.check(violations == 0, "cover spot check, " + std::to_string(directions) + " rays per site");
}

void suite_e2e(const SiteSet& sites, double eps, CoverMode mode, int frac_bits, int threads,
               DuplicatePolicy dup, int queries, std::uint64_t seed, Suite& s) {
  BuildOptions opt;
  opt.mode = mode;
  opt.frac_bits = frac_bits;
  opt.threads = threads;
  opt.duplicates = dup;
  const Diagram d = build_diagram(sites, eps, opt);
  auto pts = uniform_queries(sites, queries, seed);
  const auto corners = corner_queries(d, std::max(1, queries / 10), seed + 1);
  pts.insert(pts.end(), corners.begin(), corners.end());
  const RatioReport r = ratio_check(d, pts);
  std::cout << format_report(r);
  s.check(r.within(eps), "ratio <= 1+eps over " + std::to_string(r.queries) + " queries");
  s.check(r.comparison_overruns == 0, "comparisons within 2 log2(cells) + 16");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate multiplicatively weighted Voronoi diagrams"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: AWVD_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "write a random sites file");
  int g_n = 0, g_d = 2;
  std::string g_law = "uniform", g_out;
  double g_wmax = 4.0;
  std::uint64_t g_seed = 1;
  gen->add_option("--n", g_n, "number of sites")->required()->check(CLI::PositiveNumber);
  gen->add_option("--d", g_d, "dimension")->check(CLI::Range(2, 4));
  gen->add_option("--weights", g_law, "uniform | two-class | equal")
      ->check(CLI::IsMember({"uniform", "two-class", "equal"}));
  gen->add_option("--max-weight", g_wmax, "W for uniform[1,W] and two-class {1,W}")
      ->check(CLI::Range(1.0, 1e12));
  gen->add_option("--seed", g_seed, "random seed");
  gen->add_option("--out", g_out, "output path (default stdout)");

  // build
  auto* build = app.add_subcommand("build", "build a diagram from a sites file");
  std::string b_sites, b_out, b_stats, b_mode = "reduced", b_covers;
  double b_eps = 0.25;
  int b_bits = 48;
  std::string b_fault;
  bool b_no_timing = false;
  build->add_option("--sites", b_sites, "sites file")->required();
  build->add_option("--eps", b_eps, "target approximation, in (0,1)");
  build->add_option("--mode", b_mode, "full | reduced")->check(CLI::IsMember({"full", "reduced"}));
  build->add_option("--frac-bits", b_bits, "fixed-point bits below the root")->check(CLI::Range(1, 60));
  build->add_option("--out", b_out, "diagram dump path (default stdout)");
  build->add_option("--stats", b_stats, "stats JSON path (default stderr)");
  build->add_option("--covers", b_covers, "write the cover sets A_i here");
  build->add_flag("--no-timing", b_no_timing, "omit wall time from the stats");
  build->add_option("--fault", b_fault, "fault injection: skip-dedup")
      ->check(CLI::IsMember({"skip-dedup"}));

  // query
  auto* qry = app.add_subcommand("query", "answer weighted nearest-neighbor queries");
  std::string q_diagram, q_points;
  int q_random = 0;
  std::uint64_t q_seed = 1;
  bool q_check = false;
  qry->add_option("--diagram", q_diagram, "diagram dump")->required();
  auto* q_points_opt = qry->add_option("--points", q_points, "points file, d numbers per line");
  auto* q_random_opt = qry->add_option("--random", q_random, "random queries in the 1.5x bounding box")
                           ->check(CLI::PositiveNumber);
  q_points_opt->excludes(q_random_opt);
  qry->add_option("--seed", q_seed, "seed for --random");
  qry->add_flag("--check", q_check, "compare against the exact oracle");

  // render
  auto* render = app.add_subcommand("render", "draw a d=2 diagram as SVG");
  std::string r_diagram, r_out;
  render->add_option("--diagram", r_diagram, "diagram dump")->required();
  render->add_option("--out", r_out, "SVG path (default stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "run invariant suites");
  std::string v_sites, v_suite = "all", v_mode = "reduced", v_fault;
  double v_eps = 0.25;
  int v_bits = 48, v_queries = 10000, v_dirs = 200;
  std::uint64_t v_seed = 1;
  val->add_option("--sites", v_sites, "sites file")->required();
  val->add_option("--eps", v_eps, "target approximation, in (0,1)");
  val->add_option("--suite", v_suite, "refine | sspd | cover | e2e | all")
      ->check(CLI::IsMember({"refine", "sspd", "cover", "e2e", "all"}));
  val->add_option("--mode", v_mode, "full | reduced")->check(CLI::IsMember({"full", "reduced"}));
  val->add_option("--frac-bits", v_bits, "fixed-point bits")->check(CLI::Range(1, 60));
  val->add_option("--queries", v_queries, "e2e uniform queries")->check(CLI::PositiveNumber);
  val->add_option("--directions", v_dirs, "cover rays per site")->check(CLI::PositiveNumber);
  val->add_option("--seed", v_seed, "seed");
  val->add_option("--fault", v_fault, "fault injection: skip-dedup")->check(CLI::IsMember({"skip-dedup"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      const Instance inst = gen_instance(g_n, g_d, parse_weight_law(g_law), g_seed, g_wmax);
      emit(g_out, format_sites(inst.coords, inst.weights));
      return 0;
    }
    if (*build) {
      const SiteSet sites = load_sites(b_sites);
      BuildOptions opt;
      opt.mode = parse_cover_mode(b_mode);
      opt.frac_bits = b_bits;
      opt.threads = threads;
      if (b_fault == "skip-dedup") opt.duplicates = DuplicatePolicy::KeepMaxLabel;
      const Diagram d = build_diagram(sites, b_eps, opt);
      emit(b_out, dump_diagram(d));
      const std::string stats = stats_json(d, !b_no_timing);
      if (b_stats.empty())
        std::cerr << stats;
      else
        write_file(b_stats, stats);
      if (!b_covers.empty()) {
        const auto covers = opt.mode == CoverMode::Full ? full_covers(sites)
                                                        : build_covers(sites, derive_params(b_eps));
        write_file(b_covers, format_covers(covers));
      }
      return 0;
    }
    if (*qry) {
      const Diagram d = load_diagram(read_file(q_diagram));
      std::vector<Point> pts;
      if (!q_points.empty())
        pts = parse_points(read_file(q_points), d.sites.dim());
      else if (q_random > 0)
        pts = uniform_queries(d.sites, q_random, q_seed);
      else
        pts = parse_points(std::string(std::istreambuf_iterator<char>(std::cin), {}), d.sites.dim());
      const bool summary_only = q_random > 0 && q_check;
      for (const Point& p : pts) {
        if (summary_only) break;
        const QueryResult r = query(d, p);
        std::printf("%d %.17g", r.site, r.distance);
        if (q_check) {
          const Nearest e = brute_nn(d.sites, p);
          const double ratio = e.distance > 0.0 ? r.distance / e.distance : 1.0;
          std::printf(" %d %.17g %.17g", e.site, e.distance, ratio);
        }
        std::printf("\n");
      }
      if (q_check) std::cout << format_report(ratio_check(d, pts));
      return 0;
    }
    if (*render) {
      const Diagram d = load_diagram(read_file(r_diagram));
      if (d.sites.dim() != 2) {
        std::cerr << "render: only d = 2 diagrams can be drawn (got d = " << d.sites.dim() << ")\n";
        return kExitRender;
      }
      emit(r_out, render_svg(d));
      return 0;
    }
    if (*val) {
      const SiteSet sites = load_sites(v_sites);
      const ApproxParams params = derive_params(v_eps);
      const CoverMode mode = parse_cover_mode(v_mode);
      Suite s;
      const bool all = v_suite == "all";
      if (all || v_suite == "sspd") suite_sspd(sites, params, s);
      if (all || v_suite == "refine") suite_refine(sites, params, mode, v_bits, v_seed, s);
      if (all || v_suite == "cover") suite_cover(sites, params, v_dirs, v_seed, s);
      if (all || v_suite == "e2e")
        suite_e2e(sites, v_eps, mode, v_bits, threads,
                  v_fault == "skip-dedup" ? DuplicatePolicy::KeepMaxLabel : DuplicatePolicy::KeepMinLabel,
                  v_queries, v_seed, s);
      return s.failed ? kExitViolation : 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::RefinementDepthExceeded) {
      std::cerr << "hint: increase --frac-bits (max 60) or raise --eps\n";
      return kExitDepth;
    }
    return kExitUsage;
  }
  return 0;
}
