#include "awvd/diagram.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace awvd {

std::string_view to_string(CoverMode mode) noexcept {
  return mode == CoverMode::Full ? "full" : "reduced";
}

CoverMode parse_cover_mode(std::string_view text) {
  if (text == "full") return CoverMode::Full;
  if (text == "reduced") return CoverMode::Reduced;
  throw Error(ErrorCode::Parse, "unknown cover mode '" + std::string(text) + "'");
}

long Diagram::total_cubes() const noexcept {
  long s = 0;
  for (const CoreStats& c : cores) s += c.cubes;
  return s;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("AWVD_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void reject_coincident(const SiteSet& sites) {
  std::vector<int> ids(sites.size());
  for (int s = 1; s <= sites.size(); ++s) ids[s - 1] = s;
  auto key = [&](int s) { return sites[s].coords.coords(); };
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const auto ka = key(a), kb = key(b);
    return std::lexicographical_compare(ka.begin(), ka.end(), kb.begin(), kb.end());
  });
  for (std::size_t t = 1; t < ids.size(); ++t)
    if (sites[ids[t]].coords == sites[ids[t - 1]].coords)
      throw Error(ErrorCode::DegenerateSites, "sites " + std::to_string(ids[t - 1]) + " and " +
                                                  std::to_string(ids[t]) + " coincide");
}

// Runs job(k) for k in [0, count) on `threads` workers. The exception of the
// lowest failing k is rethrown, so failures do not depend on scheduling.
template <class Job>
void parallel_for(int count, int threads, Job&& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n = std::min(threads, count);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

Diagram build_diagram(const SiteSet& sites, double eps, const BuildOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const ApproxParams params = derive_params(eps);
  reject_coincident(sites);
  CoverStats cstats;
  std::vector<CoverSet> covers = options.mode == CoverMode::Full || sites.size() < 2
                                     ? full_covers(sites)
                                     : build_covers(sites, params, &cstats);
  Diagram d = build_diagram(sites, covers, params, options);
  d.cover_stats = cstats;
  d.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

Diagram build_diagram(const SiteSet& sites, std::span<const CoverSet> covers,
                      const ApproxParams& params, const BuildOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  reject_coincident(sites);
  const int n = sites.size();
  Diagram d;
  d.sites = sites;
  d.params = params;
  d.mode = options.mode;
  d.grid = GridConfig::for_sites(sites, options.frac_bits);

  std::vector<RefinementOutput> outs(n > 0 ? n - 1 : 0);
  parallel_for(static_cast<int>(outs.size()), resolve_threads(options.threads), [&](int k) {
    const int i = k + 1;
    const CoreRegion core = make_core(sites, i, covers[k].partners, params.eps_S);
    outs[k] = refine_core(core, params.eps_A, d.grid);
  });

  std::vector<LabeledCube> cubes;
  for (const RefinementOutput& o : outs) {
    d.cores.push_back(CoreStats{o.apex, static_cast<int>(covers[o.apex - 1].partners.size()),
                                static_cast<long>(o.cubes.size()), o.type_one_splits,
                                o.type_two_splits});
    for (const CanonicalCube& c : o.cubes) cubes.push_back({c, o.apex});
  }
  cubes.push_back({d.grid.root_cube(), n});
  d.tree = build_compressed_tree(std::move(cubes), sites.dim(), d.grid.frac_bits, options.duplicates);
  d.tree.propagate(n);
  if (options.keep_refinements) d.refinements = std::move(outs);
  d.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return d;
}

QueryResult query(const Diagram& diagram, const Point& p) {
  const auto loc = diagram.tree.locate(diagram.grid.to_fixed_clamped(p));
  QueryResult r;
  r.site = loc.label;
  r.node = loc.node;
  r.comparisons = loc.comparisons;
  r.distance = weighted_distance(p, diagram.sites[loc.label]);
  return r;
}

std::string stats_json(const Diagram& diagram, bool with_timing) {
  nlohmann::ordered_json j;
  j["n"] = diagram.sites.size();
  j["d"] = diagram.sites.dim();
  j["mode"] = std::string(to_string(diagram.mode));
  j["frac_bits"] = diagram.grid.frac_bits;
  const ApproxParams& p = diagram.params;
  j["eps"] = p.eps;
  j["eps_A"] = p.eps_A;
  j["eps_S"] = p.eps_S;
  j["eps_C"] = p.eps_C;
  j["eps_T"] = p.eps_T;
  j["eps_R"] = p.eps_R;
  j["beta"] = p.beta;
  j["sigma"] = p.sigma;

  long max_cubes = 0;
  long type_one = 0, type_two = 0;
  std::map<long, long> histogram;  // bucket lower bound (power of two) -> cores
  std::size_t max_balls = 0;
  for (const CoreStats& c : diagram.cores) {
    max_cubes = std::max(max_cubes, c.cubes);
    type_one += c.type_one_splits;
    type_two += c.type_two_splits;
    max_balls = std::max(max_balls, static_cast<std::size_t>(c.balls));
    long bucket = 1;
    while (bucket * 2 <= c.cubes) bucket *= 2;
    ++histogram[c.cubes == 0 ? 0 : bucket];
  }
  j["sum_L"] = diagram.total_cubes();
  j["max_L"] = max_cubes;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [bucket, count] : histogram) hist[std::to_string(bucket)] = count;
  j["L_histogram"] = hist;
  j["cells"] = diagram.tree.size();
  j["depth"] = diagram.tree.depth();
  j["intervals"] = diagram.tree.interval_count();
  j["type_one_splits"] = type_one;
  j["type_two_splits"] = type_two;
  j["max_cover"] = max_balls;
  if (diagram.mode == CoverMode::Reduced) {
    j["sspd_pairs"] = diagram.cover_stats.sspd_pairs;
    j["sspd_weight"] = diagram.cover_stats.sspd_weight;
  }
  if (with_timing) j["build_seconds"] = diagram.build_seconds;
  return j.dump(2) + "\n";
}

namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_real(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw Error(ErrorCode::Parse, "bad number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size())
    throw Error(ErrorCode::Parse, "bad integer '" + tok + "'");
  return v;
}

std::string after_prefix(const std::string& tok, const std::string& prefix) {
  if (tok.rfind(prefix, 0) != 0) throw Error(ErrorCode::Parse, "expected '" + prefix + "'");
  return tok.substr(prefix.size());
}

}  // namespace

std::string dump_diagram(const Diagram& diagram) {
  const int d = diagram.sites.dim();
  std::string out;
  out += "AWVD v1 d=" + std::to_string(d) + " B=" + std::to_string(diagram.grid.frac_bits) + " root=";
  for (int k = 0; k < d; ++k) out += fmt_real(diagram.grid.offset[k]) + " ";
  for (int k = 0; k < d; ++k) out += fmt_real(diagram.grid.scale) + (k + 1 < d ? " " : "\n");
  for (const auto& node : diagram.tree.nodes()) {
    out += std::to_string(node.cube.level);
    for (int k = 0; k < d; ++k) out += " " + std::to_string(node.cube.anchor[k]);
    out += " " + std::to_string(node.label) + "\n";
  }
  out += "sites " + std::to_string(diagram.sites.size()) + " eps=" + fmt_real(diagram.params.eps) +
         " mode=" + std::string(to_string(diagram.mode)) + "\n";
  for (const Site& s : diagram.sites.all()) {
    for (int k = 0; k < d; ++k) out += fmt_real(s.coords[k]) + " ";
    out += fmt_real(s.weight) + "\n";
  }
  return out;
}

Diagram load_diagram(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty diagram");
  std::istringstream head(line);
  std::string magic, version, dtok, btok, rtok;
  head >> magic >> version >> dtok >> btok >> rtok;
  if (magic != "AWVD" || version != "v1") throw Error(ErrorCode::Parse, "not an AWVD v1 dump");
  const int d = static_cast<int>(parse_int(after_prefix(dtok, "d=")));
  const int B = static_cast<int>(parse_int(after_prefix(btok, "B=")));
  if (d < 2 || d > kMaxDim || B < 1 || B > kMaxFracBits)
    throw Error(ErrorCode::Parse, "unsupported dimension or frac_bits");
  std::vector<double> root{parse_real(after_prefix(rtok, "root="))};
  for (std::string tok; head >> tok;) root.push_back(parse_real(tok));
  if (static_cast<int>(root.size()) != 2 * d) throw Error(ErrorCode::Parse, "root needs 2d reals");
  for (int k = 1; k < d; ++k)
    if (root[d + k] != root[d]) throw Error(ErrorCode::Parse, "root scales must agree");

  Diagram diag;
  diag.grid.dim = d;
  diag.grid.frac_bits = B;
  diag.grid.offset = Point(d);
  for (int k = 0; k < d; ++k) diag.grid.offset[k] = root[k];
  diag.grid.scale = root[d];

  std::vector<LabeledCube> cubes;
  int n = -1;
  double eps = 0.0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks[0] == "sites") {
      if (toks.size() != 4) throw Error(ErrorCode::Parse, "bad sites line");
      n = static_cast<int>(parse_int(toks[1]));
      eps = parse_real(after_prefix(toks[2], "eps="));
      diag.mode = parse_cover_mode(after_prefix(toks[3], "mode="));
      break;
    }
    if (static_cast<int>(toks.size()) != d + 2) throw Error(ErrorCode::Parse, "bad cell line");
    LabeledCube lc;
    lc.cube.dim = d;
    lc.cube.level = static_cast<int>(parse_int(toks[0]));
    for (int k = 0; k < d; ++k) lc.cube.anchor[k] = static_cast<std::uint64_t>(parse_int(toks[1 + k]));
    lc.label = static_cast<int>(parse_int(toks[d + 1]));
    cubes.push_back(lc);
  }
  if (n < 1) throw Error(ErrorCode::Parse, "missing site block");
  std::vector<Point> coords;
  std::vector<double> weights;
  for (int s = 0; s < n; ++s) {
    if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "truncated site block");
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (static_cast<int>(toks.size()) != d + 1) throw Error(ErrorCode::Parse, "bad site line");
    Point p(d);
    for (int k = 0; k < d; ++k) p[k] = parse_real(toks[k]);
    coords.push_back(p);
    weights.push_back(parse_real(toks[d]));
  }
  for (const LabeledCube& lc : cubes)
    if (lc.label < 1 || lc.label > n) throw Error(ErrorCode::Parse, "label out of range");
  diag.sites = SiteSet::from_unsorted(coords, weights);
  diag.params = derive_params(eps);
  if (cubes.empty()) throw Error(ErrorCode::Parse, "no cells");
  diag.tree = build_compressed_tree(std::move(cubes), d, B);
  return diag;
}

}  // namespace awvd
