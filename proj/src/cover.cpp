#include "awvd/cover.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace awvd {

long long PairDecomposition::weight() const noexcept {
  long long w = 0;
  for (const SitePair& p : pairs) w += static_cast<long long>(p.x.size() + p.y.size());
  return w;
}

namespace {

constexpr std::size_t kExactDiameterLimit = 1024;

double diagonal(const Box& b) { return dist(b.lo, b.hi); }

double box_gap(const Box& a, const Box& b) {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) {
    const double g = std::max({0.0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
    s += g * g;
  }
  return std::sqrt(s);
}

double exact_diameter(const SiteSet& sites, std::span<const int> ids) {
  double best = 0.0;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      best = std::max(best, dist2(sites[ids[a]].coords, sites[ids[b]].coords));
  return std::sqrt(best);
}

struct SplitNode {
  int begin = 0;
  int end = 0;
  Box box;
  double diag = 0.0;
  double diam = 0.0;
  int max_index = 0;
  int left = -1;
  int right = -1;
};

struct SplitTree {
  const SiteSet& sites;
  std::vector<int> order;
  std::vector<SplitNode> nodes;

  int build(int begin, int end) {
    SplitNode n;
    n.begin = begin;
    n.end = end;
    n.box = Box{sites[order[begin]].coords, sites[order[begin]].coords};
    for (int t = begin; t < end; ++t) {
      const Point& p = sites[order[t]].coords;
      for (int k = 0; k < sites.dim(); ++k) {
        n.box.lo[k] = std::min(n.box.lo[k], p[k]);
        n.box.hi[k] = std::max(n.box.hi[k], p[k]);
      }
      n.max_index = std::max(n.max_index, order[t]);
    }
    n.diag = diagonal(n.box);
    const std::span<const int> ids(order.data() + begin, static_cast<std::size_t>(end - begin));
    n.diam = ids.size() <= kExactDiameterLimit ? exact_diameter(sites, ids) : n.diag;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(n);
    if (end - begin == 1) return id;
    if (n.diag == 0.0) throw Error(ErrorCode::DegenerateSites, "coincident sites");

    int axis = 0;
    for (int k = 1; k < sites.dim(); ++k)
      if (n.box.hi[k] - n.box.lo[k] > n.box.hi[axis] - n.box.lo[axis]) axis = k;
    const double mid = 0.5 * (n.box.lo[axis] + n.box.hi[axis]);
    auto it = std::partition(order.begin() + begin, order.begin() + end,
                             [&](int s) { return sites[s].coords[axis] < mid; });
    int split = static_cast<int>(it - order.begin());
    if (split == begin || split == end) split = begin + (end - begin) / 2;
    const int l = build(begin, split);
    const int r = build(split, end);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }

  SitePair make_pair(int u, int v) const {
    SitePair p;
    p.x.assign(order.begin() + nodes[u].begin, order.begin() + nodes[u].end);
    p.y.assign(order.begin() + nodes[v].begin, order.begin() + nodes[v].end);
    std::sort(p.x.begin(), p.x.end());
    std::sort(p.y.begin(), p.y.end());
    p.diam_x = nodes[u].diam;
    p.diam_y = nodes[v].diam;
    p.max_x = nodes[u].max_index;
    p.max_y = nodes[v].max_index;
    return p;
  }

  void find_pairs(int u, int v, double sigma, std::vector<SitePair>& out) const {
    const SplitNode& a = nodes[u];
    const SplitNode& b = nodes[v];
    if (std::min(a.diag, b.diag) * sigma <= box_gap(a.box, b.box)) {
      out.push_back(make_pair(u, v));
      return;
    }
    if (a.left >= 0 && (a.diag >= b.diag || b.left < 0)) {
      find_pairs(a.left, v, sigma, out);
      find_pairs(a.right, v, sigma, out);
    } else {
      find_pairs(u, b.left, sigma, out);
      find_pairs(u, b.right, sigma, out);
    }
  }
};

}  // namespace

PairDecomposition build_sspd(const SiteSet& sites, double sigma) {
  if (sites.size() < 2) throw Error(ErrorCode::OutOfRange, "pair decomposition needs n >= 2");
  if (!(sigma > 1.0)) throw Error(ErrorCode::OutOfRange, "sigma must exceed 1");
  SplitTree tree{sites, {}, {}};
  tree.order.resize(sites.size());
  for (int s = 1; s <= sites.size(); ++s) tree.order[s - 1] = s;
  tree.nodes.reserve(2 * sites.size());
  tree.build(0, sites.size());

  PairDecomposition pd;
  pd.sigma = sigma;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const SplitNode& n = tree.nodes[id];
    if (n.left >= 0) tree.find_pairs(n.left, n.right, sigma, pd.pairs);
  }
  return pd;
}

PairDecomposition brute_sspd(const SiteSet& sites, double sigma) {
  PairDecomposition pd;
  pd.sigma = sigma;
  for (int a = 1; a <= sites.size(); ++a) {
    for (int b = a + 1; b <= sites.size(); ++b) {
      if (sites[a].coords == sites[b].coords)
        throw Error(ErrorCode::DegenerateSites, "coincident sites");
      pd.pairs.push_back(SitePair{{a}, {b}, 0.0, 0.0, a, b});
    }
  }
  return pd;
}

SspdReport validate_sspd(const PairDecomposition& pd, const SiteSet& sites, double sigma) {
  SspdReport report;
  const int n = sites.size();
  std::vector<unsigned char> covered(static_cast<std::size_t>(n) * n, 0);
  for (std::size_t p = 0; p < pd.pairs.size(); ++p) {
    const SitePair& sp = pd.pairs[p];
    double gap2 = std::numeric_limits<double>::infinity();
    for (int a : sp.x) {
      for (int b : sp.y) {
        covered[static_cast<std::size_t>(a - 1) * n + (b - 1)] = 1;
        covered[static_cast<std::size_t>(b - 1) * n + (a - 1)] = 1;
        gap2 = std::min(gap2, dist2(sites[a].coords, sites[b].coords));
      }
    }
    const double small = std::min(exact_diameter(sites, sp.x), exact_diameter(sites, sp.y));
    if (small * sigma > std::sqrt(gap2)) {
      ++report.separation_violations;
      if (report.messages.size() < 8) {
        std::ostringstream os;
        os << "pair " << p << ": min diameter " << small << " * sigma " << sigma << " > gap "
           << std::sqrt(gap2);
        report.messages.push_back(os.str());
      }
    }
  }
  for (int a = 1; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) {
      if (covered[static_cast<std::size_t>(a - 1) * n + (b - 1)]) continue;
      ++report.uncovered;
      if (report.messages.size() < 8)
        report.messages.push_back("sites " + std::to_string(a) + " and " + std::to_string(b) +
                                  " share no pair");
    }
  }
  return report;
}

ConeGrid::ConeGrid(int dim, double beta) : dim_(dim), beta_(beta), width_(beta / (dim - 1)) {
  if (dim < 2 || dim > kMaxDim) throw Error(ErrorCode::OutOfRange, "dimension must be in [2, 4]");
  if (!(beta > 0.0)) throw Error(ErrorCode::OutOfRange, "beta must be positive");
  for (int k = 0; k + 1 < dim - 1; ++k)
    counts_.push_back(static_cast<int>(std::ceil(std::numbers::pi / width_)));
  counts_.push_back(static_cast<int>(std::ceil(2.0 * std::numbers::pi / width_)));
}

std::int64_t ConeGrid::cone_count() const noexcept {
  std::int64_t c = 1;
  for (int n : counts_) c *= n;
  return c;
}

std::vector<int> ConeGrid::coordinates(const Point& apex, const Point& target) const {
  const Point v = target - apex;
  if (norm2(v) == 0.0) throw Error(ErrorCode::CoincidentPoints, "cone of a point about itself");
  std::vector<int> idx(dim_ - 1);
  // Polar angles theta_k = acos(v_k / |v_k..v_{d-1}|), then the azimuth of the last two.
  double tail2 = norm2(v);
  for (int k = 0; k + 2 < dim_; ++k) {
    const double tail = std::sqrt(tail2);
    const double theta = tail == 0.0 ? 0.0 : std::acos(std::clamp(v[k] / tail, -1.0, 1.0));
    idx[k] = std::min(static_cast<int>(theta / width_), counts_[k] - 1);
    tail2 -= v[k] * v[k];
    tail2 = std::max(tail2, 0.0);
  }
  double phi = std::atan2(v[dim_ - 1], v[dim_ - 2]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  idx[dim_ - 2] = std::min(static_cast<int>(phi / width_), counts_[dim_ - 2] - 1);
  return idx;
}

std::int64_t ConeGrid::cone_index(const Point& apex, const Point& target) const {
  const std::vector<int> idx = coordinates(apex, target);
  std::int64_t id = 0;
  for (int k = 0; k < dim_ - 1; ++k) id = id * counts_[k] + idx[k];
  return id;
}

EffectiveBall partner_ball(const SiteSet& sites, int i, int j, double eps_S) {
  return make_ball(sites[i], sites[j], effective_weight(sites[i].weight, sites[j].weight, eps_S));
}

namespace {

// Interval slot of t within [a, b] split into pieces of length h; -1 if t > b.
long long interval_slot(double t, double a, double b, double h) {
  if (t > b) return -1;
  if (t <= a) return 0;
  return std::max(0LL, static_cast<long long>(std::ceil((t - a) / h)) - 1);
}

struct Champion {
  double diameter = 0.0;
  int site = 0;
};

void offer(std::map<long long, Champion>& slots, long long k, double diameter, int site) {
  auto [it, fresh] = slots.try_emplace(k, Champion{diameter, site});
  if (fresh) return;
  Champion& c = it->second;
  if (diameter < c.diameter || (diameter == c.diameter && site < c.site)) c = {diameter, site};
}

}  // namespace

std::vector<int> scan_cone_entries(std::span<const ScanEntry> entries, double eps_C) {
  if (entries.empty()) return {};
  double a = entries.front().t_star;
  double b = entries.front().t_dagger;
  for (const ScanEntry& e : entries) {
    a = std::min(a, e.t_star);
    b = std::min(b, e.t_dagger);
  }
  const double h = a * eps_C / 2.0;
  std::map<long long, Champion> slots;
  for (const ScanEntry& e : entries) {
    const long long k = interval_slot(e.t_star, a, b, h);
    if (k >= 0) offer(slots, k, e.t_star + e.t_dagger, e.site);
  }
  std::vector<int> out;
  out.reserve(slots.size());
  for (const auto& [k, c] : slots) out.push_back(c.site);
  return out;
}

std::vector<int> scan_cone_sites(const SiteSet& sites, int i, std::span<const int> partners,
                                 double eps_S, double eps_C) {
  std::vector<ScanEntry> entries;
  entries.reserve(partners.size());
  for (int j : partners) {
    const EffectiveBall b = partner_ball(sites, i, j, eps_S);
    entries.push_back({j, b.t_star, b.t_dagger});
  }
  return scan_cone_entries(entries, eps_C);
}

std::vector<CoverSet> full_covers(const SiteSet& sites) {
  std::vector<CoverSet> covers(sites.size());
  for (int i = 1; i <= sites.size(); ++i) {
    covers[i - 1].site = i;
    for (int j = i + 1; j <= sites.size(); ++j) covers[i - 1].partners.push_back(j);
  }
  return covers;
}

std::vector<CoverSet> build_covers(const SiteSet& sites, const ApproxParams& params,
                                   CoverStats* stats) {
  if (sites.size() < 2) return full_covers(sites);
  return build_covers(sites, params, build_sspd(sites, params.sigma), stats);
}

std::vector<CoverSet> build_covers(const SiteSet& sites, const ApproxParams& params,
                                   const PairDecomposition& pd, CoverStats* stats) {
  const int n = sites.size();
  if (n < 2) return full_covers(sites);
  const ConeGrid cones(sites.dim(), params.beta);

  // Pass 1: reduced heavy sets H' plus the two representatives.
  std::vector<std::vector<int>> candidates(pd.pairs.size());
  std::vector<std::pair<const std::vector<int>*, const std::vector<int>*>> sides(pd.pairs.size());
  for (std::size_t p = 0; p < pd.pairs.size(); ++p) {
    const SitePair& sp = pd.pairs[p];
    const bool x_light = sp.max_x < sp.max_y;
    const std::vector<int>& light = x_light ? sp.x : sp.y;
    const std::vector<int>& heavy = x_light ? sp.y : sp.x;
    const double diam_l = x_light ? sp.diam_x : sp.diam_y;
    const double diam_h = x_light ? sp.diam_y : sp.diam_x;
    const int l = x_light ? sp.max_x : sp.max_y;
    const int h = x_light ? sp.max_y : sp.max_x;
    sides[p] = {&light, &heavy};

    std::vector<int>& cand = candidates[p];
    if (diam_h <= diam_l) {
      cand.push_back(h);
    } else {
      std::map<std::int64_t, std::vector<ScanEntry>> by_cone;
      for (int s : heavy) {
        const EffectiveBall b = partner_ball(sites, l, s, params.eps_S);
        by_cone[cones.cone_index(sites[l].coords, sites[s].coords)].push_back(
            {s, b.t_star, b.t_dagger});
      }
      for (const auto& [cone, entries] : by_cone) {
        const std::vector<int> kept = scan_cone_entries(entries, params.eps_C);
        cand.insert(cand.end(), kept.begin(), kept.end());
      }
    }
    cand.push_back(l);
    cand.push_back(h);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  }

  struct ConeTable {
    double a = std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();
    std::map<long long, Champion> slots;
  };
  std::vector<std::unordered_map<std::int64_t, ConeTable>> tables(n + 1);

  auto for_each_member = [&](std::size_t p, auto&& fn) {
    for (int i : *sides[p].first) fn(i);
    for (int i : *sides[p].second) fn(i);
  };

  // Pass 2: interval bounds [a, b] per (site, cone).
  for (std::size_t p = 0; p < pd.pairs.size(); ++p) {
    for_each_member(p, [&](int i) {
      for (int m : candidates[p]) {
        if (m <= i) continue;
        const EffectiveBall b = make_ball(sites[i], sites[m], effective_weight(sites, i, m, params.eps_S));
        ConeTable& t = tables[i][cones.cone_index(sites[i].coords, sites[m].coords)];
        t.a = std::min(t.a, b.t_star);
        t.b = std::min(t.b, b.t_dagger);
      }
    });
  }

  // Pass 3: minimum-diameter champion per interval.
  for (std::size_t p = 0; p < pd.pairs.size(); ++p) {
    for_each_member(p, [&](int i) {
      for (int m : candidates[p]) {
        if (m <= i) continue;
        const EffectiveBall b = make_ball(sites[i], sites[m], effective_weight(sites, i, m, params.eps_S));
        ConeTable& t = tables[i][cones.cone_index(sites[i].coords, sites[m].coords)];
        const long long k = interval_slot(b.t_star, t.a, t.b, t.a * params.eps_C / 2.0);
        if (k >= 0) offer(t.slots, k, b.t_star + b.t_dagger, m);
      }
    });
  }

  std::vector<CoverSet> covers(n);
  long long cones_used = 0;
  std::size_t max_cover = 0;
  for (int i = 1; i <= n; ++i) {
    CoverSet& c = covers[i - 1];
    c.site = i;
    cones_used += static_cast<long long>(tables[i].size());
    for (const auto& [cone, t] : tables[i])
      for (const auto& [k, champ] : t.slots) c.partners.push_back(champ.site);
    std::sort(c.partners.begin(), c.partners.end());
    c.partners.erase(std::unique(c.partners.begin(), c.partners.end()), c.partners.end());
    max_cover = std::max(max_cover, c.partners.size());
  }
  if (stats) {
    stats->sspd_pairs = static_cast<long long>(pd.pairs.size());
    stats->sspd_weight = pd.weight();
    stats->cones_used = cones_used;
    stats->max_cover = max_cover;
  }
  return covers;
}

CoverReport cover_spotcheck(const SiteSet& sites, int i, std::span<const int> cover,
                            std::span<const int> full, double alpha, double eps_S, int samples,
                            std::uint64_t seed) {
  if (!(alpha >= 1.0)) throw Error(ErrorCode::OutOfRange, "alpha must be at least 1");
  CoverReport report;
  const Site& si = sites[i];
  std::vector<EffectiveBall> cover_balls;
  for (int j : cover)
    cover_balls.push_back(make_ball(si, sites[j], effective_weight(sites, i, j, eps_S)));
  std::vector<EffectiveBall> alpha_balls;
  for (int k : full) {
    const double g = effective_weight(sites, i, k, eps_S) / alpha;
    if (!(g > 1.0)) {
      report.degenerate.push_back(k);
      continue;
    }
    alpha_balls.push_back(make_ball(si, sites[k], g));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    Point u(sites.dim());
    double len2 = 0.0;
    while (len2 == 0.0) {
      for (int k = 0; k < sites.dim(); ++k) u[k] = normal(rng);
      len2 = norm2(u);
    }
    u = u / std::sqrt(len2);
    // Exit distance along s_i + t u from each ball (s_i is interior to all of them).
    double t_exit = std::numeric_limits<double>::infinity();
    for (const EffectiveBall& b : cover_balls) {
      const Point w = si.coords - b.center;
      const double bq = dot(w, u);
      const double c = norm2(w) - b.radius * b.radius;
      t_exit = std::min(t_exit, -bq + std::sqrt(bq * bq - c));
    }
    ++report.samples;
    for (std::size_t a = 0; a < alpha_balls.size(); ++a) {
      const EffectiveBall& b = alpha_balls[a];
      bool inside = std::isfinite(t_exit);
      if (inside) inside = b.contains(si.coords + u * t_exit, 1e-9);
      if (!inside) {
        ++report.violations;
        if (report.examples.size() < 8) report.examples.push_back({u, b.j});
      }
    }
  }
  return report;
}

std::string format_covers(std::span<const CoverSet> covers) {
  std::ostringstream os;
  for (const CoverSet& c : covers) {
    os << c.site << ':';
    for (int j : c.partners) os << ' ' << j;
    os << '\n';
  }
  return os.str();
}

}  // namespace awvd
