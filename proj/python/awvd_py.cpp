#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "awvd/cover.hpp"
#include "awvd/diagram.hpp"
#include "awvd/io.hpp"
#include "awvd/oracle_bench.hpp"

namespace py = pybind11;
using namespace awvd;

namespace {

Point to_point(const std::vector<double>& xs) {
  if (xs.size() < 2 || xs.size() > static_cast<std::size_t>(kMaxDim))
    throw py::value_error("points need 2 to 4 coordinates");
  return Point(std::span<const double>(xs));
}

SiteSet to_sites(const std::vector<std::vector<double>>& coords, const std::vector<double>& weights) {
  std::vector<Point> pts;
  pts.reserve(coords.size());
  for (const auto& c : coords) pts.push_back(to_point(c));
  return SiteSet::from_unsorted(pts, weights);
}

std::vector<double> from_point(const Point& p) { return {p.coords().begin(), p.coords().end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Approximate multiplicatively weighted Voronoi diagrams";

  py::register_exception<Error>(m, "AwvdError", PyExc_ValueError);

  m.def("derive_params", [](double eps) {
    const ApproxParams p = derive_params(eps);
    py::dict d;
    d["eps"] = p.eps;
    d["eps_A"] = p.eps_A;
    d["eps_S"] = p.eps_S;
    d["eps_C"] = p.eps_C;
    d["eps_T"] = p.eps_T;
    d["eps_R"] = p.eps_R;
    d["beta"] = p.beta;
    d["sigma"] = p.sigma;
    return d;
  }, py::arg("eps"));

  m.def("make_ball", [](const std::vector<double>& si, const std::vector<double>& sj, double gamma) {
    const EffectiveBall b = make_ball(Site{to_point(si), 1.0, 1}, Site{to_point(sj), 1.0, 2}, gamma);
    py::dict d;
    d["center"] = from_point(b.center);
    d["radius"] = b.radius;
    d["t_star"] = b.t_star;
    d["t_dagger"] = b.t_dagger;
    return d;
  }, py::arg("s_i"), py::arg("s_j"), py::arg("gamma"));

  m.def("generate", [](int n, int d, const std::string& weights, std::uint64_t seed, double max_weight) {
    const Instance inst = gen_instance(n, d, parse_weight_law(weights), seed, max_weight);
    std::vector<std::vector<double>> coords;
    for (const Point& p : inst.coords) coords.push_back(from_point(p));
    return py::make_tuple(coords, inst.weights);
  }, py::arg("n"), py::arg("d") = 2, py::arg("weights") = "uniform", py::arg("seed") = 1,
     py::arg("max_weight") = 4.0);

  m.def("brute_nn", [](const std::vector<std::vector<double>>& coords,
                       const std::vector<double>& weights, const std::vector<double>& p) {
    const SiteSet sites = to_sites(coords, weights);
    const Nearest nn = brute_nn(sites, to_point(p));
    return py::make_tuple(sites.original_position(nn.site), nn.distance);
  }, py::arg("coords"), py::arg("weights"), py::arg("point"),
     "Exact nearest site as (input position, weighted distance).");

  m.def("validate_sspd", [](const std::vector<std::vector<double>>& coords, double sigma) {
    const SiteSet sites = to_sites(coords, std::vector<double>(coords.size(), 1.0));
    const PairDecomposition pd = build_sspd(sites, sigma);
    const SspdReport r = validate_sspd(pd, sites, sigma);
    py::dict d;
    d["pairs"] = pd.pairs.size();
    d["weight"] = pd.weight();
    d["uncovered"] = r.uncovered;
    d["separation_violations"] = r.separation_violations;
    return d;
  }, py::arg("coords"), py::arg("sigma"));

  py::class_<Diagram>(m, "Diagram")
      .def(py::init([](const std::vector<std::vector<double>>& coords, const std::vector<double>& weights,
                       double eps, const std::string& mode, int frac_bits, int threads) {
             BuildOptions opt;
             opt.mode = parse_cover_mode(mode);
             opt.frac_bits = frac_bits;
             opt.threads = threads;
             py::gil_scoped_release release;
             return build_diagram(to_sites(coords, weights), eps, opt);
           }),
           py::arg("coords"), py::arg("weights"), py::arg("eps") = 0.25, py::arg("mode") = "reduced",
           py::arg("frac_bits") = 48, py::arg("threads") = 0)
      .def_static("load", [](const std::string& text) { return load_diagram(text); },
                  "Positions reported by a loaded diagram follow the dump, which is sorted by weight.")
      .def_property_readonly("n", [](const Diagram& d) { return d.sites.size(); })
      .def_property_readonly("dim", [](const Diagram& d) { return d.sites.dim(); })
      .def_property_readonly("cells", [](const Diagram& d) { return d.tree.size(); })
      .def_property_readonly("eps", [](const Diagram& d) { return d.params.eps; })
      .def("query", [](const Diagram& d, const std::vector<double>& p) {
        const QueryResult r = query(d, to_point(p));
        return py::make_tuple(d.sites.original_position(r.site), r.distance);
      }, py::arg("point"), "Approximate nearest site as (input position, weighted distance).")
      .def("query_rank", [](const Diagram& d, const std::vector<double>& p) {
        return query(d, to_point(p)).site;
      }, py::arg("point"), "Label as a 1-based weight rank.")
      .def("ratio_check", [](const Diagram& d, int m, std::uint64_t seed) {
        const auto pts = uniform_queries(d.sites, m, seed);
        const RatioReport r = ratio_check(d, pts);
        py::dict out;
        out["queries"] = r.queries;
        out["max_ratio"] = r.max_ratio;
        out["mean_ratio"] = r.mean_ratio;
        out["max_comparisons"] = r.max_comparisons;
        return out;
      }, py::arg("m") = 1000, py::arg("seed") = 1)
      .def("stats", [](const Diagram& d, bool timing) { return stats_json(d, timing); },
           py::arg("timing") = false)
      .def("dump", &dump_diagram)
      .def("svg", &render_svg);
}
