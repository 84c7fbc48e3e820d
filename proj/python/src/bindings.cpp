#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hclab/config.hpp"
#include "hclab/error.hpp"
#include "hclab/gff.hpp"
#include "hclab/homogenization.hpp"
#include "hclab/interfaces.hpp"
#include "hclab/io.hpp"
#include "hclab/percolation.hpp"
#include "hclab/runner.hpp"
#include "hclab/solver.hpp"

namespace py = pybind11;
using namespace hclab;

namespace {

using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

Site to_site(const std::vector<int>& v) { return Site::from_span(v); }

SiteSet to_sites(const IntArray& a) {
  if (a.ndim() != 2) throw InvalidArgument("site arrays must have shape (n, d)");
  const auto r = a.unchecked<2>();
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) out.push_back(Site::from_span(std::span<const int>(r.data(i, 0), r.shape(1))));
  return SiteSet(std::move(out));
}

IntArray from_sites(const SiteSet& s) {
  const py::ssize_t n = static_cast<py::ssize_t>(s.size());
  const py::ssize_t d = s.empty() ? 0 : s.dim();
  IntArray out({n, d});
  auto w = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < d; ++j) w(i, j) = s[static_cast<std::size_t>(i)][static_cast<int>(j)];
  return out;
}

Box to_box(const std::vector<int>& lo, const std::vector<int>& hi) { return Box(to_site(lo), to_site(hi)); }

EnvironmentLaw make_law(const std::string& kind, double a, double b, double p) {
  if (kind == "constant") return EnvironmentLaw::constant(a);
  if (kind == "iid_uniform") return EnvironmentLaw::iid_uniform(a, b);
  if (kind == "iid_two_point") return EnvironmentLaw::iid_two_point(a, b, p);
  if (kind == "checkerboard") return EnvironmentLaw::checkerboard(a, b);
  throw InvalidArgument("unknown law '" + kind + "'");
}

py::dict estimate_dict(const Estimate& e) { return py::dict(py::arg("mean") = e.mean, py::arg("se") = e.se, py::arg("count") = e.count); }

TestFunction bump(const std::vector<double>& center, double radius) {
  return TestFunctionSpec::radial_bump(center, radius).callable();
}

}  // namespace

PYBIND11_MODULE(_hclab, m) {
  m.doc() = "Random conductance potential theory, Gaussian free field and level-set percolation";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  py::class_<Conductances, std::shared_ptr<Conductances>>(m, "Environment")
      .def_static(
          "sample",
          [](const std::string& law, double lam, const std::vector<int>& lo, const std::vector<int>& hi,
             std::uint64_t seed, double a, double b, double p) {
            return std::make_shared<Conductances>(Conductances::sample(make_law(law, a, b, p), lam, to_box(lo, hi), seed));
          },
          py::arg("law"), py::arg("lam"), py::arg("lo"), py::arg("hi"), py::arg("seed") = 0, py::arg("a") = 1.0,
          py::arg("b") = 1.0, py::arg("p") = 0.0)
      .def_property_readonly("dim", &Conductances::dim)
      .def_property_readonly("lam", &Conductances::lambda)
      .def_property_readonly("seed", &Conductances::seed)
      .def_property_readonly("window",
                             [](const Conductances& e) {
                               const auto lo = e.window().lo().coords(), hi = e.window().hi().coords();
                               return py::make_tuple(std::vector<int>(lo.begin(), lo.end()),
                                                     std::vector<int>(hi.begin(), hi.end()));
                             })
      .def("weight", [](const Conductances& e, const std::vector<int>& x, const std::vector<int>& y) {
        return e.weight(to_site(x), to_site(y));
      })
      .def("site_weight", [](const Conductances& e, const std::vector<int>& x) { return e.site_weight(to_site(x)); })
      .def("shift", [](const Conductances& e, const std::vector<int>& x) {
        return std::make_shared<Conductances>(e.shift(to_site(x)));
      })
      .def("edge_count", &Conductances::edge_count)
      .def("to_bytes", [](const Conductances& e) { return py::bytes(encode_environment(e)); })
      .def_static("from_bytes", [](const py::bytes& b) {
        return std::make_shared<Conductances>(decode_environment(std::string(b)));
      });

  m.def("box_sites", [](const std::vector<int>& lo, const std::vector<int>& hi) { return from_sites(SiteSet(to_box(lo, hi))); },
        "All sites of the box lo <= x <= hi in lexicographic order.");

  m.def(
      "solve_potential",
      [](const std::shared_ptr<Conductances>& env, const IntArray& a, const IntArray& b) {
        const Potential p = solve_potential(env, to_sites(a), to_sites(b));
        return py::dict(py::arg("capacity") = p.capacity, py::arg("h_sites") = from_sites(p.h.domain),
                        py::arg("h") = p.h.values, py::arg("e_sites") = from_sites(p.e.domain), py::arg("e") = p.e.values);
      },
      py::arg("env"), py::arg("A"), py::arg("B"));
  m.def(
      "capacity",
      [](const std::shared_ptr<Conductances>& env, const IntArray& a, const IntArray& b) {
        return capacity(env, to_sites(a), to_sites(b));
      },
      py::arg("env"), py::arg("A"), py::arg("B"));
  m.def(
      "green_matrix",
      [](const std::shared_ptr<Conductances>& env, const IntArray& u) {
        const DirichletOperator op(env, to_sites(u));
        return green_killed_full(op);
      },
      py::arg("env"), py::arg("U"), "g_U over U x U in the lexicographic order of U.");
  m.def(
      "heat_kernel",
      [](const std::shared_ptr<Conductances>& env, const IntArray& u, double t, const std::vector<int>& x, double tol) {
        const DirichletOperator op(env, to_sites(u));
        return heat_kernel_killed(op, t, to_site(x), tol).q;
      },
      py::arg("env"), py::arg("U"), py::arg("t"), py::arg("x"), py::arg("tol") = 1e-12);
  m.def(
      "dirichlet_form",
      [](const std::shared_ptr<Conductances>& env, const IntArray& sites, const Vector& f, const Vector& g) {
        const SiteSet s = to_sites(sites);
        return dirichlet_form(*env, Field(s, f), Field(s, g));
      },
      py::arg("env"), py::arg("sites"), py::arg("f"), py::arg("g"));
  m.def(
      "hitting_frequency",
      [](const std::shared_ptr<Conductances>& env, const std::vector<int>& x, const IntArray& a, const IntArray& b,
         std::size_t replicas, std::uint64_t seed) {
        return estimate_dict(hitting_frequency(*env, to_site(x), to_sites(a), to_sites(b), replicas, seed));
      },
      py::arg("env"), py::arg("x"), py::arg("A"), py::arg("B"), py::arg("replicas"), py::arg("seed"));

  m.def(
      "sample_gff",
      [](const std::shared_ptr<Conductances>& env, const IntArray& u, std::size_t count, std::uint64_t seed,
         std::uint64_t first) {
        const GffSampler s(env, to_sites(u));
        return Matrix(s.sample_matrix(seed, first, count).transpose());
      },
      py::arg("env"), py::arg("U"), py::arg("count"), py::arg("seed"), py::arg("first") = 0,
      "Samples as rows, sites in the lexicographic order of U.");

  m.def(
      "bottleneck_level",
      [](const IntArray& sites, const Vector& values, const IntArray& h, const IntArray& k) {
        return bottleneck_level(Field(to_sites(sites), values), to_sites(h), to_sites(k));
      },
      py::arg("sites"), py::arg("values"), py::arg("H"), py::arg("K"));
  m.def(
      "cluster_labels",
      [](const IntArray& sites, const Vector& values, double alpha) {
        return components(level_set(Field(to_sites(sites), values), alpha)).label;
      },
      py::arg("sites"), py::arg("values"), py::arg("alpha"));
  m.def(
      "crossing_sweep",
      [](const std::shared_ptr<Conductances>& env, const std::vector<double>& alphas, const std::vector<int>& Ls,
         std::size_t replicas, std::uint64_t seed, int pad) {
        const CrossingSweep s = crossing_sweep(env, alphas, Ls, Site(env->dim()), replicas, seed, pad);
        py::list rows;
        for (const auto& r : s.rows)
          rows.append(py::dict(py::arg("alpha") = r.alpha, py::arg("L") = r.L, py::arg("p") = r.p.mean,
                               py::arg("se") = r.p.se));
        return py::make_tuple(rows, s.alpha_star_star);
      },
      py::arg("env"), py::arg("alphas"), py::arg("Ls"), py::arg("replicas"), py::arg("seed"), py::arg("pad") = 1);

  m.def(
      "sigma",
      [](const IntArray& u0, const std::vector<int>& x, int l) {
        return DensityField::complement_of(to_sites(u0)).sigma(to_site(x), l);
      },
      py::arg("U0"), py::arg("x"), py::arg("l"), "Local density of the complement of U0 at scale 2^l.");
  m.def("L_of_J", &L_of_J, py::arg("dim"), py::arg("J"));
  m.def("l_min", &l_min, py::arg("delta"), py::arg("base") = 5);
  m.def(
      "scale_system",
      [](int dim, int I, int J, int L, int l_star) {
        const ScaleSystem s = scale_system(dim, I, J, L, l_star);
        return py::dict(py::arg("l0") = s.l0, py::arg("a") = s.a, py::arg("a_star") = s.a_star,
                        py::arg("l_min") = s.l_min, py::arg("L_of_J") = s.L_of_J, py::arg("L_valid") = s.L_valid,
                        py::arg("compatible") = s.compatible, py::arg("alpha_tilde") = s.alpha_tilde);
      },
      py::arg("dim"), py::arg("I"), py::arg("J"), py::arg("L"), py::arg("l_star"));
  m.def(
      "shell_escape",
      [](const std::shared_ptr<Conductances>& env, const IntArray& a, int offset, double fraction, int epsilon,
         std::uint64_t seed, const IntArray& b) {
        const SiteSet as = to_sites(a), bs = to_sites(b);
        const PorousInterface pi = build_shell_interface(env, as, offset, fraction, epsilon, seed);
        const EscapeResult e = escape_probability(env, as, pi.sigma, bs);
        const CapacityRatioReport c = capacity_ratio_check(env, as, pi.sigma, bs);
        return py::dict(py::arg("sigma") = from_sites(pi.sigma), py::arg("chi") = pi.chi, py::arg("escape") = e.sup,
                        py::arg("cap_sigma") = c.cap_sigma, py::arg("cap_a") = c.cap_a, py::arg("inf_hit") = c.inf_hit,
                        py::arg("chain_holds") = c.holds);
      },
      py::arg("env"), py::arg("A"), py::arg("offset"), py::arg("fraction"), py::arg("epsilon"), py::arg("seed"),
      py::arg("B"));

  m.def(
      "annulus_capacity_scaling",
      [](double r, double R, const std::vector<int>& Ns, const std::string& law, double lam, double a, double b,
         std::uint64_t seed) {
        const auto in = ShapeSpec::euclidean_ball({0, 0, 0}, r), out = ShapeSpec::euclidean_ball({0, 0, 0}, R);
        const ScalingSweep s = capacity_scaling(make_law(law, a, b, 0.0), lam, in, out, Ns, seed);
        std::vector<double> v;
        for (const auto& row : s.rows) v.push_back(row.scaled_capacity);
        return py::make_tuple(v, s.verdict.relative_changes);
      },
      py::arg("r"), py::arg("R"), py::arg("Ns"), py::arg("law") = "constant", py::arg("lam") = 0.5, py::arg("a") = 1.0,
      py::arg("b") = 1.0, py::arg("seed") = 0, "N^{2-d} cap_{B_N}(A_N) for concentric Euclidean balls in d = 3.");
  m.def("continuum_annulus_capacity",
        [](double r, double R, double sigma2) { return continuum_capacity_reference(ContinuumShape::annulus, r, R, sigma2, 3); },
        py::arg("r"), py::arg("R"), py::arg("sigma2"));
  m.def(
      "annulus_pairing_reference",
      [](double r, double R, double bump_radius) {
        return annulus_pairing_reference({0, 0, 0}, r, R, bump({0, 0, 0}, bump_radius));
      },
      py::arg("r"), py::arg("R"), py::arg("bump_radius"));
  m.def(
      "diffusivity",
      [](const std::shared_ptr<Conductances>& env, const std::string& clock, double t, std::size_t replicas,
         std::uint64_t seed) {
        if (clock != "vsrw" && clock != "csrw") throw InvalidArgument("clock must be vsrw or csrw");
        const DiffusivityEstimate d = estimate_diffusivity(*env, clock == "vsrw" ? Clock::vsrw : Clock::csrw, t, replicas, seed);
        return py::dict(py::arg("a") = d.a, py::arg("se") = d.se, py::arg("used") = d.used,
                        py::arg("discarded") = d.discarded);
      },
      py::arg("env"), py::arg("clock"), py::arg("t"), py::arg("replicas"), py::arg("seed"));

  m.def(
      "disconnection",
      [](const std::shared_ptr<Conductances>& env, double r, double M, int N, double alpha, double alpha_star_ref,
         double delta_shell, const std::vector<double>& epsilons, std::size_t replicas, std::uint64_t seed) {
        DisconnectionSetup s;
        s.a = ShapeSpec::euclidean_ball(std::vector<double>(static_cast<std::size_t>(env->dim()), 0.0), r);
        s.m = M;
        s.n = N;
        s.alpha = alpha;
        s.alpha_star_ref = alpha_star_ref;
        s.delta_shell = delta_shell;
        const DisconnectionExperiment ex(env, s);
        py::list rows;
        for (double eps : epsilons) {
          const DisconnectionReport rep = ex.tilted_estimate(eps, replicas, seed);
          rows.append(py::dict(py::arg("epsilon") = eps, py::arg("estimate") = rep.is_estimate.mean,
                               py::arg("se") = rep.is_estimate.se, py::arg("tilted_frequency") = rep.tilted_frequency.mean,
                               py::arg("entropy") = rep.entropy, py::arg("log_entropy_bound") = rep.log_entropy_bound));
        }
        return py::make_tuple(estimate_dict(ex.direct_estimate(replicas, seed)), rows);
      },
      py::arg("env"), py::arg("r"), py::arg("M"), py::arg("N"), py::arg("alpha"), py::arg("alpha_star_ref"),
      py::arg("delta_shell"), py::arg("epsilons"), py::arg("replicas"), py::arg("seed"));

  m.def("validate_config", [](const std::string& text) { return validate_config(Json::parse(text)); });
  m.def(
      "run",
      [](const std::string& subcommand, const std::string& config, std::optional<std::string> out,
         std::optional<std::uint64_t> seed) {
        RunOptions o;
        o.config_path = config;
        if (out) o.out = *out;
        o.seed_override = seed;
        std::ostringstream log;
        const int rc = run(subcommand, o, log);
        return py::make_tuple(rc, log.str());
      },
      py::arg("subcommand"), py::arg("config"), py::arg("out") = py::none(), py::arg("seed_override") = py::none());
  m.def("sha1_hex", [](const py::bytes& b) { return sha1_hex(std::string(b)); });
  m.def("direct_backend", &direct_backend);
}
