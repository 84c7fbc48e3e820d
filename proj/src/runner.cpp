#include "hclab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "hclab/error.hpp"
#include "hclab/gff.hpp"
#include "hclab/homogenization.hpp"
#include "hclab/interfaces.hpp"
#include "hclab/parallel.hpp"
#include "hclab/percolation.hpp"
#include "hclab/potential.hpp"

namespace hclab {

namespace {

using Clock_ = std::chrono::steady_clock;

std::string fmt(double x) { return format_double(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }

std::vector<std::string> coord_columns(const std::string& prefix, int d) {
  std::vector<std::string> c;
  for (int i = 0; i < d; ++i) c.push_back(prefix + std::to_string(i));
  return c;
}

std::vector<std::string> cells(const Site& x) {
  std::vector<std::string> c;
  for (int i = 0; i < x.dim(); ++i) c.push_back(std::to_string(x[i]));
  return c;
}

template <class... Parts>
std::vector<std::string> join(Parts&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("bad type for key '") + key + "'");
  }
}

template <class T>
T require(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("bad type for key '") + key + "'");
  }
}

const Json& require_section(const ExperimentConfig& c, const std::string& name) {
  if (!c.raw.contains(name)) throw InvalidArgument("config has no '" + name + "' section");
  return c.raw[name];
}

struct Context {
  const ExperimentConfig& cfg;
  RunOutputs out;
  std::string hash;

  explicit Context(const ExperimentConfig& c) : cfg(c), hash(c.hash()) {}

  CsvWriter csv(std::vector<std::string> columns) const { return CsvWriter(std::move(columns), hash); }
  void put(const std::string& name, const CsvWriter& w) { out.files[name] = w.str(); }

  /// Environment covering `needed`: loaded from file, sampled on the configured
  /// window, or sampled on `needed` itself.
  EnvPtr environment(const Box& needed) {
    Conductances env;
    if (cfg.environment_file) {
      env = read_environment(*cfg.environment_file);
      if (env.dim() != cfg.dim) throw InvalidArgument("environment file dimension does not match the config");
    } else {
      env = Conductances::sample(cfg.law, cfg.lambda, cfg.window ? *cfg.window : needed, cfg.environment_seed);
    }
    if (!env.window().contains(needed)) throw GeometryError("the environment window does not cover the experiment");
    out.environment_hash = git_blob_hash(encode_environment(env));
    return share(std::move(env));
  }

  template <class F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = Clock_::now();
    auto r = f();
    out.timing.emplace_back(stage, std::chrono::duration<double>(Clock_::now() - t0).count());
    return r;
  }
};

Box bbox_union(const Box& a, const Box& b) {
  Site lo = a.lo(), hi = a.hi();
  for (int i = 0; i < a.dim(); ++i) {
    lo[i] = std::min(lo[i], b.lo()[i]);
    hi[i] = std::max(hi[i], b.hi()[i]);
  }
  return Box(lo, hi);
}

// ---------------------------------------------------------------------------

void run_env(Context& ctx) {
  const auto& c = ctx.cfg;
  if (!c.window && !c.environment_file) throw InvalidArgument("env needs a 'window'");
  const EnvPtr env = ctx.environment(c.window ? *c.window : read_environment(*c.environment_file).window());
  ctx.out.files["environment.bin"] = encode_environment(*env);
  ctx.out.files["environment.bin.json"] = environment_header(*env).dump(2) + "\n";
  double sum = 0, lo = 1, hi = 0;
  env->for_each_edge([&](const Site&, int, double w) {
    if (std::isnan(w)) return;
    sum += w;
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  });
  const std::size_t n = env->edge_count();
  auto w = ctx.csv({"law", "lambda", "edge_count", "mean_weight", "min_weight", "max_weight"});
  w.row({env->law().describe(), fmt(env->lambda()), fmt(n), fmt(n ? sum / static_cast<double>(n) : 0.0), fmt(lo),
         fmt(hi)});
  ctx.put("environment.csv", w);
}

void run_potential(Context& ctx) {
  const auto& c = ctx.cfg;
  const Json& s = require_section(c, "potential");
  const SiteSet a = parse_site_set(require<Json>(s, "A"), c.dim);
  const SiteSet b = parse_site_set(require<Json>(s, "B"), c.dim);
  Box needed = b.bounding_box();
  const EnvPtr env = ctx.environment(needed);
  const Potential p = ctx.timed("potential", [&] { return solve_potential(env, a, b, c.solver); });
  auto w = ctx.csv({"capacity", "energy", "equilibrium_sum", "unknowns", "direct", "iterations", "residual"});
  w.row({fmt(p.capacity), fmt(dirichlet_energy(*env, p.h)), fmt(p.e.values.sum()), fmt(b.size() - a.size()),
         p.stats.direct ? "1" : "0", fmt(p.stats.iterations), fmt(p.stats.relative_residual)});
  ctx.put("capacity.csv", w);
  ctx.out.summary["capacity"] = p.capacity;

  if (get_or<bool>(s, "write_fields", true)) {
    auto hw = ctx.csv(join(coord_columns("x", c.dim), std::vector<std::string>{"h"}));
    for (std::size_t k = 0; k < b.size(); ++k)
      hw.row(join(cells(b[k]), std::vector<std::string>{fmt(p.h.values(static_cast<Eigen::Index>(k)))}));
    ctx.put("potential.csv", hw);
    auto ew = ctx.csv(join(coord_columns("x", c.dim), std::vector<std::string>{"e"}));
    for (std::size_t k = 0; k < a.size(); ++k)
      ew.row(join(cells(a[k]), std::vector<std::string>{fmt(p.e.values(static_cast<Eigen::Index>(k)))}));
    ctx.put("equilibrium.csv", ew);
  }
  if (s.contains("green")) {
    const DirichletOperator op(env, b, c.solver);
    auto gw = ctx.csv(join(coord_columns("x", c.dim), coord_columns("y", c.dim), std::vector<std::string>{"g"}));
    for (const auto& pair : s["green"]) {
      if (!pair.is_array() || pair.size() != 2) throw InvalidArgument("green entries are [x, y] pairs");
      const Site x = parse_site(pair[0], c.dim), y = parse_site(pair[1], c.dim);
      gw.row(join(cells(x), cells(y), std::vector<std::string>{fmt(green_killed_entry(op, x, y))}));
    }
    ctx.put("green.csv", gw);
  }
  if (s.contains("heat_kernel")) {
    const Json& hk = s["heat_kernel"];
    const DirichletOperator op(env, b, c.solver);
    const Site x = parse_site(require<Json>(hk, "x"), c.dim);
    const HeatKernel q = heat_kernel_killed(op, require<double>(hk, "t"), x, c.tolerances.heat_kernel);
    auto qw = ctx.csv(join(coord_columns("y", c.dim), std::vector<std::string>{"q"}));
    for (std::size_t k = 0; k < b.size(); ++k)
      qw.row(join(cells(b[k]), std::vector<std::string>{fmt(q.q(static_cast<Eigen::Index>(k)))}));
    ctx.put("heat_kernel.csv", qw);
    ctx.out.summary["heat_kernel"] = {{"terms", q.terms}, {"tail_bound", q.tail_bound}};
  }
}

void run_gff(Context& ctx) {
  const auto& c = ctx.cfg;
  const Json& s = require_section(c, "gff");
  const SiteSet domain = parse_site_set(require<Json>(s, "domain"), c.dim);
  const std::size_t samples = get_or<std::size_t>(s, "samples", c.replicas);
  const std::size_t snapshots = get_or<std::size_t>(s, "snapshots", 0);
  const EnvPtr env = ctx.environment(domain.bounding_box());
  const GffSampler sampler(env, domain, c.solver);
  const std::uint64_t seed = c.stage_seed("gff");
  const auto n = static_cast<Eigen::Index>(domain.size());
  Vector sum = Vector::Zero(n), sum2 = Vector::Zero(n);
  constexpr std::size_t kChunk = 256;
  ctx.timed("sampling", [&] {
    for (std::size_t first = 0; first < samples; first += kChunk) {
      const std::size_t count = std::min(kChunk, samples - first);
      const Matrix m = sampler.sample_matrix(seed, first, count);
      sum += m.rowwise().sum();
      sum2 += m.cwiseProduct(m).rowwise().sum();
      for (std::size_t j = 0; j < count && first + j < snapshots; ++j) {
        char name[32];
        std::snprintf(name, sizeof name, "field_%04zu.bin", first + j);
        ctx.out.files[name] = encode_field(Field(domain, m.col(static_cast<Eigen::Index>(j))));
      }
    }
    return 0;
  });
  const auto ns = static_cast<double>(samples);
  auto w = ctx.csv(join(coord_columns("x", c.dim), std::vector<std::string>{"mean", "variance"}));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mean = sum(k) / ns;
    const double var = samples > 1 ? (sum2(k) - ns * mean * mean) / (ns - 1.0) : 0.0;
    w.row(join(cells(domain[static_cast<std::size_t>(k)]), std::vector<std::string>{fmt(mean), fmt(var)}));
  }
  ctx.put("field_summary.csv", w);
  ctx.out.summary["samples"] = samples;
}

void run_percolation(Context& ctx) {
  const auto& c = ctx.cfg;
  const Json& s = require_section(c, "percolation");
  const auto mode = get_or<std::string>(s, "mode", "crossing");
  const Site x = s.contains("x") ? parse_site(s["x"], c.dim) : Site(c.dim);
  const std::size_t replicas = get_or<std::size_t>(s, "replicas", c.replicas);
  if (mode == "crossing") {
    const auto alphas = require<std::vector<double>>(s, "alphas");
    const auto Ls = require<std::vector<int>>(s, "Ls");
    const int pad = get_or<int>(s, "pad", 1);
    if (Ls.empty()) throw InvalidArgument("'Ls' is empty");
    const int lmax = *std::max_element(Ls.begin(), Ls.end());
    const EnvPtr env = ctx.environment(Box::ball(x, 2 * lmax + std::max(pad, 0)));
    const std::uint64_t seed = c.stage_seed("crossing");
    const CrossingSweep sweep =
        ctx.timed("crossing", [&] { return crossing_sweep(env, alphas, Ls, x, replicas, seed, pad, c.solver); });
    auto w = ctx.csv({"alpha", "L", "crossing_prob", "se", "replicas", "seed"});
    for (const auto& r : sweep.rows)
      w.row({fmt(r.alpha), fmt(r.L), fmt(r.p.mean), fmt(r.p.se), fmt(replicas), std::to_string(seed)});
    ctx.put("crossing.csv", w);
    ctx.out.summary["alpha_star_star"] = sweep.alpha_star_star ? Json(*sweep.alpha_star_star) : Json(nullptr);
  } else if (mode == "connectivity") {
    const auto alphas = require<std::vector<double>>(s, "alphas");
    const int pad = get_or<int>(s, "pad", 1);
    std::vector<Site> zs;
    for (const auto& z : require<Json>(s, "z")) zs.push_back(parse_site(z, c.dim));
    if (zs.empty()) throw InvalidArgument("'z' is empty");
    Box span(x, x);
    for (const Site& z : zs) span = bbox_union(span, Box(x + z, x + z));
    const EnvPtr env = ctx.environment(span.expanded(std::max(pad, 0)));
    const std::uint64_t seed = c.stage_seed("connectivity");
    const ConnectivityResult r = ctx.timed(
        "connectivity", [&] { return connectivity_function(env, alphas, x, zs, pad, replicas, seed, c.solver); });
    auto w = ctx.csv(join(std::vector<std::string>{"alpha"}, coord_columns("z", c.dim),
                          std::vector<std::string>{"connectivity", "se"}));
    for (std::size_t ai = 0; ai < r.alphas.size(); ++ai)
      for (std::size_t zi = 0; zi < r.z.size(); ++zi)
        w.row(join(std::vector<std::string>{fmt(r.alphas[ai])}, cells(r.z[zi]),
                   std::vector<std::string>{fmt(r.p[ai][zi].mean), fmt(r.p[ai][zi].se)}));
    ctx.put("connectivity.csv", w);
    auto dw = ctx.csv({"alpha", "decay_rate"});
    for (std::size_t ai = 0; ai < r.alphas.size(); ++ai) dw.row({fmt(r.alphas[ai]), fmt(r.decay_rate[ai])});
    ctx.put("connectivity_decay.csv", dw);
  } else if (mode == "classify") {
    const int L = require<int>(s, "L");
    const int K = get_or<int>(s, "K", 5);
    std::vector<Site> centers;
    for (const auto& z : require<Json>(s, "centers")) centers.push_back(parse_site(z, c.dim));
    const BoxGrid grid(c.dim, L, K, centers);
    Box span = grid.box_U(centers.at(0));
    for (const Site& z : centers) span = bbox_union(span, grid.box_U(z));
    span = span.expanded(L);
    const EnvPtr env = ctx.environment(span);
    const SiteSet domain(span);
    const GffSampler sampler(env, domain, c.solver);
    const std::size_t fields = get_or<std::size_t>(s, "fields", 1);
    const std::uint64_t seed = c.stage_seed("classify");
    auto w = ctx.csv(join(std::vector<std::string>{"replica"}, coord_columns("z", c.dim),
                          std::vector<std::string>{"big_component", "neighbor_links", "psi_good", "xi_good",
                                                   "xi_inf"}));
    for (std::size_t r = 0; r < fields; ++r) {
      const FieldSample phi = sampler.sample(seed, r);
      const BoxClassification cls =
          classify_boxes(env, phi.field, grid, require<double>(s, "gamma"), require<double>(s, "delta"),
                         require<double>(s, "a"));
      for (const Site& z : centers) {
        const BoxFlags& f = cls.at(z);
        w.row(join(std::vector<std::string>{fmt(r)}, cells(z),
                   std::vector<std::string>{f.big_component ? "1" : "0", f.neighbor_links ? "1" : "0",
                                            f.psi_good ? "1" : "0", f.xi_good ? "1" : "0", fmt(f.xi_inf)}));
      }
    }
    ctx.put("boxes.csv", w);
  } else {
    throw InvalidArgument("unknown percolation mode '" + mode + "'");
  }
}

void run_disconnect(Context& ctx) {
  const auto& c = ctx.cfg;
  const Json& s = require_section(c, "disconnect");
  DisconnectionSetup setup;
  setup.a = parse_shape(require<Json>(s, "A"), c.dim);
  setup.m = require<double>(s, "M");
  setup.n = require<int>(s, "N");
  setup.alpha = require<double>(s, "alpha");
  setup.alpha_star_ref = require<double>(s, "alpha_star_ref");
  setup.delta_shell = get_or<double>(s, "delta_shell", 0.0);
  setup.pad = get_or<int>(s, "pad", 1);
  const int radius = static_cast<int>(std::floor(setup.m * setup.n)) + std::max(setup.pad, 0);
  const EnvPtr env = ctx.environment(Box::ball(Site(c.dim), radius));
  const DisconnectionExperiment exp = ctx.timed("setup", [&] { return DisconnectionExperiment(env, setup, c.solver); });

  const std::size_t direct_replicas = get_or<std::size_t>(s, "direct_replicas", 0);
  if (direct_replicas > 0) {
    const Estimate d = ctx.timed("direct", [&] { return exp.direct_estimate(direct_replicas, c.stage_seed("direct")); });
    auto w = ctx.csv({"N", "estimate", "se", "replicas"});
    w.row({fmt(setup.n), fmt(d.mean), fmt(d.se), fmt(direct_replicas)});
    ctx.put("direct.csv", w);
  }
  const auto epsilons = get_or<std::vector<double>>(s, "epsilons", {0.0});
  const std::size_t replicas = get_or<std::size_t>(s, "replicas", c.replicas);
  auto w = ctx.csv({"N", "epsilon", "estimate", "se", "tilted_freq", "entropy_bound", "entropy", "rate_proxy",
                    "reference_rate", "tilted_hits"});
  Json reports = Json::array();
  for (double eps : epsilons) {
    const DisconnectionReport r =
        ctx.timed("tilted/eps=" + fmt(eps), [&] { return exp.tilted_estimate(eps, replicas, c.stage_seed("tilted")); });
    w.row({fmt(setup.n), fmt(eps), fmt(r.is_estimate.mean), fmt(r.is_estimate.se), fmt(r.tilted_frequency.mean),
           fmt(r.log_entropy_bound), fmt(r.entropy), fmt(r.rate_proxy), fmt(r.reference_rate), fmt(r.tilted_hits)});
    if (r.degenerate) reports.push_back("no tilted hits at epsilon " + fmt(eps) + "; try a larger epsilon");
  }
  ctx.put("disconnect.csv", w);
  if (!reports.empty()) ctx.out.summary["warnings"] = reports;

  if (s.contains("eta")) {
    const TestFunctionSpec eta = parse_test_function(s["eta"], c.dim);
    const double delta = get_or<double>(s, "Delta", 0.1);
    auto rw = ctx.csv({"epsilon", "conditional_mean", "conditional_se", "profile_pairing", "deviation",
                       "deviation_se", "tilted_mean", "tilted_se", "tilt_pairing", "tilted_hits"});
    for (double eps : epsilons) {
      const RepulsionReport r = ctx.timed("repulsion/eps=" + fmt(eps), [&] {
        return exp.repulsion(eps, eta.callable(), delta, replicas, c.stage_seed("repulsion"));
      });
      rw.row({fmt(eps), fmt(r.conditional_mean.mean), fmt(r.conditional_mean.se), fmt(r.profile_pairing),
              fmt(r.deviation.mean), fmt(r.deviation.se), fmt(r.tilted_mean.mean), fmt(r.tilted_mean.se),
              fmt(r.tilt_pairing), fmt(r.tilted_hits)});
    }
    ctx.put("repulsion.csv", rw);
  }
}

void run_solidify(Context& ctx) {
  const auto& c = ctx.cfg;
  const Json& s = require_section(c, "solidify");
  const SiteSet a = parse_site_set(require<Json>(s, "A"), c.dim);
  const int offset = require<int>(s, "offset");
  const int epsilon = get_or<int>(s, "epsilon", 3);
  const int l_star = get_or<int>(s, "l_star", 0);
  const auto fractions = get_or<std::vector<double>>(s, "fractions", {0.0});
  const SiteSet b = s.contains("B") ? parse_site_set(s["B"], c.dim)
                                    : SiteSet(thicken(a, offset + std::max(epsilon, 2)).bounding_box());
  const EnvPtr env = ctx.environment(b.bounding_box().expanded(epsilon));
  const std::uint64_t seed = c.stage_seed("solidify");
  auto w = ctx.csv({"fraction", "sigma_size", "chi", "escape_sup", "far_field_bound", "escape_sup_lower", "cap_sigma",
                    "cap_a", "inf_hit", "slack", "identity_gap", "holds"});
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    PorousInterface pi = build_shell_interface(env, a, offset, fractions[k], epsilon, seed);
    pi.l_star = l_star;
    const EscapeResult esc = escape_probability(env, a, pi.sigma, b, get_or<double>(s, "green_constant", 1.0), c.solver);
    const CapacityRatioReport cr = capacity_ratio_check(env, a, pi.sigma, b, c.tolerances.identity, c.solver);
    w.row({fmt(fractions[k]), fmt(pi.sigma.size()), fmt(pi.chi), fmt(esc.sup), fmt(esc.far_field_bound),
           fmt(esc.sup_lower), fmt(cr.cap_sigma), fmt(cr.cap_a), fmt(cr.inf_hit), fmt(cr.slack), fmt(cr.identity_gap),
           cr.holds ? "1" : "0"});
    std::ostringstream os;
    write_site_set(os, pi.sigma,
                   {{"epsilon", pi.epsilon},
                    {"chi", pi.chi},
                    {"l_star", pi.l_star},
                    {"provenance", "shell offset=" + std::to_string(offset) + " fraction=" + fmt(fractions[k]) +
                                       " seed=" + std::to_string(seed)}});
    ctx.out.files["interface_" + std::to_string(k) + ".txt"] = os.str();
  }
  ctx.put("solidify.csv", w);
  if (s.contains("scales")) {
    const Json& sc = s["scales"];
    const ScaleSystem sys = scale_system(c.dim, require<int>(sc, "I"), require<int>(sc, "J"), require<int>(sc, "L"),
                                         require<int>(sc, "l_star"), get_or<int>(sc, "l_min_base", 5));
    auto sw = ctx.csv({"I", "J", "L", "l_star", "L_of_J", "L_valid", "l0", "l_min", "compatible", "alpha_tilde"});
    sw.row({fmt(sys.I), fmt(sys.J), fmt(sys.L), fmt(sys.l_star), fmt(sys.L_of_J), sys.L_valid ? "1" : "0",
            fmt(sys.l0), fmt(sys.l_min), sys.compatible ? "1" : "0", fmt(sys.alpha_tilde)});
    ctx.put("scales.csv", sw);
  }
}

void run_homogenize(Context& ctx) {
  const auto& c = ctx.cfg;
  const Json& s = require_section(c, "homogenize");
  const double ratio = c.tolerances.cauchy_ratio;
  if (s.contains("A") || s.contains("B")) {
    const ShapeSpec a = parse_shape(require<Json>(s, "A"), c.dim);
    const ShapeSpec b = parse_shape(require<Json>(s, "B"), c.dim);
    const auto Ns = require<std::vector<int>>(s, "N_list");
    if (Ns.empty()) throw InvalidArgument("'N_list' is empty");
    const EnvPtr env = ctx.environment(scaling_window(b, Ns.back()));
    const ScalingSweep sweep = capacity_scaling(env, a, b, Ns, ratio, c.solver);
    auto w = ctx.csv({"N", "scaled_capacity", "capacity", "unknowns", "residual", "iterations"});
    for (const auto& r : sweep.rows) {
      w.row({fmt(r.N), fmt(r.scaled_capacity), fmt(r.capacity), fmt(r.unknowns), fmt(r.stats.relative_residual),
             fmt(r.stats.iterations)});
      ctx.out.timing.emplace_back("capacity/N=" + fmt(r.N), r.solve_seconds);
    }
    ctx.put("scaling.csv", w);
    ctx.out.summary["scaling"] = {{"relative_changes", sweep.verdict.relative_changes},
                                  {"cauchy_ok", sweep.verdict.ok}};
    if (c.dim == 3 && c.law.kind == EnvironmentLaw::Kind::constant && a.kind() == ShapeSpec::Kind::euclidean_ball &&
        b.kind() == ShapeSpec::Kind::euclidean_ball && a.center() == b.center() && a.radius() < b.radius())
      ctx.out.summary["scaling"]["continuum_reference"] = continuum_capacity_reference(
          ContinuumShape::annulus, a.radius(), b.radius(), 2.0 * c.law.a, c.dim);
    if (s.contains("test_function")) {
      const TestFunctionSpec f = parse_test_function(s["test_function"], c.dim);
      const PairingSweep ps =
          ctx.timed("pairing", [&] { return potential_pairing_convergence(env, a, b, f.callable(), Ns, ratio, c.solver); });
      auto pw = ctx.csv({"N", "pairing"});
      for (const auto& r : ps.rows) pw.row({fmt(r.N), fmt(r.pairing)});
      ctx.put("pairing.csv", pw);
      ctx.out.summary["pairing"] = {{"relative_changes", ps.verdict.relative_changes}, {"cauchy_ok", ps.verdict.ok}};
      if (ps.continuum_reference) ctx.out.summary["pairing"]["continuum_reference"] = *ps.continuum_reference;
    }
  }
  if (s.contains("diffusivity")) {
    const Json& dj = s["diffusivity"];
    const auto clock_name = get_or<std::string>(dj, "clock", "vsrw");
    if (clock_name != "vsrw" && clock_name != "csrw") throw InvalidArgument("clock must be vsrw or csrw");
    const Clock clock = clock_name == "vsrw" ? Clock::vsrw : Clock::csrw;
    const int radius = require<int>(dj, "radius");
    Conductances env = Conductances::sample(c.law, c.lambda, Box::ball(Site(c.dim), radius), c.environment_seed);
    const DiffusivityEstimate d = ctx.timed("diffusivity", [&] {
      return estimate_diffusivity(env, clock, require<double>(dj, "t"), get_or<std::size_t>(dj, "replicas", c.replicas),
                                  c.stage_seed("diffusivity"), Site(c.dim));
    });
    auto w = ctx.csv({"i", "j", "a", "se", "vsrw_equivalent"});
    for (int i = 0; i < c.dim; ++i)
      for (int j = 0; j < c.dim; ++j)
        w.row({fmt(i), fmt(j), fmt(d.a(i, j)), fmt(d.se(i, j)), fmt(d.vsrw_equivalent(i, j))});
    ctx.put("diffusivity.csv", w);
    ctx.out.summary["diffusivity"] = {{"used", d.used}, {"discarded", d.discarded}, {"clock", clock_name}};
  }
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"env", "potential", "gff", "percolation", "disconnect", "solidify",
                                                 "homogenize", "validate"};
  return names;
}

RunOutputs execute(const std::string& subcommand, const ExperimentConfig& config) {
  Context ctx(config);
  if (subcommand == "env") run_env(ctx);
  else if (subcommand == "potential") run_potential(ctx);
  else if (subcommand == "gff") run_gff(ctx);
  else if (subcommand == "percolation") run_percolation(ctx);
  else if (subcommand == "disconnect") run_disconnect(ctx);
  else if (subcommand == "solidify") run_solidify(ctx);
  else if (subcommand == "homogenize") run_homogenize(ctx);
  else throw InvalidArgument("unknown subcommand '" + subcommand + "'");
  ctx.out.files["summary.json"] = ctx.out.summary.dump(2) + "\n";
  ctx.out.files["config.json"] = config.raw.dump(2) + "\n";
  return std::move(ctx.out);
}

namespace {

Json versions() {
  Json v;
  v["hclab"] = "0.1.0";
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["direct_solver"] = direct_backend();
  v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  return v;
}

int run_validate(const RunOptions& options, std::ostream& log) {
  Json j;
  try {
    j = Json::parse(read_file(options.config_path));
  } catch (const Json::parse_error& e) {
    log << "schema: config is not valid JSON: " << e.what() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "schema: " << e.what() << "\n";
    return kExitOk;
  }
  for (const auto& d : validate_config(j)) log << d << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::string& subcommand, const RunOptions& options, std::ostream& log) {
  try {
    if (options.threads > 0) set_thread_count(options.threads);
    if (subcommand == "validate") return run_validate(options, log);
    const auto t0 = Clock_::now();
    ExperimentConfig cfg = ExperimentConfig::from_file(options.config_path);
    if (options.seed_override) cfg.override_seed(*options.seed_override);
    const std::filesystem::path out = options.out ? *options.out : std::filesystem::path(cfg.output);
    RunOutputs r = execute(subcommand, cfg);

    CsvWriter timing({"stage", "seconds"}, cfg.hash());
    for (const auto& [stage, sec] : r.timing) timing.row({stage, format_double(sec)});
    r.files["timing.csv"] = timing.str();

    Json manifest;
    manifest["subcommand"] = subcommand;
    manifest["config_hash"] = cfg.hash();
    manifest["environment_hash"] = r.environment_hash;
    manifest["master_seed"] = cfg.master_seed;
    manifest["versions"] = versions();
    manifest["outputs"] = Json::array();
    for (const auto& [name, bytes] : r.files) {
      write_file(out / name, bytes);
      manifest["outputs"].push_back({{"file", name}, {"sha1", sha1_hex(bytes)}, {"bytes", bytes.size()}});
    }
    manifest["wall_clock_seconds"] = std::chrono::duration<double>(Clock_::now() - t0).count();
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
    log << subcommand << ": wrote " << r.files.size() + 1 << " files to " << out.string() << "\n";
    return kExitOk;
  } catch (const GeometryError& e) {
    log << "geometry error: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InvalidArgument& e) {
    log << "invalid config: " << e.what() << "\n";
    return kExitSchema;
  } catch (const Json::exception& e) {
    log << "invalid config: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace hclab
