#include "hclab/config.hpp"

#include <cmath>
#include <set>

#include "hclab/error.hpp"
#include "hclab/interfaces.hpp"
#include "hclab/rng.hpp"

namespace hclab {

namespace {

const std::set<std::string> kTopLevel = {"dimension", "lambda",     "environment", "window",      "environment_file",
                                         "master_seed", "replicas", "output",      "solver",      "tolerances",
                                         "potential", "gff",        "percolation", "disconnect",  "solidify",
                                         "homogenize"};

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("bad type for key '") + key + "'");
  }
}

template <class T>
T require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("bad type for key '") + key + "'");
  }
}

std::vector<double> point(const Json& j, const char* key, int dim) {
  auto v = require<std::vector<double>>(j, key);
  if (static_cast<int>(v.size()) != dim) throw InvalidArgument(std::string("'") + key + "' has the wrong dimension");
  return v;
}

}  // namespace

Site parse_site(const Json& j, int dim) {
  std::vector<int> c;
  try {
    c = j.get<std::vector<int>>();
  } catch (const Json::exception&) {
    throw InvalidArgument("a site must be an integer array");
  }
  if (static_cast<int>(c.size()) != dim) throw InvalidArgument("site has the wrong dimension");
  return Site::from_span(c);
}

Box parse_box(const Json& j, int dim) {
  if (j.contains("radius")) {
    const Site c = j.contains("center") ? parse_site(j["center"], dim) : Site(dim);
    const int r = require<int>(j, "radius");
    if (r < 0) throw InvalidArgument("box radius must be non-negative");
    return Box::ball(c, r);
  }
  if (!j.contains("lo") || !j.contains("hi")) throw InvalidArgument("a box needs lo/hi or radius");
  Box b(parse_site(j["lo"], dim), parse_site(j["hi"], dim));
  if (b.empty()) throw InvalidArgument("box is empty");
  return b;
}

EnvironmentLaw parse_law(const Json& j) {
  const auto law = require<std::string>(j, "law");
  if (law == "constant") return EnvironmentLaw::constant(get_or<double>(j, "value", 1.0));
  if (law == "iid_uniform") return EnvironmentLaw::iid_uniform(require<double>(j, "lo"), require<double>(j, "hi"));
  if (law == "iid_two_point")
    return EnvironmentLaw::iid_two_point(require<double>(j, "a"), require<double>(j, "b"), require<double>(j, "p"));
  if (law == "checkerboard") return EnvironmentLaw::checkerboard(require<double>(j, "a"), require<double>(j, "b"));
  throw InvalidArgument("unknown environment law '" + law + "'");
}

ShapeSpec parse_shape(const Json& j, int dim) {
  const auto type = require<std::string>(j, "type");
  if (type == "euclidean_ball") return ShapeSpec::euclidean_ball(point(j, "center", dim), require<double>(j, "radius"));
  if (type == "linf_box") return ShapeSpec::linf_box(point(j, "center", dim), require<double>(j, "half_width"));
  if (type == "half_space") return ShapeSpec::half_space(point(j, "normal", dim), require<double>(j, "offset"));
  if (type == "union" || type == "intersection") {
    if (!j.contains("parts") || !j["parts"].is_array()) throw InvalidArgument("'parts' must be an array");
    std::vector<ShapeSpec> parts;
    for (const auto& p : j["parts"]) parts.push_back(parse_shape(p, dim));
    return type == "union" ? ShapeSpec::union_of(std::move(parts)) : ShapeSpec::intersection_of(std::move(parts));
  }
  if (type == "inflated") {
    if (!j.contains("shape")) throw InvalidArgument("missing key 'shape'");
    return parse_shape(j["shape"], dim).inflated(require<double>(j, "delta"));
  }
  throw InvalidArgument("unknown shape type '" + type + "'");
}

SiteSet parse_site_set(const Json& j, int dim) {
  const auto type = require<std::string>(j, "type");
  if (type == "sites") {
    if (!j.contains("sites") || !j["sites"].is_array()) throw InvalidArgument("'sites' must be an array");
    std::vector<Site> s;
    for (const auto& x : j["sites"]) s.push_back(parse_site(x, dim));
    if (s.empty()) throw InvalidArgument("site list is empty");
    return SiteSet(std::move(s));
  }
  if (type == "box" || type == "ball") return SiteSet(parse_box(j, dim));
  if (type == "blow_up") {
    if (!j.contains("shape")) throw InvalidArgument("missing key 'shape'");
    return blow_up(parse_shape(j["shape"], dim), require<int>(j, "N"));
  }
  throw InvalidArgument("unknown site-set type '" + type + "'");
}

TestFunctionSpec parse_test_function(const Json& j, int dim) {
  const auto type = require<std::string>(j, "type");
  if (type == "zero") return TestFunctionSpec::zero();
  if (type == "radial_bump") return TestFunctionSpec::radial_bump(point(j, "center", dim), require<double>(j, "radius"));
  if (type == "poly_bump") {
    std::vector<TestFunctionSpec::Term> terms;
    if (!j.contains("terms") || !j["terms"].is_array()) throw InvalidArgument("'terms' must be an array");
    for (const auto& t : j["terms"])
      terms.push_back({get_or<double>(t, "coefficient", 1.0), require<std::vector<int>>(t, "exponents")});
    return TestFunctionSpec::poly_bump(point(j, "center", dim), require<double>(j, "radius"), std::move(terms));
  }
  if (type == "mollified_indicator") {
    if (!j.contains("shape")) throw InvalidArgument("missing key 'shape'");
    return TestFunctionSpec::mollified_indicator(parse_shape(j["shape"], dim), require<double>(j, "width"));
  }
  throw InvalidArgument("unknown test function type '" + type + "'");
}

ExperimentConfig ExperimentConfig::parse(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kTopLevel.count(key)) throw InvalidArgument("unknown top-level key '" + key + "'");
  ExperimentConfig c;
  c.raw = j;
  c.dim = require<int>(j, "dimension");
  validate_dimension(c.dim);
  c.lambda = require<double>(j, "lambda");
  if (!(c.lambda > 0 && c.lambda < 1)) throw InvalidArgument("lambda must lie in (0, 1)");
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", 0);
  if (j.contains("environment")) {
    c.law = parse_law(j["environment"]);
    c.environment_seed = get_or<std::uint64_t>(j["environment"], "seed", c.master_seed);
  } else {
    c.law = EnvironmentLaw::constant(1.0);
    c.environment_seed = c.master_seed;
  }
  c.law.validate(c.lambda);
  if (j.contains("window")) c.window = parse_box(j["window"], c.dim);
  if (j.contains("environment_file")) c.environment_file = require<std::string>(j, "environment_file");
  c.replicas = get_or<std::size_t>(j, "replicas", 1000);
  if (c.replicas == 0) throw InvalidArgument("replicas must be positive");
  c.output = get_or<std::string>(j, "output", "out");
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    c.solver.direct_threshold = get_or<std::size_t>(s, "direct_threshold", c.solver.direct_threshold);
    c.solver.cg_tolerance = get_or<double>(s, "cg_tolerance", c.solver.cg_tolerance);
    c.solver.cg_max_iterations = get_or<int>(s, "cg_max_iterations", c.solver.cg_max_iterations);
    c.solver.force_iterative = get_or<bool>(s, "force_iterative", false);
  }
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    c.tolerances.heat_kernel = get_or<double>(t, "heat_kernel", c.tolerances.heat_kernel);
    c.tolerances.se_multiplier = get_or<double>(t, "se_multiplier", c.tolerances.se_multiplier);
    c.tolerances.agreement_se_multiplier =
        get_or<double>(t, "agreement_se_multiplier", c.tolerances.agreement_se_multiplier);
    c.tolerances.cauchy_ratio = get_or<double>(t, "cauchy_ratio", c.tolerances.cauchy_ratio);
    c.tolerances.identity = get_or<double>(t, "identity", c.tolerances.identity);
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = parse(j);
  if (c.environment_file && c.environment_file->is_relative())
    c.environment_file = path.parent_path() / *c.environment_file;
  return c;
}

std::string ExperimentConfig::hash() const { return sha1_hex(raw.dump()); }

std::uint64_t ExperimentConfig::stage_seed(std::string_view stage) const {
  return mix64(master_seed ^ hash_label(stage));
}

const Json& ExperimentConfig::section(const std::string& name) const {
  static const Json empty = Json::object();
  return raw.contains(name) ? raw[name] : empty;
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  const bool env_follows = !raw.contains("environment") || !raw["environment"].contains("seed");
  master_seed = seed;
  raw["master_seed"] = seed;
  if (env_follows) environment_seed = seed;
}

// ---------------------------------------------------------------------------

namespace {

void check_nested_sites(const Json& sec, int dim, const char* name, std::vector<std::string>& out) {
  if (!sec.contains("A") || !sec.contains("B")) return;
  const SiteSet a = parse_site_set(sec["A"], dim);
  const SiteSet b = parse_site_set(sec["B"], dim);
  if (!a.is_subset_of(b)) out.push_back(std::string(name) + ": A is not contained in B (nesting A subset of B violated)");
}

void check_nested_shapes(const ShapeSpec& a, const ShapeSpec& b, const std::vector<int>& Ns, const char* name,
                         std::vector<std::string>& out) {
  for (int n : Ns) {
    const SiteSet an = blow_up(a, n), bn = blow_up(b, n);
    if (an.empty()) out.push_back(std::string(name) + ": A_N is empty at N = " + std::to_string(n));
    else if (!an.is_subset_of(bn))
      out.push_back(std::string(name) + ": A_N is not contained in B_N at N = " + std::to_string(n) +
                    " (nesting A subset of B violated)");
  }
}

void check_scales(const Json& s, int dim, std::vector<std::string>& out) {
  const ScaleSystem sys = scale_system(dim, require<int>(s, "I"), require<int>(s, "J"), require<int>(s, "L"),
                                       require<int>(s, "l_star"), get_or<int>(s, "l_min_base", 5));
  if (!sys.L_valid)
    out.push_back("scales: L = " + std::to_string(sys.L) + " is below L(J) = " + std::to_string(sys.L_of_J));
  if (!sys.compatible)
    out.push_back("scales: l_star = " + std::to_string(sys.l_star) +
                  " is incompatible: need l0 - (I+1)(J+1)L > l_min(1/(200J)) with l0 = " + std::to_string(sys.l0) +
                  ", l_min = " + std::to_string(sys.l_min));
}

}  // namespace

std::vector<std::string> validate_config(const Json& j) {
  std::vector<std::string> out;
  ExperimentConfig c;
  try {
    c = ExperimentConfig::parse(j);
  } catch (const Error& e) {
    out.push_back(std::string("schema: ") + e.what());
    return out;
  }
  const int d = c.dim;
  const auto guarded = [&](const char* name, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      out.push_back(std::string(name) + ": " + e.what());
    } catch (const Json::exception& e) {
      out.push_back(std::string(name) + ": " + e.what());
    }
  };
  if (j.contains("potential")) guarded("potential", [&] { check_nested_sites(j["potential"], d, "potential", out); });
  if (j.contains("gff"))
    guarded("gff", [&] {
      if (!j["gff"].contains("domain")) throw InvalidArgument("missing key 'domain'");
      parse_site_set(j["gff"]["domain"], d);
    });
  if (j.contains("percolation"))
    guarded("percolation", [&] {
      const Json& s = j["percolation"];
      const auto mode = get_or<std::string>(s, "mode", "crossing");
      if (mode != "crossing" && mode != "connectivity" && mode != "classify")
        throw InvalidArgument("unknown mode '" + mode + "'");
      if (mode != "classify" && get_or<int>(s, "pad", 1) < (mode == "crossing" ? 1 : 0))
        out.push_back("percolation: padding insufficient (pad must be >= 1 so the target shell lies in the domain)");
      if (mode == "classify" && get_or<int>(s, "K", 5) < 5) out.push_back("percolation: K must be at least 5");
    });
  if (j.contains("homogenize"))
    guarded("homogenize", [&] {
      const Json& s = j["homogenize"];
      if (s.contains("A") && s.contains("B")) {
        const auto Ns = require<std::vector<int>>(s, "N_list");
        check_nested_shapes(parse_shape(s["A"], d), parse_shape(s["B"], d), Ns, "homogenize", out);
      }
      if (s.contains("test_function")) parse_test_function(s["test_function"], d);
    });
  if (j.contains("disconnect"))
    guarded("disconnect", [&] {
      const Json& s = j["disconnect"];
      const ShapeSpec a = parse_shape(require<Json>(s, "A"), d);
      const double m = require<double>(s, "M");
      const int n = require<int>(s, "N");
      const int pad = get_or<int>(s, "pad", 1);
      const double delta = get_or<double>(s, "delta_shell", 0.0);
      if (pad < 0) out.push_back("disconnect: padding must be non-negative");
      const int r = static_cast<int>(std::floor(m * n));
      const SiteSet an = blow_up(a, n);
      if (an.empty()) out.push_back("disconnect: A_N is empty");
      for (const Site& x : an)
        if (linf_norm(x) >= r) {
          out.push_back("disconnect: A_N is not strictly inside S_N (nesting violated)");
          break;
        }
      const SiteSet shell = blow_up(a.inflated(delta), n);
      if (!shell.is_subset_of(SiteSet(Box::ball(Site(d), r + std::max(pad, 0)))))
        out.push_back("disconnect: (A^delta)_N leaves the field domain; padding insufficient");
      if (s.contains("eta")) parse_test_function(s["eta"], d);
    });
  if (j.contains("solidify"))
    guarded("solidify", [&] {
      const Json& s = j["solidify"];
      const SiteSet a = parse_site_set(require<Json>(s, "A"), d);
      const int offset = require<int>(s, "offset");
      if (offset < 1) out.push_back("solidify: offset must be at least 1");
      if (s.contains("B")) {
        const SiteSet b = parse_site_set(s["B"], d);
        if (!thicken(a, offset).is_subset_of(b))
          out.push_back("solidify: the interface U0 is not contained in B (nesting violated)");
        const int epsilon = get_or<int>(s, "epsilon", 3);
        if (c.window && !c.window->contains(b.bounding_box().expanded(epsilon)))
          out.push_back("solidify: the window must contain B padded by epsilon (padding violated)");
      }
      if (s.contains("scales")) check_scales(s["scales"], d, out);
    });
  if (c.window && c.environment_file) out.push_back("environment: give either window or environment_file, not both");
  return out;
}

}  // namespace hclab
