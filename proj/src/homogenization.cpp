#include "hclab/homogenization.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "hclab/error.hpp"
#include "hclab/parallel.hpp"
#include "hclab/percolation.hpp"

namespace hclab {

namespace {

constexpr std::size_t kChunk = 256;

double scale_factor(int n, int d) { return std::pow(static_cast<double>(n), 2 - d); }

void require_ladder(const std::vector<int>& Ns) {
  if (Ns.empty()) throw InvalidArgument("the N ladder is empty");
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    if (Ns[k] < 1) throw InvalidArgument("N must be positive");
    if (k > 0 && Ns[k] <= Ns[k - 1]) throw InvalidArgument("the N ladder must be strictly increasing");
  }
}

struct NestedSets {
  SiteSet a, b;
};

NestedSets blow_up_pair(const Conductances& env, const ShapeSpec& a, const ShapeSpec& b, int n) {
  NestedSets s{blow_up(a, n), blow_up(b, n)};
  if (s.a.empty()) throw GeometryError("A_N is empty at N = " + std::to_string(n));
  if (!s.a.is_subset_of(s.b)) throw GeometryError("A_N is not contained in B_N at N = " + std::to_string(n));
  if (!env.window().contains(s.b.bounding_box()))
    throw GeometryError("B_N leaves the environment window at N = " + std::to_string(n));
  return s;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

CauchyVerdict cauchy_verdict(const std::vector<double>& values, double ratio) {
  CauchyVerdict v;
  v.ratio = ratio;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double denom = std::abs(values[k]);
    v.relative_changes.push_back(denom > 0 ? std::abs(values[k] - values[k - 1]) / denom
                                           : std::abs(values[k] - values[k - 1]));
  }
  const auto& c = v.relative_changes;
  v.ok = c.size() >= 2 && c.back() < ratio * c[c.size() - 2];
  return v;
}

Box scaling_window(const ShapeSpec& b, int n_max) {
  const auto bounds = b.bounds();
  if (!bounds) throw GeometryError("the outer shape must be bounded");
  Site lo(b.dim()), hi(b.dim());
  for (int i = 0; i < b.dim(); ++i) {
    lo[i] = static_cast<int>(std::floor(bounds->first[static_cast<std::size_t>(i)] * n_max)) - 1;
    hi[i] = static_cast<int>(std::ceil(bounds->second[static_cast<std::size_t>(i)] * n_max)) + 1;
  }
  return Box(lo, hi);
}

ScalingSweep capacity_scaling(const EnvPtr& env, const ShapeSpec& a, const ShapeSpec& b, const std::vector<int>& Ns,
                              double ratio, const SolverOptions& options) {
  require_ladder(Ns);
  ScalingSweep out;
  std::vector<double> scaled;
  for (int n : Ns) {
    const NestedSets s = blow_up_pair(*env, a, b, n);
    const auto t0 = std::chrono::steady_clock::now();
    const Potential p = solve_potential(env, s.a, s.b, options);
    const auto t1 = std::chrono::steady_clock::now();
    ScalingRow row;
    row.N = n;
    row.unknowns = s.b.size() - s.a.size();
    row.capacity = p.capacity;
    row.scaled_capacity = p.capacity * scale_factor(n, env->dim());
    row.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
    row.stats = p.stats;
    out.rows.push_back(row);
    scaled.push_back(row.scaled_capacity);
  }
  for (std::size_t k = 1; k < scaled.size(); ++k) out.differences.push_back(scaled[k] - scaled[k - 1]);
  out.verdict = cauchy_verdict(scaled, ratio);
  return out;
}

ScalingSweep capacity_scaling(const EnvironmentLaw& law, double lambda, const ShapeSpec& a, const ShapeSpec& b,
                              const std::vector<int>& Ns, std::uint64_t seed, double ratio,
                              const SolverOptions& options) {
  require_ladder(Ns);
  const EnvPtr env = share(Conductances::sample(law, lambda, scaling_window(b, Ns.back()), seed));
  return capacity_scaling(env, a, b, Ns, ratio, options);
}

DiffusivityEstimate estimate_diffusivity(const Conductances& env, Clock clock, double t, std::size_t replicas,
                                         std::uint64_t seed, const Site& start) {
  if (!(t > 0)) throw InvalidArgument("time horizon must be positive");
  if (replicas < 2) throw InvalidArgument("at least two replicas are needed");
  const Box& w = env.window();
  if (!w.contains(start)) throw GeometryError("start site lies outside the window");
  const int d = env.dim();
  int radius = std::numeric_limits<int>::max();
  for (int i = 0; i < d; ++i) radius = std::min({radius, start[i] - w.lo()[i], w.hi()[i] - start[i]});
  if (radius < 1) throw GeometryError("start site lies on the window boundary");

  StopRules rules;
  rules.radius = radius;
  rules.time_cap = t;
  std::vector<Site> ends(replicas);
  std::vector<char> touched(replicas, 0);
  parallel_for(replicas, [&](std::size_t r) {
    StreamRng rng(seed, derive_stream("diffusivity", r));
    const WalkPath path = walk_simulate(env, start, rules, rng, clock, false);
    touched[r] = path.stop_reason == StopReason::radius;
    ends[r] = path.end();
  });

  DiffusivityEstimate out;
  out.clock = clock;
  out.t = t;
  std::vector<Eigen::VectorXd> disp;
  for (std::size_t r = 0; r < replicas; ++r) {
    if (touched[r]) {
      ++out.discarded;
      continue;
    }
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = ends[r][i] - start[i];
    disp.push_back(x);
  }
  out.used = disp.size();
  if (static_cast<double>(out.discarded) > 0.01 * static_cast<double>(replicas))
    throw GeometryError("more than 1% of the walks reached the window boundary; enlarge the window");
  if (out.used < 2) throw GeometryError("too few walks stayed inside the window");

  const auto n = static_cast<double>(out.used);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : disp) mean += x;
  mean /= n;
  out.a = Matrix::Zero(d, d);
  out.se = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      std::vector<double> prod;
      prod.reserve(disp.size());
      for (const auto& x : disp) prod.push_back((x(i) - mean(i)) * (x(j) - mean(j)) / t);
      const Estimate e = mean_estimate(prod);
      out.a(i, j) = e.mean * n / (n - 1.0);
      out.se(i, j) = e.se;
    }

  double total = 0.0;
  for (std::size_t k = 0; k < w.volume(); ++k) total += env.site_weight(w.site_at(k));
  out.mean_site_weight = total / static_cast<double>(w.volume());
  out.vsrw_equivalent = clock == Clock::csrw ? Matrix(out.mean_site_weight * out.a) : out.a;
  return out;
}

DiffusivityEstimate estimate_diffusivity(const Conductances& env, Clock clock, double t, std::size_t replicas,
                                         std::uint64_t seed) {
  const Box& w = env.window();
  Site c(env.dim());
  for (int i = 0; i < env.dim(); ++i) c[i] = w.lo()[i] + (w.hi()[i] - w.lo()[i]) / 2;
  return estimate_diffusivity(env, clock, t, replicas, seed, c);
}

double continuum_capacity_reference(ContinuumShape shape, double r, double R, double sigma2, int d) {
  if (d != 3) throw InvalidArgument("closed-form continuum capacities are available in d = 3 only");
  if (!(r > 0) || !(sigma2 > 0)) throw InvalidArgument("radius and sigma^2 must be positive");
  const double two_pi = 2.0 * std::numbers::pi;
  switch (shape) {
    case ContinuumShape::ball:
      return two_pi * sigma2 * r;
    case ContinuumShape::annulus:
      if (!(R > r)) throw InvalidArgument("annulus needs R > r");
      if (std::isinf(R)) return two_pi * sigma2 * r;
      return two_pi * sigma2 * r * R / (R - r);
  }
  throw InvalidArgument("unsupported continuum shape");
}

double annulus_potential(double radius, double r, double R) {
  if (radius <= r) return 1.0;
  if (radius >= R) return 0.0;
  return (1.0 / radius - 1.0 / R) / (1.0 / r - 1.0 / R);
}

double annulus_pairing_reference(const std::vector<double>& center, double r, double R, const TestFunction& f,
                                 int radial_intervals) {
  if (center.size() != 3) throw InvalidArgument("the annulus reference is three-dimensional");
  if (!(0 < r && r < R)) throw InvalidArgument("annulus needs 0 < r < R");
  if (radial_intervals < 2 || radial_intervals % 2) throw InvalidArgument("radial intervals must be even and >= 2");
  std::vector<double> gx, gw;
  gauss_legendre(32, gx, gw);
  constexpr int kAzimuth = 64;
  const auto spherical_mean = [&](double rho) {
    double s = 0.0;
    std::array<double, 3> p{};
    for (std::size_t a = 0; a < gx.size(); ++a) {
      const double ct = gx[a], st = std::sqrt(1.0 - ct * ct);
      for (int b = 0; b < kAzimuth; ++b) {
        const double ph = 2.0 * std::numbers::pi * b / kAzimuth;
        p[0] = center[0] + rho * st * std::cos(ph);
        p[1] = center[1] + rho * st * std::sin(ph);
        p[2] = center[2] + rho * ct;
        s += gw[a] * f(p);
      }
    }
    return s * 2.0 * std::numbers::pi / kAzimuth;
  };
  const auto simpson = [&](double lo, double hi) {
    const double h = (hi - lo) / radial_intervals;
    double s = 0.0;
    for (int k = 0; k <= radial_intervals; ++k) {
      const double rho = lo + k * h;
      const double c = (k == 0 || k == radial_intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += c * rho * rho * annulus_potential(rho, r, R) * spherical_mean(rho);
    }
    return s * h / 3.0;
  };
  return simpson(0.0, r) + simpson(r, R);
}

double field_pairing(const Field& phi, int n, const TestFunction& eta) {
  return pairing_weights(phi.domain, n, eta).dot(phi.values);
}

PairingSweep potential_pairing_convergence(const EnvPtr& env, const ShapeSpec& a, const ShapeSpec& b,
                                           const TestFunction& f, const std::vector<int>& Ns, double ratio,
                                           const SolverOptions& options) {
  require_ladder(Ns);
  PairingSweep out;
  std::vector<double> values;
  for (int n : Ns) {
    const NestedSets s = blow_up_pair(*env, a, b, n);
    const Field h = harmonic_potential(env, s.a, s.b, options);
    const double v = field_pairing(h, n, f);
    out.rows.push_back({n, v});
    values.push_back(v);
  }
  out.verdict = cauchy_verdict(values, ratio);
  if (env->dim() == 3 && a.kind() == ShapeSpec::Kind::euclidean_ball &&
      b.kind() == ShapeSpec::Kind::euclidean_ball && a.center() == b.center() && a.radius() < b.radius())
    out.continuum_reference = annulus_pairing_reference(a.center(), a.radius(), b.radius(), f);
  return out;
}

// ---------------------------------------------------------------------------

DisconnectionExperiment::DisconnectionExperiment(const EnvPtr& env, DisconnectionSetup setup,
                                                 const SolverOptions& options)
    : env_(env), setup_(std::move(setup)) {
  const int d = env_->dim();
  if (setup_.n < 1) throw InvalidArgument("N must be positive");
  if (!(setup_.m > 0)) throw InvalidArgument("M must be positive");
  if (setup_.pad < 0) throw InvalidArgument("padding must be non-negative");
  if (setup_.delta_shell < 0) throw InvalidArgument("delta must be non-negative");
  if (setup_.a.dim() != d) throw InvalidArgument("shape dimension does not match the environment");
  const int radius = static_cast<int>(std::floor(setup_.m * setup_.n));
  const Box box = Box::ball(Site(d), radius + setup_.pad);
  if (!env_->window().contains(box)) throw GeometryError("the field domain leaves the environment window");
  domain_ = SiteSet(box);
  a_n_ = blow_up(setup_.a, setup_.n);
  if (a_n_.empty()) throw GeometryError("A_N is empty");
  for (const Site& x : a_n_)
    if (linf_norm(x) >= radius) throw GeometryError("A_N must lie strictly inside S_N");
  shell_n_ = blow_up(setup_.a.inflated(setup_.delta_shell), setup_.n);
  if (!shell_n_.is_subset_of(domain_)) throw GeometryError("(A^delta)_N leaves the field domain");
  s_n_ = sphere(d, setup_.m, setup_.n);

  op_ = std::make_shared<const DirichletOperator>(env_, domain_, options);
  direct_ = std::make_shared<const GffSampler>(op_, "disconnect/direct");
  tilted_ = std::make_shared<const GffSampler>(op_, "disconnect/tilted");
  const Potential p = solve_potential(env_, shell_n_, domain_, options);
  h_shell_ = p.h;
  const double gap = setup_.alpha_star_ref - setup_.alpha;
  reference_rate_ = 0.5 * gap * gap * scale_factor(setup_.n, d) * p.capacity;

  const std::size_t n = domain_.size();
  neighbors_.assign(n * 2 * static_cast<std::size_t>(d), -1);
  for (std::size_t k = 0; k < n; ++k)
    for (int i = 0; i < d; ++i)
      for (int s = 0; s < 2; ++s)
        neighbors_[(k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)) * 2 + static_cast<std::size_t>(s)] =
            static_cast<std::int32_t>(domain_.index_of(domain_[k].step(i, s ? 1 : -1)));
  for (const Site& x : a_n_) a_index_.push_back(static_cast<std::int32_t>(domain_.index_of(x)));
  s_mask_.assign(n, 0);
  for (const Site& x : s_n_) s_mask_[static_cast<std::size_t>(domain_.index_of(x))] = 1;
}

bool DisconnectionExperiment::disconnected(const double* values, double alpha) const {
  const std::size_t n = domain_.size();
  const std::size_t deg = neighbors_.size() / n;
  std::vector<char> seen(n, 0);
  std::vector<std::int32_t> stack;
  for (std::int32_t k : a_index_)
    if (values[k] >= alpha && !seen[static_cast<std::size_t>(k)]) {
      seen[static_cast<std::size_t>(k)] = 1;
      stack.push_back(k);
    }
  while (!stack.empty()) {
    const auto k = static_cast<std::size_t>(stack.back());
    stack.pop_back();
    if (s_mask_[k]) return false;
    for (std::size_t e = 0; e < deg; ++e) {
      const std::int32_t j = neighbors_[k * deg + e];
      if (j >= 0 && !seen[static_cast<std::size_t>(j)] && values[j] >= alpha) {
        seen[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
    }
  }
  return true;
}

Field DisconnectionExperiment::tilt(double epsilon) const {
  const double c = setup_.alpha_star_ref - setup_.alpha + epsilon;
  return Field(domain_, -c * h_shell_.values);
}

Field DisconnectionExperiment::profile() const {
  const Field h = harmonic_potential(env_, a_n_, domain_, op_->options());
  return Field(domain_, -(setup_.alpha_star_ref - setup_.alpha) * h.values);
}

Estimate DisconnectionExperiment::direct_estimate(std::size_t replicas, std::uint64_t seed) const {
  std::size_t hits = 0;
  for (std::size_t first = 0; first < replicas; first += kChunk) {
    const std::size_t count = std::min(kChunk, replicas - first);
    const Matrix m = direct_->sample_matrix(seed, first, count);
    std::vector<char> hit(count, 0);
    parallel_for(count, [&](std::size_t j) { hit[j] = disconnected(m.col(static_cast<Eigen::Index>(j)).data(), setup_.alpha); });
    for (char h : hit) hits += h ? 1 : 0;
  }
  return binomial_estimate(hits, replicas);
}

std::vector<double> DisconnectionExperiment::bottleneck_levels(std::size_t replicas, std::uint64_t seed) const {
  std::vector<double> out(replicas);
  for (std::size_t first = 0; first < replicas; first += kChunk) {
    const std::size_t count = std::min(kChunk, replicas - first);
    const Matrix m = direct_->sample_matrix(seed, first, count);
    parallel_for(count, [&](std::size_t j) {
      out[first + j] = bottleneck_level(Field(domain_, m.col(static_cast<Eigen::Index>(j))), a_n_, s_n_);
    });
  }
  return out;
}

DisconnectionReport DisconnectionExperiment::tilted_estimate(double epsilon, std::size_t replicas,
                                                             std::uint64_t seed) const {
  if (replicas == 0) throw InvalidArgument("replicas must be positive");
  const TiltedSampler sampler(tilted_, tilt(epsilon));
  std::vector<double> lw(replicas);
  std::vector<char> hit(replicas, 0);
  for (std::size_t first = 0; first < replicas; first += kChunk) {
    const std::size_t count = std::min(kChunk, replicas - first);
    Vector w;
    const Matrix m = sampler.sample_matrix(seed, first, count, w);
    parallel_for(count, [&](std::size_t j) {
      hit[first + j] = disconnected(m.col(static_cast<Eigen::Index>(j)).data(), setup_.alpha);
      lw[first + j] = w(static_cast<Eigen::Index>(j));
    });
  }

  DisconnectionReport out;
  out.epsilon = epsilon;
  out.entropy = sampler.entropy();
  out.reference_rate = reference_rate_;
  std::vector<double> y(replicas, 0.0);
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t r = 0; r < replicas; ++r)
    if (hit[r]) {
      ++out.tilted_hits;
      y[r] = std::exp(lw[r]);
      sw += y[r];
      sw2 += y[r] * y[r];
    }
  out.is_estimate = mean_estimate(y);
  out.tilted_frequency = binomial_estimate(out.tilted_hits, replicas);
  out.effective_hits = sw2 > 0 ? sw * sw / sw2 : 0.0;
  out.degenerate = out.tilted_hits == 0;
  const double pt = out.tilted_frequency.mean;
  out.log_entropy_bound =
      pt > 0 ? std::log(pt) - (out.entropy + std::exp(-1.0)) / pt : -std::numeric_limits<double>::infinity();
  out.rate_proxy = out.is_estimate.mean > 0
                       ? -scale_factor(setup_.n, env_->dim()) * std::log(out.is_estimate.mean)
                       : std::numeric_limits<double>::infinity();
  return out;
}

RepulsionReport DisconnectionExperiment::repulsion(double epsilon, const TestFunction& eta, double delta,
                                                   std::size_t replicas, std::uint64_t seed) const {
  if (replicas < 2) throw InvalidArgument("at least two replicas are needed");
  const Field f = tilt(epsilon);
  const TiltedSampler sampler(tilted_, f);
  const Vector v = pairing_weights(domain_, setup_.n, eta);
  RepulsionReport out;
  out.tilt_pairing = v.dot(f.values);
  out.profile_pairing = v.dot(profile().values);

  std::vector<double> lw(replicas), pairing(replicas);
  std::vector<char> hit(replicas, 0);
  for (std::size_t first = 0; first < replicas; first += kChunk) {
    const std::size_t count = std::min(kChunk, replicas - first);
    Vector w;
    const Matrix m = sampler.sample_matrix(seed, first, count, w);
    parallel_for(count, [&](std::size_t j) {
      const auto col = m.col(static_cast<Eigen::Index>(j));
      hit[first + j] = disconnected(col.data(), setup_.alpha);
      lw[first + j] = w(static_cast<Eigen::Index>(j));
      pairing[first + j] = v.dot(col);
    });
  }
  out.tilted_mean = mean_estimate(pairing);

  std::vector<double> num(replicas, 0.0), den(replicas, 0.0), dev(replicas, 0.0);
  for (std::size_t r = 0; r < replicas; ++r)
    if (hit[r]) {
      ++out.tilted_hits;
      const double w = std::exp(lw[r]);
      num[r] = w * pairing[r];
      den[r] = w;
      if (std::abs(pairing[r] - out.profile_pairing) >= delta) dev[r] = w;
    }
  out.deviation = mean_estimate(dev);
  const Estimate d = mean_estimate(den);
  if (d.mean > 0) {
    const double ratio = mean_estimate(num).mean / d.mean;
    std::vector<double> resid(replicas);
    for (std::size_t r = 0; r < replicas; ++r) resid[r] = num[r] - ratio * den[r];
    out.conditional_mean = {ratio, mean_estimate(resid).se / d.mean, out.tilted_hits};
  } else {
    out.conditional_mean = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), 0};
  }
  return out;
}

}  // namespace hclab
