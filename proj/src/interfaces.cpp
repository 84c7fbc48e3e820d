#include "hclab/interfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hclab/error.hpp"
#include "hclab/parallel.hpp"
#include "hclab/rng.hpp"
#include "hclab/walk.hpp"

namespace hclab {

void DensityField::fill(const std::function<bool(const Site&)>& member) {
  const int d = dim_;
  std::size_t total = 1;
  for (int i = d - 1; i >= 0; --i) {
    stride_[static_cast<std::size_t>(i)] = total;
    total *= static_cast<std::size_t>(box_.extent(i) + 1);
  }
  prefix_.assign(total, 0);
  const std::size_t n = box_.volume();
  for (std::size_t k = 0; k < n; ++k) {
    const Site x = box_.site_at(k);
    if (!member(x)) continue;
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i)
      idx += static_cast<std::size_t>(x[i] - box_.lo()[i] + 1) * stride_[static_cast<std::size_t>(i)];
    prefix_[idx] = 1;
  }
  // Cumulative sums along each axis.
  for (int axis = 0; axis < d; ++axis) {
    const std::size_t s = stride_[static_cast<std::size_t>(axis)];
    const auto ext = static_cast<std::size_t>(box_.extent(axis) + 1);
    for (std::size_t idx = 0; idx < total; ++idx) {
      const std::size_t coord = (idx / s) % ext;
      if (coord > 0) prefix_[idx] += prefix_[idx - s];
    }
  }
}

DensityField DensityField::complement_of(const SiteSet& u0) {
  DensityField f = of_set(u0);
  f.complement_ = true;
  return f;
}

DensityField DensityField::of_set(const SiteSet& u1) {
  DensityField f;
  if (u1.empty()) throw InvalidArgument("density field needs a non-empty set (use a predicate for the empty set)");
  f.dim_ = u1.dim();
  f.box_ = u1.bounding_box();
  f.fill([&](const Site& x) { return u1.contains(x); });
  return f;
}

DensityField DensityField::of_predicate(const std::function<bool(const Site&)>& member, const Box& region) {
  validate_dimension(region.dim());
  if (region.empty()) throw GeometryError("density region is empty");
  DensityField f;
  f.dim_ = region.dim();
  f.box_ = region;
  f.bounded_queries_ = true;
  f.fill(member);
  return f;
}

std::int64_t DensityField::count_in(const Box& b) const {
  const int d = dim_;
  std::array<std::size_t, kMaxDim> lo{}, hi{};
  for (int i = 0; i < d; ++i) {
    const int a = std::max(b.lo()[i], box_.lo()[i]);
    const int c = std::min(b.hi()[i], box_.hi()[i]);
    if (a > c) return 0;
    lo[static_cast<std::size_t>(i)] = static_cast<std::size_t>(a - box_.lo()[i]);
    hi[static_cast<std::size_t>(i)] = static_cast<std::size_t>(c - box_.lo()[i] + 1);
  }
  std::int64_t sum = 0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    std::size_t idx = 0;
    int lows = 0;
    for (int i = 0; i < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (mask & (1u << i)) {
        idx += lo[ii] * stride_[ii];
        ++lows;
      } else {
        idx += hi[ii] * stride_[ii];
      }
    }
    sum += (lows % 2 == 0) ? prefix_[idx] : -prefix_[idx];
  }
  return sum;
}

double DensityField::density(const Site& x, int radius) const {
  if (radius < 0) throw InvalidArgument("density radius must be non-negative");
  if (x.dim() != dim_) throw InvalidArgument("density query dimension mismatch");
  const Box b = Box::ball(x, radius);
  if (bounded_queries_ && !box_.contains(b)) throw GeometryError("density query leaves the predicate region");
  const double vol = std::pow(2.0 * radius + 1.0, dim_);
  const double in = static_cast<double>(count_in(b));
  return complement_ ? 1.0 - in / vol : in / vol;
}

double DensityField::sigma(const Site& x, int l) const {
  if (l < 0 || l > 28) throw InvalidArgument("density scale out of range");
  return density(x, 1 << l);
}

double local_density(const DensityField& u1, const Site& x, int l, bool widened) {
  return widened ? u1.sigma_widened(x, l) : u1.sigma(x, l);
}

double average_sigma(const DensityField& u1, const Site& x, int l_prime, int l) {
  const Box b = Box::ball(x, 1 << l);
  const std::size_t n = b.volume();
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += u1.sigma(b.site_at(k), l_prime);
  return sum / static_cast<double>(n);
}

DichotomyResult dichotomy(const DensityField& u1, const Site& x, int l_prime, int l, double delta) {
  const Box b = Box::ball(x, 1 << l);
  const std::size_t n = b.volume();
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = u1.sigma(b.site_at(k), l_prime);
  DichotomyResult r;
  for (double v : values) r.beta += v;
  r.beta /= static_cast<double>(n);
  if (!(delta >= 0) || delta > std::min(r.beta, 1 - r.beta) + 1e-15)
    throw InvalidArgument("dichotomy needs 0 <= delta <= beta ^ (1 - beta)");
  std::size_t above = 0, below = 0, near = 0;
  for (double v : values) {
    if (v > r.beta + delta) ++above;
    else if (v < r.beta - delta) ++below;
    else ++near;
  }
  r.above = static_cast<double>(above) / static_cast<double>(n);
  r.below = static_cast<double>(below) / static_cast<double>(n);
  r.near = static_cast<double>(near) / static_cast<double>(n);
  r.clause_i = r.above >= delta / 2 && r.below >= delta / 2;
  r.clause_ii = r.near >= 0.25 - delta / 2;
  return r;
}

SegmentationCheck check_segmentation(const SiteSet& u0, const SiteSet& a, int l_star) {
  if (l_star < 0) throw InvalidArgument("l_star must be non-negative");
  SegmentationCheck r;
  r.worst_value = -1.0;
  if (a.empty()) {
    r.worst_value = 0.0;
    return r;
  }
  std::optional<DensityField> field;
  if (!u0.empty()) field = DensityField::complement_of(u0);
  for (const Site& x : a) {
    for (int l = 0; l <= l_star; ++l) {
      const double v = field ? field->sigma(x, l) : 1.0;
      if (v > r.worst_value) {
        r.worst_value = v;
        r.worst_site = x;
        r.worst_scale = l;
      }
    }
  }
  r.ok = r.worst_value <= 0.5;
  return r;
}

// ---------------------------------------------------------------------------

PorousInterface PorousInterface::make(SiteSet u0, SiteSet sigma, int epsilon, double chi, int l_star) {
  if (u0.empty()) throw GeometryError("segmentation U0 must be non-empty");
  if (epsilon < 1) throw InvalidArgument("epsilon must be a positive integer");
  if (!(chi > 0 && chi < 1)) throw InvalidArgument("chi must lie in (0, 1)");
  PorousInterface p;
  p.s = boundary(u0, BoundaryKind::external);
  p.u0 = std::move(u0);
  p.sigma = std::move(sigma);
  p.epsilon = epsilon;
  p.chi = chi;
  p.l_star = l_star;
  return p;
}

PorousCheck check_porous_interface(const EnvPtr& env, const PorousInterface& spec, HitMode mode,
                                   std::size_t replicas, std::uint64_t seed) {
  PorousCheck r;
  const std::size_t n = spec.s.size();
  r.probabilities.assign(n, 0.0);
  r.standard_errors.assign(n, 0.0);
  parallel_for(n, [&](std::size_t k) {
    const Site& x = spec.s[k];
    const SiteSet window = ball(x, spec.epsilon - 1);
    const SiteSet target = set_intersection(spec.sigma, window);
    if (target.empty()) return;
    if (target.contains(x)) {
      r.probabilities[k] = 1.0;
      return;
    }
    if (!env->window().contains(Box::ball(x, spec.epsilon - 1)))
      throw GeometryError("porous-interface window exceeds the environment");
    if (mode == HitMode::exact) {
      r.probabilities[k] = harmonic_potential(env, target, window).at(x);
    } else {
      const Estimate e = hitting_frequency(*env, x, target, window, replicas, mix64(seed ^ k));
      r.probabilities[k] = e.mean;
      r.standard_errors[k] = e.se;
    }
  });
  r.min_probability = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (r.probabilities[k] < r.min_probability || k == 0) {
      r.min_probability = r.probabilities[k];
      r.argmin = spec.s[k];
    }
  }
  r.ok = n > 0 && r.min_probability >= spec.chi;
  return r;
}

PorousInterface build_shell_interface(const EnvPtr& env, const SiteSet& a, int offset, double puncture_fraction,
                                      int epsilon, std::uint64_t seed) {
  if (!(puncture_fraction >= 0 && puncture_fraction < 1)) throw InvalidArgument("puncture fraction must lie in [0, 1)");
  if (offset < 0) throw InvalidArgument("shell offset must be non-negative");
  if (a.empty()) throw GeometryError("shell interface needs a non-empty set");
  PorousInterface p;
  p.u0 = thicken(a, offset);
  p.s = boundary(p.u0, BoundaryKind::external);
  const SiteSet shell = boundary(p.u0, BoundaryKind::internal);
  std::vector<Site> kept;
  for (const Site& x : shell) {
    std::uint64_t key = 0x51a3e11ULL;
    for (int i = 0; i < x.dim(); ++i) key = mix64(key ^ static_cast<std::uint32_t>(x[i]));
    if (keyed_uniform(seed, key, 0x9u) >= puncture_fraction) kept.push_back(x);
  }
  p.sigma = SiteSet(std::move(kept));
  p.epsilon = epsilon;
  p.l_star = 0;
  p.chi = 1.0;
  const PorousCheck c = check_porous_interface(env, p, HitMode::exact);
  p.chi = c.min_probability;
  return p;
}

// ---------------------------------------------------------------------------

int L_of_J(int dim, int J) {
  if (J < 1) throw InvalidArgument("J must be at least 1");
  const double c0 = dim * std::pow(2.0, dim - 1);
  for (int L = 5;; ++L)
    if (c0 * std::pow(2.0, -L) <= 1.0 / (200.0 * J)) return L;
}

int l_min(double delta, int base) {
  if (!(delta > 0)) throw InvalidArgument("l_min needs delta > 0");
  return std::max(base, static_cast<int>(std::ceil(std::log2(8.0 / delta) - 1e-12)));
}

ScaleSystem scale_system(int dim, int I, int J, int L, int l_star, int l_min_base) {
  validate_dimension(dim);
  if (I < 1 || J < 1 || L < 1) throw InvalidArgument("I, J and L must be positive");
  if (l_star < 0) throw InvalidArgument("l_star must be non-negative");
  ScaleSystem s;
  s.dim = dim;
  s.I = I;
  s.J = J;
  s.L = L;
  s.l_star = l_star;
  s.l_min_base = l_min_base;
  s.c0 = dim * std::pow(2.0, dim - 1);
  s.L_of_J = L_of_J(dim, J);
  s.L_valid = L >= s.L_of_J;
  const int step = (J + 1) * L;
  s.l0 = (l_star / step) * step;
  const int floor_excl = s.l0 - I * step;
  for (int l = s.l0; l > floor_excl && l >= 0; l -= L) s.a_star.push_back(l);
  for (int l = s.l0; l > floor_excl && l >= 0; l -= step) s.a.push_back(l);
  s.l_min = l_min(1.0 / (200.0 * J), l_min_base);
  s.compatible = s.l0 - (I + 1) * step > s.l_min;
  s.alpha_tilde = std::pow(4.0, -dim) / 3.0;
  return s;
}

SiteSet resonance_set(const DensityField& u1, const ScaleSystem& scales, const SiteSet& window) {
  std::vector<Site> out;
  const double lo = scales.alpha_tilde, hi = 1 - scales.alpha_tilde;
  for (const Site& x : window) {
    int hits = 0;
    for (int l : scales.a_star) {
      const double v = u1.sigma_widened(x, l);
      if (v >= lo && v <= hi) ++hits;
    }
    if (hits >= scales.J) out.push_back(x);
  }
  return SiteSet(std::move(out));
}

SiteSet resonance_set(const SiteSet& u0, const ScaleSystem& scales, const SiteSet& window) {
  if (u0.empty()) return SiteSet();
  return resonance_set(DensityField::complement_of(u0), scales, window);
}

// ---------------------------------------------------------------------------

EscapeResult escape_probability(const EnvPtr& env, const SiteSet& a, const SiteSet& sigma, const SiteSet& b,
                                double green_constant, const SolverOptions& options) {
  if (a.empty()) throw GeometryError("escape probability needs a non-empty starting set");
  if (!a.is_subset_of(b) || !sigma.is_subset_of(b)) throw GeometryError("A_N and Sigma must lie inside B");
  EscapeResult r;
  r.per_site.assign(a.size(), 1.0);
  if (!sigma.empty()) {
    const Potential p = solve_potential(env, sigma, b, options);
    for (std::size_t i = 0; i < a.size(); ++i) r.per_site[i] = std::max(0.0, 1.0 - p.h.at(a[i]));
    const int dist = linf_distance(sigma, boundary(b, BoundaryKind::external));
    r.far_field_bound = green_constant * p.capacity / std::pow(static_cast<double>(dist), env->dim() - 2);
  }
  r.sup = -1.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (r.per_site[i] > r.sup) {
      r.sup = r.per_site[i];
      r.argsup = a[i];
    }
  r.sup_lower = std::max(0.0, r.sup - r.far_field_bound);
  return r;
}

CapacityRatioReport capacity_ratio_check(const EnvPtr& env, const SiteSet& a, const SiteSet& sigma, const SiteSet& b,
                                         double tolerance, const SolverOptions& options) {
  if (a.empty()) throw GeometryError("capacity ratio needs a non-empty set A");
  if (!a.is_subset_of(b) || !sigma.is_subset_of(b)) throw GeometryError("A_N and Sigma must lie inside B");
  CapacityRatioReport r;
  const Potential pa = solve_potential(env, a, b, options);
  r.cap_a = pa.capacity;
  Field h_sigma = Field::zeros(b);
  if (!sigma.empty()) {
    const Potential ps = solve_potential(env, sigma, b, options);
    r.cap_sigma = ps.capacity;
    h_sigma = ps.h;
  }
  r.inf_hit = std::numeric_limits<double>::infinity();
  for (const Site& x : a) r.inf_hit = std::min(r.inf_hit, h_sigma.at(x));
  r.ratio = r.cap_sigma / r.cap_a;
  const Field diff(b, pa.h.values - h_sigma.values);
  r.energy_difference = dirichlet_energy(*env, diff);
  r.identity_gap = r.energy_difference - (r.cap_sigma - r.cap_a);
  r.slack = r.cap_sigma - r.inf_hit * r.cap_a;
  r.holds = r.slack >= -tolerance;
  return r;
}

}  // namespace hclab
