#include "hclab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hclab/error.hpp"

namespace hclab {

Field::Field(SiteSet d, Vector v) : domain(std::move(d)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != domain.size())
    throw InvalidArgument("field values do not match the domain size");
}

Field Field::zeros(SiteSet d) {
  const auto n = static_cast<Eigen::Index>(d.size());
  return Field(std::move(d), Vector::Zero(n));
}

Field Field::indicator(SiteSet d, const SiteSet& support) {
  Field f = zeros(std::move(d));
  for (std::size_t i = 0; i < f.domain.size(); ++i)
    if (support.contains(f.domain[i])) f.values[static_cast<Eigen::Index>(i)] = 1.0;
  return f;
}

Field Field::from_function(SiteSet d, const std::function<double(const Site&)>& fn) {
  Field f = zeros(std::move(d));
  for (std::size_t i = 0; i < f.domain.size(); ++i) f.values[static_cast<Eigen::Index>(i)] = fn(f.domain[i]);
  return f;
}

double Field::at(const Site& x) const {
  const auto i = domain.index_of(x);
  return i < 0 ? 0.0 : values[i];
}

Vector Field::restricted_to(const SiteSet& other) const {
  Vector out(static_cast<Eigen::Index>(other.size()));
  for (std::size_t i = 0; i < other.size(); ++i) out[static_cast<Eigen::Index>(i)] = at(other[i]);
  return out;
}

SiteSet Field::support() const {
  std::vector<Site> s;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (values[static_cast<Eigen::Index>(i)] != 0.0) s.push_back(domain[i]);
  return SiteSet(std::move(s));
}

// ---------------------------------------------------------------------------

DirichletOperator::DirichletOperator(EnvPtr env, SiteSet domain, SolverOptions options)
    : env_(std::move(env)), domain_(std::move(domain)), options_(options) {
  if (!env_) throw InvalidArgument("Dirichlet operator needs an environment");
  if (domain_.empty()) throw GeometryError("Dirichlet operator on an empty domain");
  if (domain_.dim() != env_->dim()) throw InvalidArgument("domain and environment dimensions differ");
  const int d = env_->dim();
  const std::size_t n = domain_.size();
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(n * static_cast<std::size_t>(2 * d + 1));
  site_weights_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Site& x = domain_[i];
    const double wx = env_->site_weight(x);
    site_weights_[static_cast<Eigen::Index>(i)] = wx;
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), wx);
    for (int dir = 0; dir < d; ++dir) {
      for (int sign : {-1, 1}) {
        const Site y = x.step(dir, sign);
        const double w = env_->weight(x, y);
        const auto j = domain_.index_of(y);
        if (j >= 0)
          triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), -w);
        else
          boundary_edges_.push_back({i, y, w});
      }
    }
  }
  matrix_.resize(static_cast<int>(n), static_cast<int>(n));
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
}

const SpdSolver& DirichletOperator::solver() const {
  std::call_once(solver_once_, [this] { solver_ = std::make_unique<SpdSolver>(matrix_, options_); });
  return *solver_;
}

Vector DirichletOperator::solve(const Vector& b) const { return solver().solve(b); }
Matrix DirichletOperator::solve(const Matrix& b) const { return solver().solve(b); }

Vector DirichletOperator::exterior_flux(const std::function<double(const Site&)>& v) const {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(size()));
  for (const auto& e : boundary_edges_) b[static_cast<Eigen::Index>(e.inner)] += e.weight * v(e.outer);
  return b;
}

// ---------------------------------------------------------------------------

Matrix green_killed_full(const DirichletOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Matrix g = op.solve(Matrix(Matrix::Identity(n, n)));
  return g;
}

Vector green_killed_column(const DirichletOperator& op, const Site& y) {
  const auto j = op.domain().index_of(y);
  Vector e = Vector::Zero(static_cast<Eigen::Index>(op.size()));
  if (j < 0) return e;
  e[j] = 1.0;
  return op.solve(e);
}

double green_killed_entry(const DirichletOperator& op, const Site& x, const Site& y) {
  const auto i = op.domain().index_of(x);
  if (i < 0 || !op.domain().contains(y)) return 0.0;
  return green_killed_column(op, y)[i];
}

// ---------------------------------------------------------------------------

Potential solve_potential(const EnvPtr& env, const SiteSet& a, const SiteSet& b, const SolverOptions& options) {
  if (a.empty()) throw GeometryError("harmonic potential needs a non-empty target set");
  if (!a.is_subset_of(b)) throw GeometryError("target set A is not contained in the domain B");
  Potential p;
  p.a = a;
  p.b = b;
  p.h = Field::indicator(b, a);
  const SiteSet interior = set_difference(b, a);
  if (!interior.empty()) {
    DirichletOperator op(env, interior, options);
    const Vector rhs = op.exterior_flux([&](const Site& y) { return a.contains(y) ? 1.0 : 0.0; });
    const Vector sol = op.solve(rhs);
    p.stats = op.solver().last_stats();
    for (std::size_t i = 0; i < interior.size(); ++i)
      p.h.values[b.index_of(interior[i])] = std::clamp(sol[static_cast<Eigen::Index>(i)], 0.0, 1.0);
  }
  // e(x) = omega_x - sum_{y ~ x} omega_xy h(y), for x in A.
  p.e = Field::zeros(a);
  const int d = env->dim();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Site& x = a[i];
    double flux = 0.0;
    for (int dir = 0; dir < d; ++dir)
      for (int sign : {-1, 1}) {
        const Site y = x.step(dir, sign);
        flux += env->weight(x, y) * (1.0 - p.h.at(y));
      }
    p.e.values[static_cast<Eigen::Index>(i)] = flux;
    total += flux;
  }
  p.capacity = total;
  return p;
}

Field harmonic_potential(const EnvPtr& env, const SiteSet& a, const SiteSet& b, const SolverOptions& options) {
  return solve_potential(env, a, b, options).h;
}

Field equilibrium_measure(const EnvPtr& env, const SiteSet& a, const SiteSet& b, const SolverOptions& options) {
  return solve_potential(env, a, b, options).e;
}

double capacity(const EnvPtr& env, const SiteSet& a, const SiteSet& b, const SolverOptions& options) {
  const Potential p = solve_potential(env, a, b, options);
  return dirichlet_energy(*env, p.h);
}

// ---------------------------------------------------------------------------

double dirichlet_form(const Conductances& env, const Field& f, const Field& g) {
  if (f.domain.dim() != env.dim() && !f.domain.empty()) throw InvalidArgument("field dimension mismatch");
  const SiteSet support = set_union(f.domain, g.domain);
  const int d = env.dim();
  double sum = 0.0;
  for (const Site& x : support) {
    const double fx = f.at(x), gx = g.at(x);
    for (int dir = 0; dir < d; ++dir) {
      for (int sign : {-1, 1}) {
        const Site y = x.step(dir, sign);
        const bool inside = support.contains(y);
        if (inside && sign < 0) continue;  // count each internal edge once
        const double df = f.at(y) - fx, dg = g.at(y) - gx;
        if (df == 0.0 || dg == 0.0) continue;
        sum += env.weight(x, y) * df * dg;
      }
    }
  }
  return sum;
}

double energy_W(const DirichletOperator& op, const Field& h) {
  const SiteSet& u = op.domain();
  Vector hv = Vector::Zero(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < h.domain.size(); ++i) {
    const double v = h.values[static_cast<Eigen::Index>(i)];
    if (v == 0.0) continue;
    const auto j = u.index_of(h.domain[i]);
    if (j < 0) throw GeometryError("energy_W: h is supported outside the domain");
    hv[j] = v;
  }
  if (hv.isZero(0.0)) return 0.0;
  return hv.dot(op.solve(hv));
}

// ---------------------------------------------------------------------------

HeatKernel heat_kernel_killed(const DirichletOperator& op, double t, const Site& x, double tol) {
  if (!(tol > 0)) throw InvalidArgument("heat kernel tolerance must be positive");
  if (!(t >= 0)) throw InvalidArgument("heat kernel time must be non-negative");
  const auto ix = op.domain().index_of(x);
  if (ix < 0) throw GeometryError("heat kernel start point outside the domain");
  const Vector& w = op.site_weights();
  const auto n = static_cast<Eigen::Index>(op.size());
  HeatKernel out;
  Vector p = Vector::Zero(n);
  p[ix] = 1.0;
  Vector acc = Vector::Zero(n);
  if (t == 0) {
    out.q = p.cwiseQuotient(w);
    out.terms = 1;
    return out;
  }
  const double log_t = std::log(t);
  for (int k = 0;; ++k) {
    const double weight = std::exp(-t + k * log_t - std::lgamma(k + 1.0));
    acc += weight * p;
    const double next = k + 1.0;
    // Chernoff bound on P[Poisson(t) >= k + 1].
    if (next > t) {
      const double tail = std::exp(-t + next * (1.0 + log_t - std::log(next)));
      if (tail < tol) {
        out.terms = k + 1;
        out.tail_bound = tail;
        break;
      }
    }
    // p_{k+1} = P^T p_k = p_k - L (p_k / omega)
    p = p - op.matrix() * p.cwiseQuotient(w);
  }
  out.q = acc.cwiseQuotient(w);
  return out;
}

// ---------------------------------------------------------------------------

UnkilledCapacity capacity_unkilled_approx(const EnvPtr& env, const SiteSet& a, const std::vector<int>& radii,
                                          double green_constant, const SolverOptions& options,
                                          double monotone_tolerance) {
  if (radii.empty()) throw InvalidArgument("capacity_unkilled_approx needs at least one radius");
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end())
    throw InvalidArgument("radii must be strictly increasing");
  const int d = env->dim();
  int reach = 0;
  for (const Site& x : a) reach = std::max(reach, linf_norm(x));
  UnkilledCapacity out;
  for (int r : radii) {
    if (r < reach) throw GeometryError("A is not inside B(0, R)");
    const SiteSet b = ball(Site(d), r);
    const double cap = solve_potential(env, a, b, options).capacity;
    const double dist = static_cast<double>(r + 1 - reach);
    out.radii.push_back(r);
    out.values.push_back(cap);
    out.error_bounds.push_back(green_constant * cap * cap / std::pow(dist, d - 2));
  }
  for (std::size_t k = 1; k < out.values.size(); ++k)
    if (out.values[k] > out.values[k - 1] * (1 + monotone_tolerance) + monotone_tolerance) out.monotone = false;
  out.value = out.values.back();
  out.error_bound = out.error_bounds.back();
  return out;
}

}  // namespace hclab
