#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "hclab/environment.hpp"
#include "hclab/lattice.hpp"
#include "hclab/solver.hpp"

namespace hclab {

using EnvPtr = std::shared_ptr<const Conductances>;

inline EnvPtr share(Conductances env) { return std::make_shared<const Conductances>(std::move(env)); }

/// A real function on Z^d given by its values on a finite site set, zero elsewhere.
struct Field {
  SiteSet domain;
  Vector values;

  Field() = default;
  Field(SiteSet d, Vector v);
  static Field zeros(SiteSet d);
  static Field indicator(SiteSet d, const SiteSet& support);
  static Field from_function(SiteSet d, const std::function<double(const Site&)>& f);

  double at(const Site& x) const;
  /// Values re-indexed on another domain (zero outside this field's domain).
  Vector restricted_to(const SiteSet& other) const;
  /// Sites of the domain where the value is non-zero.
  SiteSet support() const;
};

/// Killed weighted Laplacian L_U on a finite domain U:
/// L[x][x] = omega_x, L[x][y] = -omega_xy for neighbors x, y in U.
///
/// The factorization (or CG handle) is built on first use and then shared.
class DirichletOperator {
 public:
  DirichletOperator(EnvPtr env, SiteSet domain, SolverOptions options = {});

  const SiteSet& domain() const { return domain_; }
  std::size_t size() const { return domain_.size(); }
  const Conductances& environment() const { return *env_; }
  const EnvPtr& environment_ptr() const { return env_; }
  const SparseMatrix& matrix() const { return matrix_; }
  /// omega_x for x in the domain.
  const Vector& site_weights() const { return site_weights_; }
  const SolverOptions& options() const { return options_; }

  const SpdSolver& solver() const;
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

  /// b(x) = sum over y outside U, y ~ x of omega_xy v(y), for x in U.
  Vector exterior_flux(const std::function<double(const Site&)>& v) const;

  /// Edges {x, y} with x in U and y outside U (the killing edges).
  struct BoundaryEdge {
    std::size_t inner;
    Site outer;
    double weight;
  };
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

 private:
  EnvPtr env_;
  SiteSet domain_;
  SolverOptions options_;
  SparseMatrix matrix_;
  Vector site_weights_;
  std::vector<BoundaryEdge> boundary_edges_;
  mutable std::once_flag solver_once_;
  mutable std::unique_ptr<SpdSolver> solver_;
};

/// g_U as a dense matrix over U x U.
Matrix green_killed_full(const DirichletOperator& op);
/// g_U(., y) over U (zero vector if y is not in U).
Vector green_killed_column(const DirichletOperator& op, const Site& y);
/// g_U(x, y); zero when either argument lies outside U.
double green_killed_entry(const DirichletOperator& op, const Site& x, const Site& y);

/// Harmonic potential h_{A,B}, equilibrium measure e_{A,B} and capacity cap_B(A).
struct Potential {
  SiteSet a, b;
  Field h;                 // over B: 1 on A, harmonic on B \ A
  Field e;                 // over A
  double capacity = 0.0;   // sum of e
  SolveStats stats;
};

/// Solves L_{B\A} h = sum_{y in A, y ~ x} omega_xy. Throws GeometryError unless A is
/// a non-empty subset of B.
Potential solve_potential(const EnvPtr& env, const SiteSet& a, const SiteSet& b,
                          const SolverOptions& options = {});

Field harmonic_potential(const EnvPtr& env, const SiteSet& a, const SiteSet& b,
                         const SolverOptions& options = {});
Field equilibrium_measure(const EnvPtr& env, const SiteSet& a, const SiteSet& b,
                          const SolverOptions& options = {});
/// cap_B(A) as the Dirichlet energy of h_{A,B}.
double capacity(const EnvPtr& env, const SiteSet& a, const SiteSet& b, const SolverOptions& options = {});

/// Dirichlet form 1/2 sum_{x~y} omega_xy (f(y)-f(x)) (g(y)-g(x)). Throws
/// GeometryError when a contributing edge is not stored.
double dirichlet_form(const Conductances& env, const Field& f, const Field& g);
inline double dirichlet_energy(const Conductances& env, const Field& f) { return dirichlet_form(env, f, f); }

/// W(h) = sum g_U(x, y) h(x) h(y). Throws GeometryError if h is non-zero off U.
double energy_W(const DirichletOperator& op, const Field& h);

/// Killed CSRW heat kernel q_{t,U}(x, .) by uniformization; Poisson truncation
/// error below tol.
struct HeatKernel {
  Vector q;             // over U
  int terms = 0;        // number of Poisson terms summed
  double tail_bound = 0.0;
};
HeatKernel heat_kernel_killed(const DirichletOperator& op, double t, const Site& x, double tol);

/// Finite-volume approximations cap_{B(0,R)}(A) along increasing radii, with the
/// one-sided error c cap^2 / dist^{d-2} for the unkilled capacity.
struct UnkilledCapacity {
  std::vector<int> radii;
  std::vector<double> values;
  std::vector<double> error_bounds;
  double value = 0.0;
  double error_bound = 0.0;
  bool monotone = true;
};
UnkilledCapacity capacity_unkilled_approx(const EnvPtr& env, const SiteSet& a, const std::vector<int>& radii,
                                          double green_constant, const SolverOptions& options = {},
                                          double monotone_tolerance = 1e-9);

}  // namespace hclab
