#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hclab/potential.hpp"
#include "hclab/stats.hpp"

namespace hclab {

/// One realization of the Gaussian free field on a finite domain (zero outside).
struct FieldSample {
  Field field;
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
};

/// Exact sampler for N(0, L_U^{-1}) sharing one factorization of L_U.
///
/// Replica i uses the noise stream derive_stream(label, i) under the given seed,
/// so any subset of replicas can be regenerated independently.
class GffSampler {
 public:
  explicit GffSampler(std::shared_ptr<const DirichletOperator> op, std::string label = "gff");
  GffSampler(const EnvPtr& env, const SiteSet& domain, const SolverOptions& options = {});

  const DirichletOperator& op() const { return *op_; }
  const std::shared_ptr<const DirichletOperator>& op_ptr() const { return op_; }
  const SiteSet& domain() const { return op_->domain(); }

  /// Columns are the field values of replicas first, ..., first + count - 1.
  Matrix sample_matrix(std::uint64_t seed, std::uint64_t first, std::size_t count) const;
  FieldSample sample(std::uint64_t seed, std::uint64_t replica) const;
  std::vector<FieldSample> sample(std::uint64_t seed, std::uint64_t first, std::size_t count) const;

 private:
  std::shared_ptr<const DirichletOperator> op_;
  std::string label_;
};

std::vector<FieldSample> sample_gff(const EnvPtr& env, const SiteSet& domain, std::size_t count, std::uint64_t seed,
                                    const SolverOptions& options = {});

/// How values outside the sample domain enter the harmonic average.
enum class BoundaryPolicy {
  strict,       // the external boundary of U' must lie inside the sample domain
  zero_outside  // sites outside the sample domain carry the value 0 (the field's zero extension)
};

/// phi = xi + psi with xi harmonic in U' and equal to phi off U'.
struct Decomposition {
  SiteSet sub;
  Field xi;   // over the sample domain
  Field psi;  // over the sample domain, zero off U'
};

/// Harmonic average on a fixed subdomain U' of a fixed sample domain U; reuses
/// one factorization of L_{U'} across samples.
class Decomposer {
 public:
  Decomposer(const EnvPtr& env, SiteSet sample_domain, SiteSet sub, BoundaryPolicy policy = BoundaryPolicy::strict,
             const SolverOptions& options = {});

  const SiteSet& sample_domain() const { return domain_; }
  const SiteSet& sub() const { return op_->domain(); }
  const DirichletOperator& op() const { return *op_; }

  Decomposition decompose(const Field& phi) const;
  /// xi on U' for each column of field values over the sample domain.
  Matrix harmonic_average(const Matrix& phi_values) const;
  /// Exit distribution P_x[X_{T_U'} = y] for x in U', y on the external boundary.
  std::map<Site, double> exit_distribution(const Site& x) const;

 private:
  SiteSet domain_;
  std::shared_ptr<const DirichletOperator> op_;
  // (row in U', column in the sample domain, weight) for boundary edges inside the sample domain
  std::vector<Eigen::Triplet<double, int>> coupling_;
  SparseMatrix coupling_matrix_;
};

Decomposition decompose(const EnvPtr& env, const FieldSample& phi, const SiteSet& sub,
                        BoundaryPolicy policy = BoundaryPolicy::strict);

/// Samples of phi + f with log(dP/dP~)(phi + f) = -E(f, phi + f) + E(f, f) / 2.
struct TiltedSample {
  FieldSample sample;
  double log_weight = 0.0;
};

class TiltedSampler {
 public:
  TiltedSampler(std::shared_ptr<const GffSampler> base, const Field& f);

  const Vector& shift() const { return f_; }
  /// E(f, f) / 2 = relative entropy H(P~ | P).
  double entropy() const { return 0.5 * f_.dot(lf_); }
  /// Shifted fields in columns; log weights in `log_weights`.
  Matrix sample_matrix(std::uint64_t seed, std::uint64_t first, std::size_t count, Vector& log_weights) const;
  std::vector<TiltedSample> sample(std::uint64_t seed, std::uint64_t first, std::size_t count) const;
  double log_weight(const Vector& shifted) const { return -lf_.dot(shifted) + entropy(); }

 private:
  std::shared_ptr<const GffSampler> base_;
  Vector f_;
  Vector lf_;  // L_U f
};

std::vector<TiltedSample> tilted_sample(const EnvPtr& env, const SiteSet& domain, const Field& f, std::size_t count,
                                        std::uint64_t seed, const SolverOptions& options = {});

// ---------------------------------------------------------------------------

/// Boxes B_z = z + [0,L)^d, D_z = z + [-3L,4L)^d, U_z = z + [-KL+1, KL-1)^d for
/// centers z in L Z^d.
class BoxGrid {
 public:
  BoxGrid(int dim, int L, int K, std::vector<Site> centers);

  int dim() const { return dim_; }
  int L() const { return L_; }
  int K() const { return K_; }
  const std::vector<Site>& centers() const { return centers_; }
  std::size_t size() const { return centers_.size(); }

  Box box_B(const Site& z) const;
  Box box_D(const Site& z) const;
  Box box_U(const Site& z) const;
  /// Throws GeometryError unless every U_z lies inside `region`.
  void require_inside(const SiteSet& region) const;

 private:
  int dim_, L_, K_;
  std::vector<Site> centers_;
};

/// Box grid whose centers have pairwise l-infinity distance >= (4K+1)L.
class BoxCollection : public BoxGrid {
 public:
  BoxCollection(int dim, int L, int K, std::vector<Site> centers);
};

/// Test function on R^d, evaluated at x / N.
using TestFunction = std::function<double(std::span<const double>)>;

/// Coefficient vector v(x) = N^{-d} eta(x / N) over a domain, so <X_N, eta> = v . phi.
Vector pairing_weights(const SiteSet& domain, int n, const TestFunction& eta);

struct ZFunctional {
  std::vector<double> lambda;  // lambda(z) = e_C(B_z) / cap(C) per center
  double lambda_sum = 0.0;
  double capacity_c = 0.0;
  Vector weights;              // Z_{m,beta,rho} = weights . phi over the sample domain
  Vector z_m_weights;          // Z_m = z_m_weights . phi
  double variance = 0.0;       // Var Z_{m,beta,rho}
  double variance_z_m = 0.0;   // Var Z_m
  double mean = 0.0;           // E Z (the field is centered)
  double var_times_cap = 0.0;  // Var(Z_m) cap(C)

  double evaluate(const Field& phi) const;
  double evaluate_z_m(const Field& phi) const;
};

/// Z_m = sum_z lambda(z) xi^z_{m(z)} and Z_{m,beta,rho} = (1+rho) Z_m - beta <X_N, eta>
/// on the sample domain of `sampler`. xi^z is the harmonic average in U_z.
ZFunctional functional_Z(const GffSampler& sampler, const BoxCollection& collection, const SiteSet& c_target,
                         const std::map<Site, Site>& m, const TestFunction* eta = nullptr, int n = 1,
                         double beta = 0.0, double rho = 0.0);

}  // namespace hclab
