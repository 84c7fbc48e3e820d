#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "hclab/gff.hpp"
#include "hclab/shape.hpp"
#include "hclab/stats.hpp"
#include "hclab/test_function.hpp"
#include "hclab/walk.hpp"

namespace hclab {

/// Relative changes |s_{k+1} - s_k| / |s_{k+1}| along an N ladder; the trend is
/// accepted when the last change is below `ratio` times the previous one.
struct CauchyVerdict {
  std::vector<double> relative_changes;
  double ratio = 0.5;
  bool ok = false;  // false with fewer than two changes
};
CauchyVerdict cauchy_verdict(const std::vector<double>& values, double ratio = 0.5);

struct ScalingRow {
  int N = 0;
  std::size_t unknowns = 0;
  double capacity = 0.0;
  double scaled_capacity = 0.0;  // N^{2-d} cap_{B_N}(A_N)
  double solve_seconds = 0.0;
  SolveStats stats;
};

struct ScalingSweep {
  std::vector<ScalingRow> rows;
  std::vector<double> differences;  // successive differences of the scaled capacity
  CauchyVerdict verdict;
};

/// Window holding B_N for every N up to n_max.
Box scaling_window(const ShapeSpec& b, int n_max);

/// N^{2-d} cap_{B_N}(A_N) along the ladder on one environment. Throws
/// GeometryError unless A_N is a non-empty subset of B_N inside the window.
ScalingSweep capacity_scaling(const EnvPtr& env, const ShapeSpec& a, const ShapeSpec& b, const std::vector<int>& Ns,
                              double ratio = 0.5, const SolverOptions& options = {});
ScalingSweep capacity_scaling(const EnvironmentLaw& law, double lambda, const ShapeSpec& a, const ShapeSpec& b,
                              const std::vector<int>& Ns, std::uint64_t seed, double ratio = 0.5,
                              const SolverOptions& options = {});

/// Empirical covariance of X_t / sqrt(t) started at `start`. Walks that touch the
/// window boundary before time t are discarded; more than 1% discards raise
/// GeometryError.
struct DiffusivityEstimate {
  Clock clock = Clock::vsrw;
  double t = 0.0;
  Matrix a;   // covariance per unit time
  Matrix se;  // entrywise standard errors
  std::size_t used = 0;
  std::size_t discarded = 0;
  double mean_site_weight = 0.0;  // average omega_x over the window
  Matrix vsrw_equivalent;         // mean_site_weight * a for CSRW, a for VSRW
};
DiffusivityEstimate estimate_diffusivity(const Conductances& env, Clock clock, double t, std::size_t replicas,
                                         std::uint64_t seed, const Site& start);
DiffusivityEstimate estimate_diffusivity(const Conductances& env, Clock clock, double t, std::size_t replicas,
                                         std::uint64_t seed);

enum class ContinuumShape { ball, annulus };
/// Capacity for Brownian motion with covariance sigma2 I in d = 3: ball 2 pi sigma2 r,
/// ball killed outside radius R: 2 pi sigma2 r R / (R - r).
double continuum_capacity_reference(ContinuumShape shape, double r, double R, double sigma2, int d);

/// (1/|x| - 1/R) / (1/r - 1/R) clamped to [0, 1], for |x| measured from the center.
double annulus_potential(double radius, double r, double R);

/// Integral of the continuum annulus potential against f over R^3 (composite
/// Simpson in the radius, Gauss-Legendre x trapezoid on the sphere).
double annulus_pairing_reference(const std::vector<double>& center, double r, double R, const TestFunction& f,
                                 int radial_intervals = 256);

struct PairingRow {
  int N = 0;
  double pairing = 0.0;  // N^{-d} sum h_{A_N,B_N}(x) f(x / N)
};
struct PairingSweep {
  std::vector<PairingRow> rows;
  CauchyVerdict verdict;
  std::optional<double> continuum_reference;  // concentric Euclidean balls in d = 3 only
};
PairingSweep potential_pairing_convergence(const EnvPtr& env, const ShapeSpec& a, const ShapeSpec& b,
                                           const TestFunction& f, const std::vector<int>& Ns, double ratio = 0.5,
                                           const SolverOptions& options = {});

/// <X, eta> = N^{-d} sum_x values(x) eta(x / N).
double field_pairing(const Field& phi, int n, const TestFunction& eta);

// ---------------------------------------------------------------------------

struct DisconnectionSetup {
  ShapeSpec a;
  double m = 2.0;               // S_N = {|x|_inf = floor(M N)}
  int n = 1;
  double alpha = 0.0;
  double alpha_star_ref = 0.0;  // finite-size stand-in for alpha_**
  double delta_shell = 0.0;     // A^delta
  int pad = 1;                  // field domain B(0, floor(M N) + pad)
};

struct DisconnectionReport {
  double epsilon = 0.0;
  Estimate is_estimate;          // E~[1_D dP/dP~]
  Estimate tilted_frequency;     // P~[D]
  std::size_t tilted_hits = 0;
  double effective_hits = 0.0;   // (sum w)^2 / sum w^2 over the hits
  double entropy = 0.0;          // H(P~ | P) = E(f_N, f_N) / 2
  double log_entropy_bound = 0.0;  // log P~[D] - (H + 1/e) / P~[D]; -inf without hits
  double rate_proxy = 0.0;       // -N^{2-d} log(IS estimate)
  double reference_rate = 0.0;   // (alpha_star_ref - alpha)^2 N^{2-d} cap_U((A^delta)_N) / 2
  bool degenerate = false;       // no tilted hits
};

struct RepulsionReport {
  Estimate conditional_mean;     // E[<X_N, eta> | D], likelihood-ratio weighted
  double profile_pairing = 0.0;  // <H^alpha, eta>
  Estimate deviation;            // P[|<X_N, eta> - <H^alpha, eta>| >= Delta ; D]
  Estimate tilted_mean;          // unconditional mean under P~
  double tilt_pairing = 0.0;     // N^{-d} sum f_N(x) eta(x / N)
  std::size_t tilted_hits = 0;
};

/// Disconnection of A_N from S_N in E^{>= alpha} for the field on
/// U = B(0, floor(M N) + pad), with the tilt f_N = -(alpha_star_ref - alpha + eps) h_{(A^delta)_N, U}.
class DisconnectionExperiment {
 public:
  DisconnectionExperiment(const EnvPtr& env, DisconnectionSetup setup, const SolverOptions& options = {});

  const DisconnectionSetup& setup() const { return setup_; }
  const SiteSet& domain() const { return domain_; }
  const SiteSet& a_n() const { return a_n_; }
  const SiteSet& s_n() const { return s_n_; }
  const SiteSet& shell_n() const { return shell_n_; }  // (A^delta)_N

  /// Whether D occurs for field values over the domain.
  bool disconnected(const double* values, double alpha) const;
  bool disconnected(const Field& phi) const { return disconnected(phi.values.data(), setup_.alpha); }

  Field tilt(double epsilon) const;
  /// -(alpha_star_ref - alpha) h_{A_N, U}.
  Field profile() const;
  double reference_rate() const { return reference_rate_; }

  Estimate direct_estimate(std::size_t replicas, std::uint64_t seed) const;
  /// Largest alpha at which A_N and S_N are connected, per untilted replica.
  std::vector<double> bottleneck_levels(std::size_t replicas, std::uint64_t seed) const;
  DisconnectionReport tilted_estimate(double epsilon, std::size_t replicas, std::uint64_t seed) const;
  RepulsionReport repulsion(double epsilon, const TestFunction& eta, double delta, std::size_t replicas,
                            std::uint64_t seed) const;

 private:
  EnvPtr env_;
  DisconnectionSetup setup_;
  SiteSet domain_, a_n_, s_n_, shell_n_;
  std::shared_ptr<const DirichletOperator> op_;
  std::shared_ptr<const GffSampler> direct_, tilted_;
  Field h_shell_;  // h_{(A^delta)_N, U}
  double reference_rate_ = 0.0;
  std::vector<std::int32_t> neighbors_;  // domain index of each neighbor, -1 outside
  std::vector<std::int32_t> a_index_;
  std::vector<char> s_mask_;
};

}  // namespace hclab
