#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hclab/potential.hpp"
#include "hclab/stats.hpp"

namespace hclab {

/// Local densities of a set U1: sigma_l(x) = |B(x, 2^l) n U1| / (2 2^l + 1)^d.
///
/// Counts come from d-dimensional prefix sums over a region, so every query is
/// O(2^d) regardless of the radius.
class DensityField {
 public:
  /// U1 = Z^d \ U0 for a bounded U0; queries are unrestricted.
  static DensityField complement_of(const SiteSet& u0);
  /// U1 given as a finite set; queries are unrestricted.
  static DensityField of_set(const SiteSet& u1);
  /// U1 = {x : member(x)}; every query ball must stay inside `region`.
  static DensityField of_predicate(const std::function<bool(const Site&)>& member, const Box& region);

  int dim() const { return dim_; }
  /// |B(x, r) n U1| / (2r + 1)^d.
  double density(const Site& x, int radius) const;
  double sigma(const Site& x, int l) const;
  /// sigma~_l(x) = sigma_{l+2}(x).
  double sigma_widened(const Site& x, int l) const { return sigma(x, l + 2); }

 private:
  std::int64_t count_in(const Box& b) const;  // members of the stored set within b (clipped)
  void fill(const std::function<bool(const Site&)>& member);

  int dim_ = 0;
  Box box_;
  bool complement_ = false;
  bool bounded_queries_ = false;
  std::vector<std::int64_t> prefix_;  // (extent + 1)^d inclusive prefix counts
  std::array<std::size_t, kMaxDim> stride_{};
};

double local_density(const DensityField& u1, const Site& x, int l, bool widened);

/// Average of sigma_{l'} over B(x, 2^l).
double average_sigma(const DensityField& u1, const Site& x, int l_prime, int l);

struct DichotomyResult {
  double beta = 0.0;  // average of sigma_{l'} over B(x, 2^l)
  double above = 0.0, below = 0.0, near = 0.0;  // mu_{x,l} masses of {> beta+delta}, {< beta-delta}, [beta-delta, beta+delta]
  bool clause_i = false;
  bool clause_ii = false;
};
/// Evaluates both clauses of the density dichotomy for 0 <= delta <= beta ^ (1 - beta).
DichotomyResult dichotomy(const DensityField& u1, const Site& x, int l_prime, int l, double delta);

struct SegmentationCheck {
  bool ok = true;
  Site worst_site;
  int worst_scale = 0;
  double worst_value = 0.0;
};
/// sigma_l(x) <= 1/2 for all x in A and 0 <= l <= l_star, with U1 = Z^d \ U0.
SegmentationCheck check_segmentation(const SiteSet& u0, const SiteSet& a, int l_star);

struct PorousInterface {
  SiteSet u0;
  SiteSet s;       // external boundary of U0
  SiteSet sigma;   // the interface
  int epsilon = 1;
  double chi = 0.0;
  int l_star = 0;

  static PorousInterface make(SiteSet u0, SiteSet sigma, int epsilon, double chi, int l_star);
};

enum class HitMode { exact, monte_carlo };

struct PorousCheck {
  bool ok = false;
  double min_probability = 1.0;
  Site argmin;
  std::vector<double> probabilities;  // per site of S
  std::vector<double> standard_errors;
};
/// P_x[H_Sigma < tau_eps] for x in S, with tau_eps the exit of B(x, eps - 1).
PorousCheck check_porous_interface(const EnvPtr& env, const PorousInterface& spec, HitMode mode = HitMode::exact,
                                   std::size_t replicas = 10000, std::uint64_t seed = 0);

/// U0 = A thickened by `offset`; Sigma = internal boundary of U0 without the sites
/// whose keyed uniform falls below `puncture_fraction` (nested in the fraction).
/// chi is set to the exact minimal hitting probability for the given epsilon.
PorousInterface build_shell_interface(const EnvPtr& env, const SiteSet& a, int offset, double puncture_fraction,
                                      int epsilon, std::uint64_t seed);

struct ScaleSystem {
  int dim = 3, I = 1, J = 1, L = 1, l_star = 0;
  int l_min_base = 5;
  double c0 = 0.0;
  int L_of_J = 0;
  bool L_valid = false;      // L >= L(J)
  int l0 = -1;               // -1 when no multiple of (J+1)L is <= l_star
  std::vector<int> a_star;   // decreasing
  std::vector<int> a;        // decreasing
  int l_min = 0;             // l_min(1/(200J))
  bool compatible = false;
  double alpha_tilde = 0.0;
};

int L_of_J(int dim, int J);
/// max(base, ceil(log2(8 / delta))).
int l_min(double delta, int base = 5);
ScaleSystem scale_system(int dim, int I, int J, int L, int l_star, int l_min_base = 5);

/// Sites of the window with at least J widened densities in [alpha~, 1 - alpha~] over A*.
SiteSet resonance_set(const DensityField& u1, const ScaleSystem& scales, const SiteSet& window);
SiteSet resonance_set(const SiteSet& u0, const ScaleSystem& scales, const SiteSet& window);

struct EscapeResult {
  std::vector<double> per_site;     // P_x[H_Sigma > T_B] for x in A_N
  double sup = 0.0;
  Site argsup;
  double far_field_bound = 0.0;     // c cap_B(Sigma) / dist(Sigma, B^c)^{d-2}
  double sup_lower = 0.0;           // max(0, sup - far_field_bound)
};
EscapeResult escape_probability(const EnvPtr& env, const SiteSet& a, const SiteSet& sigma, const SiteSet& b,
                                double green_constant = 1.0, const SolverOptions& options = {});

struct CapacityRatioReport {
  double cap_sigma = 0.0;
  double cap_a = 0.0;
  double inf_hit = 0.0;          // min over A of P_x[H_Sigma < T_B]
  double ratio = 0.0;            // cap_sigma / cap_a
  double energy_difference = 0.0;  // E(h_A - h_Sigma)
  double identity_gap = 0.0;       // E(h_A - h_Sigma) - (cap_sigma - cap_a)
  double slack = 0.0;              // cap_sigma - inf_hit cap_a
  bool holds = false;              // slack >= -tolerance
};
CapacityRatioReport capacity_ratio_check(const EnvPtr& env, const SiteSet& a, const SiteSet& sigma, const SiteSet& b,
                                         double tolerance = 1e-8, const SolverOptions& options = {});

}  // namespace hclab
