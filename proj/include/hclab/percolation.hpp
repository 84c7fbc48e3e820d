#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "hclab/gff.hpp"
#include "hclab/stats.hpp"

namespace hclab {

/// E^{>= alpha} restricted to the field's domain.
struct LevelSet {
  SiteSet domain;
  double alpha = 0.0;
  std::vector<char> member;

  std::size_t count() const;
  bool contains(const Site& x) const;
};

LevelSet level_set(const Field& phi, double alpha);
/// Level set of an arbitrary membership predicate over a domain.
LevelSet level_set_from_mask(SiteSet domain, std::vector<char> member);

/// Union-find of nearest-neighbor (l1) adjacency inside a level set.
struct ComponentLabeling {
  struct Component {
    int label = -1;          // smallest domain index in the component
    std::size_t size = 0;
    int diameter = 0;        // l-infinity diameter
  };
  std::vector<int> label;    // per domain site, -1 when outside the set
  std::vector<Component> components;  // sorted by label

  std::size_t count() const { return components.size(); }
  const Component& component(int label) const;
};

ComponentLabeling components(const LevelSet& s);

/// Whether a nearest-neighbor path inside S joins H and K (endpoints included).
bool is_connected(const SiteSet& h, const SiteSet& k, const LevelSet& s);

/// Largest alpha such that H and K are connected in E^{>= alpha} (max-min path
/// level); -infinity when no path exists even in the full domain.
double bottleneck_level(const Field& phi, const SiteSet& h, const SiteSet& k);

/// D = {A_N not connected to S_N in E^{>= alpha}}. Throws GeometryError when A_N
/// or S_N leaves the field domain.
bool disconnection_event(const Field& phi, double alpha, const SiteSet& a, const SiteSet& s);

/// B(x, L) <-> external boundary of B(x, 2L), field on B(x, 2L + pad) with zero
/// boundary values. Coupled sweep: one field per replica, all alphas.
struct CrossingRow {
  double alpha = 0.0;
  int L = 0;
  Estimate p;
};
struct CrossingSweep {
  std::vector<double> alphas;
  std::vector<int> Ls;
  std::vector<CrossingRow> rows;                // alpha-major, then L
  std::optional<double> alpha_star_star;        // smallest alpha with p decreasing in L
  Estimate at(std::size_t alpha_index, std::size_t l_index) const;
};

Estimate crossing_probability(const EnvPtr& env, double alpha, int L, const Site& x, std::size_t replicas,
                              std::uint64_t seed, int pad = 1, const SolverOptions& options = {});
CrossingSweep crossing_sweep(const EnvPtr& env, const std::vector<double>& alphas, const std::vector<int>& Ls,
                             const Site& x, std::size_t replicas, std::uint64_t seed, int pad = 1,
                             const SolverOptions& options = {});

/// Two-point connectivity P[x <-> x + z in E^{>= alpha}] on the box spanned by
/// x and x + z, expanded by `pad`.
struct ConnectivityResult {
  std::vector<Site> z;
  std::vector<double> alphas;
  std::vector<std::vector<Estimate>> p;  // [alpha][z]
  /// Fitted slope of log p against |z|_inf for each alpha (NaN when fewer than two positive points).
  std::vector<double> decay_rate;
};
ConnectivityResult connectivity_function(const EnvPtr& env, const std::vector<double>& alphas, const Site& x,
                                         const std::vector<Site>& z_list, int pad, std::size_t replicas,
                                         std::uint64_t seed, const SolverOptions& options = {});

/// psi-good (levels gamma > delta) and xi-good (level a) flags of L-boxes.
struct BoxFlags {
  bool big_component = false;   // a component of B_z n {psi >= gamma} with diameter >= L/10
  bool neighbor_links = false;  // the adjacent-box connection condition
  bool psi_good = false;
  bool xi_good = false;
  double xi_inf = 0.0;
};
struct BoxClassification {
  std::map<Site, BoxFlags> flags;
  const BoxFlags& at(const Site& z) const;
};

/// Classification from stored decompositions: fields[z] holds psi^z and xi^z over
/// a common domain covering D_z. Neighbors of z without a stored decomposition are
/// not inspected by the adjacent-box condition.
BoxClassification classify_from_fields(const BoxGrid& grid, const std::map<Site, Decomposition>& fields,
                                       double gamma, double delta, double a);

/// Decomposes phi in every U_z (for the grid centers and their lattice neighbors)
/// and classifies the grid boxes.
BoxClassification classify_boxes(const EnvPtr& env, const Field& phi, const BoxGrid& grid, double gamma,
                                  double delta, double a);

/// Two-sided decoupling check for increasing events of the field on K1 and K2.
using FieldEvent = std::function<bool(const Field&)>;
struct DecouplingReport {
  Estimate joint;              // P[E1 n E2]
  Estimate p1;                 // P[E1]
  Estimate p2_minus;           // P[E2 evaluated at phi - delta]
  Estimate p2_plus;            // P[E2 evaluated at phi + delta]
  Estimate bad_prob;           // P[sup_{K2} |xi^{K1^c}| > delta / 2]
  bool bad_prob_exact = false;
  double lower = 0.0;          // P[E1] P[E2(phi - delta)] - 2 P[G^c]
  double upper = 0.0;          // P[E1] P[E2(phi + delta)] + 2 P[G^c]
  double lower_se = 0.0;
  double upper_se = 0.0;
  double violation = 0.0;      // max(lower - joint, joint - upper, 0)
  double violation_se = 0.0;
  bool holds = false;          // violation <= se_multiplier * combined SE
};
DecouplingReport decoupling_check(const EnvPtr& env, const SiteSet& domain, const Box& k1, const Box& k2,
                                  double delta, const FieldEvent& event1, const FieldEvent& event2,
                                  std::size_t replicas, std::uint64_t seed, double se_multiplier = 3.0,
                                  const SolverOptions& options = {});

}  // namespace hclab
