#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hclab/lattice.hpp"

namespace hclab {

/// Law of the conductances. All attainable values lie in [lambda, 1].
struct EnvironmentLaw {
  enum class Kind : std::uint32_t { constant = 0, iid_uniform = 1, iid_two_point = 2, checkerboard = 3, explicit_weights = 4 };

  Kind kind = Kind::constant;
  double a = 1.0;  // constant value, lower bound, first atom, even-class value
  double b = 1.0;  // upper bound, second atom, odd-class value
  double p = 0.0;  // probability of the second atom

  static EnvironmentLaw constant(double c) { return {Kind::constant, c, c, 0.0}; }
  static EnvironmentLaw iid_uniform(double lo, double hi) { return {Kind::iid_uniform, lo, hi, 0.0}; }
  /// Value b with probability p, otherwise a.
  static EnvironmentLaw iid_two_point(double a, double b, double p) { return {Kind::iid_two_point, a, b, p}; }
  /// Edge {x, x + e_i} gets a when the coordinate sum of x is even, b otherwise.
  static EnvironmentLaw checkerboard(double a, double b) { return {Kind::checkerboard, a, b, 0.0}; }

  /// Throws InvalidArgument when a parameter leaves [lambda, 1] or p leaves [0, 1].
  void validate(double lambda) const;
  /// Whether weights can be re-derived at any edge from (law, seed).
  bool keyed() const { return kind != Kind::explicit_weights; }
  /// Weight of the edge {lower, lower + e_dir}; pure function of (law, seed, edge).
  double edge_weight(const Site& lower, int dir, std::uint64_t seed) const;
  std::string describe() const;
};

/// Uniformly elliptic conductances stored on all edges with both endpoints in
/// the closed 1-neighborhood of a window box.
///
/// Weights are indexed by (lower endpoint, direction). Immutable after construction.
class Conductances {
 public:
  Conductances() = default;

  static Conductances sample(const EnvironmentLaw& law, double lambda, const Box& window,
                             std::uint64_t seed);
  /// Arbitrary weights; the result is not keyed (no re-derivation outside the window).
  static Conductances from_function(const Box& window, double lambda,
                                    const std::function<double(const Site&, int)>& weight);

  int dim() const { return window_.dim(); }
  double lambda() const { return lambda_; }
  const Box& window() const { return window_; }
  /// Window expanded by one: the region whose internal edges are stored.
  const Box& storage_box() const { return storage_; }
  const EnvironmentLaw& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }

  bool has_edge(const Site& x, const Site& y) const;
  /// Weight of the nearest-neighbor edge {x, y}; throws GeometryError if not stored
  /// or if x and y are not neighbors.
  double weight(const Site& x, const Site& y) const;
  /// Weight of {x, x + e_dir} (x is the lower endpoint); NaN if not stored.
  double weight_lower(const Site& x, int dir) const;
  /// omega_x = sum of the 2d incident weights. Throws GeometryError if one is missing.
  double site_weight(const Site& x) const;
  /// Whether all 2d incident edges of x are stored.
  bool has_all_edges(const Site& x) const;

  /// Visit stored edges in canonical order: lower endpoint lexicographic, then direction.
  template <class F>
  void for_each_edge(F&& f) const {
    const std::size_t n = storage_.volume();
    const int d = dim();
    for (std::size_t k = 0; k < n; ++k) {
      const Site x = storage_.site_at(k);
      for (int i = 0; i < d; ++i)
        if (x[i] < storage_.hi()[i]) f(x, i, weights_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)]);
    }
  }
  std::size_t edge_count() const;

  /// (tau_x omega)_{y,z} = omega_{x+y, x+z} on the same window. Edges outside the
  /// stored region are re-derived from the keyed law; throws GeometryError otherwise.
  Conductances shift(const Site& x) const;
  /// Accumulated shift: stored edge (y, i) equals the law's edge (y + offset, i).
  const Site& offset() const { return offset_; }

  /// Rebuild from canonical-order weights (used by the binary reader).
  static Conductances from_canonical(const EnvironmentLaw& law, double lambda, const Box& window,
                                     std::uint64_t seed, const Site& offset,
                                     const std::vector<double>& canonical);

 private:
  Box window_;
  Box storage_;
  double lambda_ = 1.0;
  EnvironmentLaw law_;
  std::uint64_t seed_ = 0;
  Site offset_;
  std::vector<double> weights_;  // storage_.volume() * d, NaN for edges leaving storage_
};

/// Convenience wrapper matching the module operation name.
inline Conductances sample_environment(const EnvironmentLaw& law, double lambda, const Box& window,
                                       std::uint64_t seed) {
  return Conductances::sample(law, lambda, window, seed);
}

}  // namespace hclab
