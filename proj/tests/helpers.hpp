#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "hclab/environment.hpp"
#include "hclab/potential.hpp"
#include "hclab/rng.hpp"

namespace hclab::testing {

inline EnvPtr random_env(const Box& window, std::uint64_t seed, double lambda = 0.5) {
  return share(Conductances::sample(EnvironmentLaw::iid_uniform(lambda, 1.0), lambda, window, seed));
}

inline EnvPtr constant_env(const Box& window, double c = 1.0) {
  return share(Conductances::sample(EnvironmentLaw::constant(c), 0.5, window, 0));
}

/// Dense killed Laplacian assembled directly from edge weights.
inline Eigen::MatrixXd dense_laplacian(const Conductances& env, const SiteSet& u) {
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Site& x = u[static_cast<std::size_t>(i)];
    for (int dir = 0; dir < x.dim(); ++dir)
      for (int s : {-1, 1}) {
        const Site y = x.step(dir, s);
        const double w = env.weight(x, y);
        l(i, i) += w;
        const auto j = u.index_of(y);
        if (j >= 0) l(i, j) -= w;
      }
  }
  return l;
}

inline SiteSet random_subset(const Box& box, double p, std::uint64_t seed) {
  StreamRng rng(seed, 99);
  return SiteSet::from_predicate(box, [&](const Site&) { return rng.uniform() < p; });
}

}  // namespace hclab::testing
