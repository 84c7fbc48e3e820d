#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "hclab/error.hpp"
#include "hclab/homogenization.hpp"

using namespace hclab;

TEST_CASE("Cauchy verdict") {
  const CauchyVerdict v = cauchy_verdict({1.0, 0.5, 0.4, 0.38}, 0.5);
  REQUIRE(v.relative_changes.size() == 3);
  CHECK(v.relative_changes[0] == doctest::Approx(1.0));
  CHECK(v.relative_changes[1] == doctest::Approx(0.25));
  CHECK(v.ok);
  CHECK_FALSE(cauchy_verdict({1.0, 0.9, 0.7}, 0.5).ok);
  CHECK_FALSE(cauchy_verdict({1.0, 2.0}, 0.5).ok);
}

TEST_CASE("continuum capacity references") {
  const double pi = std::numbers::pi;
  CHECK(continuum_capacity_reference(ContinuumShape::ball, 1.0, INFINITY, 1.0, 3) == doctest::Approx(2 * pi));
  CHECK(continuum_capacity_reference(ContinuumShape::annulus, 0.5, 2.0, 2.0, 3) ==
        doctest::Approx(4 * pi * 2.0 / 3.0));
  CHECK(continuum_capacity_reference(ContinuumShape::annulus, 1.0, 1e9, 1.0, 3) == doctest::Approx(2 * pi));
  CHECK_THROWS_AS(continuum_capacity_reference(ContinuumShape::ball, 1.0, INFINITY, 1.0, 4), InvalidArgument);
  CHECK(annulus_potential(0.3, 0.5, 2.0) == 1.0);
  CHECK(annulus_potential(3.0, 0.5, 2.0) == 0.0);
  CHECK(annulus_potential(1.0, 0.5, 2.0) == doctest::Approx((1.0 - 0.5) / (2.0 - 0.5)));
}

TEST_CASE("annulus pairing against a radial oracle") {
  const double r = 0.5, R = 2.0, rho = 1.5;
  const TestFunction f = TestFunctionSpec::radial_bump({0, 0, 0}, rho).callable();
  auto integrand = [&](double s) {
    const double u = s / rho;
    const double bump = u < 1 ? std::exp(1 - 1 / (1 - u * u)) : 0.0;
    return 4 * std::numbers::pi * s * s * annulus_potential(s, r, R) * bump;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double oracle = GK::integrate(integrand, 0.0, r, 10, 1e-13) + GK::integrate(integrand, r, rho, 10, 1e-13);
  CHECK(annulus_pairing_reference({0, 0, 0}, r, R, f) == doctest::Approx(oracle).epsilon(1e-7));

  const TestFunction g = TestFunctionSpec::radial_bump({0.7, 0, 0}, 0.4).callable();
  const TestFunction sum = [&](std::span<const double> x) { return f(x) + 3 * g(x); };
  const double lin = annulus_pairing_reference({0, 0, 0}, r, R, f) + 3 * annulus_pairing_reference({0, 0, 0}, r, R, g);
  CHECK(annulus_pairing_reference({0, 0, 0}, r, R, sum) == doctest::Approx(lin).epsilon(1e-10));
  CHECK(annulus_pairing_reference({0, 0, 0}, r, R, g) > 0.0);
  const TestFunction outside = TestFunctionSpec::radial_bump({4, 0, 0}, 1.0).callable();
  CHECK(annulus_pairing_reference({0, 0, 0}, r, R, outside) == 0.0);
}

TEST_CASE("scaled capacity: ladder shape and monotonicity in B") {
  const auto a = ShapeSpec::euclidean_ball({0, 0, 0}, 0.5);
  const auto b2 = ShapeSpec::euclidean_ball({0, 0, 0}, 2.0);
  const auto b3 = ShapeSpec::euclidean_ball({0, 0, 0}, 3.0);
  const std::vector<int> ns{2, 4};
  const auto env = testing::random_env(scaling_window(b3, 4), 8);
  const ScalingSweep s2 = capacity_scaling(env, a, b2, ns);
  const ScalingSweep s3 = capacity_scaling(env, a, b3, ns);
  REQUIRE(s2.rows.size() == 2);
  CHECK(s2.differences.size() == 1);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(s2.rows[k].scaled_capacity == doctest::Approx(s2.rows[k].capacity / s2.rows[k].N));
    CHECK(s2.rows[k].capacity > s3.rows[k].capacity);
  }
  CHECK_THROWS_AS(capacity_scaling(env, b3, a, ns), GeometryError);
  CHECK_THROWS_AS(capacity_scaling(env, a, b3, {4, 8}), GeometryError);

  const ScalingSweep law = capacity_scaling(EnvironmentLaw::iid_uniform(0.5, 1.0), 0.5, a, b2, ns, 8);
  for (std::size_t k = 0; k < 2; ++k) CHECK(law.rows[k].capacity > 0.0);
}

TEST_CASE("potential pairing is non-negative and vanishes outside B") {
  const auto a = ShapeSpec::euclidean_ball({0, 0, 0}, 0.5);
  const auto b = ShapeSpec::euclidean_ball({0, 0, 0}, 2.0);
  const auto env = testing::constant_env(scaling_window(b, 4));
  const TestFunction f = TestFunctionSpec::radial_bump({0, 0, 0}, 1.5).callable();
  const PairingSweep p = potential_pairing_convergence(env, a, b, f, {2, 4});
  REQUIRE(p.continuum_reference.has_value());
  for (const auto& row : p.rows) CHECK(row.pairing > 0.0);
  const TestFunction far = TestFunctionSpec::radial_bump({3.5, 0, 0}, 1.0).callable();
  for (const auto& row : potential_pairing_convergence(env, a, b, far, {2, 4}).rows) CHECK(row.pairing == 0.0);
}

TEST_CASE("diffusivity of the constant environment") {
  const auto env = Conductances::sample(EnvironmentLaw::constant(1.0), 0.5, Box::ball(Site{0, 0, 0}, 40), 0);
  const DiffusivityEstimate v = estimate_diffusivity(env, Clock::vsrw, 20.0, 2000, 3);
  const DiffusivityEstimate c = estimate_diffusivity(env, Clock::csrw, 20.0, 2000, 4);
  CHECK(v.discarded == 0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(v.a(i, j) - (i == j ? 2.0 : 0.0)) < 5 * v.se(i, j));
      CHECK(std::abs(c.a(i, j) - (i == j ? 1.0 / 3.0 : 0.0)) < 5 * c.se(i, j));
    }
  CHECK(c.mean_site_weight == doctest::Approx(6.0));
  CHECK(c.vsrw_equivalent(0, 0) == doctest::Approx(6.0 * c.a(0, 0)));
  CHECK_THROWS_AS(estimate_diffusivity(env, Clock::vsrw, 2000.0, 50, 3), GeometryError);
}

TEST_CASE("disconnection experiment on a small domain") {
  const auto env = testing::random_env(Box::ball(Site{0, 0, 0}, 6), 21);
  DisconnectionSetup s;
  s.a = ShapeSpec::euclidean_ball({0, 0, 0}, 0.5);
  s.m = 2.0;
  s.n = 2;
  s.alpha = 0.5;
  s.alpha_star_ref = 0.5;
  s.delta_shell = 0.25;
  const DisconnectionExperiment ex(env, s);
  CHECK(ex.domain().size() == 11u * 11u * 11u);
  CHECK(ex.a_n().size() == 7u);
  CHECK(ex.a_n().is_subset_of(ex.shell_n()));

  // With zero tilt the IS estimator reduces to the plain frequency.
  const DisconnectionReport r = ex.tilted_estimate(0.0, 400, 5);
  CHECK(r.entropy == doctest::Approx(0.0));
  CHECK(r.is_estimate.mean == doctest::Approx(r.tilted_frequency.mean));
  const Estimate d = ex.direct_estimate(400, 6);
  CHECK(std::abs(d.mean - r.tilted_frequency.mean) < 5 * std::hypot(d.se, r.tilted_frequency.se) + 1e-9);

  const RepulsionReport z = ex.repulsion(0.0, TestFunctionSpec::zero().callable(), 0.1, 200, 7);
  CHECK(z.profile_pairing == 0.0);
  CHECK(z.conditional_mean.mean == 0.0);

  const auto levels = ex.bottleneck_levels(50, 8);
  CHECK(levels.size() == 50u);

  DisconnectionSetup bad = s;
  bad.m = 0.5;
  CHECK_THROWS_AS(DisconnectionExperiment(env, bad), GeometryError);
}

TEST_CASE("tilted field mean matches the tilt pairing") {
  const auto env = testing::random_env(Box::ball(Site{0, 0, 0}, 6), 22);
  DisconnectionSetup s;
  s.a = ShapeSpec::euclidean_ball({0, 0, 0}, 0.5);
  s.n = 2;
  s.alpha = 0.0;
  s.alpha_star_ref = 1.0;
  s.delta_shell = 0.25;
  const DisconnectionExperiment ex(env, s);
  const TestFunction eta = TestFunctionSpec::radial_bump({0, 0, 0}, 1.5).callable();
  const RepulsionReport r = ex.repulsion(0.5, eta, 0.1, 1000, 9);
  CHECK(r.tilt_pairing < 0.0);
  CHECK(std::abs(r.tilted_mean.mean - r.tilt_pairing) < 5 * r.tilted_mean.se);
  CHECK(ex.tilted_estimate(0.5, 10, 1).entropy > 0.0);
}
