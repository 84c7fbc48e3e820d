#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hclab/error.hpp"
#include "hclab/potential.hpp"
#include "hclab/walk.hpp"

using namespace hclab;

TEST_CASE("stopping rules") {
  const auto env = testing::constant_env(Box::ball(Site{0, 0, 0}, 5));
  StreamRng rng(1, 1);
  StopRules none;
  CHECK_THROWS_AS(walk_simulate(*env, Site{0, 0, 0}, none, rng), InvalidArgument);

  StopRules hit_now;
  hit_now.hit = SiteSet({Site{0, 0, 0}});
  hit_now.radius = 3;
  const WalkPath p = walk_simulate(*env, Site{0, 0, 0}, hit_now, rng);
  CHECK(p.stop_reason == StopReason::hit);
  CHECK(p.jumps == 0);

  StopRules radius;
  radius.radius = 3;
  const WalkPath q = walk_simulate(*env, Site{0, 0, 0}, radius, rng);
  CHECK(q.stop_reason == StopReason::radius);
  CHECK(linf_norm(q.end()) == 3);
  for (std::size_t k = 1; k < q.skeleton.size(); ++k) CHECK(l1_norm(q.skeleton[k] - q.skeleton[k - 1]) == 1);

  StopRules far;
  far.radius = 50;
  CHECK_THROWS_AS(walk_simulate(*env, Site{0, 0, 0}, far, rng), GeometryError);
}

TEST_CASE("holding times follow the chosen clock") {
  const auto env = share(Conductances::sample(EnvironmentLaw::constant(0.5), 0.5, Box::ball(Site{0, 0, 0}, 40), 0));
  StopRules r;
  r.time_cap = 200.0;
  r.radius = 40;
  for (Clock clock : {Clock::csrw, Clock::vsrw}) {
    StreamRng rng(3, clock == Clock::csrw ? 1 : 2);
    const WalkPath p = walk_simulate(*env, Site{0, 0, 0}, r, rng, clock);
    REQUIRE(p.holding_times.size() > 100);
    double s = 0;
    for (double h : p.holding_times) s += h;
    const double mean = s / static_cast<double>(p.holding_times.size());
    const double expected = clock == Clock::csrw ? 1.0 : 1.0 / 3.0;  // omega_x = 6 * 0.5
    CHECK(std::abs(mean - expected) < 5 * expected / std::sqrt(static_cast<double>(p.holding_times.size())));
  }
}

TEST_CASE("hitting frequency agrees with the harmonic potential") {
  const auto env = testing::random_env(Box::ball(Site{0, 0, 0}, 4), 6);
  const SiteSet a(Box::ball(Site{0, 0, 0}, 1));
  const SiteSet b(Box::ball(Site{0, 0, 0}, 3));
  const Field h = harmonic_potential(env, a, b);
  const Site x{2, 1, 0};
  const Estimate e = hitting_frequency(*env, x, a, b, 20000, 77);
  CHECK(std::abs(e.mean - h.at(x)) < 5 * e.se);
}
