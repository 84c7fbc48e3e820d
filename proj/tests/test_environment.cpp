#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hclab/error.hpp"
#include "hclab/io.hpp"
#include "hclab/rng.hpp"

using namespace hclab;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and independent of generation order") {
  StreamRng a(42, derive_stream("x", 3)), b(42, derive_stream("x", 3)), c(42, derive_stream("x", 4));
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u != c.uniform());
  }
}

TEST_CASE("normal and exponential variates have the right moments") {
  StreamRng rng(7, 1);
  const int n = 200000;
  double s = 0, s2 = 0, e = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    e += rng.exponential(2.0);
  }
  CHECK(std::abs(s / n) < 5 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(e / n - 0.5) < 5 * 0.5 / std::sqrt(n));
}

TEST_CASE("law validation") {
  CHECK_THROWS_AS(EnvironmentLaw::iid_uniform(0.2, 1.0).validate(0.5), InvalidArgument);
  CHECK_THROWS_AS(EnvironmentLaw::iid_two_point(0.5, 1.0, 1.5).validate(0.5), InvalidArgument);
  CHECK_NOTHROW(EnvironmentLaw::checkerboard(0.5, 1.0).validate(0.5));
  CHECK_THROWS_AS(Conductances::sample(EnvironmentLaw::constant(1), 1.0, Box::ball(Site{0, 0, 0}, 1), 0),
                  InvalidArgument);
}

TEST_CASE("sampled weights lie in [lambda, 1] and site weights sum incident edges") {
  const Box w = Box::ball(Site{0, 0, 0}, 3);
  const auto env = testing::random_env(w, 11, 0.3);
  env->for_each_edge([&](const Site&, int, double v) {
    CHECK(v >= 0.3);
    CHECK(v <= 1.0);
  });
  const Site x{1, 0, -2};
  double sum = 0;
  for (int d = 0; d < 3; ++d)
    for (int s : {-1, 1}) sum += env->weight(x, x.step(d, s));
  CHECK(env->site_weight(x) == doctest::Approx(sum).epsilon(1e-15));
  CHECK(env->weight(x, x.step(0, 1)) == env->weight(x.step(0, 1), x));
  CHECK_THROWS_AS(env->weight(Site{10, 0, 0}, Site{11, 0, 0}), GeometryError);
}

TEST_CASE("keyed environments agree on overlapping windows") {
  const auto law = EnvironmentLaw::iid_two_point(0.5, 1.0, 0.3);
  const auto e1 = Conductances::sample(law, 0.5, Box(Site{0, 0, 0}, Site{5, 5, 5}), 9);
  const auto e2 = Conductances::sample(law, 0.5, Box(Site{3, 2, 1}, Site{9, 9, 9}), 9);
  const Box overlap(Site{3, 2, 1}, Site{5, 5, 5});
  for (std::size_t k = 0; k < overlap.volume(); ++k) {
    const Site x = overlap.site_at(k);
    for (int d = 0; d < 3; ++d) CHECK(e1.weight(x, x.step(d, 1)) == e2.weight(x, x.step(d, 1)));
  }
}

TEST_CASE("shifts are consistent with the keyed law") {
  const auto law = EnvironmentLaw::iid_uniform(0.5, 1.0);
  const Box w = Box::ball(Site{0, 0, 0}, 3);
  const auto env = Conductances::sample(law, 0.5, w, 5);
  const Site s{2, -1, 0};
  const auto shifted = env.shift(s);
  for (std::size_t k = 0; k < w.volume(); ++k) {
    const Site y = w.site_at(k);
    for (int d = 0; d < 3; ++d) CHECK(shifted.weight(y, y.step(d, 1)) == law.edge_weight(y + s, d, 5));
  }
  const auto back = shifted.shift(-s);
  for (std::size_t k = 0; k < w.volume(); ++k) {
    const Site y = w.site_at(k);
    for (int d = 0; d < 3; ++d) CHECK(back.weight(y, y.step(d, 1)) == env.weight(y, y.step(d, 1)));
  }
}

TEST_CASE("checkerboard and constant laws are deterministic") {
  const auto env = Conductances::sample(EnvironmentLaw::checkerboard(0.5, 1.0), 0.5, Box::ball(Site{0, 0, 0}, 2), 1);
  CHECK(env.weight(Site{0, 0, 0}, Site{1, 0, 0}) == 0.5);
  CHECK(env.weight(Site{1, 0, 0}, Site{2, 0, 0}) == 1.0);
  const auto c = testing::constant_env(Box::ball(Site{0, 0, 0}, 2));
  CHECK(c->site_weight(Site{0, 0, 0}) == 6.0);
}

TEST_CASE("binary environment files round-trip") {
  const auto env = testing::random_env(Box(Site{-1, 0, 2}, Site{3, 2, 4}), 21);
  const std::string bytes = encode_environment(*env);
  const Conductances back = decode_environment(bytes);
  CHECK(back.window() == env->window());
  CHECK(back.seed() == env->seed());
  CHECK(encode_environment(back) == bytes);
  std::vector<double> a, b;
  env->for_each_edge([&](const Site&, int, double v) { a.push_back(v); });
  back.for_each_edge([&](const Site&, int, double v) { b.push_back(v); });
  CHECK(a == b);
  CHECK_THROWS_AS(decode_environment(bytes.substr(0, bytes.size() - 3)), InvalidArgument);
}
