#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "hclab/error.hpp"
#include "hclab/lattice.hpp"
#include "hclab/shape.hpp"

using namespace hclab;

namespace {

std::set<Site> as_set(const SiteSet& s) { return {s.begin(), s.end()}; }

std::set<Site> brute_box(const Box& b) {
  std::set<Site> out;
  for (std::size_t k = 0; k < b.volume(); ++k) out.insert(b.site_at(k));
  return out;
}

}  // namespace

TEST_CASE("site arithmetic and norms") {
  const Site x{1, -2, 3}, y{0, 4, -1};
  CHECK(x + y == Site{1, 2, 2});
  CHECK(x - y == Site{1, -6, 4});
  CHECK(linf_norm(x) == 3);
  CHECK(l1_norm(x) == 6);
  CHECK(x.step(1, 1) == Site{1, -1, 3});
  CHECK(Site::unit(3, 2, 5) == Site{0, 0, 5});
  CHECK_THROWS_AS(validate_dimension(2), InvalidArgument);
  CHECK_THROWS_AS(validate_dimension(7), InvalidArgument);
}

TEST_CASE("box indexing round-trips in lexicographic order") {
  const Box b(Site{-1, 0, 2}, Site{2, 3, 4});
  CHECK(b.volume() == 4 * 4 * 3);
  Site prev;
  for (std::size_t k = 0; k < b.volume(); ++k) {
    const Site x = b.site_at(k);
    CHECK(b.index_of(x) == k);
    if (k > 0) CHECK(prev < x);
    prev = x;
  }
  CHECK(Box::ball(Site{0, 0, 0}, 2).volume() == 125);
}

TEST_CASE("site sets sort, deduplicate and index") {
  const SiteSet s({Site{1, 0, 0}, Site{0, 0, 0}, Site{1, 0, 0}, Site{0, 5, 0}});
  REQUIRE(s.size() == 3);
  CHECK(s[0] == Site{0, 0, 0});
  CHECK(s.index_of(Site{0, 5, 0}) == 1);
  CHECK(s.index_of(Site{9, 9, 9}) == -1);
  CHECK(s.bounding_box() == Box(Site{0, 0, 0}, Site{1, 5, 0}));
}

TEST_CASE("set operations agree with std::set") {
  const Box box(Site{0, 0, 0}, Site{5, 5, 5});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SiteSet a = testing::random_subset(box, 0.4, seed), b = testing::random_subset(box, 0.4, seed + 100);
    const auto sa = as_set(a), sb = as_set(b);
    std::set<Site> u = sa, i, d;
    u.insert(sb.begin(), sb.end());
    for (const Site& x : sa) (sb.count(x) ? i : d).insert(x);
    CHECK(as_set(set_union(a, b)) == u);
    CHECK(as_set(set_intersection(a, b)) == i);
    CHECK(as_set(set_difference(a, b)) == d);
    CHECK(set_intersection(a, b).is_subset_of(a));
  }
}

TEST_CASE("boundaries match brute force") {
  const Box box(Site{0, 0, 0}, Site{4, 4, 4});
  const SiteSet k = testing::random_subset(box, 0.5, 3);
  std::set<Site> ext, in;
  for (const Site& x : k)
    for (int dir = 0; dir < 3; ++dir)
      for (int s : {-1, 1}) {
        const Site y = x.step(dir, s);
        if (!k.contains(y)) {
          ext.insert(y);
          in.insert(x);
        }
      }
  CHECK(as_set(boundary(k, BoundaryKind::external)) == ext);
  CHECK(as_set(boundary(k, BoundaryKind::internal)) == in);
}

TEST_CASE("sphere, ball and thickening") {
  for (int n : {1, 2, 3}) {
    const int r = static_cast<int>(2.5 * n);
    const SiteSet s = sphere(3, 2.5, n);
    const std::size_t expected = static_cast<std::size_t>((2 * r + 1) * (2 * r + 1) * (2 * r + 1) -
                                                          (2 * r - 1) * (2 * r - 1) * (2 * r - 1));
    CHECK(s.size() == expected);
    for (const Site& x : s) CHECK(linf_norm(x) == r);
  }
  const SiteSet k(std::vector<Site>{Site{0, 0, 0}, Site{4, 0, 0}});
  const SiteSet t = thicken(k, 1);
  std::set<Site> expected;
  for (const Site& c : k) {
    const auto b = brute_box(Box::ball(c, 1));
    expected.insert(b.begin(), b.end());
  }
  CHECK(as_set(t) == expected);
  CHECK(linf_distance(k, SiteSet({Site{2, 3, 1}})) == 3);
}

TEST_CASE("shapes: membership, distance, inflation and blow-up") {
  const auto ball = ShapeSpec::euclidean_ball({0, 0, 0}, 1.0);
  const std::vector<double> out{2, 0, 0}, in{0.5, 0.5, 0};
  CHECK(ball.contains(in));
  CHECK_FALSE(ball.contains(out));
  CHECK(ball.distance(out) == doctest::Approx(1.0));
  CHECK(ball.inflated(0.5).distance(out) == doctest::Approx(0.5));
  const auto box = ShapeSpec::linf_box({0, 0, 0}, 1.0);
  const std::vector<double> corner{2, 2, 1};
  CHECK(box.distance(corner) == doctest::Approx(std::sqrt(2.0)));
  const auto u = ShapeSpec::union_of({ball, ShapeSpec::linf_box({3, 0, 0}, 0.5)});
  const std::vector<double> p{3.2, 0, 0};
  CHECK(u.contains(p));

  // blow-up of the closed ball of radius 1 at N = 4: |x| <= 4
  const SiteSet bn = blow_up(ball, 4);
  std::size_t count = 0;
  for (std::size_t k = 0; k < Box::ball(Site{0, 0, 0}, 4).volume(); ++k) {
    const Site x = Box::ball(Site{0, 0, 0}, 4).site_at(k);
    if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= 16) ++count;
  }
  CHECK(bn.size() == count);
  CHECK_THROWS_AS(blow_up(ShapeSpec::half_space({1, 0, 0}, 0.0), 2), GeometryError);
}
