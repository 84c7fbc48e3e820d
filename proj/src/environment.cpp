#include "hclab/environment.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hclab/error.hpp"
#include "hclab/rng.hpp"

namespace hclab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t edge_key(const Site& lower) {
  std::uint64_t h = 0x5bd1e995ULL;
  for (int i = 0; i < lower.dim(); ++i) h = mix64(h ^ static_cast<std::uint32_t>(lower[i]));
  return h;
}

void check_in_range(double v, double lambda, const char* what) {
  if (!(v >= lambda && v <= 1.0)) {
    std::ostringstream os;
    os << what << " = " << v << " outside [lambda, 1] = [" << lambda << ", 1]";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

void EnvironmentLaw::validate(double lambda) const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  switch (kind) {
    case Kind::constant:
      check_in_range(a, lambda, "constant value");
      break;
    case Kind::iid_uniform:
      check_in_range(a, lambda, "uniform lower bound");
      check_in_range(b, lambda, "uniform upper bound");
      if (a > b) throw InvalidArgument("uniform law needs lower <= upper");
      break;
    case Kind::iid_two_point:
      check_in_range(a, lambda, "two-point atom a");
      check_in_range(b, lambda, "two-point atom b");
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("two-point probability outside [0, 1]");
      break;
    case Kind::checkerboard:
      check_in_range(a, lambda, "checkerboard value a");
      check_in_range(b, lambda, "checkerboard value b");
      break;
    case Kind::explicit_weights:
      break;
  }
}

double EnvironmentLaw::edge_weight(const Site& lower, int dir, std::uint64_t seed) const {
  switch (kind) {
    case Kind::constant:
      return a;
    case Kind::iid_uniform:
      return a + (b - a) * keyed_uniform(seed, edge_key(lower), static_cast<std::uint64_t>(dir));
    case Kind::iid_two_point:
      return keyed_uniform(seed, edge_key(lower), static_cast<std::uint64_t>(dir)) < p ? b : a;
    case Kind::checkerboard: {
      int sum = 0;
      for (int i = 0; i < lower.dim(); ++i) sum += lower[i];
      return (sum % 2 == 0) ? a : b;
    }
    case Kind::explicit_weights:
      break;
  }
  throw GeometryError("explicit environment cannot be re-derived outside its window");
}

std::string EnvironmentLaw::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::constant: os << "constant(" << a << ")"; break;
    case Kind::iid_uniform: os << "iid_uniform(" << a << "," << b << ")"; break;
    case Kind::iid_two_point: os << "iid_two_point(" << a << "," << b << "," << p << ")"; break;
    case Kind::checkerboard: os << "checkerboard(" << a << "," << b << ")"; break;
    case Kind::explicit_weights: os << "explicit"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

Conductances Conductances::sample(const EnvironmentLaw& law, double lambda, const Box& window,
                                  std::uint64_t seed) {
  validate_dimension(window.dim());
  if (window.empty()) throw GeometryError("environment window is empty");
  if (!law.keyed()) throw InvalidArgument("explicit weights cannot be sampled");
  law.validate(lambda);
  Conductances c;
  c.window_ = window;
  c.storage_ = window.expanded(1);
  c.lambda_ = lambda;
  c.law_ = law;
  c.seed_ = seed;
  c.offset_ = Site(window.dim());
  const int d = window.dim();
  const std::size_t n = c.storage_.volume();
  c.weights_.assign(n * static_cast<std::size_t>(d), kNaN);
  for (std::size_t k = 0; k < n; ++k) {
    const Site x = c.storage_.site_at(k);
    for (int i = 0; i < d; ++i)
      if (x[i] < c.storage_.hi()[i])
        c.weights_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = law.edge_weight(x, i, seed);
  }
  return c;
}

Conductances Conductances::from_function(const Box& window, double lambda,
                                         const std::function<double(const Site&, int)>& weight) {
  validate_dimension(window.dim());
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  Conductances c;
  c.window_ = window;
  c.storage_ = window.expanded(1);
  c.lambda_ = lambda;
  c.law_.kind = EnvironmentLaw::Kind::explicit_weights;
  c.offset_ = Site(window.dim());
  const int d = window.dim();
  const std::size_t n = c.storage_.volume();
  c.weights_.assign(n * static_cast<std::size_t>(d), kNaN);
  for (std::size_t k = 0; k < n; ++k) {
    const Site x = c.storage_.site_at(k);
    for (int i = 0; i < d; ++i) {
      if (x[i] >= c.storage_.hi()[i]) continue;
      const double w = weight(x, i);
      check_in_range(w, lambda, "explicit edge weight");
      c.weights_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = w;
    }
  }
  return c;
}

Conductances Conductances::from_canonical(const EnvironmentLaw& law, double lambda, const Box& window,
                                          std::uint64_t seed, const Site& offset,
                                          const std::vector<double>& canonical) {
  law.validate(lambda);
  if (offset.dim() != window.dim()) throw InvalidArgument("environment offset dimension mismatch");
  Conductances c;
  c.offset_ = offset;
  c.window_ = window;
  c.storage_ = window.expanded(1);
  c.lambda_ = lambda;
  c.law_ = law;
  c.seed_ = seed;
  const int d = window.dim();
  const std::size_t n = c.storage_.volume();
  c.weights_.assign(n * static_cast<std::size_t>(d), kNaN);
  std::size_t next = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Site x = c.storage_.site_at(k);
    for (int i = 0; i < d; ++i) {
      if (x[i] >= c.storage_.hi()[i]) continue;
      if (next >= canonical.size()) throw InvalidArgument("environment payload too short");
      const double w = canonical[next++];
      check_in_range(w, lambda, "stored edge weight");
      c.weights_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = w;
    }
  }
  if (next != canonical.size()) throw InvalidArgument("environment payload too long");
  return c;
}

std::size_t Conductances::edge_count() const {
  std::size_t count = 0;
  for (int i = 0; i < dim(); ++i) {
    std::size_t per = 1;
    for (int j = 0; j < dim(); ++j)
      per *= static_cast<std::size_t>(storage_.extent(j) - (i == j ? 1 : 0));
    count += per;
  }
  return count;
}

double Conductances::weight_lower(const Site& x, int dir) const {
  if (!storage_.contains(x) || x[dir] >= storage_.hi()[dir]) return kNaN;
  return weights_[storage_.index_of(x) * static_cast<std::size_t>(dim()) + static_cast<std::size_t>(dir)];
}

namespace {

// Returns the direction of the edge {x, y} and writes its lower endpoint, or -1.
int edge_direction(const Site& x, const Site& y, Site& lower) {
  if (x.dim() != y.dim()) return -1;
  int dir = -1;
  for (int i = 0; i < x.dim(); ++i) {
    const int diff = y[i] - x[i];
    if (diff == 0) continue;
    if (dir >= 0 || std::abs(diff) != 1) return -1;
    dir = i;
  }
  if (dir >= 0) lower = (y[dir] > x[dir]) ? x : y;
  return dir;
}

}  // namespace

bool Conductances::has_edge(const Site& x, const Site& y) const {
  Site lower;
  const int dir = edge_direction(x, y, lower);
  return dir >= 0 && !std::isnan(weight_lower(lower, dir));
}

double Conductances::weight(const Site& x, const Site& y) const {
  Site lower;
  const int dir = edge_direction(x, y, lower);
  if (dir < 0) throw InvalidArgument("weight requested for non-adjacent sites");
  const double w = weight_lower(lower, dir);
  if (std::isnan(w)) {
    std::ostringstream os;
    os << "edge {" << x << ", " << y << "} lies outside the environment window";
    throw GeometryError(os.str());
  }
  return w;
}

bool Conductances::has_all_edges(const Site& x) const {
  for (int i = 0; i < dim(); ++i) {
    if (std::isnan(weight_lower(x, i)) || std::isnan(weight_lower(x.step(i, -1), i))) return false;
  }
  return true;
}

double Conductances::site_weight(const Site& x) const {
  double sum = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double up = weight_lower(x, i);
    const double down = weight_lower(x.step(i, -1), i);
    if (std::isnan(up) || std::isnan(down)) {
      std::ostringstream os;
      os << "site " << x << " has an incident edge outside the environment window";
      throw GeometryError(os.str());
    }
    sum += up + down;
  }
  return sum;
}

Conductances Conductances::shift(const Site& x) const {
  if (x.dim() != dim()) throw InvalidArgument("shift dimension mismatch");
  Conductances c(*this);
  const int d = dim();
  const std::size_t n = storage_.volume();
  for (std::size_t k = 0; k < n; ++k) {
    const Site y = storage_.site_at(k);
    for (int i = 0; i < d; ++i) {
      if (y[i] >= storage_.hi()[i]) continue;
      const Site src = y + x;
      double w = weight_lower(src, i);
      if (std::isnan(w)) {
        if (!law_.keyed()) throw GeometryError("shift leaves the window of an explicit environment");
        w = law_.edge_weight(src + offset_, i, seed_);
      }
      c.weights_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = w;
    }
  }
  c.offset_ = offset_ + x;
  return c;
}

}  // namespace hclab
