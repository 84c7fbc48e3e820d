#include "hclab/test_function.hpp"

#include <cmath>

#include "hclab/error.hpp"

namespace hclab {

TestFunctionSpec TestFunctionSpec::zero() { return {}; }

TestFunctionSpec TestFunctionSpec::radial_bump(std::vector<double> center, double radius) {
  if (!(radius > 0)) throw InvalidArgument("bump radius must be positive");
  TestFunctionSpec t;
  t.kind = Kind::radial_bump;
  t.center = std::move(center);
  t.radius = radius;
  return t;
}

TestFunctionSpec TestFunctionSpec::poly_bump(std::vector<double> center, double radius, std::vector<Term> polynomial) {
  TestFunctionSpec t = radial_bump(std::move(center), radius);
  t.kind = Kind::poly_bump;
  for (const auto& term : polynomial)
    if (term.exponents.size() != t.center.size()) throw InvalidArgument("monomial exponents do not match the dimension");
  t.polynomial = std::move(polynomial);
  return t;
}

TestFunctionSpec TestFunctionSpec::mollified_indicator(ShapeSpec shape, double width) {
  if (!(width > 0)) throw InvalidArgument("mollification width must be positive");
  if (!shape.bounded()) throw InvalidArgument("mollified indicator needs a bounded shape");
  TestFunctionSpec t;
  t.kind = Kind::mollified_indicator;
  t.width = width;
  t.shape = std::move(shape);
  return t;
}

namespace {

double bump(std::span<const double> x, const std::vector<double>& c, double radius) {
  double r2 = 0;
  for (std::size_t i = 0; i < c.size(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
  const double s2 = r2 / (radius * radius);
  if (s2 >= 1) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s2));
}

}  // namespace

double TestFunctionSpec::operator()(std::span<const double> x) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::radial_bump:
      return bump(x, center, radius);
    case Kind::poly_bump: {
      const double b = bump(x, center, radius);
      if (b == 0.0) return 0.0;
      double p = 0;
      for (const auto& term : polynomial) {
        double m = term.coefficient;
        for (std::size_t i = 0; i < term.exponents.size(); ++i) m *= std::pow(x[i], term.exponents[i]);
        p += m;
      }
      return p * b;
    }
    case Kind::mollified_indicator:
      return std::max(0.0, 1.0 - shape->distance(x) / width);
  }
  return 0.0;
}

TestFunction TestFunctionSpec::callable() const {
  return [spec = *this](std::span<const double> x) { return spec(x); };
}

std::pair<std::vector<double>, std::vector<double>> TestFunctionSpec::support_bounds() const {
  switch (kind) {
    case Kind::zero:
      return {{}, {}};
    case Kind::radial_bump:
    case Kind::poly_bump: {
      std::vector<double> lo = center, hi = center;
      for (std::size_t i = 0; i < center.size(); ++i) {
        lo[i] -= radius;
        hi[i] += radius;
      }
      return {lo, hi};
    }
    case Kind::mollified_indicator: {
      auto b = *shape->bounds();
      for (auto& v : b.first) v -= width;
      for (auto& v : b.second) v += width;
      return b;
    }
  }
  return {{}, {}};
}

}  // namespace hclab
