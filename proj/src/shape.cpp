#include "hclab/shape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hclab/error.hpp"

namespace hclab {

namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("shape dimension out of range");
}

int common_dim(const std::vector<ShapeSpec>& parts) {
  if (parts.empty()) throw InvalidArgument("shape combination needs at least one part");
  const int d = parts.front().dim();
  for (const auto& p : parts)
    if (p.dim() != d) throw InvalidArgument("shape parts differ in dimension");
  return d;
}

}  // namespace

ShapeSpec ShapeSpec::euclidean_ball(std::vector<double> center, double radius) {
  check_dim(static_cast<int>(center.size()));
  if (!(radius >= 0)) throw InvalidArgument("ball radius must be non-negative");
  ShapeSpec s;
  s.kind_ = Kind::euclidean_ball;
  s.dim_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

ShapeSpec ShapeSpec::linf_box(std::vector<double> center, double half_width) {
  check_dim(static_cast<int>(center.size()));
  if (!(half_width >= 0)) throw InvalidArgument("box half-width must be non-negative");
  ShapeSpec s;
  s.kind_ = Kind::linf_box;
  s.dim_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = half_width;
  return s;
}

ShapeSpec ShapeSpec::half_space(std::vector<double> normal, double offset) {
  check_dim(static_cast<int>(normal.size()));
  double norm2 = 0;
  for (double v : normal) norm2 += v * v;
  if (!(norm2 > 0)) throw InvalidArgument("half-space normal must be non-zero");
  const double norm = std::sqrt(norm2);
  for (double& v : normal) v /= norm;
  ShapeSpec s;
  s.kind_ = Kind::half_space;
  s.dim_ = static_cast<int>(normal.size());
  s.center_ = std::move(normal);
  s.radius_ = offset / norm;
  return s;
}

ShapeSpec ShapeSpec::union_of(std::vector<ShapeSpec> parts) {
  ShapeSpec s;
  s.dim_ = common_dim(parts);
  s.kind_ = Kind::union_of;
  s.parts_ = std::move(parts);
  return s;
}

ShapeSpec ShapeSpec::intersection_of(std::vector<ShapeSpec> parts) {
  ShapeSpec s;
  s.dim_ = common_dim(parts);
  s.kind_ = Kind::intersection_of;
  s.parts_ = std::move(parts);
  return s;
}

ShapeSpec ShapeSpec::inflated(double delta) const {
  if (!(delta >= 0)) throw InvalidArgument("inflation radius must be non-negative");
  if (kind_ == Kind::intersection_of)
    throw InvalidArgument("inflation of an intersection is not supported");
  ShapeSpec s;
  s.dim_ = dim_;
  s.kind_ = Kind::inflated;
  s.radius_ = delta;
  s.parts_ = {*this};
  return s;
}

bool ShapeSpec::contains(std::span<const double> x) const {
  switch (kind_) {
    case Kind::euclidean_ball: {
      double r2 = 0;
      for (int i = 0; i < dim_; ++i) r2 += (x[i] - center_[i]) * (x[i] - center_[i]);
      return r2 <= radius_ * radius_;
    }
    case Kind::linf_box:
      for (int i = 0; i < dim_; ++i)
        if (std::abs(x[i] - center_[i]) > radius_) return false;
      return true;
    case Kind::half_space: {
      double dot = 0;
      for (int i = 0; i < dim_; ++i) dot += center_[i] * x[i];
      return dot <= radius_;
    }
    case Kind::union_of:
      return std::any_of(parts_.begin(), parts_.end(), [&](const auto& p) { return p.contains(x); });
    case Kind::intersection_of:
      return std::all_of(parts_.begin(), parts_.end(), [&](const auto& p) { return p.contains(x); });
    case Kind::inflated:
      return parts_.front().distance(x) <= radius_;
  }
  return false;
}

double ShapeSpec::distance(std::span<const double> x) const {
  switch (kind_) {
    case Kind::euclidean_ball: {
      double r2 = 0;
      for (int i = 0; i < dim_; ++i) r2 += (x[i] - center_[i]) * (x[i] - center_[i]);
      return std::max(0.0, std::sqrt(r2) - radius_);
    }
    case Kind::linf_box: {
      double r2 = 0;
      for (int i = 0; i < dim_; ++i) {
        const double excess = std::max(0.0, std::abs(x[i] - center_[i]) - radius_);
        r2 += excess * excess;
      }
      return std::sqrt(r2);
    }
    case Kind::half_space: {
      double dot = 0;
      for (int i = 0; i < dim_; ++i) dot += center_[i] * x[i];
      return std::max(0.0, dot - radius_);
    }
    case Kind::union_of: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : parts_) best = std::min(best, p.distance(x));
      return best;
    }
    case Kind::intersection_of:
      throw InvalidArgument("distance to an intersection is not supported");
    case Kind::inflated:
      return std::max(0.0, parts_.front().distance(x) - radius_);
  }
  return 0.0;
}

bool ShapeSpec::bounded() const { return bounds().has_value(); }

std::optional<std::pair<std::vector<double>, std::vector<double>>> ShapeSpec::bounds() const {
  using Bounds = std::pair<std::vector<double>, std::vector<double>>;
  switch (kind_) {
    case Kind::euclidean_ball:
    case Kind::linf_box: {
      Bounds b{center_, center_};
      for (int i = 0; i < dim_; ++i) {
        b.first[i] -= radius_;
        b.second[i] += radius_;
      }
      return b;
    }
    case Kind::half_space:
      return std::nullopt;
    case Kind::union_of: {
      std::optional<Bounds> acc;
      for (const auto& p : parts_) {
        auto b = p.bounds();
        if (!b) return std::nullopt;
        if (!acc) {
          acc = b;
          continue;
        }
        for (int i = 0; i < dim_; ++i) {
          acc->first[i] = std::min(acc->first[i], b->first[i]);
          acc->second[i] = std::max(acc->second[i], b->second[i]);
        }
      }
      return acc;
    }
    case Kind::intersection_of: {
      // Bounded as soon as one part is; the bounded parts' boxes intersect.
      std::optional<Bounds> acc;
      for (const auto& p : parts_) {
        auto b = p.bounds();
        if (!b) continue;
        if (!acc) {
          acc = b;
          continue;
        }
        for (int i = 0; i < dim_; ++i) {
          acc->first[i] = std::max(acc->first[i], b->first[i]);
          acc->second[i] = std::min(acc->second[i], b->second[i]);
        }
      }
      return acc;
    }
    case Kind::inflated: {
      auto b = parts_.front().bounds();
      if (!b) return std::nullopt;
      for (int i = 0; i < dim_; ++i) {
        b->first[i] -= radius_;
        b->second[i] += radius_;
      }
      return b;
    }
  }
  return std::nullopt;
}

SiteSet blow_up(const ShapeSpec& shape, int n) {
  if (n <= 0) throw InvalidArgument("blow-up factor must be positive");
  validate_dimension(shape.dim());
  const auto b = shape.bounds();
  if (!b) throw GeometryError("cannot blow up an unbounded shape");
  const int d = shape.dim();
  Site lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<int>(std::floor(b->first[i] * n)) - 1;
    hi[i] = static_cast<int>(std::ceil(b->second[i] * n)) + 1;
    if (hi[i] < lo[i]) return SiteSet();
  }
  std::vector<double> scaled(static_cast<std::size_t>(d));
  return SiteSet::from_predicate(Box(lo, hi), [&](const Site& x) {
    for (int i = 0; i < d; ++i) scaled[static_cast<std::size_t>(i)] = static_cast<double>(x[i]) / n;
    return shape.contains(scaled);
  });
}

}  // namespace hclab
