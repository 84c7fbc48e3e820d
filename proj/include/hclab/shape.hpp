#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hclab/lattice.hpp"

namespace hclab {

/// Continuum shape in R^d built from closed primitives.
///
/// Membership is tested with the closed-set convention (<=). Half-spaces are
/// unbounded and may only be used as density test sets, never blown up.
class ShapeSpec {
 public:
  enum class Kind { euclidean_ball, linf_box, half_space, union_of, intersection_of, inflated };

  static ShapeSpec euclidean_ball(std::vector<double> center, double radius);
  static ShapeSpec linf_box(std::vector<double> center, double half_width);
  /// {x : <normal, x> <= offset}.
  static ShapeSpec half_space(std::vector<double> normal, double offset);
  static ShapeSpec union_of(std::vector<ShapeSpec> parts);
  static ShapeSpec intersection_of(std::vector<ShapeSpec> parts);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<double>& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<ShapeSpec>& parts() const { return parts_; }

  bool contains(std::span<const double> x) const;
  /// Euclidean distance from x to the shape (0 inside). Exact for primitives,
  /// unions and inflations; throws for intersections.
  double distance(std::span<const double> x) const;
  bool bounded() const;
  /// Continuum bounding box as (lo, hi); nullopt when unbounded.
  std::optional<std::pair<std::vector<double>, std::vector<double>>> bounds() const;

  /// Closed delta-neighborhood {x : dist(x, A) <= delta}.
  ShapeSpec inflated(double delta) const;

 private:
  Kind kind_ = Kind::euclidean_ball;
  int dim_ = 0;
  std::vector<double> center_;  // center, or normal for half-spaces
  double radius_ = 0.0;         // radius, half-width, offset, or inflation
  std::vector<ShapeSpec> parts_;
};

/// A_N = {x in Z^d : x / N in A}. Throws GeometryError for unbounded shapes.
SiteSet blow_up(const ShapeSpec& shape, int n);

}  // namespace hclab
