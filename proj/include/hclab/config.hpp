#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hclab/environment.hpp"
#include "hclab/io.hpp"
#include "hclab/shape.hpp"
#include "hclab/solver.hpp"
#include "hclab/test_function.hpp"

namespace hclab {

struct Tolerances {
  double heat_kernel = 1e-12;
  double se_multiplier = 5.0;         // unit-level statistical checks
  double agreement_se_multiplier = 3.0;  // cross-estimator agreement
  double cauchy_ratio = 0.5;          // last relative change < ratio * previous
  double identity = 1e-8;
};

/// Parsed common part of an experiment config; module sections stay in `raw`.
///
/// Top-level keys: dimension, lambda, environment, window, environment_file,
/// master_seed, replicas, output, solver, tolerances, and one section per
/// subcommand (potential, gff, percolation, disconnect, solidify, homogenize).
struct ExperimentConfig {
  Json raw;
  int dim = 3;
  double lambda = 1.0;
  EnvironmentLaw law;
  std::uint64_t environment_seed = 0;
  std::optional<Box> window;
  std::optional<std::filesystem::path> environment_file;
  std::uint64_t master_seed = 0;
  std::size_t replicas = 1000;
  std::string output = "out";
  SolverOptions solver;
  Tolerances tolerances;

  /// Throws InvalidArgument on schema violations.
  static ExperimentConfig parse(const Json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// SHA-1 of the canonical (key-sorted, compact) JSON dump.
  std::string hash() const;
  /// Seed for a named pipeline stage, derived from the master seed.
  std::uint64_t stage_seed(std::string_view stage) const;
  /// Section of raw, or an empty object.
  const Json& section(const std::string& name) const;
  void override_seed(std::uint64_t seed);
};

Site parse_site(const Json& j, int dim);
Box parse_box(const Json& j, int dim);
EnvironmentLaw parse_law(const Json& j);
/// {"type": "euclidean_ball" | "linf_box" | "half_space" | "union" | "intersection" | "inflated", ...}
ShapeSpec parse_shape(const Json& j, int dim);
/// {"type": "sites" | "box" | "ball" | "blow_up", ...}
SiteSet parse_site_set(const Json& j, int dim);
/// {"type": "zero" | "radial_bump" | "poly_bump" | "mollified_indicator", ...}
TestFunctionSpec parse_test_function(const Json& j, int dim);

/// Schema and cross-field diagnostics; never runs a solver. Empty when valid.
std::vector<std::string> validate_config(const Json& j);

}  // namespace hclab
