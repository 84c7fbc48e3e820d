#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hclab/environment.hpp"
#include "hclab/lattice.hpp"
#include "hclab/rng.hpp"
#include "hclab/stats.hpp"

namespace hclab {

enum class Clock { csrw, vsrw };
enum class StopReason { hit, exit, radius, time_cap };

const char* to_string(StopReason r);

/// Stopping rules, checked on the skeleton in the order hit, exit, radius;
/// the time cap is checked during holding periods.
struct StopRules {
  std::optional<SiteSet> hit;        // H_A: stop on entering A (including time 0)
  std::optional<SiteSet> exit;       // T_U: stop on leaving U (including time 0)
  std::optional<int> radius;         // tau_r: |Y_n - Y_0|_inf >= r
  std::optional<double> time_cap;    // stop when the clock passes this time
};

struct WalkPath {
  std::vector<Site> skeleton;        // Y_0, Y_1, ... (only start and end when not recorded)
  std::vector<double> holding_times; // zeta_n for every completed holding period
  StopReason stop_reason = StopReason::time_cap;
  std::size_t jumps = 0;
  double time = 0.0;                 // clock value at the stop

  const Site& end() const { return skeleton.back(); }
};

/// Continuous-time walk with skeleton transitions omega_yz / omega_y. CSRW holds
/// Exp(1) at each site, VSRW holds Exp(omega_y). Throws InvalidArgument when no
/// rule guarantees termination and GeometryError when the walk needs an edge
/// outside the environment window.
WalkPath walk_simulate(const Conductances& env, const Site& start, const StopRules& rules, StreamRng& rng,
                       Clock clock = Clock::csrw, bool record = true);

/// Monte Carlo estimate of P_x[H_A < T_B] with `replicas` independent walks.
Estimate hitting_frequency(const Conductances& env, const Site& x, const SiteSet& a, const SiteSet& b,
                           std::size_t replicas, std::uint64_t seed);

}  // namespace hclab
