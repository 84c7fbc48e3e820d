#include "hclab/walk.hpp"

#include <array>
#include <sstream>

#include "hclab/error.hpp"
#include "hclab/parallel.hpp"

namespace hclab {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::hit: return "hit";
    case StopReason::exit: return "exit";
    case StopReason::radius: return "radius";
    case StopReason::time_cap: return "time_cap";
  }
  return "?";
}

namespace {

std::optional<StopReason> skeleton_stop(const StopRules& rules, const Site& y, const Site& start) {
  if (rules.hit && rules.hit->contains(y)) return StopReason::hit;
  if (rules.exit && !rules.exit->contains(y)) return StopReason::exit;
  if (rules.radius && linf_norm(y - start) >= *rules.radius) return StopReason::radius;
  return std::nullopt;
}

}  // namespace

WalkPath walk_simulate(const Conductances& env, const Site& start, const StopRules& rules, StreamRng& rng,
                       Clock clock, bool record) {
  if (!rules.exit && !rules.radius && !rules.time_cap)
    throw InvalidArgument("walk needs an exit, radius or time-cap rule to terminate");
  if (start.dim() != env.dim()) throw InvalidArgument("walk start dimension mismatch");
  const int d = env.dim();
  WalkPath path;
  path.skeleton.push_back(start);
  Site y = start;
  if (auto r = skeleton_stop(rules, y, start)) {
    path.stop_reason = *r;
    return path;
  }
  std::array<double, 2 * kMaxDim> w{};
  std::array<Site, 2 * kMaxDim> nb{};
  for (;;) {
    double total = 0.0;
    for (int dir = 0; dir < d; ++dir) {
      for (int s = 0; s < 2; ++s) {
        const Site z = y.step(dir, s == 0 ? -1 : 1);
        if (!env.has_edge(y, z)) {
          std::ostringstream os;
          os << "walk reached " << y << " at the edge of the environment window";
          throw GeometryError(os.str());
        }
        const double wz = env.weight(y, z);
        nb[static_cast<std::size_t>(2 * dir + s)] = z;
        w[static_cast<std::size_t>(2 * dir + s)] = wz;
        total += wz;
      }
    }
    const double hold = rng.exponential(clock == Clock::csrw ? 1.0 : total);
    if (rules.time_cap && path.time + hold > *rules.time_cap) {
      path.time = *rules.time_cap;
      path.stop_reason = StopReason::time_cap;
      break;
    }
    path.time += hold;
    if (record) path.holding_times.push_back(hold);
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    const std::size_t m = static_cast<std::size_t>(2 * d);
    while (pick + 1 < m && u >= w[pick]) {
      u -= w[pick];
      ++pick;
    }
    y = nb[pick];
    ++path.jumps;
    if (record) path.skeleton.push_back(y);
    if (auto r = skeleton_stop(rules, y, start)) {
      path.stop_reason = *r;
      break;
    }
  }
  if (!record) {
    if (path.skeleton.size() == 1 && !(path.skeleton.front() == y)) path.skeleton.push_back(y);
  }
  return path;
}

Estimate hitting_frequency(const Conductances& env, const Site& x, const SiteSet& a, const SiteSet& b,
                           std::size_t replicas, std::uint64_t seed) {
  StopRules rules;
  rules.hit = a;
  rules.exit = b;
  std::vector<char> hit(replicas, 0);
  parallel_for(replicas, [&](std::size_t i) {
    StreamRng rng(seed, derive_stream("hitting", i));
    hit[i] = walk_simulate(env, x, rules, rng, Clock::csrw, false).stop_reason == StopReason::hit;
  });
  std::size_t hits = 0;
  for (char h : hit) hits += static_cast<std::size_t>(h);
  return binomial_estimate(hits, replicas);
}

}  // namespace hclab
