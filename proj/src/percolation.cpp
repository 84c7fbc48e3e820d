#include "hclab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hclab/error.hpp"
#include "hclab/parallel.hpp"

namespace hclab {

namespace {

constexpr std::size_t kChunk = 256;

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  // The smaller index becomes the root, so roots are canonical labels.
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    return a;
  }

 private:
  std::vector<int> parent_;
};

// Neighbor indices of site i in the domain (-1 when absent), l1 adjacency.
template <class F>
void for_each_neighbor(const SiteSet& domain, std::size_t i, F&& f) {
  const Site& x = domain[i];
  for (int dir = 0; dir < x.dim(); ++dir)
    for (int sign : {-1, 1}) {
      const auto j = domain.index_of(x.step(dir, sign));
      if (j >= 0) f(static_cast<std::size_t>(j));
    }
}

void require_subset(const SiteSet& s, const SiteSet& domain, const char* what) {
  if (!s.is_subset_of(domain)) {
    std::ostringstream os;
    os << what << " is not contained in the field domain";
    throw GeometryError(os.str());
  }
}

}  // namespace

std::size_t LevelSet::count() const { return static_cast<std::size_t>(std::count(member.begin(), member.end(), 1)); }

bool LevelSet::contains(const Site& x) const {
  const auto i = domain.index_of(x);
  return i >= 0 && member[static_cast<std::size_t>(i)];
}

LevelSet level_set(const Field& phi, double alpha) {
  LevelSet s;
  s.domain = phi.domain;
  s.alpha = alpha;
  s.member.resize(phi.domain.size());
  for (std::size_t i = 0; i < s.member.size(); ++i) s.member[i] = phi.values[static_cast<Eigen::Index>(i)] >= alpha;
  return s;
}

LevelSet level_set_from_mask(SiteSet domain, std::vector<char> member) {
  if (member.size() != domain.size()) throw InvalidArgument("mask size does not match the domain");
  LevelSet s;
  s.domain = std::move(domain);
  s.alpha = std::numeric_limits<double>::quiet_NaN();
  s.member = std::move(member);
  return s;
}

const ComponentLabeling::Component& ComponentLabeling::component(int lab) const {
  auto it = std::lower_bound(components.begin(), components.end(), lab,
                             [](const Component& c, int l) { return c.label < l; });
  if (it == components.end() || it->label != lab) throw InvalidArgument("unknown component label");
  return *it;
}

ComponentLabeling components(const LevelSet& s) {
  const std::size_t n = s.domain.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.member[i]) continue;
    for_each_neighbor(s.domain, i, [&](std::size_t j) {
      if (j > i && s.member[j]) uf.unite(static_cast<int>(i), static_cast<int>(j));
    });
  }
  ComponentLabeling out;
  out.label.assign(n, -1);
  const int d = s.domain.empty() ? 0 : s.domain.dim();
  struct Extent {
    std::size_t size = 0;
    std::array<int, kMaxDim> lo{}, hi{};
  };
  std::map<int, Extent> ext;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.member[i]) continue;
    const int root = uf.find(static_cast<int>(i));
    out.label[i] = root;
    const Site& x = s.domain[i];
    auto [it, fresh] = ext.try_emplace(root);
    Extent& e = it->second;
    for (int k = 0; k < d; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      if (fresh) {
        e.lo[kk] = e.hi[kk] = x[k];
      } else {
        e.lo[kk] = std::min(e.lo[kk], x[k]);
        e.hi[kk] = std::max(e.hi[kk], x[k]);
      }
    }
    ++e.size;
  }
  for (const auto& [root, e] : ext) {
    ComponentLabeling::Component c;
    c.label = root;
    c.size = e.size;
    for (int k = 0; k < d; ++k)
      c.diameter = std::max(c.diameter, e.hi[static_cast<std::size_t>(k)] - e.lo[static_cast<std::size_t>(k)]);
    out.components.push_back(c);
  }
  return out;
}

bool is_connected(const SiteSet& h, const SiteSet& k, const LevelSet& s) {
  const std::size_t n = s.domain.size();
  std::vector<char> seen(n, 0), target(n, 0);
  for (const Site& y : k) {
    const auto j = s.domain.index_of(y);
    if (j >= 0 && s.member[static_cast<std::size_t>(j)]) target[static_cast<std::size_t>(j)] = 1;
  }
  std::vector<std::size_t> queue;
  for (const Site& x : h) {
    const auto i = s.domain.index_of(x);
    if (i < 0 || !s.member[static_cast<std::size_t>(i)]) continue;
    const auto ui = static_cast<std::size_t>(i);
    if (target[ui]) return true;
    if (!seen[ui]) {
      seen[ui] = 1;
      queue.push_back(ui);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    bool found = false;
    for_each_neighbor(s.domain, queue[head], [&](std::size_t j) {
      if (found || seen[j] || !s.member[j]) return;
      if (target[j]) found = true;
      seen[j] = 1;
      queue.push_back(j);
    });
    if (found) return true;
  }
  return false;
}

namespace {

// Domain indices in decreasing field order, ties by index.
struct DescendingSweep {
  const SiteSet& domain;
  const double* values;
  std::vector<std::size_t> order;

  DescendingSweep(const SiteSet& d, const double* v) : domain(d), values(v), order(d.size()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  }
};

}  // namespace

double bottleneck_level(const Field& phi, const SiteSet& h, const SiteSet& k) {
  const SiteSet& dom = phi.domain;
  const std::size_t n = dom.size();
  std::vector<char> in_h(n, 0), in_k(n, 0);
  for (const Site& x : h) {
    const auto i = dom.index_of(x);
    if (i >= 0) in_h[static_cast<std::size_t>(i)] = 1;
  }
  for (const Site& x : k) {
    const auto i = dom.index_of(x);
    if (i >= 0) in_k[static_cast<std::size_t>(i)] = 1;
  }
  DescendingSweep sweep(dom, phi.values.data());
  UnionFind uf(n);
  std::vector<char> active(n, 0), has_h(n, 0), has_k(n, 0);
  for (std::size_t i : sweep.order) {
    active[i] = 1;
    int root = static_cast<int>(i);
    bool hh = in_h[i], kk = in_k[i];
    for_each_neighbor(dom, i, [&](std::size_t j) {
      if (!active[j]) return;
      const int rj = uf.find(static_cast<int>(j));
      hh = hh || has_h[static_cast<std::size_t>(rj)];
      kk = kk || has_k[static_cast<std::size_t>(rj)];
      root = uf.unite(root, rj);
    });
    has_h[static_cast<std::size_t>(root)] = hh;
    has_k[static_cast<std::size_t>(root)] = kk;
    if (hh && kk) return phi.values[static_cast<Eigen::Index>(i)];
  }
  return -std::numeric_limits<double>::infinity();
}

bool disconnection_event(const Field& phi, double alpha, const SiteSet& a, const SiteSet& s) {
  require_subset(a, phi.domain, "A_N");
  require_subset(s, phi.domain, "S_N");
  return !is_connected(a, s, level_set(phi, alpha));
}

// ---------------------------------------------------------------------------

Estimate CrossingSweep::at(std::size_t ai, std::size_t li) const { return rows.at(ai * Ls.size() + li).p; }

namespace {

std::vector<double> crossing_levels(const EnvPtr& env, int L, const Site& x, std::size_t replicas,
                                    std::uint64_t seed, int pad, const SolverOptions& options) {
  if (L < 1) throw InvalidArgument("crossing scale L must be positive");
  if (pad < 1) throw GeometryError("crossing needs padding >= 1 so that the boundary of B(x, 2L) is sampled");
  const SiteSet domain = ball(x, 2 * L + pad);
  const SiteSet inner = ball(x, L);
  std::vector<Site> shell;
  for (const Site& y : domain)
    if (linf_norm(y - x) == 2 * L + 1) shell.push_back(y);
  const SiteSet target(std::move(shell));
  std::ostringstream label;
  label << "crossing/L=" << L;
  const GffSampler sampler(std::make_shared<const DirichletOperator>(env, domain, options), label.str());
  std::vector<double> levels(replicas);
  for (std::size_t first = 0; first < replicas; first += kChunk) {
    const std::size_t count = std::min(kChunk, replicas - first);
    const Matrix m = sampler.sample_matrix(seed, first, count);
    parallel_for(count, [&](std::size_t j) {
      const Field f(domain, m.col(static_cast<Eigen::Index>(j)));
      levels[first + j] = bottleneck_level(f, inner, target);
    });
  }
  return levels;
}

Estimate frequency_at_least(const std::vector<double>& levels, double alpha) {
  std::size_t hits = 0;
  for (double v : levels) hits += (v >= alpha);
  return binomial_estimate(hits, levels.size());
}

}  // namespace

Estimate crossing_probability(const EnvPtr& env, double alpha, int L, const Site& x, std::size_t replicas,
                              std::uint64_t seed, int pad, const SolverOptions& options) {
  return frequency_at_least(crossing_levels(env, L, x, replicas, seed, pad, options), alpha);
}

CrossingSweep crossing_sweep(const EnvPtr& env, const std::vector<double>& alphas, const std::vector<int>& Ls,
                             const Site& x, std::size_t replicas, std::uint64_t seed, int pad,
                             const SolverOptions& options) {
  CrossingSweep out;
  out.alphas = alphas;
  std::sort(out.alphas.begin(), out.alphas.end());
  out.Ls = Ls;
  std::vector<std::vector<double>> levels;
  for (int L : Ls) levels.push_back(crossing_levels(env, L, x, replicas, seed, pad, options));
  for (double a : out.alphas)
    for (std::size_t li = 0; li < Ls.size(); ++li) out.rows.push_back({a, Ls[li], frequency_at_least(levels[li], a)});
  if (Ls.size() >= 2) {
    for (std::size_t ai = 0; ai < out.alphas.size(); ++ai) {
      bool decreasing = true;
      for (std::size_t li = 1; li < Ls.size(); ++li)
        if (out.at(ai, li).mean > out.at(ai, li - 1).mean) decreasing = false;
      const double first = out.at(ai, 0).mean, last = out.at(ai, Ls.size() - 1).mean;
      if (decreasing && (last < first || first == 0.0)) {
        out.alpha_star_star = out.alphas[ai];
        break;
      }
    }
  }
  return out;
}

ConnectivityResult connectivity_function(const EnvPtr& env, const std::vector<double>& alphas, const Site& x,
                                         const std::vector<Site>& z_list, int pad, std::size_t replicas,
                                         std::uint64_t seed, const SolverOptions& options) {
  if (pad < 0) throw GeometryError("connectivity padding must be non-negative");
  Site lo = x, hi = x;
  for (const Site& z : z_list) {
    const Site y = x + z;
    for (int i = 0; i < x.dim(); ++i) {
      lo[i] = std::min(lo[i], y[i]);
      hi[i] = std::max(hi[i], y[i]);
    }
  }
  const SiteSet domain(Box(lo, hi).expanded(pad));
  const GffSampler sampler(std::make_shared<const DirichletOperator>(env, domain, options), "connectivity");
  const auto ix = static_cast<std::size_t>(domain.index_of(x));
  std::vector<std::size_t> targets;
  for (const Site& z : z_list) targets.push_back(static_cast<std::size_t>(domain.index_of(x + z)));
  // levels[r][k]: largest alpha at which x <-> x + z_k in replica r.
  std::vector<std::vector<double>> levels(replicas, std::vector<double>(z_list.size()));
  const std::size_t n = domain.size();
  for (std::size_t first = 0; first < replicas; first += kChunk) {
    const std::size_t count = std::min(kChunk, replicas - first);
    const Matrix m = sampler.sample_matrix(seed, first, count);
    parallel_for(count, [&](std::size_t j) {
      const double* v = m.col(static_cast<Eigen::Index>(j)).data();
      DescendingSweep sweep(domain, v);
      UnionFind uf(n);
      std::vector<char> active(n, 0);
      auto& out = levels[first + j];
      std::fill(out.begin(), out.end(), -std::numeric_limits<double>::infinity());
      std::size_t resolved = 0;
      for (std::size_t i : sweep.order) {
        active[i] = 1;
        for_each_neighbor(domain, i, [&](std::size_t k) {
          if (active[k]) uf.unite(static_cast<int>(i), static_cast<int>(k));
        });
        if (!active[ix]) continue;
        const int rx = uf.find(static_cast<int>(ix));
        for (std::size_t t = 0; t < targets.size(); ++t) {
          if (out[t] != -std::numeric_limits<double>::infinity()) continue;
          if (active[targets[t]] && uf.find(static_cast<int>(targets[t])) == rx) {
            out[t] = v[i];
            ++resolved;
          }
        }
        if (resolved == targets.size()) break;
      }
    });
  }
  ConnectivityResult res;
  res.z = z_list;
  res.alphas = alphas;
  for (double a : alphas) {
    std::vector<Estimate> row;
    std::vector<double> xs, ys;
    for (std::size_t t = 0; t < z_list.size(); ++t) {
      std::size_t hits = 0;
      for (const auto& lv : levels) hits += (lv[t] >= a);
      const Estimate e = binomial_estimate(hits, replicas);
      row.push_back(e);
      if (e.mean > 0) {
        xs.push_back(linf_norm(z_list[t]));
        ys.push_back(std::log(e.mean));
      }
    }
    double rate = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() >= 2 && *std::min_element(xs.begin(), xs.end()) != *std::max_element(xs.begin(), xs.end()))
      rate = -fit_line(xs, ys).slope;
    res.p.push_back(std::move(row));
    res.decay_rate.push_back(rate);
  }
  return res;
}

// ---------------------------------------------------------------------------

const BoxFlags& BoxClassification::at(const Site& z) const {
  auto it = flags.find(z);
  if (it == flags.end()) throw InvalidArgument("no classification for this box");
  return it->second;
}

namespace {

// Components of B n {psi >= gamma} with l-infinity diameter >= L/10, as site lists.
std::vector<std::vector<Site>> big_components(const Box& b, const Field& psi, double gamma, int L) {
  const SiteSet sites(b);
  std::vector<char> mask(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) mask[i] = psi.at(sites[i]) >= gamma;
  const LevelSet s = level_set_from_mask(sites, std::move(mask));
  const ComponentLabeling lab = components(s);
  std::vector<std::vector<Site>> out;
  std::map<int, std::size_t> slot;
  for (const auto& c : lab.components) {
    if (static_cast<double>(c.diameter) >= L / 10.0) {
      slot[c.label] = out.size();
      out.emplace_back();
    }
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    auto it = slot.find(lab.label[i]);
    if (lab.label[i] >= 0 && it != slot.end()) out[it->second].push_back(sites[i]);
  }
  return out;
}

}  // namespace

BoxClassification classify_from_fields(const BoxGrid& grid, const std::map<Site, Decomposition>& fields,
                                       double gamma, double delta, double a) {
  if (!(delta < gamma)) throw InvalidArgument("box classification needs delta < gamma");
  const int L = grid.L();
  BoxClassification out;
  for (const Site& z : grid.centers()) {
    auto it = fields.find(z);
    if (it == fields.end()) throw InvalidArgument("missing decomposition for a grid box");
    const Decomposition& dz = it->second;
    const Box dbox = grid.box_D(z);
    const SiteSet dsites(dbox);
    if (!dsites.is_subset_of(dz.psi.domain)) throw GeometryError("D_z leaves the decomposition domain");
    BoxFlags f;
    const auto mine = big_components(grid.box_B(z), dz.psi, gamma, L);
    f.big_component = !mine.empty();
    // Connection condition inside D_z n {psi^z >= delta}.
    std::vector<char> mask(dsites.size());
    for (std::size_t i = 0; i < dsites.size(); ++i) mask[i] = dz.psi.at(dsites[i]) >= delta;
    const ComponentLabeling lab = components(level_set_from_mask(dsites, std::move(mask)));
    auto labels_of = [&](const std::vector<Site>& comp) {
      std::vector<int> ls;
      for (const Site& x : comp) {
        const int l = lab.label[static_cast<std::size_t>(dsites.index_of(x))];
        if (l >= 0) ls.push_back(l);
      }
      std::sort(ls.begin(), ls.end());
      ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
      return ls;
    };
    std::vector<std::vector<int>> mine_labels;
    for (const auto& c : mine) mine_labels.push_back(labels_of(c));
    bool links = true;
    for (int dir = 0; dir < grid.dim() && links; ++dir) {
      for (int sign : {-1, 1}) {
        const Site zn = z + Site::unit(grid.dim(), dir, sign * L);
        auto jt = fields.find(zn);
        if (jt == fields.end()) continue;
        const auto theirs = big_components(grid.box_B(zn), jt->second.psi, gamma, L);
        for (const auto& ml : mine_labels) {
          for (const auto& c : theirs) {
            const auto tl = labels_of(c);
            std::vector<int> common;
            std::set_intersection(ml.begin(), ml.end(), tl.begin(), tl.end(), std::back_inserter(common));
            if (common.empty()) links = false;
          }
        }
        if (!links) break;
      }
    }
    f.neighbor_links = links;
    f.psi_good = f.big_component && f.neighbor_links;
    double inf = std::numeric_limits<double>::infinity();
    for (const Site& x : dsites) inf = std::min(inf, dz.xi.at(x));
    f.xi_inf = inf;
    f.xi_good = inf > -a;
    out.flags[z] = f;
  }
  return out;
}

BoxClassification classify_boxes(const EnvPtr& env, const Field& phi, const BoxGrid& grid, double gamma,
                                  double delta, double a) {
  const SiteSet& domain = phi.domain;
  grid.require_inside(domain);
  std::map<Site, Decomposition> fields;
  const int L = grid.L();
  auto fits = [&](const Site& z) {
    const Box u = grid.box_U(z);
    return domain.bounding_box().contains(u) && SiteSet(u).is_subset_of(domain);
  };
  std::vector<Site> wanted = grid.centers();
  for (const Site& z : grid.centers())
    for (int dir = 0; dir < grid.dim(); ++dir)
      for (int sign : {-1, 1}) wanted.push_back(z + Site::unit(grid.dim(), dir, sign * L));
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  for (const Site& z : wanted) {
    if (!fits(z)) continue;
    const Decomposer dec(env, domain, SiteSet(grid.box_U(z)), BoundaryPolicy::zero_outside);
    fields.emplace(z, dec.decompose(phi));
  }
  return classify_from_fields(grid, fields, gamma, delta, a);
}

// ---------------------------------------------------------------------------

DecouplingReport decoupling_check(const EnvPtr& env, const SiteSet& domain, const Box& k1, const Box& k2,
                                  double delta, const FieldEvent& event1, const FieldEvent& event2,
                                  std::size_t replicas, std::uint64_t seed, double se_multiplier,
                                  const SolverOptions& options) {
  if (!(delta > 0)) throw InvalidArgument("decoupling needs delta > 0");
  if (replicas < 2) throw InvalidArgument("decoupling needs at least two replicas");
  const SiteSet s1(k1), s2(k2);
  if (!set_intersection(s1, s2).empty()) throw InvalidArgument("decoupling boxes overlap");
  if (!s1.is_subset_of(domain) || !s2.is_subset_of(domain)) throw GeometryError("decoupling boxes leave the domain");
  auto op = std::make_shared<const DirichletOperator>(env, domain, options);
  const GffSampler sampler(op, "decoupling");
  const Decomposer outside_k1(env, domain, set_difference(domain, s1), BoundaryPolicy::zero_outside, options);

  DecouplingReport r;
  std::size_t joint = 0, e1 = 0, e2m = 0, e2p = 0, bad = 0;
  const bool single = s2.size() == 1;
  std::vector<Eigen::Index> k2_rows;
  for (const Site& x : s2) k2_rows.push_back(outside_k1.sub().index_of(x));
  // Block b uses replica indices [b * replicas, (b + 1) * replicas): independent estimates.
  for (int block = 0; block < 3; ++block) {
    for (std::size_t first = 0; first < replicas; first += kChunk) {
      const std::size_t count = std::min(kChunk, replicas - first);
      const Matrix m = sampler.sample_matrix(seed, static_cast<std::uint64_t>(block) * replicas + first, count);
      Matrix xi;
      if (block == 0 && !single) xi = outside_k1.harmonic_average(m);
      for (std::size_t j = 0; j < count; ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        Field f(domain, m.col(c));
        if (block == 0) {
          joint += event1(f) && event2(f);
          if (!single) {
            double sup = 0;
            for (auto row : k2_rows) sup = std::max(sup, std::abs(xi(row, c)));
            bad += sup > delta / 2;
          }
        } else if (block == 1) {
          e1 += event1(f);
        } else {
          Field lo(domain, f.values.array() - delta), hi(domain, f.values.array() + delta);
          e2m += event2(lo);
          e2p += event2(hi);
        }
      }
    }
  }
  r.joint = binomial_estimate(joint, replicas);
  r.p1 = binomial_estimate(e1, replicas);
  r.p2_minus = binomial_estimate(e2m, replicas);
  r.p2_plus = binomial_estimate(e2p, replicas);
  if (single) {
    const Site& x = s2[0];
    const double var = green_killed_entry(*op, x, x) - green_killed_entry(outside_k1.op(), x, x);
    const double sigma = std::sqrt(std::max(0.0, var));
    r.bad_prob.mean = sigma > 0 ? 2.0 * normal_sf(delta / (2.0 * sigma)) : 0.0;
    r.bad_prob_exact = true;
  } else {
    r.bad_prob = binomial_estimate(bad, replicas);
  }
  r.lower = r.p1.mean * r.p2_minus.mean - 2 * r.bad_prob.mean;
  r.upper = r.p1.mean * r.p2_plus.mean + 2 * r.bad_prob.mean;
  auto product_se = [&](const Estimate& a, const Estimate& b) {
    return std::sqrt(b.mean * b.mean * a.se * a.se + a.mean * a.mean * b.se * b.se + 4 * r.bad_prob.se * r.bad_prob.se);
  };
  r.lower_se = product_se(r.p1, r.p2_minus);
  r.upper_se = product_se(r.p1, r.p2_plus);
  const double v_lo = r.lower - r.joint.mean, v_hi = r.joint.mean - r.upper;
  const double se_lo = combined_se(r.lower_se, r.joint.se), se_hi = combined_se(r.upper_se, r.joint.se);
  if (v_lo >= v_hi && v_lo > 0) {
    r.violation = v_lo;
    r.violation_se = se_lo;
  } else if (v_hi > 0) {
    r.violation = v_hi;
    r.violation_se = se_hi;
  } else {
    r.violation = 0.0;
    r.violation_se = std::max(se_lo, se_hi);
  }
  r.holds = r.violation <= se_multiplier * r.violation_se;
  return r;
}

}  // namespace hclab
