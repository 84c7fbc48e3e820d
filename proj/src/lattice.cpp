#include "hclab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "hclab/error.hpp"
#include "hclab/rng.hpp"

namespace hclab {

namespace {
constexpr std::size_t kDenseLimit = std::size_t{1} << 26;
}

void validate_dimension(int d) {
  if (d < kMinDim || d > kMaxDim) {
    throw InvalidArgument("dimension must lie in [" + std::to_string(kMinDim) + ", " +
                          std::to_string(kMaxDim) + "], got " + std::to_string(d));
  }
}

Site::Site(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("site dimension out of range");
}

Site::Site(std::initializer_list<int> coords) : Site(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Site Site::from_span(std::span<const int> coords) {
  Site s(static_cast<int>(coords.size()));
  std::copy(coords.begin(), coords.end(), s.c_.begin());
  return s;
}

Site Site::unit(int dim, int dir, int t) {
  Site s(dim);
  s[dir] = t;
  return s;
}

Site Site::operator+(const Site& o) const {
  Site r(*this);
  for (int i = 0; i < dim_; ++i) r[i] += o[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r(*this);
  for (int i = 0; i < dim_; ++i) r[i] -= o[i];
  return r;
}

Site Site::operator-() const {
  Site r(*this);
  for (int i = 0; i < dim_; ++i) r[i] = -r[i];
  return r;
}

Site Site::step(int dir, int sign) const {
  Site r(*this);
  r[dir] += sign;
  return r;
}

int linf_norm(const Site& x) {
  int m = 0;
  for (int i = 0; i < x.dim(); ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

int l1_norm(const Site& x) {
  int s = 0;
  for (int i = 0; i < x.dim(); ++i) s += std::abs(x[i]);
  return s;
}

std::ostream& operator<<(std::ostream& os, const Site& x) {
  os << '(';
  for (int i = 0; i < x.dim(); ++i) os << (i ? "," : "") << x[i];
  return os << ')';
}

std::size_t SiteHash::operator()(const Site& x) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(x.dim());
  for (int i = 0; i < x.dim(); ++i) h = mix64(h ^ static_cast<std::uint32_t>(x[i]));
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// Box

Box::Box(Site lo, Site hi) : lo_(lo), hi_(hi) {
  if (lo.dim() != hi.dim()) throw InvalidArgument("box corners differ in dimension");
}

Box Box::ball(const Site& center, int radius) {
  if (radius < 0) throw InvalidArgument("ball radius must be non-negative");
  Site lo(center), hi(center);
  for (int i = 0; i < center.dim(); ++i) {
    lo[i] -= radius;
    hi[i] += radius;
  }
  return Box(lo, hi);
}

bool Box::empty() const {
  if (lo_.dim() == 0) return true;
  for (int i = 0; i < dim(); ++i)
    if (hi_[i] < lo_[i]) return true;
  return false;
}

std::size_t Box::volume() const {
  if (empty()) return 0;
  std::size_t v = 1;
  for (int i = 0; i < dim(); ++i) v *= static_cast<std::size_t>(extent(i));
  return v;
}

bool Box::contains(const Site& x) const {
  if (x.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

bool Box::contains(const Box& other) const {
  return other.empty() || (contains(other.lo_) && contains(other.hi_));
}

std::size_t Box::index_of(const Site& x) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim(); ++i)
    idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(x[i] - lo_[i]);
  return idx;
}

Site Box::site_at(std::size_t index) const {
  Site x(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent(i));
    x[i] = lo_[i] + static_cast<int>(index % e);
    index /= e;
  }
  return x;
}

Box Box::expanded(int r) const {
  Site lo(lo_), hi(hi_);
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= r;
    hi[i] += r;
  }
  return Box(lo, hi);
}

Box Box::translated(const Site& x) const { return Box(lo_ + x, hi_ + x); }

// ---------------------------------------------------------------------------
// SiteSet

SiteSet::SiteSet(std::vector<Site> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (!sites.empty()) {
    const int d = sites.front().dim();
    for (const auto& s : sites)
      if (s.dim() != d) throw InvalidArgument("site set mixes dimensions");
  }
  data_ = make_data(std::move(sites));
}

SiteSet::SiteSet(const Box& box) {
  std::vector<Site> sites;
  const std::size_t n = box.volume();
  sites.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sites.push_back(box.site_at(i));
  data_ = make_data(std::move(sites));
}

SiteSet SiteSet::from_predicate(const Box& box, const std::function<bool(const Site&)>& keep) {
  std::vector<Site> sites;
  const std::size_t n = box.volume();
  for (std::size_t i = 0; i < n; ++i) {
    Site x = box.site_at(i);
    if (keep(x)) sites.push_back(x);
  }
  // Box enumeration is already lexicographic.
  SiteSet out;
  out.data_ = make_data(std::move(sites));
  return out;
}

std::shared_ptr<const SiteSet::Data> SiteSet::make_data(std::vector<Site> sites) {
  auto data = std::make_shared<Data>();
  data->sites = std::move(sites);
  if (data->sites.empty()) return data;
  Site lo = data->sites.front(), hi = data->sites.front();
  for (const auto& s : data->sites) {
    for (int i = 0; i < s.dim(); ++i) {
      lo[i] = std::min(lo[i], s[i]);
      hi[i] = std::max(hi[i], s[i]);
    }
  }
  data->bbox = Box(lo, hi);
  if (data->bbox.volume() <= kDenseLimit) {
    data->dense.assign(data->bbox.volume(), -1);
    for (std::size_t k = 0; k < data->sites.size(); ++k)
      data->dense[data->bbox.index_of(data->sites[k])] = static_cast<std::int32_t>(k);
  }
  return data;
}

int SiteSet::dim() const { return empty() ? 0 : data_->sites.front().dim(); }

std::vector<Site>::const_iterator SiteSet::begin() const { return sites().begin(); }
std::vector<Site>::const_iterator SiteSet::end() const { return sites().end(); }

const std::vector<Site>& SiteSet::sites() const {
  static const std::vector<Site> kEmpty;
  return data_ ? data_->sites : kEmpty;
}

std::ptrdiff_t SiteSet::index_of(const Site& x) const {
  if (empty() || !data_->bbox.contains(x)) return -1;
  if (!data_->dense.empty()) return data_->dense[data_->bbox.index_of(x)];
  const auto it = std::lower_bound(data_->sites.begin(), data_->sites.end(), x);
  if (it == data_->sites.end() || *it != x) return -1;
  return it - data_->sites.begin();
}

const Box& SiteSet::bounding_box() const {
  if (empty()) throw InvalidArgument("bounding box of an empty site set");
  return data_->bbox;
}

bool SiteSet::is_subset_of(const SiteSet& other) const {
  for (const auto& s : sites())
    if (!other.contains(s)) return false;
  return true;
}

bool operator==(const SiteSet& a, const SiteSet& b) { return a.sites() == b.sites(); }

SiteSet set_union(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SiteSet(std::move(out));
}

SiteSet set_difference(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> out;
  out.reserve(a.size());
  for (const auto& s : a)
    if (!b.contains(s)) out.push_back(s);
  return SiteSet(std::move(out));
}

SiteSet set_intersection(const SiteSet& a, const SiteSet& b) {
  std::vector<Site> out;
  for (const auto& s : a)
    if (b.contains(s)) out.push_back(s);
  return SiteSet(std::move(out));
}

SiteSet ball(const Site& x, int r) {
  validate_dimension(x.dim());
  return SiteSet(Box::ball(x, r));
}

SiteSet boundary(const SiteSet& k, BoundaryKind kind) {
  std::vector<Site> out;
  const int d = k.dim();
  for (const auto& x : k) {
    bool has_outside = false;
    for (int i = 0; i < d; ++i) {
      for (int sign : {-1, 1}) {
        const Site y = x.step(i, sign);
        if (!k.contains(y)) {
          has_outside = true;
          if (kind == BoundaryKind::external) out.push_back(y);
        }
      }
    }
    if (kind == BoundaryKind::internal && has_outside) out.push_back(x);
  }
  return SiteSet(std::move(out));
}

SiteSet sphere(int dim, double m, int n) {
  validate_dimension(dim);
  if (m < 0 || n < 0) throw InvalidArgument("sphere parameters must be non-negative");
  const int radius = static_cast<int>(std::floor(m * n));
  const Box box = Box::ball(Site(dim), radius);
  return SiteSet::from_predicate(box, [radius](const Site& x) { return linf_norm(x) == radius; });
}

int linf_distance(const SiteSet& k, const SiteSet& l) {
  if (k.empty() || l.empty()) throw InvalidArgument("linf_distance of an empty set");
  const SiteSet& small = k.size() <= l.size() ? k : l;
  const SiteSet& large = k.size() <= l.size() ? l : k;
  int best = std::numeric_limits<int>::max();
  for (const auto& x : small) {
    if (large.contains(x)) return 0;
    for (const auto& y : large) {
      best = std::min(best, linf_norm(x - y));
      if (best == 1) break;
    }
  }
  return best;
}

SiteSet thicken(const SiteSet& k, int r) {
  if (r < 0) throw InvalidArgument("thickening radius must be non-negative");
  if (k.empty() || r == 0) return k;
  const Box box = k.bounding_box().expanded(r);
  const Box probe = Box::ball(Site(k.dim()), r);
  const std::size_t pv = probe.volume();
  return SiteSet::from_predicate(box, [&](const Site& x) {
    for (std::size_t i = 0; i < pv; ++i)
      if (k.contains(x + probe.site_at(i))) return true;
    return false;
  });
}

}  // namespace hclab
