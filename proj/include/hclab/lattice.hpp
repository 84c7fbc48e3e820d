#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace hclab {

inline constexpr int kMaxDim = 6;
inline constexpr int kMinDim = 3;

/// Throws InvalidArgument unless kMinDim <= d <= kMaxDim.
void validate_dimension(int d);

/// A point of Z^d with the dimension fixed at runtime.
class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<int> coords);
  static Site from_span(std::span<const int> coords);
  /// The point x + t e_dir.
  static Site unit(int dim, int dir, int t = 1);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  std::span<const int> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;
  /// Neighbor x + sign * e_dir.
  Site step(int dir, int sign) const;

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

int linf_norm(const Site& x);
int l1_norm(const Site& x);
std::ostream& operator<<(std::ostream& os, const Site& x);

struct SiteHash {
  std::size_t operator()(const Site& x) const noexcept;
};

/// Closed axis-parallel box {lo <= x <= hi} (coordinatewise). Lexicographic
/// enumeration order, last coordinate fastest.
class Box {
 public:
  Box() = default;
  Box(Site lo, Site hi);
  /// The l-infinity ball B(center, radius).
  static Box ball(const Site& center, int radius);

  int dim() const { return lo_.dim(); }
  const Site& lo() const { return lo_; }
  const Site& hi() const { return hi_; }
  bool empty() const;
  int extent(int i) const { return hi_[i] - lo_[i] + 1; }
  std::size_t volume() const;
  bool contains(const Site& x) const;
  bool contains(const Box& other) const;
  std::size_t index_of(const Site& x) const;
  Site site_at(std::size_t index) const;
  Box expanded(int r) const;
  Box translated(const Site& x) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  Site lo_, hi_;
};

/// Finite set of sites in lexicographic order with a dense index map 0..n-1.
///
/// Immutable and cheap to copy (shared storage). Lookup uses a dense table over
/// the bounding box when it fits, otherwise binary search.
class SiteSet {
 public:
  SiteSet() = default;
  /// Sorts and removes duplicates. All sites must share one dimension.
  explicit SiteSet(std::vector<Site> sites);
  explicit SiteSet(const Box& box);
  static SiteSet from_predicate(const Box& box, const std::function<bool(const Site&)>& keep);

  std::size_t size() const { return data_ ? data_->sites.size() : 0; }
  bool empty() const { return size() == 0; }
  int dim() const;
  const Site& operator[](std::size_t i) const { return data_->sites[i]; }
  std::vector<Site>::const_iterator begin() const;
  std::vector<Site>::const_iterator end() const;
  const std::vector<Site>& sites() const;

  /// Dense index of x, or -1 if x is not a member.
  std::ptrdiff_t index_of(const Site& x) const;
  bool contains(const Site& x) const { return index_of(x) >= 0; }
  /// Smallest box containing the set (undefined for the empty set).
  const Box& bounding_box() const;

  bool is_subset_of(const SiteSet& other) const;
  friend bool operator==(const SiteSet& a, const SiteSet& b);

 private:
  struct Data {
    std::vector<Site> sites;
    Box bbox;
    std::vector<std::int32_t> dense;  // empty when the bbox is too large
  };
  static std::shared_ptr<const Data> make_data(std::vector<Site> sites);
  std::shared_ptr<const Data> data_;
};

SiteSet set_union(const SiteSet& a, const SiteSet& b);
SiteSet set_difference(const SiteSet& a, const SiteSet& b);
SiteSet set_intersection(const SiteSet& a, const SiteSet& b);

/// B(x, r) = {y : |x - y|_inf <= r}.
SiteSet ball(const Site& x, int r);

enum class BoundaryKind { external, internal };

/// External: sites outside K with an l1-neighbor in K. Internal: sites of K
/// with an l1-neighbor outside K.
SiteSet boundary(const SiteSet& k, BoundaryKind kind);

/// {x : |x|_inf = floor(M N)}.
SiteSet sphere(int dim, double m, int n);

/// min |x - y|_inf over x in K, y in L. Throws InvalidArgument on empty input.
int linf_distance(const SiteSet& k, const SiteSet& l);

/// {x : d_inf(x, K) <= r}.
SiteSet thicken(const SiteSet& k, int r);

}  // namespace hclab
