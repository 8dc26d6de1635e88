#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <span>
#include <string>

#include "spherelab/errors.hpp"

namespace spherelab {

/// Largest lattice dimension a Point can carry.
inline constexpr int kMaxDim = 12;

/// A point of Z^d with d <= kMaxDim. Ordering is lexicographic on the
/// coordinates (points of different dimension order by dimension first).
class Point {
public:
  using coord_type = std::int32_t;

  Point() = default;

  explicit Point(int dim) : dim_(static_cast<std::uint8_t>(check_dim(dim))) {}

  Point(std::initializer_list<coord_type> coords)
      : dim_(static_cast<std::uint8_t>(check_dim(static_cast<int>(coords.size())))) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  template <class Int>
  static Point from(std::span<const Int> coords) {
    Point p(static_cast<int>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) p.c_[i] = static_cast<coord_type>(coords[i]);
    return p;
  }

  static Point zero(int dim) { return Point(dim); }

  static Point unit(int dim, int axis) {
    Point p(dim);
    p[axis] = 1;
    return p;
  }

  int dim() const { return dim_; }

  coord_type& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  coord_type operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  std::span<const coord_type> coords() const { return {c_.data(), dim_}; }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.begin() + dim_, [](coord_type v) { return v == 0; });
  }

  Point operator+(const Point& o) const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = c_[i] + o.c_[i];
    return r;
  }

  Point operator-(const Point& o) const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = c_[i] - o.c_[i];
    return r;
  }

  Point operator-() const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = -c_[i];
    return r;
  }

  Point scaled(coord_type t) const {
    Point r(dim_);
    for (int i = 0; i < dim_; ++i) r[i] = c_[i] * t;
    return r;
  }

  /// Sum of |x_i|^k (the degree-k "radius" of the point).
  std::int64_t power_norm(int k) const {
    std::int64_t s = 0;
    for (int i = 0; i < dim_; ++i) {
      std::int64_t a = c_[i] < 0 ? -static_cast<std::int64_t>(c_[i]) : c_[i];
      std::int64_t p = 1;
      for (int j = 0; j < k; ++j) p *= a;
      s += p;
    }
    return s;
  }

  std::int64_t sup_norm() const {
    std::int64_t m = 0;
    for (int i = 0; i < dim_; ++i) m = std::max<std::int64_t>(m, c_[i] < 0 ? -std::int64_t{c_[i]} : c_[i]);
    return m;
  }

  friend bool operator==(const Point& a, const Point& b) {
    return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
  }

  friend std::strong_ordering operator<=>(const Point& a, const Point& b) {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int i = 0; i < a.dim_; ++i)
      if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ dim_;
    for (int i = 0; i < dim_; ++i) {
      h ^= static_cast<std::uint32_t>(c_[i]);
      h *= 0xff51afd7ed558ccdull;
      h ^= h >> 32;
    }
    return static_cast<std::size_t>(h);
  }

  std::string to_string(char sep = ',') const {
    std::string s;
    for (int i = 0; i < dim_; ++i) {
      if (i) s += sep;
      s += std::to_string(c_[i]);
    }
    return s;
  }

private:
  static int check_dim(int dim) {
    if (dim < 0 || dim > kMaxDim)
      throw ParameterError("point dimension " + std::to_string(dim) + " outside [0, " +
                           std::to_string(kMaxDim) + "]");
    return dim;
  }

  std::array<coord_type, kMaxDim> c_{};
  std::uint8_t dim_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Point& p) { return os << '(' << p.to_string() << ')'; }

struct PointHash {
  std::size_t operator()(const Point& p) const { return p.hash(); }
};

}  // namespace spherelab
