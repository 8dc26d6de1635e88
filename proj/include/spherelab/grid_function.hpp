#pragma once

// Finitely supported real functions on Z^d.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spherelab/errors.hpp"
#include "spherelab/point.hpp"

namespace spherelab {

inline constexpr std::int64_t kDefaultSupportBudget = 10'000'000;

/// Immutable sparse function on Z^d: sorted (point, value) pairs with nonzero
/// values, plus the tight bounding box of the support.
class GridFunction {
public:
  using Entry = std::pair<Point, double>;

  explicit GridFunction(int dim = 1) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw ParameterError("grid dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }

  /// Entries may be unsorted and contain zeros; duplicate points are summed.
  GridFunction(int dim, std::vector<Entry> entries) : GridFunction(dim) {
    for (const auto& [p, v] : entries)
      if (p.dim() != dim) throw ParameterError("point " + p.to_string() + " has wrong dimension");
    const auto by_point = [](const Entry& a, const Entry& b) { return a.first < b.first; };
    if (!std::is_sorted(entries.begin(), entries.end(), by_point))
      std::stable_sort(entries.begin(), entries.end(), by_point);
    for (auto& e : entries) {
      if (!entries_.empty() && entries_.back().first == e.first) {
        entries_.back().second += e.second;
      } else {
        entries_.push_back(std::move(e));
      }
    }
    std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
    compute_bbox();
  }

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const Point& bbox_min() const { return lo_; }
  const Point& bbox_max() const { return hi_; }

  double at(const Point& x) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, const Point& p) { return e.first < p; });
    return (it != entries_.end() && it->first == x) ? it->second : 0.0;
  }

  double mass() const {
    double s = 0;
    for (const auto& e : entries_) s += e.second;
    return s;
  }

  bool nonnegative() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.second >= 0; });
  }

  GridFunction translated(const Point& a) const {
    GridFunction g(dim_);
    g.entries_.reserve(entries_.size());
    for (const auto& [p, v] : entries_) g.entries_.emplace_back(p + a, v);
    g.compute_bbox();
    return g;
  }

  GridFunction scaled(double c) const {
    std::vector<Entry> e = entries_;
    for (auto& x : e) x.second *= c;
    return {dim_, std::move(e)};
  }

  GridFunction abs() const {
    GridFunction g = *this;
    for (auto& x : g.entries_) x.second = std::fabs(x.second);
    return g;
  }

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    if (a.dim_ != b.dim_) throw ParameterError("dimension mismatch in sum");
    std::vector<Entry> e = a.entries_;
    e.insert(e.end(), b.entries_.begin(), b.entries_.end());
    return {a.dim_, std::move(e)};
  }

  friend bool operator==(const GridFunction& a, const GridFunction& b) {
    return a.dim_ == b.dim_ && a.entries_ == b.entries_;
  }

private:
  void compute_bbox() {
    lo_ = Point(dim_);
    hi_ = Point(dim_);
    if (entries_.empty()) return;
    lo_ = hi_ = entries_.front().first;
    for (const auto& [p, v] : entries_) {
      for (int i = 0; i < dim_; ++i) {
        lo_[i] = std::min(lo_[i], p[i]);
        hi_[i] = std::max(hi_[i], p[i]);
      }
    }
  }

  int dim_;
  std::vector<Entry> entries_;
  Point lo_, hi_;
};

inline std::ostream& operator<<(std::ostream& os, const GridFunction& f) {
  os << "GridFunction(dim=" << f.dim() << ", " << f.size() << " points)";
  for (std::size_t i = 0; i < f.size() && i < 8; ++i)
    os << (i ? ", " : " {") << f.entries()[i].first << ": " << f.entries()[i].second;
  if (!f.empty()) os << (f.size() > 8 ? ", ...}" : "}");
  return os;
}

/// Accumulates values at points, then freezes into a GridFunction.
class GridAccumulator {
public:
  explicit GridAccumulator(int dim) : dim_(dim) {}

  void add(const Point& x, double v) { values_[x] += v; }
  std::size_t size() const { return values_.size(); }

  GridFunction freeze() && {
    std::vector<GridFunction::Entry> e(values_.begin(), values_.end());
    values_.clear();
    return {dim_, std::move(e)};
  }

private:
  int dim_;
  std::unordered_map<Point, double, PointHash> values_;
};

/// Indicator of the box [-L, L]^d.
inline GridFunction make_box_indicator(int dim, std::int64_t half_width, std::int64_t support_budget = kDefaultSupportBudget) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("box dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  if (half_width < 0) throw ParameterError("box half-width must be >= 0");
  long double size = std::pow(static_cast<long double>(2 * half_width + 1), dim);
  if (size > static_cast<long double>(support_budget))
    throw ResourceError("box [-" + std::to_string(half_width) + "," + std::to_string(half_width) + "]^" +
                        std::to_string(dim) + " exceeds support budget " + std::to_string(support_budget));
  std::vector<GridFunction::Entry> entries;
  entries.reserve(static_cast<std::size_t>(size));
  Point p(dim);
  for (int i = 0; i < dim; ++i) p[i] = static_cast<Point::coord_type>(-half_width);
  for (;;) {
    entries.emplace_back(p, 1.0);
    int i = dim - 1;
    while (i >= 0 && p[i] == half_width) p[i--] = static_cast<Point::coord_type>(-half_width);
    if (i < 0) break;
    ++p[i];
  }
  return {dim, std::move(entries)};
}

inline GridFunction make_delta(int dim) { return {dim, {{Point::zero(dim), 1.0}}}; }

/// (sum |f(x)|^p)^{1/p} for any p > 0, accumulated in key order.
inline double lp_norm(const GridFunction& f, double p) {
  if (!(p > 0)) throw ParameterError("lp_norm requires p > 0");
  long double s = 0;
  for (const auto& [x, v] : f.entries()) s += std::pow(static_cast<long double>(std::fabs(v)), p);
  return static_cast<double>(std::pow(s, 1.0L / p));
}

// Text format: first line d, then "x1 ... xd value" per support point in
// lexicographic order.

inline void write_grid_function(std::ostream& os, const GridFunction& f) {
  os << f.dim() << '\n';
  char buf[64];
  for (const auto& [p, v] : f.entries()) {
    os << p.to_string(' ');
    std::snprintf(buf, sizeof buf, " %.17g\n", v);
    os << buf;
  }
}

inline GridFunction read_grid_function(std::istream& is) {
  int dim = 0;
  if (!(is >> dim)) throw ParameterError("grid function: missing dimension line");
  if (dim < 1 || dim > kMaxDim) throw ParameterError("grid function: bad dimension " + std::to_string(dim));
  std::vector<GridFunction::Entry> entries;
  std::string line;
  std::getline(is, line);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Point p(dim);
    for (int i = 0; i < dim; ++i) {
      long long c;
      if (!(ls >> c)) throw ParameterError("grid function line " + std::to_string(lineno) + ": expected coordinate");
      p[i] = static_cast<Point::coord_type>(c);
    }
    double v;
    if (!(ls >> v)) throw ParameterError("grid function line " + std::to_string(lineno) + ": expected value");
    std::string extra;
    if (ls >> extra) throw ParameterError("grid function line " + std::to_string(lineno) + ": trailing tokens");
    entries.emplace_back(p, v);
  }
  return {dim, std::move(entries)};
}

}  // namespace spherelab
