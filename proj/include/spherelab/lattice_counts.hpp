#pragma once

// Exact representation counts r_{d,k}(mu) = #{u in Z^d : sum |u_i|^k = mu},
// lattice shells, and growth-exponent fits of count tables.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spherelab/errors.hpp"
#include "spherelab/ntt.hpp"
#include "spherelab/point.hpp"

namespace spherelab {

/// Dimension and degree of the level sets sum_i |u_i|^k = lambda in Z^d.
/// Odd degrees use |y|^k throughout.
struct SphereSpec {
  int dim = 1;
  int degree = 2;

  void validate() const {
    if (dim < 1) throw ParameterError("dimension must be >= 1, got " + std::to_string(dim));
    if (degree < 2) throw ParameterError("degree must be >= 2, got " + std::to_string(degree));
  }

  friend auto operator<=>(const SphereSpec&, const SphereSpec&) = default;
};

/// |y|^k, saturating at `cap + 1` so callers can compare against a budget
/// without overflow.
inline std::int64_t abs_power(std::int64_t y, int k, std::int64_t cap = INT64_MAX - 1) {
  const std::int64_t a = y < 0 ? -y : y;
  std::int64_t p = 1;
  for (int i = 0; i < k; ++i) {
    if (a != 0 && p > cap / a) return cap + 1;
    p *= a;
  }
  return p;
}

/// Largest y >= 0 with y^k <= n.
inline std::int64_t integer_root(std::int64_t n, int k) {
  if (n <= 0) return 0;
  auto y = static_cast<std::int64_t>(std::pow(static_cast<long double>(n), 1.0L / k));
  while (y > 0 && abs_power(y, k, n) > n) --y;
  while (abs_power(y + 1, k, n) <= n) ++y;
  return y;
}

struct RepCountTable {
  SphereSpec spec;
  std::int64_t lambda_max = 0;
  std::vector<BigCount> counts;  // counts[mu] = r_{d,k}(mu), mu = 0..lambda_max

  const BigCount& at(std::int64_t mu) const {
    if (mu < 0 || mu > lambda_max)
      throw RangeError("lambda " + std::to_string(mu) + " outside table range [0, " + std::to_string(lambda_max) +
                       "]");
    return counts[static_cast<std::size_t>(mu)];
  }
};

/// g_k[m] = #{y in Z : |y|^k = m} for m = 0..lambda_max.
inline std::vector<std::uint64_t> one_dim_sequence(int degree, std::int64_t lambda_max) {
  std::vector<std::uint64_t> g(static_cast<std::size_t>(lambda_max) + 1, 0);
  g[0] = 1;
  for (std::int64_t y = 1;; ++y) {
    const std::int64_t m = abs_power(y, degree, lambda_max);
    if (m > lambda_max) break;
    g[static_cast<std::size_t>(m)] += 2;
  }
  return g;
}

inline void check_table_args(const SphereSpec& spec, std::int64_t lambda_max) {
  spec.validate();
  if (lambda_max < 0) throw ParameterError("lambda_max must be >= 0, got " + std::to_string(lambda_max));
}

/// Exact table r_{d,k}(0..lambda_max) as the truncated d-th convolution power
/// of the one-dimensional sequence (repeated squaring, multi-modular NTT).
inline RepCountTable rep_counts(const SphereSpec& spec, std::int64_t lambda_max, unsigned threads = 0) {
  check_table_args(spec, lambda_max);
  const auto len = static_cast<std::size_t>(lambda_max) + 1;
  const auto g = one_dim_sequence(spec.degree, lambda_max);
  // Every coefficient is at most the number of lattice points in the box
  // |u_i| <= lambda_max^{1/k}, i.e. (sum of g)^d.
  std::uint64_t g_sum = 0;
  for (auto v : g) g_sum += v;
  const BigCount bound = boost::multiprecision::pow(BigCount(g_sum), static_cast<unsigned>(spec.dim));
  const std::size_t m = ntt::primes_for_bound(bound);
  std::vector<std::vector<ntt::u64>> rows(m);
  parallel_for(m, threads, [&](std::size_t j) {
    const auto& pr = ntt::prime(j);
    rows[j] = ntt::power(ntt::residues(std::span<const std::uint64_t>(g), pr), static_cast<unsigned>(spec.dim), len,
                         pr);
  });
  return {spec, lambda_max, ntt::reconstruct(rows, threads)};
}

/// Exact pointwise product of the generating series of two tables of the same
/// degree: the table for dimension a.dim + b.dim, truncated at the smaller range.
inline RepCountTable convolve_tables(const RepCountTable& a, const RepCountTable& b, unsigned threads = 0) {
  if (a.spec.degree != b.spec.degree)
    throw ParameterError("cannot convolve tables of different degree");
  const std::int64_t lambda_max = std::min(a.lambda_max, b.lambda_max);
  const auto len = static_cast<std::size_t>(lambda_max) + 1;
  BigCount sa = 0, sb = 0;
  for (std::size_t i = 0; i < len; ++i) {
    sa += a.counts[i];
    sb += b.counts[i];
  }
  std::span<const BigCount> va(a.counts.data(), len), vb(b.counts.data(), len);
  return {SphereSpec{a.spec.dim + b.spec.dim, a.spec.degree}, lambda_max, ntt::convolve(va, vb, len, sa * sb, threads)};
}

/// Thread-safe memo of count tables keyed by (dim, degree). A cached table is
/// reused when it covers the requested range.
class CountCache {
public:
  explicit CountCache(unsigned threads = 0) : threads_(threads) {}

  const RepCountTable& table(const SphereSpec& spec, std::int64_t lambda_max) {
    check_table_args(spec, lambda_max);
    std::lock_guard lock(mutex_);
    auto it = tables_.find(key(spec));
    if (it == tables_.end() || it->second.lambda_max < lambda_max) {
      tables_[key(spec)] = rep_counts(spec, lambda_max, threads_);
      it = tables_.find(key(spec));
    }
    return it->second;
  }

  /// Cached table if present, without computing.
  const RepCountTable* find(const SphereSpec& spec) const {
    std::lock_guard lock(mutex_);
    auto it = tables_.find(key(spec));
    return it == tables_.end() ? nullptr : &it->second;
  }

private:
  static std::pair<int, int> key(const SphereSpec& s) { return {s.dim, s.degree}; }

  unsigned threads_;
  mutable std::mutex mutex_;
  std::map<std::pair<int, int>, RepCountTable> tables_;  // node-based: references stay valid
};

enum class JointCountRoute {
  composed_table,   // r_{l*d,k} from a table of dimension l*d
  level_convolution // the dimension-d table convolved with itself l times
};

/// N(lambda) = #{(u_1..u_l) in (Z^d)^l : sum_j sum_i |u_{j,i}|^k = lambda}.
inline BigCount joint_count(const SphereSpec& spec, int linearity, std::int64_t lambda, CountCache& cache,
                            JointCountRoute route = JointCountRoute::composed_table) {
  spec.validate();
  if (linearity < 1) throw ParameterError("linearity must be >= 1, got " + std::to_string(linearity));
  if (lambda < 0) throw RangeError("lambda must be >= 0, got " + std::to_string(lambda));
  const SphereSpec joint{spec.dim * linearity, spec.degree};
  if (route == JointCountRoute::composed_table) {
    if (const auto* t = cache.find(joint); t && t->lambda_max >= lambda) return t->at(lambda);
    return cache.table(joint, lambda).at(lambda);
  }
  const auto& base = cache.table(spec, lambda);
  RepCountTable acc = base;
  for (int j = 1; j < linearity; ++j) acc = convolve_tables(acc, base);
  return acc.at(lambda);
}

/// Lattice points of Z^d on the level set sum |u_i|^k = lambda.
struct Shell {
  SphereSpec spec;
  std::int64_t lambda = 0;
  std::vector<Point> points;  // lexicographic order
};

namespace detail {

inline void descend(const SphereSpec& spec, int axis, std::int64_t remaining, Point& cur, std::vector<Point>& out) {
  const int k = spec.degree;
  if (axis == spec.dim - 1) {
    const std::int64_t y = integer_root(remaining, k);
    if (abs_power(y, k) != remaining) return;
    if (y == 0) {
      cur[axis] = 0;
      out.push_back(cur);
    } else {
      cur[axis] = static_cast<Point::coord_type>(-y);
      out.push_back(cur);
      cur[axis] = static_cast<Point::coord_type>(y);
      out.push_back(cur);
    }
    return;
  }
  const std::int64_t r = integer_root(remaining, k);
  for (std::int64_t y = -r; y <= r; ++y) {
    cur[axis] = static_cast<Point::coord_type>(y);
    descend(spec, axis + 1, remaining - abs_power(y, k), cur, out);
  }
}

}  // namespace detail

/// Exhaustive, duplicate-free, lexicographically ordered shell by recursive
/// descent over coordinates with remaining-budget pruning.
inline Shell enumerate_shell(const SphereSpec& spec, std::int64_t lambda) {
  spec.validate();
  if (lambda < 0) throw ParameterError("lambda must be >= 0, got " + std::to_string(lambda));
  if (spec.dim > kMaxDim)
    throw ParameterError("shell enumeration supports dimension <= " + std::to_string(kMaxDim));
  if (lambda > 0 && integer_root(lambda, spec.degree) > INT32_MAX)
    throw ParameterError("shell radius exceeds coordinate range");
  Shell shell{spec, lambda, {}};
  Point cur(spec.dim);
  detail::descend(spec, 0, lambda, cur, shell.points);
  return shell;
}

/// Result of a log-log least-squares fit.
struct ExponentReport {
  double fitted_slope = 0.0;
  double expected_slope = 0.0;
  double residual = 0.0;  // root-mean-square of the fit residuals
  std::string sample_range;
  std::vector<double> log_x;
  std::vector<double> log_y;
};

/// Least-squares slope of ys against xs; residual is the RMS deviation.
inline std::pair<double, double> least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) throw AnalysisError("degenerate fit: all abscissae equal");
  const double slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (my + slope * (xs[i] - mx));
    ss += e * e;
  }
  return {slope, std::sqrt(ss / n)};
}

/// Slope of log(dyadic block average) against log(block center) over the
/// blocks [2^j, 2^{j+1}) contained in [lambda_lo, lambda_hi]. The expected
/// slope is dim/degree - 1.
inline ExponentReport growth_exponent_fit(const RepCountTable& table, std::int64_t lambda_lo, std::int64_t lambda_hi) {
  if (lambda_lo < 1) throw ParameterError("window start must be >= 1");
  if (lambda_hi > table.lambda_max)
    throw RangeError("window end " + std::to_string(lambda_hi) + " exceeds table range " +
                     std::to_string(table.lambda_max));
  ExponentReport rep;
  rep.expected_slope = static_cast<double>(table.spec.dim) / table.spec.degree - 1.0;
  int j = 0;
  while ((std::int64_t{1} << j) < lambda_lo) ++j;
  for (; (std::int64_t{1} << (j + 1)) - 1 <= lambda_hi; ++j) {
    const std::int64_t lo = std::int64_t{1} << j, hi = (std::int64_t{1} << (j + 1)) - 1;
    BigCount sum = 0;
    for (std::int64_t mu = lo; mu <= hi; ++mu) sum += table.counts[static_cast<std::size_t>(mu)];
    if (sum == 0)
      throw AnalysisError("dyadic block [" + std::to_string(lo) + ", " + std::to_string(hi) + "] has no lattice points");
    const long double avg = sum.convert_to<long double>() / static_cast<long double>(hi - lo + 1);
    rep.log_x.push_back(std::log(0.5 * static_cast<double>(lo + hi)));
    rep.log_y.push_back(static_cast<double>(std::log(avg)));
  }
  if (rep.log_x.size() < 2) throw AnalysisError("window must contain at least two full dyadic blocks");
  std::tie(rep.fitted_slope, rep.residual) = least_squares_slope(rep.log_x, rep.log_y);
  std::ostringstream os;
  os << "dyadic blocks 2^" << (j - static_cast<int>(rep.log_x.size())) << "..2^" << j << " of dim "
     << table.spec.dim << " degree " << table.spec.degree;
  rep.sample_range = os.str();
  return rep;
}

/// Dimension thresholds for the count asymptotic are external results; this
/// returns a human-readable warning when (dim, degree) is below the classical
/// ones (dim >= 5 for degree 2, dim >= 4k for k >= 4 a power of two, dim >= 3k/2
/// otherwise), or an empty string.
inline std::string asymptotic_warning(const SphereSpec& spec) {
  const int d = spec.dim, k = spec.degree;
  bool ok;
  if (k == 2) {
    ok = d >= 5;
  } else if (k >= 4 && (k & (k - 1)) == 0) {
    ok = d >= 4 * k;
  } else {
    ok = 2 * d >= 3 * k;
  }
  if (ok) return {};
  return "dimension " + std::to_string(d) + " is below the classical threshold for the degree-" + std::to_string(k) +
         " count asymptotic; the growth exponent may not be attained";
}

}  // namespace spherelab
