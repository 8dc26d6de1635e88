#pragma once

// The sharpness example f_1 = indicator of [-L,L]^d, f_2 = ... = f_l = delta_0:
// closed-form maximal values, decay fits, partial-norm scans, the critical
// exponents and the (p, q, r) region classifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "spherelab/errors.hpp"
#include "spherelab/grid_function.hpp"
#include "spherelab/lattice_counts.hpp"
#include "spherelab/operators.hpp"
#include "spherelab/parallel.hpp"
#include "spherelab/point.hpp"

namespace spherelab {

using Rational = boost::rational<long long>;

/// d / (l d - k), the threshold below which the sharpness example has
/// infinite l^r norm.
inline Rational critical_r(int dim, int degree, int linearity) {
  if (dim < 1 || degree < 2 || linearity < 1) throw ParameterError("critical_r: need d >= 1, k >= 2, l >= 1");
  const long long denom = static_cast<long long>(linearity) * dim - degree;
  if (denom <= 0) throw ParameterError("critical_r requires l*d > k");
  return Rational(dim, denom);
}

/// r_0 = (2 + 2 delta0) / ((l - 1)(2 + 2 delta0) + (1 + 2 delta0)).
template <class T>
T r0_bound(const T& delta0, int linearity) {
  if (delta0 < T(0)) throw ParameterError("delta0 must be >= 0");
  if (linearity < 2) throw ParameterError("r0_bound requires l >= 2");
  const T a = T(2) + T(2) * delta0;
  return a / (T(linearity - 1) * a + (T(1) + T(2) * delta0));
}

/// p_0 = max{1 + 1/(1 + 2 delta0), d / (d - k)}.
template <class T>
T p0_bound(const T& delta0, int dim, int degree) {
  if (delta0 < T(0)) throw ParameterError("delta0 must be >= 0");
  if (dim <= degree) throw ParameterError("p0_bound requires d > k");
  const T first = T(1) + T(1) / (T(1) + T(2) * delta0);
  const T second = T(dim) / T(dim - degree);
  return std::max(first, second);
}

inline double to_double(const Rational& q) { return static_cast<double>(q.numerator()) / q.denominator(); }

/// Parses "a/b", an integer, or a decimal literal with finitely many digits.
inline Rational parse_rational(const std::string& s) {
  try {
    if (auto slash = s.find('/'); slash != std::string::npos)
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    if (auto dot = s.find('.'); dot != std::string::npos) {
      const std::string frac = s.substr(dot + 1);
      long long den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      const bool neg = !s.empty() && s[0] == '-';
      const long long ip = dot == 0 || s.substr(0, dot) == "-" ? 0 : std::stoll(s.substr(0, dot));
      const long long fp = frac.empty() ? 0 : std::stoll(frac);
      return Rational(ip, 1) + Rational(neg ? -fp : fp, den);
    }
    return Rational(std::stoll(s));
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse rational '" + s + "'");
  }
}

inline std::string to_string(const Rational& q) {
  return q.denominator() == 1 ? std::to_string(q.numerator())
                              : std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

struct WitnessSpec {
  int dim = 5;
  int degree = 2;
  int linearity = 2;
  int box = 1;  // half-width L of the box [-L, L]^d

  void validate() const {
    SphereSpec{dim, degree}.validate();
    if (dim > kMaxDim) throw ParameterError("witness dimension exceeds " + std::to_string(kMaxDim));
    if (linearity < 2) throw ParameterError("witness needs l >= 2 (one box, l - 1 deltas)");
    if (box < 1) throw ParameterError("witness box half-width must be >= 1");
  }

  /// l d / k - 1.
  double normalization_exponent() const { return static_cast<double>(linearity * dim) / degree - 1.0; }
  /// l d - k, the pointwise decay rate.
  int decay_rate() const { return linearity * dim - degree; }
};

/// Exact supremum over all lambda >= 1 of T_lambda(chi_L, delta_0, ..., delta_0)(x).
/// T_lambda is nonzero only when lambda = (l-1)|x|_k + |x-w|_k for some w in the
/// box, so the supremum is a finite maximum over those candidates.
class WitnessEvaluator {
public:
  explicit WitnessEvaluator(const WitnessSpec& w, Normalization n = Normalization::asymptotic,
                            std::int64_t exact_lambda_limit = 65536)
      : w_(w), norm_(n), exact_limit_(exact_lambda_limit) {
    w_.validate();
  }

  const WitnessSpec& spec() const { return w_; }

  double operator()(const Point& x) const {
    if (x.dim() != w_.dim) throw ParameterError("witness point has wrong dimension");
    const int d = w_.dim, k = w_.degree, side = 2 * w_.box + 1;
    const std::int64_t base = (w_.linearity - 1) * x.power_norm(k);
    // per-coordinate contributions |x_i - w_i|^k
    std::vector<std::int64_t> contrib(static_cast<std::size_t>(d * side));
    for (int i = 0; i < d; ++i)
      for (int t = 0; t < side; ++t)
        contrib[static_cast<std::size_t>(i * side + t)] = abs_power(std::int64_t{x[i]} - (t - w_.box), k);
    std::vector<std::int64_t> lambdas;
    lambdas.reserve(static_cast<std::size_t>(std::pow(side, d)));
    enumerate(contrib, side, 0, base, lambdas);
    std::sort(lambdas.begin(), lambdas.end());
    double best = 0.0;
    const std::size_t n = lambdas.size();
    for (std::size_t i = 0; i < n;) {
      const std::int64_t lambda = lambdas[i];
      double denom = 0.0;
      if (lambda >= 1) {
        denom = normalizer(lambda);
        // no later group can beat `best` once even all remaining points cannot
        if (norm_ == Normalization::asymptotic && static_cast<double>(n - i) / denom <= best) break;
      }
      std::size_t j = i;
      while (j < n && lambdas[j] == lambda) ++j;
      if (lambda >= 1 && denom > 0) best = std::max(best, static_cast<double>(j - i) / denom);
      i = j;
    }
    return best;
  }

private:
  void enumerate(const std::vector<std::int64_t>& contrib, int side, int axis, std::int64_t acc,
                 std::vector<std::int64_t>& out) const {
    if (axis == w_.dim) {
      out.push_back(acc);
      return;
    }
    for (int t = 0; t < side; ++t)
      enumerate(contrib, side, axis + 1, acc + contrib[static_cast<std::size_t>(axis * side + t)], out);
  }

  double normalizer(std::int64_t lambda) const {
    if (norm_ == Normalization::asymptotic) return std::pow(static_cast<double>(lambda), w_.normalization_exponent());
    if (lambda > exact_limit_)
      throw ResourceError("exact witness normalization needs N(" + std::to_string(lambda) + ") beyond limit " +
                          std::to_string(exact_limit_));
    std::call_once(*table_once_, [&] {
      table_ = std::make_shared<RepCountTable>(rep_counts(SphereSpec{w_.dim * w_.linearity, w_.degree}, exact_limit_));
    });
    const auto* t = table_.get();
    return t->at(lambda).convert_to<double>();
  }

  WitnessSpec w_;
  Normalization norm_;
  std::int64_t exact_limit_;
  mutable std::shared_ptr<std::once_flag> table_once_ = std::make_shared<std::once_flag>();
  mutable std::shared_ptr<const RepCountTable> table_;
};

inline double witness_value(const Point& x, const WitnessSpec& w, Normalization n = Normalization::asymptotic) {
  return WitnessEvaluator(w, n)(x);
}

inline double euclidean_norm(const Point& x) {
  double s = 0;
  for (auto c : x.coords()) s += static_cast<double>(c) * c;
  return std::sqrt(s);
}

/// Log-spaced integer t values in [t_lo, t_hi], deduplicated.
inline std::vector<std::int64_t> log_spaced(std::int64_t t_lo, std::int64_t t_hi, int samples) {
  std::vector<std::int64_t> ts;
  for (int i = 0; i < samples; ++i) {
    const double f = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
    ts.push_back(std::llround(std::exp(std::log(static_cast<double>(t_lo)) * (1 - f) + std::log(static_cast<double>(t_hi)) * f)));
  }
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

struct DecaySample {
  std::int64_t t;
  double radius;
  double value;
};

struct DecayResult {
  ExponentReport report;
  std::vector<DecaySample> samples;
};

/// Fits log witness_value(t * direction) against log |t * direction|; the
/// expected slope is -(l d - k).
inline DecayResult decay_fit(const WitnessSpec& w, const Point& direction, std::int64_t t_lo, std::int64_t t_hi,
                             int samples = 64, unsigned threads = 0) {
  w.validate();
  if (direction.dim() != w.dim) throw ParameterError("direction has wrong dimension");
  if (direction.is_zero()) throw ParameterError("direction must be nonzero");
  if (t_lo < 1) throw ParameterError("t range must start at >= 1");
  if (samples < 2) throw ParameterError("decay fit needs at least two samples");
  if (t_hi < 10 * t_lo)
    throw AnalysisError("t range [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "] spans less than a decade");
  if (static_cast<double>(t_hi) * static_cast<double>(direction.sup_norm()) > INT32_MAX)
    throw ParameterError("t range exceeds coordinate range");
  const auto ts = log_spaced(t_lo, t_hi, samples);
  const WitnessEvaluator eval(w);
  DecayResult res;
  res.samples.resize(ts.size());
  parallel_for(ts.size(), threads, [&](std::size_t i) {
    const Point x = direction.scaled(static_cast<Point::coord_type>(ts[i]));
    res.samples[i] = {ts[i], euclidean_norm(x), eval(x)};
  });
  auto& rep = res.report;
  for (const auto& s : res.samples) {
    if (s.value <= 0) continue;
    rep.log_x.push_back(std::log(s.radius));
    rep.log_y.push_back(std::log(s.value));
  }
  if (rep.log_x.size() < 2) throw AnalysisError("decay fit: fewer than two nonzero samples");
  std::tie(rep.fitted_slope, rep.residual) = least_squares_slope(rep.log_x, rep.log_y);
  rep.expected_slope = -static_cast<double>(w.decay_rate());
  rep.sample_range = "t in [" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + "] along (" +
                     direction.to_string() + "), " + std::to_string(ts.size()) + " points";
  return res;
}

struct ScanOptions {
  std::int64_t point_budget = 1'000'000;   // exact enumeration when the bounding cube is this small
  std::int64_t samples_per_shell = 400'000; // Monte Carlo samples otherwise
  std::uint64_t seed = 20180101;
  unsigned threads = 0;
};

struct ScanReport {
  double r = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> radii;
  std::vector<double> shell_sums;     // sum of witness^r over R_{j-1} < |x| <= R_j (R_{-1} = -inf)
  std::vector<bool> sampled;          // shell estimated by sampling
  std::vector<double> partial_norms;  // (sum over |x| <= R_j)^{1/r}
  std::vector<double> ratios;         // shell_sums[j] / shell_sums[j-1], j >= 1
  std::vector<double> predicted_ratios; // (R_j / R_{j-1})^{d - (l d - k) r}
  ExponentReport fit;                 // log shell sum against log R_j for j >= 1
};

namespace detail {

inline constexpr std::int64_t kSampleChunk = 4096;

/// Sum of value^r over lattice points with lo2 < |x|^2 <= hi2, exact.
inline double shell_sum_exact(const WitnessEvaluator& eval, double r, std::int64_t lo2, std::int64_t hi2,
                              std::int64_t R, unsigned threads) {
  const int d = eval.spec().dim;
  const std::size_t side = static_cast<std::size_t>(2 * R + 1);
  std::vector<double> partial(side, 0.0);
  parallel_for(side, threads, [&](std::size_t first) {
    Point x(d);
    x[0] = static_cast<Point::coord_type>(static_cast<std::int64_t>(first) - R);
    for (int i = 1; i < d; ++i) x[i] = static_cast<Point::coord_type>(-R);
    double s = 0.0;
    for (;;) {
      const std::int64_t n2 = x.power_norm(2);
      if (n2 > lo2 && n2 <= hi2) s += std::pow(eval(x), r);
      int i = d - 1;
      while (i >= 1 && x[i] == R) x[i--] = static_cast<Point::coord_type>(-R);
      if (i < 1) break;
      ++x[i];
    }
    partial[first] = s;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

/// Unbiased estimate of the same sum from uniform samples of the cube
/// [-R, R]^d; sample chunks are seeded by (seed, shell, chunk).
inline double shell_sum_sampled(const WitnessEvaluator& eval, double r, std::int64_t lo2, std::int64_t hi2,
                                std::int64_t R, std::size_t shell, const ScanOptions& opt) {
  const int d = eval.spec().dim;
  const std::size_t chunks = static_cast<std::size_t>((opt.samples_per_shell + kSampleChunk - 1) / kSampleChunk);
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, opt.threads, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(shell), static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::int64_t> coord(-R, R);
    const std::int64_t n = std::min<std::int64_t>(kSampleChunk, opt.samples_per_shell - static_cast<std::int64_t>(c) * kSampleChunk);
    double s = 0.0;
    Point x(d);
    for (std::int64_t i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) x[a] = static_cast<Point::coord_type>(coord(rng));
      const std::int64_t n2 = x.power_norm(2);
      if (n2 > lo2 && n2 <= hi2) s += std::pow(eval(x), r);
    }
    partial[c] = s;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  const double cube = std::pow(static_cast<double>(2 * R + 1), d);
  return total * cube / static_cast<double>(opt.samples_per_shell);
}

}  // namespace detail

/// Partial l^r norms of the witness over Euclidean balls |x| <= R_j, with the
/// per-shell sums and their consecutive ratios.
inline ScanReport partial_norm_scan(const WitnessSpec& w, double r, const std::vector<std::int64_t>& radii,
                                    const ScanOptions& opt = {}) {
  w.validate();
  if (!(r > 0)) throw ParameterError("partial_norm_scan requires r > 0");
  if (radii.empty()) throw ParameterError("partial_norm_scan needs at least one radius");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (radii[j] < 0 || (j > 0 && radii[j] <= radii[j - 1])) throw ParameterError("radii must be increasing and >= 0");
  }
  if (radii.back() > 1'000'000) throw ParameterError("radius too large");
  if (opt.point_budget < 1 || opt.samples_per_shell < 1) throw ParameterError("budget and samples must be positive");

  const WitnessEvaluator eval(w);
  ScanReport rep;
  rep.r = r;
  rep.seed = opt.seed;
  rep.radii = radii;
  double cumulative = 0.0;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const std::int64_t R = radii[j];
    const std::int64_t lo2 = j == 0 ? -1 : radii[j - 1] * radii[j - 1];
    const std::int64_t hi2 = R * R;
    const double cube = std::pow(static_cast<double>(2 * R + 1), w.dim);
    const bool sample = cube > static_cast<double>(opt.point_budget);
    const double s = sample ? detail::shell_sum_sampled(eval, r, lo2, hi2, R, j, opt)
                            : detail::shell_sum_exact(eval, r, lo2, hi2, R, opt.threads);
    rep.shell_sums.push_back(s);
    rep.sampled.push_back(sample);
    cumulative += s;
    rep.partial_norms.push_back(std::pow(cumulative, 1.0 / r));
  }
  const double growth = w.dim - w.decay_rate() * r;
  for (std::size_t j = 1; j < radii.size(); ++j) {
    rep.ratios.push_back(rep.shell_sums[j - 1] > 0 ? rep.shell_sums[j] / rep.shell_sums[j - 1] : 0.0);
    rep.predicted_ratios.push_back(
        radii[j - 1] > 0 ? std::pow(static_cast<double>(radii[j]) / static_cast<double>(radii[j - 1]), growth) : 0.0);
    if (radii[j - 1] > 0 && rep.shell_sums[j] > 0) {
      rep.fit.log_x.push_back(std::log(static_cast<double>(radii[j])));
      rep.fit.log_y.push_back(std::log(rep.shell_sums[j]));
    }
  }
  rep.fit.expected_slope = growth;
  if (rep.fit.log_x.size() >= 2)
    std::tie(rep.fit.fitted_slope, rep.fit.residual) = least_squares_slope(rep.fit.log_x, rep.fit.log_y);
  rep.fit.sample_range = "shells up to R = " + std::to_string(radii.back());
  return rep;
}

enum class Verdict { bounded, unbounded, unknown };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "BOUNDED";
    case Verdict::unbounded: return "UNBOUNDED";
    default: return "UNKNOWN";
  }
}

struct RegionVerdict {
  Verdict verdict = Verdict::unknown;
  std::string reason;
};

/// Classifies T*: l^p x l^q -> l^r on Z^d for the bilinear operator.
inline RegionVerdict region_classify(double p, double q, double r, int dim, int degree = 2, int linearity = 2) {
  if (!(p > 0) || !(q > 0) || !(r > 0)) throw ParameterError("exponents p, q, r must be positive");
  if (linearity != 2) throw ParameterError("region classifier covers the bilinear operator (l = 2) only");
  const Rational crit = critical_r(dim, degree, linearity);
  const double c = to_double(crit);
  // r <= crit  <=>  r (l d - k) <= d, compared without dividing
  const double lhs = r * static_cast<double>(crit.denominator());
  const auto dd = static_cast<double>(crit.numerator());
  std::ostringstream why;
  if (lhs < dd) {
    why << "r = " << r << " < d/(ld-k) = " << to_string(crit) << ": the box/delta example has infinite l^r norm";
    return {Verdict::unbounded, why.str()};
  }
  if (lhs == dd) {
    why << "r = d/(ld-k) = " << to_string(crit)
        << ": the example diverges at equality (degree-2 strict form); the degree-k statement writes the "
           "convergence condition as r >= d/(ld-k)";
    return {Verdict::unbounded, why.str()};
  }
  if (degree != 2) {
    why << "r > " << to_string(crit) << " but degree " << degree
        << " boundedness needs r > max(r0, d/(ld-k)) with delta0 supplied externally";
    return {Verdict::unknown, why.str()};
  }
  if (dim < 5) {
    why << "d = " << dim << " < 5: the sharp range is not established; the known sufficient condition is r > d/(d-2)";
    return {Verdict::unknown, why.str()};
  }
  if (p <= 1 || q <= 1) {
    why << "endpoint or sub-unit exponent (p = " << p << ", q = " << q
        << "); restricted weak-type endpoint estimates are not modelled";
    return {Verdict::unknown, why.str()};
  }
  if (1.0 / p + 1.0 / q < 1.0 / r) {
    why << "1/p + 1/q = " << 1.0 / p + 1.0 / q << " < 1/r = " << 1.0 / r
        << ": Hoelder-deficient triple, no explicit counterexample";
    return {Verdict::unknown, why.str()};
  }
  why << "d >= 5, p, q > 1, 1/p + 1/q >= 1/r and r > " << to_string(crit) << " (" << c << ")";
  return {Verdict::bounded, why.str()};
}

}  // namespace spherelab
