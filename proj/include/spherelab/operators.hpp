#pragma once

// Multilinear degree-k spherical averages and maximal operators on Z^d, the
// k-ball Hardy-Littlewood maximal function, the linear spherical maximal
// function, and the pointwise domination T* <= M * S^{l-1}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spherelab/grid_function.hpp"
#include "spherelab/lattice_counts.hpp"
#include "spherelab/parallel.hpp"
#include "spherelab/slice_family.hpp"

namespace spherelab {

enum class Normalization {
  exact,      // divide by N(lambda), the joint count in Z^{l d}
  asymptotic  // divide by lambda^{l d / k - 1}
};

inline std::string to_string(Normalization n) { return n == Normalization::exact ? "exact" : "asymptotic"; }

inline Normalization parse_normalization(const std::string& s) {
  if (s == "exact") return Normalization::exact;
  if (s == "asymptotic") return Normalization::asymptotic;
  throw ParameterError("unknown normalization '" + s + "' (expected exact or asymptotic)");
}

/// lambda ranges over [lambda_min, lambda_max]. lambda_min = 0 admits the
/// degenerate level 0, whose asymptotic weight is taken to be 1.
struct OperatorConfig {
  SphereSpec spec;
  int linearity = 2;
  std::int64_t lambda_max = 1;
  Normalization normalization = Normalization::exact;
  std::int64_t lambda_min = 1;
  SliceOptions slices{};

  void validate() const {
    spec.validate();
    if (linearity < 1) throw ParameterError("linearity must be >= 1");
    if (lambda_min < 0 || lambda_min > lambda_max)
      throw ParameterError("need 0 <= lambda_min <= lambda_max, got [" + std::to_string(lambda_min) + ", " +
                           std::to_string(lambda_max) + "]");
  }
};

/// Caches slice-family profiles per (function, sphere, level range), so a
/// function shared by several operator evaluations is sliced once.
class ProfileCache {
public:
  const LevelProfiles& profiles(const GridFunction& f, const SphereSpec& spec, std::int64_t mu_max,
                                const SliceOptions& opt) {
    {
      std::lock_guard lock(mutex_);
      for (const auto& e : entries_)
        if (e->spec == spec && e->mu_max >= mu_max && e->source == f) return e->profiles;
    }
    auto e = std::make_unique<Entry>(Entry{f, spec, mu_max, level_profiles(f, spec, mu_max, opt)});
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(e));
    return entries_.back()->profiles;
  }

private:
  struct Entry {
    GridFunction source;
    SphereSpec spec;
    std::int64_t mu_max;
    LevelProfiles profiles;
  };
  std::mutex mutex_;
  std::vector<std::unique_ptr<Entry>> entries_;
};

namespace detail {

/// Denominators for lambda = 0..lambda_max; 0 marks an empty sphere.
inline std::vector<double> normalizers(const SphereSpec& spec, int linearity, std::int64_t lambda_max, Normalization n,
                                       unsigned threads) {
  std::vector<double> w(static_cast<std::size_t>(lambda_max) + 1);
  if (n == Normalization::exact) {
    const auto t = rep_counts(SphereSpec{spec.dim * linearity, spec.degree}, lambda_max, threads);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = t.counts[i].convert_to<double>();
  } else {
    const double e = static_cast<double>(linearity * spec.dim) / spec.degree - 1.0;
    w[0] = 1.0;
    for (std::size_t i = 1; i < w.size(); ++i) w[i] = std::pow(static_cast<double>(i), e);
  }
  return w;
}

/// Scratch buffer for sparse level convolutions with a dense accumulator.
class LevelScratch {
public:
  explicit LevelScratch(std::int64_t lambda_max)
      : dense_(static_cast<std::size_t>(lambda_max) + 1, 0.0), hit_(dense_.size(), 0) {}

  /// Truncated level convolution of two sparse ascending series.
  void convolve(const LevelProfile& a, const LevelProfile& b, std::int64_t lambda_max, LevelProfile& out) {
    touched_.clear();
    for (const auto& [la, va] : a) {
      if (la > lambda_max) break;
      for (const auto& [lb, vb] : b) {
        const std::int64_t l = la + lb;
        if (l > lambda_max) break;
        const auto i = static_cast<std::size_t>(l);
        if (!hit_[i]) {
          hit_[i] = 1;
          touched_.push_back(l);
        }
        dense_[i] += va * vb;
      }
    }
    std::sort(touched_.begin(), touched_.end());
    out.clear();
    for (auto l : touched_) {
      const auto i = static_cast<std::size_t>(l);
      if (dense_[i] != 0.0) out.emplace_back(l, dense_[i]);
      dense_[i] = 0.0;
      hit_[i] = 0;
    }
  }

  LevelProfile& buffer(int i) { return buf_[i]; }

private:
  std::vector<double> dense_;
  std::vector<char> hit_;
  std::vector<std::int64_t> touched_;
  LevelProfile buf_[2];
};

/// Points where every profile is nonempty, in increasing order, with the
/// matching level profile of each input (row i occupies
/// profiles[i * width, (i + 1) * width)).
struct CommonSupport {
  std::size_t width = 0;
  std::vector<Point> points;
  std::vector<const LevelProfile*> profiles;

  std::span<const LevelProfile* const> row(std::size_t i) const { return {profiles.data() + i * width, width}; }
};

inline CommonSupport common_support(const std::vector<const LevelProfiles*>& ps) {
  std::size_t smallest = 0;
  for (std::size_t j = 1; j < ps.size(); ++j)
    if (ps[j]->size() < ps[smallest]->size()) smallest = j;
  CommonSupport out;
  out.width = ps.size();
  std::vector<std::size_t> cursor(ps.size(), 0);
  std::vector<const LevelProfile*> row(ps.size(), nullptr);
  const auto& base = *ps[smallest];
  for (std::size_t i = 0; i < base.size(); ++i) {
    const Point& x = base.points[i];
    bool all = true;
    for (std::size_t j = 0; j < ps.size() && all; ++j) {
      if (j == smallest) {
        row[j] = &base.levels[i];
        continue;
      }
      // both lists are sorted, so each cursor only moves forward
      const auto& pts = ps[j]->points;
      std::size_t c = cursor[j];
      while (c < pts.size() && pts[c] < x) ++c;
      cursor[j] = c;
      all = c < pts.size() && pts[c] == x;
      if (all) row[j] = &ps[j]->levels[c];
    }
    if (!all) continue;
    out.points.push_back(x);
    out.profiles.insert(out.profiles.end(), row.begin(), row.end());
  }
  return out;
}

/// H_x(lambda) = sum over mu_1 + ... + mu_l = lambda of prod_j F^{(j)}_{mu_j}(x),
/// by a left fold of pairwise level convolutions. The result lives in the
/// scratch buffers (or is the first input itself when l = 1) and stays valid
/// until the next call.
inline const LevelProfile& level_series(std::span<const LevelProfile* const> row, std::int64_t lambda_max,
                                        LevelScratch& scratch) {
  if (row.size() == 1) return *row[0];
  const LevelProfile* acc = row[0];
  int which = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    LevelProfile& out = scratch.buffer(which);
    scratch.convolve(*acc, *row[j], lambda_max, out);
    acc = &out;
    which ^= 1;
    if (out.empty()) break;
  }
  return *acc;
}

inline GridFunction maximal_from_profiles(const std::vector<const LevelProfiles*>& ps, int dim,
                                          std::int64_t lambda_min, std::int64_t lambda_max,
                                          const std::vector<double>& weights, unsigned threads) {
  const auto cs = common_support(ps);
  const auto& xs = cs.points;
  std::vector<double> vals(xs.size(), 0.0);
  constexpr std::size_t kChunk = 512;
  parallel_for((xs.size() + kChunk - 1) / kChunk, threads, [&](std::size_t c) {
    LevelScratch scratch(lambda_max);
    for (std::size_t i = c * kChunk; i < std::min(xs.size(), (c + 1) * kChunk); ++i) {
      double best = 0.0;
      for (const auto& [l, v] : level_series(cs.row(i), lambda_max, scratch)) {
        if (l > lambda_max) break;
        const double w = weights[static_cast<std::size_t>(l)];
        if (l < lambda_min || w == 0.0) continue;
        best = std::max(best, std::fabs(v) / w);
      }
      vals[i] = best;
    }
  });
  std::vector<GridFunction::Entry> e;
  e.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (vals[i] != 0.0) e.emplace_back(xs[i], vals[i]);
  return {dim, std::move(e)};
}

/// max over 1 <= lambda <= lambda_max of lambda^{-d/k} * sum_{levels <= lambda}.
/// Between jumps the quotient decreases, so only lambda = 1 and the levels >= 2
/// need evaluating.
inline GridFunction hl_from_profiles(const LevelProfiles& prof, const SphereSpec& spec, std::int64_t lambda_max,
                                     unsigned threads) {
  const auto& xs = prof.points;
  const double e = static_cast<double>(spec.dim) / spec.degree;
  std::vector<double> vals(xs.size(), 0.0);
  constexpr std::size_t kChunk = 1024;
  parallel_for((xs.size() + kChunk - 1) / kChunk, threads, [&](std::size_t c) {
    for (std::size_t i = c * kChunk; i < std::min(xs.size(), (c + 1) * kChunk); ++i) {
      const auto& levels = prof.levels[i];
      double cum = 0.0, best = 0.0;
      std::size_t t = 0;
      for (; t < levels.size() && levels[t].first <= 1; ++t) cum += levels[t].second;
      best = cum;  // lambda = 1
      for (; t < levels.size() && levels[t].first <= lambda_max; ++t) {
        cum += levels[t].second;
        best = std::max(best, cum / std::pow(static_cast<double>(levels[t].first), e));
      }
      vals[i] = best;
    }
  });
  std::vector<GridFunction::Entry> out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (vals[i] != 0.0) out.emplace_back(xs[i], vals[i]);
  return {spec.dim, std::move(out)};
}

inline void check_inputs(const std::vector<GridFunction>& fs, const OperatorConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(fs.size()) != cfg.linearity)
    throw ParameterError("expected " + std::to_string(cfg.linearity) + " input functions, got " +
                         std::to_string(fs.size()));
  for (const auto& f : fs)
    if (f.dim() != cfg.spec.dim)
      throw ParameterError("input dimension " + std::to_string(f.dim()) + " != operator dimension " +
                           std::to_string(cfg.spec.dim));
}

inline std::vector<const LevelProfiles*> profiles_for(const std::vector<GridFunction>& fs, const SphereSpec& spec,
                                                      std::int64_t mu_max, const SliceOptions& opt,
                                                      ProfileCache& cache) {
  std::vector<const LevelProfiles*> ps;
  for (const auto& f : fs) ps.push_back(&cache.profiles(f, spec, mu_max, opt));
  return ps;
}

}  // namespace detail

struct AverageResult {
  GridFunction value;
  bool empty_sphere = false;  // exact normalization with N(lambda) = 0
};

/// Signed average (1/N) sum_{|u_1|^k + ... + |u_l|^k = lambda} f_1(x-u_1)...f_l(x-u_l).
inline AverageResult multilinear_average(const std::vector<GridFunction>& fs, std::int64_t lambda,
                                         const OperatorConfig& cfg, ProfileCache* cache = nullptr) {
  detail::check_inputs(fs, cfg);
  if (lambda < 0 || lambda > cfg.lambda_max)
    throw RangeError("lambda " + std::to_string(lambda) + " outside [0, " + std::to_string(cfg.lambda_max) + "]");
  const unsigned threads = cfg.slices.threads;
  const auto w = detail::normalizers(cfg.spec, cfg.linearity, lambda, cfg.normalization, threads);
  const double norm = w[static_cast<std::size_t>(lambda)];
  if (norm == 0.0) return {GridFunction(cfg.spec.dim), true};
  ProfileCache local;
  auto ps = detail::profiles_for(fs, cfg.spec, lambda, cfg.slices, cache ? *cache : local);
  const auto cs = detail::common_support(ps);
  const auto& xs = cs.points;
  std::vector<double> vals(xs.size(), 0.0);
  constexpr std::size_t kChunk = 512;
  parallel_for((xs.size() + kChunk - 1) / kChunk, threads, [&](std::size_t c) {
    detail::LevelScratch scratch(lambda);
    for (std::size_t i = c * kChunk; i < std::min(xs.size(), (c + 1) * kChunk); ++i) {
      const auto& series = detail::level_series(cs.row(i), lambda, scratch);
      for (const auto& [l, v] : series)
        if (l == lambda) vals[i] = v / norm;
    }
  });
  std::vector<GridFunction::Entry> e;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (vals[i] != 0.0) e.emplace_back(xs[i], vals[i]);
  return {GridFunction(cfg.spec.dim, std::move(e)), false};
}

/// Truncated maximal operator: max over lambda in [lambda_min, lambda_max] of
/// |average|, skipping empty spheres.
inline GridFunction multilinear_maximal(const std::vector<GridFunction>& fs, const OperatorConfig& cfg,
                                        ProfileCache* cache = nullptr) {
  detail::check_inputs(fs, cfg);
  const unsigned threads = cfg.slices.threads;
  const auto w = detail::normalizers(cfg.spec, cfg.linearity, cfg.lambda_max, cfg.normalization, threads);
  ProfileCache local;
  auto ps = detail::profiles_for(fs, cfg.spec, cfg.lambda_max, cfg.slices, cache ? *cache : local);
  return detail::maximal_from_profiles(ps, cfg.spec.dim, cfg.lambda_min, cfg.lambda_max, w, threads);
}

/// Discrete Hardy-Littlewood maximal function over k-balls:
/// max_{1<=lambda<=lambda_max} lambda^{-d/k} sum_{sum|u_i|^k <= lambda} |f(x-u)|.
inline GridFunction hl_maximal(const GridFunction& f, const SphereSpec& spec, std::int64_t lambda_max,
                               const SliceOptions& opt = {}, ProfileCache* cache = nullptr) {
  spec.validate();
  if (lambda_max < 1) throw ParameterError("hl_maximal requires lambda_max >= 1");
  ProfileCache local;
  const auto& prof = (cache ? *cache : local).profiles(f.abs(), spec, lambda_max, opt);
  return detail::hl_from_profiles(prof, spec, lambda_max, opt.threads);
}

/// Linear spherical maximal function max_{lambda_min<=mu<=lambda_max}
/// mu^{-(d/k-1)} |G_mu(x)|; with lambda_min = 0 the level-0 term |g(x)| is
/// included with weight 1.
inline GridFunction linear_spherical_maximal(const GridFunction& g, const SphereSpec& spec, std::int64_t lambda_max,
                                             std::int64_t lambda_min = 1, const SliceOptions& opt = {},
                                             ProfileCache* cache = nullptr) {
  if (lambda_max < 1) throw ParameterError("linear_spherical_maximal requires lambda_max >= 1");
  OperatorConfig cfg{spec, 1, lambda_max, Normalization::asymptotic, lambda_min, opt};
  return multilinear_maximal({g}, cfg, cache);
}

struct DominationReport {
  double max_violation = 0.0;  // max over checked x of T*(x) - M(x) S(x)
  Point argmax_point;
  std::int64_t lambda_max = 0;
  std::size_t points_checked = 0;
  std::size_t arrangements_checked = 0;
};

/// Checks T*_asym(f_1..f_l)(x) <= M(f_{s(1)})(x) * S^{l-1}(f_{s(2)}..f_{s(l)})(x)
/// pointwise for every arrangement s of the inputs. The (l-1)-linear factor
/// includes its level-0 term, which bounds the u_1-on-the-outer-shell terms.
///
/// A checker reused across many input tuples slices each distinct function
/// once and evaluates each M and S factor once.
class DominationChecker {
public:
  DominationChecker(const SphereSpec& spec, std::int64_t lambda_max, const SliceOptions& opt = {},
                    ProfileCache* cache = nullptr)
      : spec_(spec), lambda_max_(lambda_max), opt_(opt), cache_(cache ? cache : &own_) {
    spec_.validate();
    if (lambda_max < 1) throw ParameterError("domination check requires lambda_max >= 1");
  }

  DominationReport check(const std::vector<GridFunction>& fs) {
    const int l = static_cast<int>(fs.size());
    if (l < 2) throw ParameterError("domination check needs at least two functions");
    for (const auto& f : fs) {
      if (f.dim() != spec_.dim) throw ParameterError("input dimension does not match sphere dimension");
      if (!f.nonnegative()) throw ParameterError("domination check requires nonnegative inputs");
    }
    const OperatorConfig lhs_cfg{spec_, l, lambda_max_, Normalization::asymptotic, 1, opt_};
    const GridFunction lhs = multilinear_maximal(fs, lhs_cfg, cache_);

    DominationReport rep;
    rep.lambda_max = lambda_max_;
    rep.argmax_point = Point::zero(spec_.dim);
    rep.points_checked = lhs.size();
    bool first = true;

    std::vector<int> perm(static_cast<std::size_t>(l));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      ++rep.arrangements_checked;
      const GridFunction& m = hl_factor(fs[static_cast<std::size_t>(perm[0])]);
      std::vector<GridFunction> rest;
      for (int j = 1; j < l; ++j) rest.push_back(fs[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]);
      const GridFunction& s = spherical_factor(rest);
      const auto& me = m.entries();
      const auto& se = s.entries();
      std::size_t im = 0, is = 0;
      for (const auto& [x, v] : lhs.entries()) {
        while (im < me.size() && me[im].first < x) ++im;
        while (is < se.size() && se[is].first < x) ++is;
        const double mx = im < me.size() && me[im].first == x ? me[im].second : 0.0;
        const double sx = is < se.size() && se[is].first == x ? se[is].second : 0.0;
        const double viol = v - mx * sx;
        if (first || viol > rep.max_violation) {
          rep.max_violation = viol;
          rep.argmax_point = x;
          first = false;
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return rep;
  }

private:
  const GridFunction& hl_factor(const GridFunction& f) {
    for (const auto& [g, m] : hl_memo_)
      if (g == f) return m;
    hl_memo_.emplace_back(f, hl_maximal(f, spec_, lambda_max_, opt_, cache_));
    return hl_memo_.back().second;
  }

  const GridFunction& spherical_factor(const std::vector<GridFunction>& rest) {
    for (const auto& [gs, s] : s_memo_)
      if (gs == rest) return s;
    const OperatorConfig cfg{spec_, static_cast<int>(rest.size()), lambda_max_, Normalization::asymptotic, 0, opt_};
    s_memo_.emplace_back(rest, multilinear_maximal(rest, cfg, cache_));
    return s_memo_.back().second;
  }

  SphereSpec spec_;
  std::int64_t lambda_max_;
  SliceOptions opt_;
  ProfileCache own_;
  ProfileCache* cache_;
  std::deque<std::pair<GridFunction, GridFunction>> hl_memo_;
  std::deque<std::pair<std::vector<GridFunction>, GridFunction>> s_memo_;
};

inline DominationReport domination_check(const std::vector<GridFunction>& fs, const SphereSpec& spec,
                                         std::int64_t lambda_max, const SliceOptions& opt = {},
                                         ProfileCache* cache = nullptr) {
  return DominationChecker(spec, lambda_max, opt, cache).check(fs);
}

}  // namespace spherelab
