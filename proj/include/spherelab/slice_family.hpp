#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spherelab/grid_function.hpp"
#include "spherelab/lattice_counts.hpp"
#include "spherelab/parallel.hpp"

namespace spherelab {

inline constexpr double kDefaultWorkBudget = 2e9;

/// F_mu(x) = sum over the degree-k shell at level mu of source(x - u), for
/// mu = 0..mu_max.
struct SliceFamily {
  GridFunction source;
  SphereSpec spec;
  std::int64_t mu_max = 0;
  std::vector<GridFunction> slices;

  const GridFunction& slice(std::int64_t mu) const {
    if (mu < 0 || mu > mu_max)
      throw RangeError("slice level " + std::to_string(mu) + " outside [0, " + std::to_string(mu_max) + "]");
    return slices[static_cast<std::size_t>(mu)];
  }
};

struct SliceOptions {
  double work_budget = kDefaultWorkBudget;
  unsigned threads = 0;
};

namespace detail {

inline void check_slice_args(const GridFunction& f, const SphereSpec& spec, std::int64_t mu_max,
                             const SliceOptions& opt) {
  spec.validate();
  if (spec.dim != f.dim())
    throw ParameterError("slice family: function dimension " + std::to_string(f.dim()) + " != sphere dimension " +
                         std::to_string(spec.dim));
  if (mu_max < 0) throw ParameterError("slice family: mu_max must be >= 0");
  const auto counts = rep_counts(spec, mu_max, opt.threads);
  double work = 0;
  for (std::int64_t mu = 0; mu <= mu_max; ++mu) {
    work += counts.counts[static_cast<std::size_t>(mu)].convert_to<double>() * static_cast<double>(f.size());
    if (work > opt.work_budget)
      throw ResourceError("slice family work budget " + std::to_string(opt.work_budget) + " exceeded at mu = " +
                          std::to_string(mu));
  }
}

}  // namespace detail

inline SliceFamily slice_family(const GridFunction& f, const SphereSpec& spec, std::int64_t mu_max,
                                const SliceOptions& opt = {}) {
  detail::check_slice_args(f, spec, mu_max, opt);
  SliceFamily fam{f, spec, mu_max, std::vector<GridFunction>(static_cast<std::size_t>(mu_max) + 1, GridFunction(f.dim()))};
  parallel_for(fam.slices.size(), opt.threads, [&](std::size_t mu) {
    const Shell shell = enumerate_shell(spec, static_cast<std::int64_t>(mu));
    GridAccumulator acc(f.dim());
    for (const auto& [y, v] : f.entries())
      for (const auto& u : shell.points) acc.add(y + u, v);
    fam.slices[mu] = std::move(acc).freeze();
  });
  return fam;
}

/// Per-point view of a slice family: for each x, the nonzero (level, value)
/// pairs in increasing level order. Points are kept sorted so supports of
/// several families can be intersected by merging.
using LevelProfile = std::vector<std::pair<std::int64_t, double>>;

struct LevelProfiles {
  std::vector<Point> points;
  std::vector<LevelProfile> levels;

  std::size_t size() const { return points.size(); }

  const LevelProfile* find(const Point& x) const {
    auto it = std::lower_bound(points.begin(), points.end(), x);
    if (it == points.end() || *it != x) return nullptr;
    return &levels[static_cast<std::size_t>(it - points.begin())];
  }
};

namespace detail {

class ProfileBuilder {
public:
  /// Levels must be added in nondecreasing order.
  void add(const Point& x, std::int64_t mu, double v) {
    auto [it, inserted] = index_.try_emplace(x, levels_.size());
    if (inserted) levels_.emplace_back();
    auto& lp = levels_[it->second];
    if (!lp.empty() && lp.back().first == mu)
      lp.back().second += v;
    else
      lp.emplace_back(mu, v);
  }

  LevelProfiles finish() && {
    std::vector<std::pair<Point, std::size_t>> order(index_.begin(), index_.end());
    index_.clear();
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    LevelProfiles out;
    for (auto& [x, i] : order) {
      auto& lp = levels_[i];
      std::erase_if(lp, [](const auto& e) { return e.second == 0.0; });
      if (lp.empty()) continue;
      out.points.push_back(x);
      out.levels.push_back(std::move(lp));
    }
    levels_.clear();
    return out;
  }

private:
  std::unordered_map<Point, std::size_t, PointHash> index_;
  std::vector<LevelProfile> levels_;
};

}  // namespace detail

inline LevelProfiles level_profiles(const SliceFamily& fam) {
  detail::ProfileBuilder b;
  for (std::size_t mu = 0; mu < fam.slices.size(); ++mu)
    for (const auto& [x, v] : fam.slices[mu].entries()) b.add(x, static_cast<std::int64_t>(mu), v);
  return std::move(b).finish();
}

/// Same as level_profiles(slice_family(f, spec, mu_max, opt)) without
/// materializing the slices; values are accumulated in the same order.
inline LevelProfiles level_profiles(const GridFunction& f, const SphereSpec& spec, std::int64_t mu_max,
                                    const SliceOptions& opt = {}) {
  detail::check_slice_args(f, spec, mu_max, opt);
  std::vector<Shell> shells(static_cast<std::size_t>(mu_max) + 1);
  parallel_for(shells.size(), opt.threads,
               [&](std::size_t mu) { shells[mu] = enumerate_shell(spec, static_cast<std::int64_t>(mu)); });
  detail::ProfileBuilder b;
  for (std::size_t mu = 0; mu < shells.size(); ++mu) {
    for (const auto& [y, v] : f.entries())
      for (const auto& u : shells[mu].points) b.add(y + u, static_cast<std::int64_t>(mu), v);
    shells[mu] = {};
  }
  return std::move(b).finish();
}

}  // namespace spherelab
