#pragma once

// Seeded random sparse test functions.

#include <cstdint>
#include <random>
#include <vector>

#include "spherelab/grid_function.hpp"

namespace spherelab {

struct RandomFunctionSpec {
  int dim = 5;
  int max_points = 6;  // support size drawn from [1, max_points]
  int radius = 2;      // coordinates drawn from [-radius, radius]
  bool nonnegative = true;
};

inline GridFunction random_sparse_function(const RandomFunctionSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, spec.max_points);
  std::uniform_int_distribution<int> coord(-spec.radius, spec.radius);
  std::uniform_real_distribution<double> value(spec.nonnegative ? 0.0 : -1.0, 1.0);
  std::vector<GridFunction::Entry> e;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    Point p(spec.dim);
    for (int a = 0; a < spec.dim; ++a) p[a] = coord(rng);
    double v = 0.0;
    while (v == 0.0) v = value(rng);
    e.emplace_back(p, v);
  }
  return {spec.dim, std::move(e)};
}

/// {box indicator [-1,1]^d, delta_0, `extra` random nonnegative sparse functions}.
inline std::vector<GridFunction> domination_corpus(int dim, int extra, std::uint64_t seed) {
  std::vector<GridFunction> out{make_box_indicator(dim, 1), make_delta(dim)};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < extra; ++i) out.push_back(random_sparse_function({dim, 6, 2, true}, rng));
  return out;
}

}  // namespace spherelab
