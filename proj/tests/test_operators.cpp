#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "spherelab/operators.hpp"
#include "spherelab/testing/oracles.hpp"

using namespace spherelab;

namespace {

GridFunction random_sparse(std::mt19937& rng, int dim, int points, int radius, bool nonnegative) {
  std::uniform_int_distribution<int> c(-radius, radius);
  std::uniform_real_distribution<double> v(nonnegative ? 0.05 : -1.0, 1.0);
  std::vector<GridFunction::Entry> e;
  for (int i = 0; i < points; ++i) {
    Point p(dim);
    for (int a = 0; a < dim; ++a) p[a] = c(rng);
    e.emplace_back(p, v(rng));
  }
  return {dim, std::move(e)};
}

OperatorConfig config(int d, int k, int l, std::int64_t lmax, Normalization n = Normalization::exact) {
  return OperatorConfig{{d, k}, l, lmax, n, 1, {}};
}

void expect_close(const GridFunction& a, const GridFunction& b, double rel) {
  for (const auto& [x, v] : a.entries()) EXPECT_NEAR(v, b.at(x), rel * std::fabs(v)) << x;
  for (const auto& [x, v] : b.entries()) EXPECT_NEAR(v, a.at(x), rel * std::fabs(v)) << x;
}

}  // namespace

TEST(MultilinearAverage, DeltaExamples) {
  const auto d1 = make_delta(1);
  auto avg = multilinear_average({d1, d1}, 2, config(1, 2, 2, 2));
  EXPECT_FALSE(avg.empty_sphere);
  EXPECT_EQ(avg.value, GridFunction(1, {{{-1}, 0.25}, {{1}, 0.25}}));

  avg = multilinear_average({d1, d1, d1}, 3, config(1, 2, 3, 3));
  EXPECT_EQ(avg.value, GridFunction(1, {{{-1}, 0.125}, {{1}, 0.125}}));
}

TEST(MultilinearAverage, ConstantFunctionsAverageToOne) {
  const auto ones = make_box_indicator(2, 8);
  for (std::int64_t lambda : {1, 5, 13, 25}) {
    const auto avg = multilinear_average({ones, ones}, lambda, config(2, 2, 2, lambda));
    EXPECT_NEAR(avg.value.at({0, 0}), 1.0, 1e-14) << lambda;
    EXPECT_NEAR(avg.value.at({1, -2}), 1.0, 1e-14) << lambda;
  }
}

TEST(MultilinearAverage, EmptySphereIsFlagged) {
  const auto d1 = make_delta(1);
  // |u|^3 + |v|^3 = 3 has no integer solutions
  const auto avg = multilinear_average({d1, d1}, 3, config(1, 3, 2, 3));
  EXPECT_TRUE(avg.empty_sphere);
  EXPECT_TRUE(avg.value.empty());
}

TEST(MultilinearAverage, ParameterErrors) {
  const auto d1 = make_delta(1), d2 = make_delta(2);
  EXPECT_THROW(multilinear_average({d1, d2}, 2, config(1, 2, 2, 5)), ParameterError);
  EXPECT_THROW(multilinear_average({d1}, 2, config(1, 2, 2, 5)), ParameterError);
  EXPECT_THROW(multilinear_average({d1, d1}, 6, config(1, 2, 2, 5)), RangeError);
  auto bad = config(1, 2, 2, 5);
  bad.lambda_min = 6;
  EXPECT_THROW(multilinear_average({d1, d1}, 2, bad), ParameterError);
}

TEST(MultilinearAverage, MatchesBruteForceOnRandomInstances) {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + trial % 2, l = 1 + (trial / 2) % 3, k = 2 + (trial / 6) % 2;
    const std::int64_t lambda = 1 + rng() % (d * l > 4 ? 12 : 40);
    std::vector<GridFunction> fs;
    for (int j = 0; j < l; ++j) fs.push_back(random_sparse(rng, d, 1 + rng() % 4, 2, false));
    const auto cfg = config(d, k, l, lambda, trial % 2 ? Normalization::asymptotic : Normalization::exact);
    const auto avg = multilinear_average(fs, lambda, cfg);
    const double n = cfg.normalization == Normalization::exact
                         ? static_cast<double>(oracle::brute_joint_count(d, l, k, lambda))
                         : std::pow(static_cast<double>(lambda), static_cast<double>(l * d) / k - 1);
    if (n == 0) {
      EXPECT_TRUE(avg.empty_sphere);
      continue;
    }
    const auto R = oracle::covering_radius(lambda, k) + 2;
    oracle::for_each_in_box(d, R, [&](const std::vector<std::int64_t>& xc) {
      const auto x = Point::from(std::span<const std::int64_t>(xc));
      const double expect = oracle::brute_multilinear_sum(fs, k, lambda, x) / n;
      EXPECT_NEAR(avg.value.at(x), expect, 1e-12 * std::max(1.0, std::fabs(expect))) << trial << " at " << x;
    });
  }
}

TEST(MultilinearAverage, LinearInEachArgument) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_sparse(rng, 2, 6, 3, false), g = random_sparse(rng, 2, 6, 3, false);
    const auto h = random_sparse(rng, 2, 6, 3, false), e = random_sparse(rng, 2, 4, 3, false);
    const double a = 1.5, b = -0.75;
    const auto cfg = config(2, 2, 3, 20);
    for (std::int64_t lambda : {4, 13, 20}) {
      const auto lhs = multilinear_average({h, f.scaled(a) + g.scaled(b), e}, lambda, cfg).value;
      const auto rf = multilinear_average({h, f, e}, lambda, cfg).value;
      const auto rg = multilinear_average({h, g, e}, lambda, cfg).value;
      const auto rhs = rf.scaled(a) + rg.scaled(b);
      for (const auto& [x, v] : lhs.entries()) EXPECT_NEAR(v, rhs.at(x), 1e-12 * (1 + std::fabs(v)));
      for (const auto& [x, v] : rhs.entries()) EXPECT_NEAR(v, lhs.at(x), 1e-12 * (1 + std::fabs(v)));
    }
  }
}

TEST(MultilinearAverage, TranslationEquivarianceIsExact) {
  std::mt19937 rng(31);
  const auto f = random_sparse(rng, 3, 8, 2, false), g = random_sparse(rng, 3, 8, 2, false);
  const Point a{3, -1, 5};
  const auto cfg = config(3, 2, 2, 17);
  for (std::int64_t lambda : {3, 9, 17}) {
    const auto base = multilinear_average({f, g}, lambda, cfg).value;
    const auto moved = multilinear_average({f.translated(a), g.translated(a)}, lambda, cfg).value;
    EXPECT_EQ(moved, base.translated(a));
  }
}

TEST(MultilinearAverage, NormalizerIsLevelConvolutionOfCounts) {
  for (int d = 1; d <= 3; ++d)
    for (int l = 1; l <= 3; ++l) {
      const auto w = detail::normalizers({d, 2}, l, 30, Normalization::exact, 1);
      const auto base = rep_counts({d, 2}, 30).counts;
      auto acc = base;
      for (int j = 1; j < l; ++j) acc = oracle::schoolbook(acc, base, 31);
      for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i], acc[i].convert_to<double>());
    }
}

TEST(MultilinearMaximal, DeltaPairInOneDimension) {
  const auto d1 = make_delta(1);
  const auto m = multilinear_maximal({d1, d1}, config(1, 2, 2, 10));
  EXPECT_EQ(m, GridFunction(1, {{{-2}, 0.25}, {{-1}, 0.25}, {{1}, 0.25}, {{2}, 0.25}}));
  EXPECT_TRUE(multilinear_maximal({GridFunction(1), d1}, config(1, 2, 2, 10)).empty());
}

TEST(MultilinearMaximal, MonotoneInLambdaMax) {
  std::mt19937 rng(55);
  const auto f = random_sparse(rng, 2, 6, 2, false), g = random_sparse(rng, 2, 5, 2, false);
  GridFunction prev(2);
  for (std::int64_t lmax : {2, 5, 11, 23, 40}) {
    for (auto n : {Normalization::exact, Normalization::asymptotic}) {
      const auto m = multilinear_maximal({f, g}, config(2, 2, 2, lmax, n));
      if (n == Normalization::asymptotic) {
        for (const auto& [x, v] : prev.entries()) EXPECT_GE(m.at(x), v);
        prev = m;
      }
    }
  }
}

TEST(MultilinearMaximal, MatchesScanOfAverages) {
  std::mt19937 rng(8);
  const auto f = random_sparse(rng, 2, 5, 2, false), g = random_sparse(rng, 2, 5, 2, false);
  const auto cfg = config(2, 3, 2, 30);
  const auto m = multilinear_maximal({f, g}, cfg);
  std::map<Point, double> mx;
  for (std::int64_t lambda = 1; lambda <= 30; ++lambda) {
    const auto avg = multilinear_average({f, g}, lambda, cfg);
    for (const auto& [x, v] : avg.value.entries()) mx[x] = std::max(mx[x], std::fabs(v));
  }
  std::vector<GridFunction::Entry> e(mx.begin(), mx.end());
  EXPECT_EQ(m, GridFunction(2, e));
}

TEST(MultilinearMaximal, DeterministicAcrossThreadCounts) {
  std::mt19937 rng(99);
  const auto f = random_sparse(rng, 3, 20, 3, true), g = random_sparse(rng, 3, 20, 3, true);
  auto cfg = config(3, 2, 2, 25, Normalization::asymptotic);
  cfg.slices.threads = 1;
  const auto a = multilinear_maximal({f, g}, cfg);
  cfg.slices.threads = 8;
  EXPECT_EQ(multilinear_maximal({f, g}, cfg), a);
}

TEST(HlMaximal, Examples) {
  const auto d5 = make_delta(5);
  const auto m = hl_maximal(d5, {5, 2}, 10);
  EXPECT_DOUBLE_EQ(m.at({2, 0, 0, 0, 0}), 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(m.at(Point::zero(5)), 1.0);
  std::mt19937 rng(2);
  const auto f = random_sparse(rng, 2, 7, 3, true);
  expect_close(hl_maximal(f.scaled(3.5), {2, 2}, 20), hl_maximal(f, {2, 2}, 20).scaled(3.5), 1e-14);
}

TEST(HlMaximal, MatchesDefinitionScan) {
  std::mt19937 rng(12);
  for (int k = 2; k <= 3; ++k) {
    const SphereSpec spec{2, k};
    const auto f = random_sparse(rng, 2, 6, 2, false);
    const std::int64_t lmax = 30;
    const auto m = hl_maximal(f, spec, lmax);
    const auto R = oracle::covering_radius(lmax, k) + 2;
    oracle::for_each_in_box(2, R, [&](const std::vector<std::int64_t>& xc) {
      const auto x = Point::from(std::span<const std::int64_t>(xc));
      double best = 0;
      for (std::int64_t lambda = 1; lambda <= lmax; ++lambda) {
        double s = 0;
        oracle::for_each_in_box(2, oracle::covering_radius(lambda, k), [&](const std::vector<std::int64_t>& u) {
          if (oracle::ipow_abs(u[0], k) + oracle::ipow_abs(u[1], k) <= lambda)
            s += std::fabs(f.at(Point{static_cast<int>(x[0] - u[0]), static_cast<int>(x[1] - u[1])}));
        });
        best = std::max(best, s / std::pow(static_cast<double>(lambda), 2.0 / k));
      }
      EXPECT_NEAR(m.at(x), best, 1e-12 * (1 + best)) << x;
    });
  }
}

TEST(LinearSphericalMaximal, Examples) {
  const auto d5 = make_delta(5);
  const auto s = linear_spherical_maximal(d5, {5, 2}, 10);
  EXPECT_DOUBLE_EQ(s.at({1, 0, 0, 0, 0}), 1.0);
  EXPECT_NEAR(s.at({1, 1, 0, 0, 0}), std::pow(2.0, -1.5), 1e-15);
  EXPECT_NEAR(s.at({1, 1, 0, 0, 0}), 0.35355, 1e-5);
  EXPECT_EQ(s.at(Point::zero(5)), 0.0);
  // with the level-0 term included the origin sees |g(0)|
  EXPECT_EQ(linear_spherical_maximal(d5, {5, 2}, 10, 0).at(Point::zero(5)), 1.0);
}

TEST(LinearSphericalMaximal, MonotoneInLambdaMax) {
  std::mt19937 rng(41);
  const auto g = random_sparse(rng, 3, 6, 2, false);
  const auto a = linear_spherical_maximal(g, {3, 2}, 10), b = linear_spherical_maximal(g, {3, 2}, 30);
  for (const auto& [x, v] : a.entries()) EXPECT_GE(b.at(x), v);
  const auto ha = hl_maximal(g, {3, 2}, 10), hb = hl_maximal(g, {3, 2}, 30);
  for (const auto& [x, v] : ha.entries()) EXPECT_GE(hb.at(x), v);
}

TEST(Domination, Examples) {
  const auto box5 = make_box_indicator(5, 1);
  const auto rep = domination_check({box5, box5}, {5, 2}, 20);
  EXPECT_LE(rep.max_violation, 1e-9);
  EXPECT_GT(rep.points_checked, 0u);
  EXPECT_EQ(rep.arrangements_checked, 2u);
  EXPECT_EQ(rep.lambda_max, 20);

  const auto zero = domination_check({GridFunction(5), box5}, {5, 2}, 20);
  EXPECT_EQ(zero.max_violation, 0.0);
  EXPECT_EQ(zero.points_checked, 0u);

  EXPECT_LE(domination_check({make_box_indicator(3, 1), make_delta(3)}, {3, 2}, 50).max_violation, 1e-9);
}

TEST(Domination, TrilinearEveryArrangement) {
  std::mt19937 rng(6);
  const auto f = random_sparse(rng, 3, 5, 2, true), g = random_sparse(rng, 3, 4, 2, true);
  const auto rep = domination_check({f, g, make_delta(3)}, {3, 2}, 15);
  EXPECT_EQ(rep.arrangements_checked, 6u);
  EXPECT_LE(rep.max_violation, 1e-9);
  EXPECT_LE(domination_check({f, g, make_box_indicator(3, 1)}, {3, 3}, 30).max_violation, 1e-9);
}

TEST(Domination, RejectsNegativeInputs) {
  const auto neg = make_delta(2).scaled(-1.0);
  EXPECT_THROW(domination_check({neg, make_delta(2)}, {2, 2}, 5), ParameterError);
  EXPECT_THROW(domination_check({make_delta(2)}, {2, 2}, 5), ParameterError);
}
