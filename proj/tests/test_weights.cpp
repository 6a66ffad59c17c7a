#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "omlab/error.hpp"
#include "omlab/weights.hpp"

using namespace omlab;

namespace {

// B(0, 1) on [−1, 1]: centre at the cell boundary x = 0.
Ball unit_ball_at_origin(const Grid& g) { return Ball{{g.n(), g.n()}, static_cast<std::int64_t>(g.n())}; }

// Midpoint sums of |x|^a over the cells of [−1, 1].
double grid_average_abspow(int n, double a) {
  const double h = 2.0 / n;
  long double s = 0.0L;
  for (int i = 0; i < n; ++i) s += std::pow(std::abs(-1.0 + (i + 0.5) * h), a);
  return static_cast<double>(s / n);
}

Weight scaled(const Weight& w, double c) {
  GridFunction f(w.grid());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = c * w[i];
  return Weight(std::move(f));
}

}  // namespace

TEST(Weights, ParsesGrammar) {
  const Grid g(1, 16, 1.0);
  EXPECT_DOUBLE_EQ(parse_weight("abspow(2)", g)[0], std::pow(g.coord(0), 2));
  EXPECT_DOUBLE_EQ(parse_weight("shiftpow(1)", g)[0], 1.0 + std::abs(g.coord(0)));
  EXPECT_DOUBLE_EQ(parse_weight("one", g)[3], 1.0);
  EXPECT_THROW(parse_weight("prodpow(1,1)", g), ParseError);
  const Grid g2(2, 16, 1.0);
  const auto w = parse_weight("prodpow(1,0.5)", g2);
  const auto p = g2.point(37);
  EXPECT_DOUBLE_EQ(w[37], std::abs(p[0]) * std::sqrt(std::abs(p[1])));
  EXPECT_THROW(parse_weight("abspow(x", g), ParseError);
}

TEST(Weights, UnitWeightHasUnitConstant) {
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 256 : 32, 1.0);
    for (double p : {1.0, 1.5, 2.0, 3.0}) EXPECT_EQ(ap_constant(Weight::unit(g), p, BallFamily::lattice()).constant, 1.0);
  }
}

TEST(Weights, RejectsSmallP) {
  const Grid g(1, 16, 1.0);
  EXPECT_THROW(ap_constant(Weight::unit(g), 0.5, BallFamily::lattice()), Error);
}

TEST(Weights, SqrtWeightOnUnitBall) {
  const Grid g(1, 4096, 1.0);
  const auto w = parse_weight("abspow(0.5)", g);
  const auto r = ap_constant(w, 2.0, BallFamily::single(unit_ball_at_origin(g)));
  EXPECT_NEAR(r.constant, 4.0 / 3.0, 0.02 * 4.0 / 3.0);
  // the same product from test-side midpoint sums
  EXPECT_NEAR(r.constant, grid_average_abspow(4096, 0.5) * grid_average_abspow(4096, -0.5), 1e-12);
}

TEST(Weights, ThreeHalvesWeightGrowsAtTheMidpointRate) {
  // (avg |x|^{3/2})(avg |x|^{−3/2}) on the grid; the second factor diverges like N^{1/2}.
  std::vector<double> lib, oracle;
  for (int n : {1024, 2048, 4096}) {
    const Grid g(1, n, 1.0);
    lib.push_back(ap_constant(parse_weight("abspow(1.5)", g), 2.0, BallFamily::single(unit_ball_at_origin(g))).constant);
    oracle.push_back(grid_average_abspow(n, 1.5) * grid_average_abspow(n, -1.5));
  }
  for (std::size_t k = 0; k < lib.size(); ++k) EXPECT_NEAR(lib[k], oracle[k], 1e-10 * oracle[k]);
  EXPECT_GT(lib[1], lib[0]);
  EXPECT_GT(lib[2], lib[1]);
  EXPECT_NEAR(lib[2] / lib[0], 2.0, 0.1);
}

TEST(WeightsProperty, ConstantAtLeastOneAndScaleInvariant) {
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 512 : 32, 1.0);
    for (const char* expr : {"abspow(0.5)", "shiftpow(2)", "abspow(-0.3)"}) {
      const auto w = parse_weight(expr, g);
      for (double p : {1.0, 2.0, 3.0}) {
        const double a = ap_constant(w, p, BallFamily::lattice()).constant;
        const double b = ap_constant(scaled(w, 7.5), p, BallFamily::lattice()).constant;
        EXPECT_GE(a, 1.0 - 1e-9) << expr;
        EXPECT_NEAR(a, b, 1e-10 * a) << expr;
      }
    }
  }
}

TEST(WeightsProperty, ConstantsDecreaseInP) {
  const Grid g(1, 512, 1.0);
  const auto w = parse_weight("abspow(0.5)", g);
  const auto r1 = ap_constant(w, 1.0, BallFamily::lattice(), true);
  const auto r2 = ap_constant(w, 1.5, BallFamily::lattice(), true);
  const auto r3 = ap_constant(w, 3.0, BallFamily::lattice(), true);
  ASSERT_EQ(r1.per_ball.size(), r3.per_ball.size());
  for (std::size_t k = 0; k < r1.per_ball.size(); ++k) {
    EXPECT_LE(r2.per_ball[k], r1.per_ball[k] * (1 + 1e-9));
    EXPECT_LE(r3.per_ball[k], r2.per_ball[k] * (1 + 1e-9));
  }
}

TEST(Weights, AInftyUnitWeight) {
  const Grid g(1, 512, 1.0);
  const auto fit = ainfty_fit(Weight::unit(g), BallFamily::lattice());
  EXPECT_DOUBLE_EQ(fit.delta, 1.0);
  EXPECT_NEAR(fit.C, 1.0, 1e-12);
}

TEST(Weights, AInftySqrtWeightEnvelope) {
  const Grid g(1, 1024, 1.0);
  const auto w = parse_weight("abspow(0.5)", g);
  const auto fit = ainfty_fit(w, BallFamily::lattice());
  EXPECT_GT(fit.delta, 0.0);
  EXPECT_LT(fit.delta, 1.0);
  for (const auto& [x, y] : fit.samples) EXPECT_LE(y, fit.C * std::pow(x, fit.delta) * (1 + 1e-12));
  const auto twice = ainfty_fit(scaled(w, 2.0), BallFamily::lattice());
  EXPECT_NEAR(twice.delta, fit.delta, 1e-12);
  EXPECT_NEAR(twice.C, fit.C, 1e-9 * fit.C);
  EXPECT_THROW(ainfty_fit(w, BallFamily::lattice(), 4), Error);
}

TEST(Weights, WeightedAverageTrivialCases) {
  const Grid g(1, 256, 1.0);
  const auto w = parse_weight("abspow(0.5)", g);
  const double ap = ap_constant(w, 2.0, BallFamily::lattice()).constant;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (const auto& b : enumerate(g, BallFamily::lattice())) {
    EXPECT_LE(check_weighted_average(w, 2.0, ap, GridFunction(g, 1.0), b), 1.0 + 1e-12);
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = n01(rng);
    EXPECT_LE(check_weighted_average(Weight::unit(g), 2.0, 1.0, f, b), 1.0 + 1e-12);
  }
}

TEST(WeightsProperty, WeightedAverageBoundOnPowerWeights) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 256 : 32, 1.0);
    const auto family = BallFamily::lattice();
    const auto balls = enumerate(g, family);
    for (const char* expr : {"abspow(0.5)", "abspow(-0.4)", "shiftpow(3)"}) {
      const auto w = parse_weight(expr, g);
      for (double p : {1.0, 2.0}) {
        const double ap = ap_constant(w, p, family).constant;
        for (int trial = 0; trial < 100; ++trial) {
          GridFunction f(g);
          for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng) < 0.3 ? 0.0 : u(rng);
          const auto& b = balls[static_cast<std::size_t>(trial) * 7919 % balls.size()];
          EXPECT_LE(check_weighted_average(w, p, ap, f, b), 1.0 + 1e-9) << expr << " p=" << p;
        }
      }
    }
  }
}

TEST(Weights, DoublingMeasureBound) {
  const Grid g(1, 512, 1.0);
  for (const char* expr : {"one", "abspow(0.5)", "shiftpow(2)"}) {
    const auto w = parse_weight(expr, g);
    const double ap = ap_constant(w, 2.0, BallFamily::dense()).constant;
    const double ratio = dilation_measure_ratio(w, BallFamily::lattice(), 2.0);
    EXPECT_GE(ratio, 1.0);
    // a centred ball of 2^{j+1} − 1 cells doubles to 2^{j+2} − 1 cells, at most 3×
    EXPECT_LE(ratio, ap * 9.0 * (1 + 1e-12)) << expr;
  }
}

TEST(Weights, OpennessScanShape) {
  const Grid coarse(1, 512, 1.0), fine(1, 1024, 1.0);
  const auto scan = openness_scan(parse_weight("abspow(0.5)", coarse), parse_weight("abspow(0.5)", fine), 2.0,
                                  BallFamily::lattice());
  ASSERT_FALSE(scan.r_values.empty());
  EXPECT_DOUBLE_EQ(scan.r_values.front(), 1.0);
  EXPECT_DOUBLE_EQ(scan.r_values.back(), 2.0);
  EXPECT_LE(scan.smallest_stable_r, 2.0);
  for (std::size_t k = 1; k < scan.r_values.size(); ++k) EXPECT_LE(scan.fine[k], scan.fine[k - 1] * (1 + 1e-9));
}
