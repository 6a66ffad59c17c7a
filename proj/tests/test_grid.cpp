#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "omlab/error.hpp"
#include "omlab/grid.hpp"

using namespace omlab;

namespace {

GridFunction random_function(const Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng);
  return f;
}

Weight random_weight(const Grid& g, std::uint64_t seed) { return Weight(random_function(g, seed, 0.1, 3.0)); }

// Membership straight from the ball definition: |x − a| < r.
bool inside(const Grid& g, const Ball& b, std::size_t flat) {
  const auto p = g.point(flat);
  const double cx = -g.half_extent() + b.center2[0] * 0.5 * g.h();
  const double cy = -g.half_extent() + b.center2[1] * 0.5 * g.h();
  const double dx = p[0] - cx, dy = g.dim() == 2 ? p[1] - cy : 0.0;
  return std::sqrt(dx * dx + dy * dy) < b.radius(g) - 1e-12;
}

}  // namespace

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid(3, 16, 1.0), Error);
  EXPECT_THROW(Grid(1, 4, 1.0), Error);
  EXPECT_THROW(Grid(1, 12, 1.0), Error);
  EXPECT_THROW(Grid(1, 16, -1.0), Error);
}

TEST(Grid, Geometry) {
  const Grid g(1, 8, 1.0);
  EXPECT_DOUBLE_EQ(g.h(), 0.25);
  EXPECT_DOUBLE_EQ(g.coord(0), -0.875);
  EXPECT_EQ(g.max_level(), 2);
  const Grid g2(2, 16, 2.0);
  EXPECT_EQ(g2.size(), 256u);
  EXPECT_DOUBLE_EQ(g2.cell_volume(), 0.0625);
}

TEST(Grid, IntegrateBoxMeasure) {
  const Grid g(1, 8, 1.0);
  EXPECT_DOUBLE_EQ(integrate(GridFunction(g, 1.0), Weight::unit(g), Region::whole(g)), 2.0);
  const Grid g2(2, 8, 1.0);
  EXPECT_DOUBLE_EQ(integrate(GridFunction(g2, 1.0), Weight::unit(g2), Region::whole(g2)), 4.0);
}

TEST(Grid, HalfBallMeasure) {
  const Grid g(1, 1024, 1.0);
  const std::size_t mid = 512;
  const int level = g.max_level() - 1;
  const Ball b = centered_ball(g, mid, level);
  EXPECT_NEAR(b.radius(g), 0.5, 1e-15);
  EXPECT_NEAR(measure(Weight::unit(g), Region::of(g, b)), 1.0, g.h());
}

TEST(Grid, RegionMatchesMembershipDefinition) {
  for (int dim : {1, 2}) {
    const Grid g(dim, 32, 1.0);
    for (const auto& b : enumerate(g, BallFamily::lattice())) {
      const auto region = Region::of(g, b);
      for (std::size_t i = 0; i < g.size(); ++i) ASSERT_EQ(region.contains(g.n(), i), inside(g, b, i)) << describe(g, b);
    }
  }
}

TEST(Grid, IndicatorIntegratesToWeightedMeasure) {
  const Grid g(2, 32, 1.0);
  const auto w = random_weight(g, 3);
  for (const auto& b : enumerate(g, BallFamily::lattice(1, 3))) {
    const auto region = Region::of(g, b);
    GridFunction chi(g);
    long double naive = 0.0L;
    for (auto c : region.cells(g.n())) {
      chi[c] = 1.0;
      naive += static_cast<long double>(w[c]) * g.cell_volume();
    }
    EXPECT_DOUBLE_EQ(integrate(chi, w, Region::whole(g)), integrate(GridFunction(g, 1.0), w, region));
    EXPECT_NEAR(measure(w, region), static_cast<double>(naive), 1e-12 * static_cast<double>(naive));
  }
}

TEST(GridProperty, PrefixSumsAgreeWithNaive) {
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 512 : 64, 1.0);
    const auto f = random_function(g, 11);
    const auto w = random_weight(g, 12);
    const PrefixSums sums(f, w);
    for (const auto& b : enumerate(g, BallFamily::lattice())) {
      const auto region = Region::of(g, b);
      long double naive = 0.0L;
      for (auto c : region.cells(g.n())) naive += static_cast<long double>(f[c]) * w[c] * g.cell_volume();
      EXPECT_NEAR(sums.sum(region), static_cast<double>(naive), 1e-12 * (1.0 + std::abs(static_cast<double>(naive))));
    }
  }
}

TEST(Grid, DistributionBasics) {
  const Grid g(1, 64, 1.0);
  const auto w = random_weight(g, 5);
  GridFunction f(g);
  for (std::size_t i = 10; i < 30; ++i) f[i] = 2.0;
  Region e_region = Region::whole(g);
  double we = 0.0;
  for (std::size_t i = 10; i < 30; ++i) we += w[i] * g.h();
  EXPECT_NEAR(distribution(f, w, e_region, 1.0), we, 1e-14);
  EXPECT_EQ(distribution(f, w, e_region, 2.0), 0.0);
  EXPECT_EQ(distribution(f, w, e_region, 5.0), 0.0);
}

TEST(GridProperty, DistributionMatchesSortOracle) {
  const Grid g(1, 256, 1.0);
  const auto f = random_function(g, 21);
  const auto w = random_weight(g, 22);
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(f[a]) < std::abs(f[b]); });
  std::vector<double> suffix(order.size() + 1, 0.0);
  for (std::size_t k = order.size(); k-- > 0;) suffix[k] = suffix[k + 1] + w[order[k]] * g.h();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> level(0.0, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  std::vector<double> ts;
  for (int k = 0; k < 100; ++k) ts.push_back(level(rng));
  std::sort(ts.begin(), ts.end());
  for (double t : ts) {
    const auto first = std::upper_bound(order.begin(), order.end(), t, [&](double v, std::size_t i) { return v < std::abs(f[i]); });
    const double want = suffix[static_cast<std::size_t>(first - order.begin())];
    const double got = distribution(f, w, Region::whole(g), t);
    EXPECT_NEAR(got, want, 1e-12);
    EXPECT_LE(got, prev);
    prev = got;
  }
}

TEST(Grid, DilateSnapsUp) {
  const Grid g(1, 64, 1.0);
  const Ball b = centered_ball(g, 32, 0);
  const auto same = dilate(g, b, 1.0);
  EXPECT_EQ(same.ball, b);
  EXPECT_FALSE(same.snapped);
  const auto twice = dilate(g, b, 2.0);
  EXPECT_NEAR(twice.ball.radius(g), 2 * g.h(), 1e-15);
  const auto odd = dilate(g, b, 3.0);
  EXPECT_NEAR(odd.ball.radius(g), 4 * g.h(), 1e-15);
  EXPECT_TRUE(odd.snapped);
  const auto capped = dilate(g, centered_ball(g, 32, g.max_level()), 8.0);
  EXPECT_LE(capped.ball.radius(g), g.half_extent() + 1e-15);
}

TEST(Grid, GridMismatchIsReported) {
  const Grid a(1, 16, 1.0), b(1, 32, 1.0);
  EXPECT_THROW(integrate(GridFunction(a, 1.0), Weight::unit(b), Region::whole(a)), GridMismatch);
  EXPECT_THROW(Weight(GridFunction(a, 0.0)), Error);
}

TEST(Grid, WindowsFamilyEnumeratesAllWindows) {
  const Grid g(1, 16, 1.0);
  EXPECT_EQ(enumerate(g, BallFamily::windows()).size(), 16u * 17u / 2u);
  const Grid p(1, 16, 1.0, Boundary::Periodic);
  EXPECT_EQ(enumerate(p, BallFamily::windows()).size(), 16u * 16u);
}

TEST(Grid, CsvAndBinaryRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path();
  for (int dim : {1, 2}) {
    const Grid g(dim, 16, 1.0);
    const auto f = random_function(g, 31);
    const auto csv = (dir / ("omlab_grid_" + std::to_string(dim) + ".csv")).string();
    const auto bin = (dir / ("omlab_grid_" + std::to_string(dim) + ".bin")).string();
    write_grid_function_csv(f, csv);
    write_grid_function_binary(f, bin);
    const auto a = read_grid_function(csv);
    const auto b = read_grid_function(bin, 1.0);
    ASSERT_EQ(a.grid().n(), g.n());
    ASSERT_EQ(a.grid().dim(), dim);
    EXPECT_NEAR(a.grid().half_extent(), 1.0, 1e-12);
    ASSERT_EQ(b.grid(), g);
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_NEAR(a[i], f[i], 1e-15);
      EXPECT_EQ(b[i], f[i]);
    }
  }
  EXPECT_THROW(read_grid_function("/nonexistent/omlab.csv"), IoError);
}
