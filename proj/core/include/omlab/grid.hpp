#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace omlab {

enum class Boundary { Truncate, Periodic };

std::string to_string(Boundary b);
Boundary parse_boundary(std::string_view text);

// Cell-centered grid on [−L, L]^dim with N cells per axis.
class Grid {
 public:
  Grid(int dim, int n, double half_extent, Boundary boundary = Boundary::Truncate);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] double half_extent() const { return half_extent_; }
  [[nodiscard]] Boundary boundary() const { return boundary_; }
  [[nodiscard]] double h() const { return 2.0 * half_extent_ / n_; }
  [[nodiscard]] double cell_volume() const { return dim_ == 1 ? h() : h() * h(); }
  [[nodiscard]] std::size_t size() const {
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }
  // Coordinate of cell i along an axis.
  [[nodiscard]] double coord(int i) const { return -half_extent_ + (i + 0.5) * h(); }
  [[nodiscard]] std::array<double, 2> point(std::size_t flat) const;
  // Largest j with h·2^j ≤ L.
  [[nodiscard]] int max_level() const;
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  int n_;
  double half_extent_;
  Boundary boundary_;
};

// Open ball in half-cell units: centre −L + center2·h/2, radius radius2·h/2.
// Cell i lies inside iff |2i+1 − center2| < radius2 (per axis, Euclidean in 2D).
struct Ball {
  std::array<std::int64_t, 2> center2{1, 1};
  std::int64_t radius2 = 2;

  [[nodiscard]] double radius(const Grid& g) const { return 0.5 * static_cast<double>(radius2) * g.h(); }
  friend bool operator==(const Ball&, const Ball&) = default;
};

// Ball of radius h·2^level centred on a cell.
Ball centered_ball(const Grid& g, std::size_t flat, int level);
// 1D window of `length` cells starting at cell `start`.
Ball window(std::int64_t start, std::int64_t length);
[[nodiscard]] std::string describe(const Grid& g, const Ball& b);

struct DilateResult {
  Ball ball;
  double requested_radius;
  bool snapped;
};
// Same centre, radius min(k·r, L) rounded up to h·2^j.
DilateResult dilate(const Grid& g, const Ball& b, double k);

// Cells [lo, hi) of one row.
struct RowSpan {
  int row;
  int lo;
  int hi;
};

// A set of cells stored as disjoint row spans.
class Region {
 public:
  static Region whole(const Grid& g);
  static Region of(const Grid& g, const Ball& b);

  [[nodiscard]] std::span<const RowSpan> spans() const { return spans_; }
  [[nodiscard]] std::size_t cell_count() const;
  [[nodiscard]] bool contains(int n, std::size_t flat) const;
  // Flat cell indices in row-major order.
  [[nodiscard]] std::vector<std::size_t> cells(int n) const;

 private:
  std::vector<RowSpan> spans_;
};

class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);
  explicit GridFunction(Grid grid, double fill = 0.0);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

 private:
  Grid grid_;
  std::vector<double> values_;
};

// A grid function with strictly positive values.
class Weight {
 public:
  explicit Weight(GridFunction values);
  static Weight unit(const Grid& g);

  [[nodiscard]] const Grid& grid() const { return values_.grid(); }
  [[nodiscard]] const GridFunction& function() const { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_.values(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

 private:
  GridFunction values_;
  std::string label_ = "custom";
};

void require_same_grid(const Grid& a, const Grid& b, std::string_view what);

// Row prefix sums of values·cell volume in long double; ball sums in O(rows).
class PrefixSums {
 public:
  explicit PrefixSums(const GridFunction& f);
  PrefixSums(const GridFunction& f, const Weight& w);

  [[nodiscard]] double sum(const Region& region) const;
  [[nodiscard]] double total() const;

 private:
  void build(const Grid& g, std::span<const double> fw);
  int n_ = 0;
  int rows_ = 0;
  std::vector<long double> prefix_;
};

// Σ_{x∈region} f(x)w(x)h^n
[[nodiscard]] double integrate(const GridFunction& f, const Weight& w, const Region& region);
// w(region)
[[nodiscard]] double measure(const Weight& w, const Region& region);
// w({x ∈ region : |f(x)| > t})
[[nodiscard]] double distribution(const GridFunction& f, const Weight& w, const Region& region, double t);

// Balls over which Morrey-type suprema and A_p constants are taken.
struct BallFamily {
  enum class Kind { Lattice, Dense, Explicit, Windows };
  Kind kind = Kind::Lattice;
  // radii h·2^j for min_level ≤ j ≤ max_level (−1: the grid's max level)
  int min_level = 0;
  int max_level = -1;
  std::vector<Ball> balls;

  static BallFamily lattice(int min_level = 0, int max_level = -1);
  static BallFamily dense(int min_level = 0, int max_level = -1);
  static BallFamily single(Ball b);
  // 1D: every window of 1..N cells. 2D: cell-centred disks with radius2 ∈ {1, 2, 4, …}.
  static BallFamily windows(int max_level = -1);
  [[nodiscard]] std::string id() const;
};

// Lattice: centres every max(1, 2^{j−1}) cells at level j. Dense: every cell.
// Windows in 1D lists N(N+1)/2 balls (periodic: N² ); meant for small grids and oracles.
[[nodiscard]] std::vector<Ball> enumerate(const Grid& g, const BallFamily& family);

GridFunction read_grid_function_csv(const std::string& path, Boundary boundary = Boundary::Truncate);
void write_grid_function_csv(const GridFunction& f, const std::string& path);
GridFunction read_grid_function_binary(const std::string& path, double half_extent,
                                       Boundary boundary = Boundary::Truncate);
void write_grid_function_binary(const GridFunction& f, const std::string& path);
// .bin → binary (half_extent needed), anything else → CSV.
GridFunction read_grid_function(const std::string& path, double half_extent = 1.0,
                                Boundary boundary = Boundary::Truncate);

}  // namespace omlab
