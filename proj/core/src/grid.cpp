#include "omlab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "omlab/error.hpp"
#include "omlab/io.hpp"

namespace omlab {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// Cells i with |2i+1 − c2| ≤ m, as [lo, hi] inclusive.
std::pair<std::int64_t, std::int64_t> axis_range_closed(std::int64_t c2, std::int64_t m) {
  return {ceil_div(c2 - m - 1, 2), floor_div(c2 + m - 1, 2)};
}

// Largest m ≥ 0 with m² < r, or −1 if r ≤ 0.
std::int64_t open_half_width(std::int64_t r) {
  if (r <= 0) return -1;
  auto m = static_cast<std::int64_t>(std::sqrt(static_cast<double>(r - 1)));
  while (m * m >= r) --m;
  while ((m + 1) * (m + 1) < r) ++m;
  return m;
}

void push_row(std::vector<RowSpan>& out, int n, Boundary boundary, int row, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) return;
  if (boundary == Boundary::Truncate) {
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, n - 1);
    if (hi >= lo) out.push_back({row, static_cast<int>(lo), static_cast<int>(hi + 1)});
    return;
  }
  if (hi - lo + 1 >= n) {
    out.push_back({row, 0, n});
    return;
  }
  const auto a = static_cast<int>(((lo % n) + n) % n);
  const auto b = static_cast<int>(((hi % n) + n) % n);
  if (a <= b) {
    out.push_back({row, a, b + 1});
  } else {
    out.push_back({row, 0, b + 1});
    out.push_back({row, a, n});
  }
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::Truncate ? "truncate" : "periodic"; }

Boundary parse_boundary(std::string_view text) {
  if (text == "truncate") return Boundary::Truncate;
  if (text == "periodic") return Boundary::Periodic;
  throw ParseError("unknown boundary mode '" + std::string(text) + "'");
}

Grid::Grid(int dim, int n, double half_extent, Boundary boundary)
    : dim_(dim), n_(n), half_extent_(half_extent), boundary_(boundary) {
  if (dim != 1 && dim != 2) throw Error("grid: dim must be 1 or 2");
  if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n))) throw Error("grid: N must be a power of two >= 8");
  if (!(half_extent > 0.0)) throw Error("grid: L must be positive");
}

std::array<double, 2> Grid::point(std::size_t flat) const {
  if (dim_ == 1) return {coord(static_cast<int>(flat)), 0.0};
  const auto n = static_cast<std::size_t>(n_);
  return {coord(static_cast<int>(flat % n)), coord(static_cast<int>(flat / n))};
}

int Grid::max_level() const { return std::countr_zero(static_cast<unsigned>(n_)) - 1; }

std::string Grid::describe() const {
  std::ostringstream ss;
  ss << dim_ << "D N=" << n_ << " L=" << half_extent_ << " " << to_string(boundary_);
  return ss.str();
}

Ball centered_ball(const Grid& g, std::size_t flat, int level) {
  Ball b;
  const auto n = static_cast<std::size_t>(g.n());
  if (g.dim() == 1) {
    b.center2 = {2 * static_cast<std::int64_t>(flat) + 1, 1};
  } else {
    b.center2 = {2 * static_cast<std::int64_t>(flat % n) + 1, 2 * static_cast<std::int64_t>(flat / n) + 1};
  }
  b.radius2 = std::int64_t{2} << level;
  return b;
}

Ball window(std::int64_t start, std::int64_t length) {
  Ball b;
  b.center2 = {2 * start + length, 1};
  b.radius2 = length;
  return b;
}

std::string describe(const Grid& g, const Ball& b) {
  std::ostringstream ss;
  ss.precision(10);
  const double half = 0.5 * g.h();
  ss << "B(";
  ss << -g.half_extent() + static_cast<double>(b.center2[0]) * half;
  if (g.dim() == 2) ss << "," << -g.half_extent() + static_cast<double>(b.center2[1]) * half;
  ss << ";" << b.radius(g) << ")";
  return ss.str();
}

DilateResult dilate(const Grid& g, const Ball& b, double k) {
  if (!(k >= 1.0)) throw Error("dilate: k must be >= 1");
  const double target = std::min(k * b.radius(g), g.half_extent());
  DilateResult out{b, k * b.radius(g), false};
  if (k == 1.0) return out;
  std::int64_t r2 = 2;
  while (0.5 * static_cast<double>(r2) * g.h() < target * (1 - 1e-12)) r2 *= 2;
  out.ball.radius2 = std::max(r2, b.radius2);
  out.snapped = std::abs(out.ball.radius(g) - k * b.radius(g)) > 1e-12 * out.ball.radius(g);
  return out;
}

Region Region::whole(const Grid& g) {
  Region r;
  const int rows = g.dim() == 1 ? 1 : g.n();
  for (int row = 0; row < rows; ++row) r.spans_.push_back({row, 0, g.n()});
  return r;
}

Region Region::of(const Grid& g, const Ball& b) {
  Region r;
  const int n = g.n();
  if (g.dim() == 1) {
    const auto [lo, hi] = axis_range_closed(b.center2[0], b.radius2 - 1);
    push_row(r.spans_, n, g.boundary(), 0, lo, hi);
    return r;
  }
  const auto [jlo, jhi] = axis_range_closed(b.center2[1], b.radius2 - 1);
  const std::int64_t rr = b.radius2 * b.radius2;
  if (g.boundary() == Boundary::Truncate) {
    for (std::int64_t j = std::max<std::int64_t>(jlo, 0); j <= std::min<std::int64_t>(jhi, n - 1); ++j) {
      const std::int64_t dy = 2 * j + 1 - b.center2[1];
      const std::int64_t m = open_half_width(rr - dy * dy);
      if (m < 0) continue;
      const auto [ilo, ihi] = axis_range_closed(b.center2[0], m);
      push_row(r.spans_, n, g.boundary(), static_cast<int>(j), ilo, ihi);
    }
    return r;
  }
  // Periodic: rows may repeat modulo N, keep the widest (they are nested).
  std::map<int, std::pair<std::int64_t, std::int64_t>> widest;
  for (std::int64_t j = jlo; j <= jhi; ++j) {
    const std::int64_t dy = 2 * j + 1 - b.center2[1];
    const std::int64_t m = open_half_width(rr - dy * dy);
    if (m < 0) continue;
    const auto range = axis_range_closed(b.center2[0], m);
    const int row = static_cast<int>(((j % n) + n) % n);
    auto [it, inserted] = widest.try_emplace(row, range);
    if (!inserted && range.second - range.first > it->second.second - it->second.first) it->second = range;
  }
  for (const auto& [row, range] : widest) push_row(r.spans_, n, g.boundary(), row, range.first, range.second);
  return r;
}

std::size_t Region::cell_count() const {
  std::size_t count = 0;
  for (const auto& s : spans_) count += static_cast<std::size_t>(s.hi - s.lo);
  return count;
}

bool Region::contains(int n, std::size_t flat) const {
  const auto row = static_cast<int>(flat / static_cast<std::size_t>(n));
  const auto col = static_cast<int>(flat % static_cast<std::size_t>(n));
  return std::any_of(spans_.begin(), spans_.end(),
                     [&](const RowSpan& s) { return s.row == row && col >= s.lo && col < s.hi; });
}

std::vector<std::size_t> Region::cells(int n) const {
  std::vector<std::size_t> out;
  out.reserve(cell_count());
  for (const auto& s : spans_)
    for (int i = s.lo; i < s.hi; ++i) out.push_back(static_cast<std::size_t>(s.row) * n + i);
  std::sort(out.begin(), out.end());
  return out;
}

GridFunction::GridFunction(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridMismatch("grid function: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error("grid function: values must be finite");
}

GridFunction::GridFunction(Grid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Weight::Weight(GridFunction values) : values_(std::move(values)) {
  for (double v : values_.values())
    if (!(v > 0.0)) throw Error("weight: values must be positive");
}

Weight Weight::unit(const Grid& g) {
  Weight w(GridFunction(g, 1.0));
  w.set_label("one");
  return w;
}

void require_same_grid(const Grid& a, const Grid& b, std::string_view what) {
  if (!(a == b))
    throw GridMismatch(std::string(what) + ": grids differ (" + a.describe() + " vs " + b.describe() + ")");
}

PrefixSums::PrefixSums(const GridFunction& f) { build(f.grid(), f.values()); }

PrefixSums::PrefixSums(const GridFunction& f, const Weight& w) {
  require_same_grid(f.grid(), w.grid(), "prefix sums");
  std::vector<double> fw(f.size());
  for (std::size_t i = 0; i < fw.size(); ++i) fw[i] = f[i] * w[i];
  build(f.grid(), fw);
}

void PrefixSums::build(const Grid& g, std::span<const double> fw) {
  n_ = g.n();
  rows_ = g.dim() == 1 ? 1 : g.n();
  const long double vol = g.cell_volume();
  prefix_.assign(static_cast<std::size_t>(rows_) * (n_ + 1), 0.0L);
  for (int row = 0; row < rows_; ++row) {
    long double* p = &prefix_[static_cast<std::size_t>(row) * (n_ + 1)];
    const double* v = &fw[static_cast<std::size_t>(row) * n_];
    for (int i = 0; i < n_; ++i) p[i + 1] = p[i] + static_cast<long double>(v[i]) * vol;
  }
}

double PrefixSums::sum(const Region& region) const {
  long double s = 0.0L;
  for (const auto& span : region.spans()) {
    const long double* p = &prefix_[static_cast<std::size_t>(span.row) * (n_ + 1)];
    s += p[span.hi] - p[span.lo];
  }
  return static_cast<double>(s);
}

double PrefixSums::total() const {
  long double s = 0.0L;
  for (int row = 0; row < rows_; ++row) s += prefix_[static_cast<std::size_t>(row) * (n_ + 1) + n_];
  return static_cast<double>(s);
}

double integrate(const GridFunction& f, const Weight& w, const Region& region) {
  require_same_grid(f.grid(), w.grid(), "integrate");
  const int n = f.grid().n();
  long double s = 0.0L;
  for (const auto& span : region.spans()) {
    const std::size_t base = static_cast<std::size_t>(span.row) * n;
    for (int i = span.lo; i < span.hi; ++i) s += static_cast<long double>(f[base + i]) * w[base + i];
  }
  return static_cast<double>(s * f.grid().cell_volume());
}

double measure(const Weight& w, const Region& region) {
  const int n = w.grid().n();
  long double s = 0.0L;
  for (const auto& span : region.spans()) {
    const std::size_t base = static_cast<std::size_t>(span.row) * n;
    for (int i = span.lo; i < span.hi; ++i) s += w[base + i];
  }
  return static_cast<double>(s * w.grid().cell_volume());
}

double distribution(const GridFunction& f, const Weight& w, const Region& region, double t) {
  require_same_grid(f.grid(), w.grid(), "distribution");
  if (!(t >= 0.0)) throw Error("distribution: t must be nonnegative");
  const int n = f.grid().n();
  long double s = 0.0L;
  for (const auto& span : region.spans()) {
    const std::size_t base = static_cast<std::size_t>(span.row) * n;
    for (int i = span.lo; i < span.hi; ++i)
      if (std::abs(f[base + i]) > t) s += w[base + i];
  }
  return static_cast<double>(s * f.grid().cell_volume());
}

BallFamily BallFamily::lattice(int min_level, int max_level) {
  BallFamily f;
  f.kind = Kind::Lattice;
  f.min_level = min_level;
  f.max_level = max_level;
  return f;
}

BallFamily BallFamily::dense(int min_level, int max_level) {
  BallFamily f = lattice(min_level, max_level);
  f.kind = Kind::Dense;
  return f;
}

BallFamily BallFamily::single(Ball b) {
  BallFamily f;
  f.kind = Kind::Explicit;
  f.balls.push_back(b);
  return f;
}

BallFamily BallFamily::windows(int max_level) {
  BallFamily f = lattice(0, max_level);
  f.kind = Kind::Windows;
  return f;
}

std::string BallFamily::id() const {
  switch (kind) {
    case Kind::Lattice:
      return "lattice[" + std::to_string(min_level) + "," + std::to_string(max_level) + "]";
    case Kind::Dense:
      return "dense[" + std::to_string(min_level) + "," + std::to_string(max_level) + "]";
    case Kind::Explicit:
      return "explicit[" + std::to_string(balls.size()) + "]";
    case Kind::Windows:
      return "windows[" + std::to_string(max_level) + "]";
  }
  return {};
}

std::vector<Ball> enumerate(const Grid& g, const BallFamily& family) {
  if (family.kind == BallFamily::Kind::Explicit) return family.balls;
  const int top = family.max_level < 0 ? g.max_level() : std::min(family.max_level, g.max_level());
  std::vector<Ball> out;
  const int n = g.n();
  if (family.kind == BallFamily::Kind::Windows) {
    if (g.dim() == 1) {
      const bool periodic = g.boundary() == Boundary::Periodic;
      for (int len = 1; len <= n; ++len)
        for (int s = 0; s + (periodic ? 0 : len) <= (periodic ? n - 1 : n); ++s) out.push_back(window(s, len));
      return out;
    }
    for (std::int64_t r2 = 1; r2 <= (std::int64_t{2} << top); r2 *= 2)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out.push_back(Ball{{2 * i + 1, 2 * j + 1}, r2});
    return out;
  }
  for (int level = std::max(family.min_level, 0); level <= top; ++level) {
    const int stride = family.kind == BallFamily::Kind::Dense ? 1 : std::max(1, (1 << level) / 2);
    const int offset = stride / 2;
    if (g.dim() == 1) {
      for (int i = offset; i < n; i += stride) out.push_back(centered_ball(g, static_cast<std::size_t>(i), level));
    } else {
      for (int j = offset; j < n; j += stride)
        for (int i = offset; i < n; i += stride)
          out.push_back(centered_ball(g, static_cast<std::size_t>(j) * n + i, level));
    }
  }
  return out;
}

GridFunction read_grid_function_csv(const std::string& path, Boundary boundary) {
  std::vector<std::string> header;
  const auto rows = io::read_numeric_csv(path, &header);
  if (rows.empty()) throw ParseError("'" + path + "': no data rows");
  if (rows.front().size() == 2) {
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw ParseError("'" + path + "': need at least two rows");
    const double h = rows[1][0] - rows[0][0];
    Grid g(1, n, 0.5 * n * h, boundary);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) {
      if (r.size() != 2) throw ParseError("'" + path + "': 1D rows are x,value");
      v.push_back(r[1]);
    }
    return GridFunction(g, std::move(v));
  }
  // 2D: header "y,x0,x1,..." then "y_j,v_0j,v_1j,..."
  const int n = static_cast<int>(rows.size());
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n) * n);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n + 1) throw ParseError("'" + path + "': 2D rows need N+1 columns");
    v.insert(v.end(), r.begin() + 1, r.end());
  }
  const double h = n > 1 ? rows[1][0] - rows[0][0] : 1.0;
  return GridFunction(Grid(2, n, 0.5 * n * h, boundary), std::move(v));
}

void write_grid_function_csv(const GridFunction& f, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  const Grid& g = f.grid();
  if (g.dim() == 1) {
    for (int i = 0; i < g.n(); ++i) out << g.coord(i) << "," << f[static_cast<std::size_t>(i)] << "\n";
  } else {
    out << "y";
    for (int i = 0; i < g.n(); ++i) out << "," << g.coord(i);
    out << "\n";
    for (int j = 0; j < g.n(); ++j) {
      out << g.coord(j);
      for (int i = 0; i < g.n(); ++i) out << "," << f[static_cast<std::size_t>(j) * g.n() + i];
      out << "\n";
    }
  }
  io::write_text(path, out.str());
}

namespace {

void put_u32(std::string& buf, std::uint32_t x) {
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<char>((x >> (8 * k)) & 0xffu));
}

std::uint32_t get_u32(const std::string& buf, std::size_t at) {
  std::uint32_t x = 0;
  for (int k = 0; k < 4; ++k) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + k])) << (8 * k);
  return x;
}

}  // namespace

void write_grid_function_binary(const GridFunction& f, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "binary grid IO assumes little-endian doubles");
  std::string buf;
  put_u32(buf, static_cast<std::uint32_t>(f.grid().dim()));
  put_u32(buf, static_cast<std::uint32_t>(f.grid().n()));
  const auto values = f.values();
  const auto* bytes = reinterpret_cast<const char*>(values.data());
  buf.append(bytes, values.size() * sizeof(double));
  io::write_text(path, buf);
}

GridFunction read_grid_function_binary(const std::string& path, double half_extent, Boundary boundary) {
  const std::string buf = io::read_text(path);
  if (buf.size() < 8) throw ParseError("'" + path + "': truncated header");
  const auto dim = static_cast<int>(get_u32(buf, 0));
  const auto n = static_cast<int>(get_u32(buf, 4));
  Grid g(dim, n, half_extent, boundary);
  if (buf.size() != 8 + g.size() * sizeof(double)) throw ParseError("'" + path + "': size does not match header");
  std::vector<double> v(g.size());
  std::memcpy(v.data(), buf.data() + 8, v.size() * sizeof(double));
  return GridFunction(g, std::move(v));
}

GridFunction read_grid_function(const std::string& path, double half_extent, Boundary boundary) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".bin")
    return read_grid_function_binary(path, half_extent, boundary);
  return read_grid_function_csv(path, boundary);
}

}  // namespace omlab
