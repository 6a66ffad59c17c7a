#include "omlab/operators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <deque>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "omlab/error.hpp"
#include "omlab/expr.hpp"
#include "omlab/io.hpp"

namespace omlab {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int wrap(std::int64_t i, int n) { return static_cast<int>(((i % n) + n) % n); }

// Row prefix sums of a numerator and a denominator; averages are their ratio.
struct AverageTables {
  int n = 0;
  int rows = 0;
  std::vector<long double> num;
  std::vector<long double> den;

  AverageTables(const GridFunction& f, const Weight* w) : n(f.grid().n()), rows(f.grid().dim() == 1 ? 1 : n) {
    num.assign(static_cast<std::size_t>(rows) * (n + 1), 0.0L);
    den.assign(num.size(), 0.0L);
    for (int r = 0; r < rows; ++r) {
      const std::size_t base = static_cast<std::size_t>(r) * n;
      long double* pn = &num[static_cast<std::size_t>(r) * (n + 1)];
      long double* pd = &den[static_cast<std::size_t>(r) * (n + 1)];
      for (int i = 0; i < n; ++i) {
        const long double wi = w ? (*w)[base + i] : 1.0L;
        pn[i + 1] = pn[i] + std::abs(static_cast<long double>(f[base + i])) * wi;
        pd[i + 1] = pd[i] + wi;
      }
    }
  }

  // sums over cells [lo, hi) of a row, lo ≤ hi ≤ 2n with wrap past n
  [[nodiscard]] std::pair<long double, long double> row_sum(int row, int lo, int hi) const {
    const std::size_t base = static_cast<std::size_t>(row) * (n + 1);
    if (hi <= n) return {num[base + hi] - num[base + lo], den[base + hi] - den[base + lo]};
    const auto a = row_sum(row, lo, n);
    const auto b = row_sum(row, 0, hi - n);
    return {a.first + b.first, a.second + b.second};
  }

  [[nodiscard]] double average(const Region& region) const {
    long double sn = 0.0L, sd = 0.0L;
    for (const auto& s : region.spans()) {
      const auto [a, b] = row_sum(s.row, s.lo, s.hi);
      sn += a;
      sd += b;
    }
    return static_cast<double>(sn / sd);
  }
};

// Cells of a 1D ball as an unwrapped interval [lo, hi); periodic intervals start in [0, n).
std::pair<int, int> interval_1d(const Grid& g, const Ball& b) {
  const int n = g.n();
  std::int64_t lo = -floor_div(-(b.center2[0] - b.radius2), 2);
  std::int64_t hi = floor_div(b.center2[0] + b.radius2 - 2, 2) + 1;
  if (g.boundary() == Boundary::Truncate) return {static_cast<int>(std::max<std::int64_t>(lo, 0)),
                                                   static_cast<int>(std::min<std::int64_t>(hi, n))};
  if (hi - lo >= n) return {0, 2 * n};
  const int start = wrap(lo, n);
  return {start, static_cast<int>(start + (hi - lo))};
}

void for_each_group(const Grid& g, const BallFamily& family, const std::function<void(std::vector<Ball>&)>& fn) {
  if (family.kind == BallFamily::Kind::Windows && g.dim() == 1) {
    const int n = g.n();
    const bool periodic = g.boundary() == Boundary::Periodic;
    std::vector<Ball> group;
    for (int len = 1; len <= n; ++len) {
      group.clear();
      const int last = periodic ? n - 1 : n - len;
      for (int s = 0; s <= last; ++s) group.push_back(window(s, len));
      fn(group);
    }
    return;
  }
  auto balls = enumerate(g, family);
  if (balls.empty()) throw Error("maximal: empty ball family");
  std::map<std::int64_t, std::vector<Ball>> groups;
  for (const auto& b : balls) groups[b.radius2].push_back(b);
  for (auto& [r2, group] : groups) fn(group);
}

void maximal_1d(const Grid& g, const AverageTables& t, std::vector<Ball>& group, bool centered,
                std::vector<double>& out) {
  const int n = g.n();
  struct Item {
    int lo, hi;
    double avg;
  };
  std::vector<Item> items;
  items.reserve(group.size());
  for (const auto& b : group) {
    const auto [lo, hi] = interval_1d(g, b);
    if (hi <= lo) {
      items.push_back({lo, lo, -kInf});
      continue;
    }
    const auto [sn, sd] = t.row_sum(0, lo, std::min(hi, lo + n));
    items.push_back({lo, hi, static_cast<double>(sn / sd)});
  }
  if (centered) {
    for (std::size_t k = 0; k < group.size(); ++k) {
      const auto c2 = group[k].center2[0];
      if (c2 % 2 == 0) continue;
      const std::int64_t cell = (c2 - 1) / 2;
      if (g.boundary() == Boundary::Truncate && (cell < 0 || cell >= n)) continue;
      const int x = wrap(cell, n);
      out[x] = std::max(out[x], items[k].avg);
    }
    return;
  }
  auto by_lo = [](const Item& a, const Item& b) { return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi; };
  if (!std::is_sorted(items.begin(), items.end(), by_lo)) std::sort(items.begin(), items.end(), by_lo);
  const int span = g.boundary() == Boundary::Periodic ? 2 * n : n;
  std::deque<std::size_t> dq;
  std::size_t next = 0;
  for (int x = 0; x < span; ++x) {
    while (next < items.size() && items[next].lo <= x) {
      while (!dq.empty() && items[dq.back()].avg <= items[next].avg && items[dq.back()].hi <= items[next].hi)
        dq.pop_back();
      dq.push_back(next++);
    }
    while (!dq.empty() && items[dq.front()].hi <= x) dq.pop_front();
    if (!dq.empty()) {
      auto& slot = out[x % n];
      slot = std::max(slot, items[dq.front()].avg);
    }
  }
}

// max of a over columns [e − len + 1, e] of each row (truncate: clipped, periodic: wrapped)
std::vector<double> sliding_row_max(std::span<const double> a, int n, int len, bool periodic, int e0, int e1) {
  const int width = e1 - e0;
  std::vector<double> out(static_cast<std::size_t>(n) * width, -kInf);
  for (int r = 0; r < n; ++r) {
    const double* row = &a[static_cast<std::size_t>(r) * n];
    double* dst = &out[static_cast<std::size_t>(r) * width];
    if (periodic && len >= n) {
      const double m = *std::max_element(row, row + n);
      std::fill(dst, dst + width, m);
      continue;
    }
    std::deque<int> dq;
    auto value = [&](int k) { return row[periodic ? wrap(k, n) : k]; };
    int next = e0 - len + 1;
    for (int e = e0; e < e1; ++e) {
      for (; next <= e; ++next) {
        if (!periodic && (next < 0 || next >= n)) continue;
        while (!dq.empty() && value(dq.back()) <= value(next)) dq.pop_back();
        dq.push_back(next);
      }
      while (!dq.empty() && dq.front() < e - len + 1) dq.pop_front();
      if (!dq.empty()) dst[e - e0] = value(dq.front());
    }
  }
  return out;
}

bool dense_cell_centred(const Grid& g, const std::vector<Ball>& group) {
  const auto n = static_cast<std::size_t>(g.n());
  if (group.size() != n * n) return false;
  std::vector<char> seen(n * n, 0);
  for (const auto& b : group) {
    if (b.center2[0] % 2 == 0 || b.center2[1] % 2 == 0) return false;
    const auto i = (b.center2[0] - 1) / 2, j = (b.center2[1] - 1) / 2;
    if (i < 0 || j < 0 || i >= g.n() || j >= g.n()) return false;
    seen[static_cast<std::size_t>(j) * n + i] = 1;
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

void maximal_2d(const Grid& g, const AverageTables& t, std::vector<Ball>& group, bool centered,
                std::vector<double>& out) {
  const int n = g.n();
  const bool periodic = g.boundary() == Boundary::Periodic;
  std::vector<double> avg(group.size());
  for (std::size_t k = 0; k < group.size(); ++k) avg[k] = t.average(Region::of(g, group[k]));
  if (centered) {
    for (std::size_t k = 0; k < group.size(); ++k) {
      const auto& c = group[k].center2;
      if (c[0] % 2 == 0 || c[1] % 2 == 0) continue;
      const auto i = (c[0] - 1) / 2, j = (c[1] - 1) / 2;
      if (!periodic && (i < 0 || j < 0 || i >= n || j >= n)) continue;
      auto& slot = out[static_cast<std::size_t>(wrap(j, n)) * n + wrap(i, n)];
      slot = std::max(slot, avg[k]);
    }
    return;
  }
  if (!dense_cell_centred(g, group)) {
    for (std::size_t k = 0; k < group.size(); ++k) {
      const Region region = Region::of(g, group[k]);
      for (const auto& s : region.spans())
        for (int i = s.lo; i < s.hi; ++i) {
          auto& slot = out[static_cast<std::size_t>(s.row) * n + i];
          slot = std::max(slot, avg[k]);
        }
    }
    return;
  }
  // Dense cell-centred disks: Mf(x) = max of the centre averages over the reflected footprint.
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (std::size_t k = 0; k < group.size(); ++k) {
    const auto i = (group[k].center2[0] - 1) / 2, j = (group[k].center2[1] - 1) / 2;
    a[static_cast<std::size_t>(j) * n + i] = avg[k];
  }
  const std::int64_t r2 = group.front().radius2;
  struct Span {
    int oy, lo, hi;
  };
  std::vector<Span> footprint;
  if (periodic) {
    const Region r = Region::of(g, Ball{{1, 1}, r2});
    for (const auto& s : r.spans()) footprint.push_back({s.row, s.lo, s.hi});
  } else {
    int m = 8;
    while (m < r2 + 4) m *= 2;
    const Grid big(2, m, 1.0, Boundary::Truncate);
    const Region r = Region::of(big, Ball{{m + 1, m + 1}, r2});
    for (const auto& s : r.spans()) footprint.push_back({s.row - m / 2, s.lo - m / 2, s.hi - m / 2});
  }
  std::map<int, std::vector<Span>> by_len;
  for (const auto& s : footprint) by_len[s.hi - s.lo].push_back(s);
  for (const auto& [len, spans] : by_len) {
    // x ∈ B(c) ⇔ offset x − c in a footprint span ⇔ c ∈ [x − hi + 1, x − lo]
    int e0 = 0, e1 = n;
    if (!periodic)
      for (const auto& s : spans) {
        e0 = std::min(e0, -s.lo);
        e1 = std::max(e1, n - s.lo);
      }
    const auto table = sliding_row_max(a, n, len, periodic, e0, e1);
    const int width = e1 - e0;
    for (const auto& s : spans) {
      for (int y = 0; y < n; ++y) {
        int src = y - s.oy;
        if (periodic) {
          src = wrap(src, n);
        } else if (src < 0 || src >= n) {
          continue;
        }
        const double* row = &table[static_cast<std::size_t>(src) * width];
        double* dst = &out[static_cast<std::size_t>(y) * n];
        for (int x = 0; x < n; ++x) {
          const int e = periodic ? wrap(x - s.lo, n) : x - s.lo;
          dst[x] = std::max(dst[x], row[e - e0]);
        }
      }
    }
  }
}

double largest_radius(const Grid& g, const BallFamily& family) {
  if (family.kind == BallFamily::Kind::Windows && g.dim() == 1) return g.half_extent();
  double r = 0.0;
  for (const auto& b : enumerate(g, family)) r = std::max(r, b.radius(g));
  return r;
}

OperatorResult maximal_fast_impl(const GridFunction& f, const Weight* w, const BallFamily& family, bool centered) {
  const Grid& g = f.grid();
  if (w) require_same_grid(g, w->grid(), "weighted maximal");
  const AverageTables t(f, w);
  std::vector<double> out(f.size(), 0.0);
  for_each_group(g, family, [&](std::vector<Ball>& group) {
    if (g.dim() == 1) {
      maximal_1d(g, t, group, centered, out);
    } else {
      maximal_2d(g, t, group, centered, out);
    }
  });
  return {GridFunction(g, std::move(out)), OperatorMethod::PrefixFast, largest_radius(g, family)};
}

OperatorResult maximal_brute_impl(const GridFunction& f, const Weight* w, const BallFamily& family, bool centered) {
  const Grid& g = f.grid();
  if (w) require_same_grid(g, w->grid(), "weighted maximal");
  const int n = g.n();
  const auto balls = enumerate(g, family);
  if (balls.empty()) throw Error("maximal: empty ball family");
  std::vector<double> out(f.size(), 0.0);
  double radius = 0.0;
  for (const auto& b : balls) {
    radius = std::max(radius, b.radius(g));
    const auto cells = Region::of(g, b).cells(n);
    long double sn = 0.0L, sd = 0.0L;
    for (auto c : cells) {
      const long double wi = w ? (*w)[c] : 1.0L;
      sn += std::abs(static_cast<long double>(f[c])) * wi;
      sd += wi;
    }
    const double avg = static_cast<double>(sn / sd);
    if (centered) {
      bool odd = b.center2[0] % 2 != 0 && (g.dim() == 1 || b.center2[1] % 2 != 0);
      if (!odd) continue;
      const std::int64_t i = (b.center2[0] - 1) / 2;
      const std::int64_t j = g.dim() == 1 ? 0 : (b.center2[1] - 1) / 2;
      if (g.boundary() == Boundary::Truncate && (i < 0 || i >= n || j < 0 || j >= n)) continue;
      const std::size_t flat = static_cast<std::size_t>(wrap(j, n)) * (g.dim() == 1 ? 0 : n) + wrap(i, n);
      out[flat] = std::max(out[flat], avg);
      continue;
    }
    for (auto c : cells) out[c] = std::max(out[c], avg);
  }
  return {GridFunction(g, std::move(out)), OperatorMethod::ExactBruteforce, radius};
}

// Infix formulas for kernel files: + − * / ^, unary minus, calls, variables.
class Formula {
 public:
  Formula(std::string text, std::vector<std::string> vars) : text_(std::move(text)), vars_(std::move(vars)) {
    root_ = parse_sum();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + text_.substr(pos_, 1) + "'");
  }

  [[nodiscard]] double operator()(std::span<const double> values) const { return eval(*root_, values); }

 private:
  struct Node {
    char op = 0;  // '#' number, 'v' variable, 'f' call, else binary/unary operator
    double number = 0.0;
    std::size_t var = 0;
    std::string fn;
    std::vector<std::unique_ptr<Node>> args;
  };
  using Ptr = std::unique_ptr<Node>;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("kernel formula '" + text_ + "': " + what);
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  Ptr binary(char op, Ptr a, Ptr b) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->args.push_back(std::move(a));
    n->args.push_back(std::move(b));
    return n;
  }
  Ptr parse_sum() {
    Ptr left = parse_product();
    for (;;) {
      if (eat('+')) {
        left = binary('+', std::move(left), parse_product());
      } else if (eat('-')) {
        left = binary('-', std::move(left), parse_product());
      } else {
        return left;
      }
    }
  }
  Ptr parse_product() {
    Ptr left = parse_unary();
    for (;;) {
      if (eat('*')) {
        left = binary('*', std::move(left), parse_unary());
      } else if (eat('/')) {
        left = binary('/', std::move(left), parse_unary());
      } else {
        return left;
      }
    }
  }
  Ptr parse_unary() {
    if (eat('-')) {
      auto n = std::make_unique<Node>();
      n->op = 'n';
      n->args.push_back(parse_unary());
      return n;
    }
    Ptr base = parse_primary();
    if (eat('^')) return binary('^', std::move(base), parse_unary());
    return base;
  }
  Ptr parse_primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (eat('(')) {
      Ptr inner = parse_sum();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    const char c = text_[pos_];
    auto n = std::make_unique<Node>();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      n->op = '#';
      n->number = std::stod(text_.substr(pos_), &used);
      pos_ += used;
      return n;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
    const std::string word = text_.substr(pos_, end - pos_);
    pos_ = end;
    if (eat('(')) {
      n->op = 'f';
      n->fn = word;
      if (!eat(')')) {
        do n->args.push_back(parse_sum());
        while (eat(','));
        if (!eat(')')) fail("missing ')' after arguments of " + word);
      }
      static const std::map<std::string, std::size_t> arity{
          {"abs", 1}, {"sqrt", 1}, {"exp", 1}, {"log", 1}, {"sin", 1},  {"cos", 1},  {"tan", 1},
          {"cot", 1}, {"atan", 1}, {"sign", 1}, {"pow", 2}, {"min", 2}, {"max", 2}};
      const auto it = arity.find(word);
      if (it == arity.end()) fail("unknown function " + word);
      if (it->second != n->args.size()) fail(word + " takes " + std::to_string(it->second) + " arguments");
      return n;
    }
    if (word == "pi") {
      n->op = '#';
      n->number = std::numbers::pi;
      return n;
    }
    const auto v = std::find(vars_.begin(), vars_.end(), word);
    if (v == vars_.end()) fail("unknown variable " + word);
    n->op = 'v';
    n->var = static_cast<std::size_t>(v - vars_.begin());
    return n;
  }

  static double eval(const Node& n, std::span<const double> v) {
    switch (n.op) {
      case '#':
        return n.number;
      case 'v':
        return v[n.var];
      case 'n':
        return -eval(*n.args[0], v);
      case '+':
        return eval(*n.args[0], v) + eval(*n.args[1], v);
      case '-':
        return eval(*n.args[0], v) - eval(*n.args[1], v);
      case '*':
        return eval(*n.args[0], v) * eval(*n.args[1], v);
      case '/':
        return eval(*n.args[0], v) / eval(*n.args[1], v);
      case '^':
        return std::pow(eval(*n.args[0], v), eval(*n.args[1], v));
      default:
        break;
    }
    const double a = eval(*n.args[0], v);
    const double b = n.args.size() > 1 ? eval(*n.args[1], v) : 0.0;
    if (n.fn == "abs") return std::abs(a);
    if (n.fn == "sqrt") return std::sqrt(a);
    if (n.fn == "exp") return std::exp(a);
    if (n.fn == "log") return std::log(a);
    if (n.fn == "sin") return std::sin(a);
    if (n.fn == "cos") return std::cos(a);
    if (n.fn == "tan") return std::tan(a);
    if (n.fn == "cot") return 1.0 / std::tan(a);
    if (n.fn == "atan") return std::atan(a);
    if (n.fn == "sign") return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
    if (n.fn == "pow") return std::pow(a, b);
    if (n.fn == "min") return std::min(a, b);
    return std::max(a, b);
  }

  std::string text_;
  std::vector<std::string> vars_;
  std::size_t pos_ = 0;
  Ptr root_;
};

double distance(Point x, Point y, int dim) {
  const double dx = x[0] - y[0];
  const double dy = dim == 2 ? x[1] - y[1] : 0.0;
  return std::sqrt(dx * dx + dy * dy);
}

// K(x, y) on the grid offsets x − y = (dx, dy)·h, index [(dy + n − 1)(2n − 1) + dx + n − 1]; 0 on the diagonal.
std::vector<double> offset_table(const Grid& g, const KernelSpec& K) {
  const int n = g.n();
  const int w = 2 * n - 1;
  const int rows = g.dim() == 1 ? 1 : w;
  std::vector<double> t(static_cast<std::size_t>(rows) * w, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < w; ++c) {
      const int dx = c - (n - 1);
      const int dy = g.dim() == 1 ? 0 : r - (n - 1);
      if (dx == 0 && dy == 0) continue;
      t[static_cast<std::size_t>(r) * w + c] = K.kernel({dx * g.h(), dy * g.h()}, {0.0, 0.0});
    }
  return t;
}

std::vector<double> convolve_direct_1d(const Grid& g, std::span<const double> f, std::span<const double> table) {
  const int n = g.n();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    long double s = 0.0L;
    for (int j = 0; j < n; ++j) s += static_cast<long double>(table[i - j + n - 1]) * f[j];
    out[i] = static_cast<double>(s * g.h());
  }
  return out;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::vector<double> convolve_fft_2d(const Grid& g, std::span<const double> f, std::span<const double> table) {
  const int n = g.n();
  const int m = 2 * n;
  const int w = 2 * n - 1;
  const std::size_t real_size = static_cast<std::size_t>(m) * m;
  const std::size_t complex_size = static_cast<std::size_t>(m) * (m / 2 + 1);
  std::unique_ptr<double, FftwFree> a(static_cast<double*>(fftw_malloc(sizeof(double) * real_size)));
  std::unique_ptr<double, FftwFree> k(static_cast<double*>(fftw_malloc(sizeof(double) * real_size)));
  std::unique_ptr<fftw_complex, FftwFree> fa(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size)));
  std::unique_ptr<fftw_complex, FftwFree> fk(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size)));
  std::fill(a.get(), a.get() + real_size, 0.0);
  std::fill(k.get(), k.get() + real_size, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a.get()[static_cast<std::size_t>(j) * m + i] = f[static_cast<std::size_t>(j) * n + i];
  for (int r = 0; r < w; ++r)
    for (int c = 0; c < w; ++c) {
      const int dy = r - (n - 1), dx = c - (n - 1);
      k.get()[static_cast<std::size_t>(wrap(dy, m)) * m + wrap(dx, m)] = table[static_cast<std::size_t>(r) * w + c];
    }
  fftw_plan pa = fftw_plan_dft_r2c_2d(m, m, a.get(), fa.get(), FFTW_ESTIMATE);
  fftw_plan pk = fftw_plan_dft_r2c_2d(m, m, k.get(), fk.get(), FFTW_ESTIMATE);
  fftw_execute(pa);
  fftw_execute(pk);
  for (std::size_t i = 0; i < complex_size; ++i) {
    const std::complex<double> x(fa.get()[i][0], fa.get()[i][1]);
    const std::complex<double> y(fk.get()[i][0], fk.get()[i][1]);
    const auto z = x * y;
    fa.get()[i][0] = z.real();
    fa.get()[i][1] = z.imag();
  }
  fftw_plan pb = fftw_plan_dft_c2r_2d(m, m, fa.get(), a.get(), FFTW_ESTIMATE);
  fftw_execute(pb);
  fftw_destroy_plan(pa);
  fftw_destroy_plan(pk);
  fftw_destroy_plan(pb);
  const double scale = g.cell_volume() / static_cast<double>(real_size);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(j) * n + i] = a.get()[static_cast<std::size_t>(j) * m + i] * scale;
  return out;
}

double box_diameter(const Grid& g) { return 2.0 * g.half_extent() * (g.dim() == 1 ? 1.0 : std::sqrt(2.0)); }

}  // namespace

std::string to_string(OperatorMethod m) {
  switch (m) {
    case OperatorMethod::ExactBruteforce:
      return "exact_bruteforce";
    case OperatorMethod::PrefixFast:
      return "prefix_fast";
    case OperatorMethod::FftMultiplier:
      return "fft_multiplier";
    case OperatorMethod::TruncatedQuadrature:
      return "truncated_quadrature";
  }
  return {};
}

OperatorResult maximal(const GridFunction& f, const BallFamily& balls, bool centered) {
  return maximal_fast_impl(f, nullptr, balls, centered);
}

OperatorResult maximal_bruteforce(const GridFunction& f, const BallFamily& balls, bool centered) {
  return maximal_brute_impl(f, nullptr, balls, centered);
}

OperatorResult weighted_maximal(const GridFunction& f, const Weight& w, const BallFamily& balls, bool centered) {
  return maximal_fast_impl(f, &w, balls, centered);
}

OperatorResult weighted_maximal_bruteforce(const GridFunction& f, const Weight& w, const BallFamily& balls,
                                           bool centered) {
  return maximal_brute_impl(f, &w, balls, centered);
}

KernelSpec hilbert_kernel(const Grid& g) {
  KernelSpec k;
  k.name = "hilbert";
  k.dim = 1;
  k.omega = [](double t) { return t; };
  if (g.boundary() == Boundary::Periodic) {
    const double period = 2.0 * g.half_extent();
    k.period = period;
    k.kernel = [period](Point x, Point y) { return 1.0 / (period * std::tan(std::numbers::pi * (x[0] - y[0]) / period)); };
  } else {
    k.kernel = [](Point x, Point y) { return 1.0 / (std::numbers::pi * (x[0] - y[0])); };
  }
  return k;
}

KernelSpec riesz_kernel(int component) {
  if (component != 1 && component != 2) throw Error("riesz kernel: component must be 1 or 2");
  KernelSpec k;
  k.name = "riesz" + std::to_string(component);
  k.dim = 2;
  k.omega = [](double t) { return t; };
  const int j = component - 1;
  k.kernel = [j](Point x, Point y) {
    const double r = distance(x, y, 2);
    return (x[j] - y[j]) / (2.0 * std::numbers::pi * r * r * r);
  };
  return k;
}

KernelSpec kernel_from_file(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
  KernelSpec k;
  k.name = "kernel(" + path + ")";
  k.dim = doc.value("dim", 1);
  if (k.dim != 1 && k.dim != 2) throw ParseError("'" + path + "': dim must be 1 or 2");
  if (!doc.contains("kernel") || !doc.contains("omega")) throw ParseError("'" + path + "': needs kernel and omega");
  k.translation_invariant = doc.value("translation_invariant", false);
  std::vector<std::string> vars = k.dim == 1 ? std::vector<std::string>{"x", "y"}
                                             : std::vector<std::string>{"x1", "x2", "y1", "y2"};
  auto kernel = std::make_shared<Formula>(doc["kernel"].get<std::string>(), vars);
  auto omega = std::make_shared<Formula>(doc["omega"].get<std::string>(), std::vector<std::string>{"t"});
  const int dim = k.dim;
  k.kernel = [kernel, dim](Point x, Point y) {
    if (dim == 1) {
      const std::array<double, 2> v{x[0], y[0]};
      return (*kernel)(v);
    }
    const std::array<double, 4> v{x[0], x[1], y[0], y[1]};
    return (*kernel)(v);
  };
  k.omega = [omega](double t) {
    const std::array<double, 1> v{t};
    return (*omega)(v);
  };
  return k;
}

KernelSpec parse_kernel(std::string_view text, const Grid& g) {
  const auto node = expr::parse(text);
  KernelSpec k;
  if (expr::names(node, "hilbert")) {
    k = hilbert_kernel(g);
  } else if (expr::names(node, "riesz1")) {
    k = riesz_kernel(1);
  } else if (expr::names(node, "riesz2")) {
    k = riesz_kernel(2);
  } else if (expr::names(node, "kernel")) {
    expr::expect_arity(node, 1, 1);
    k = kernel_from_file(node.items[0].text);
  } else {
    throw ParseError("unknown kernel '" + std::string(text) + "'");
  }
  if (k.dim != g.dim()) throw GridMismatch("kernel " + k.name + " has dimension " + std::to_string(k.dim));
  return k;
}

double dini_integral(const std::function<double(double)>& omega) {
  // s = log t; ∫ ω(e^s) ds over [−8k·ln10, 0] by the midpoint rule, 64 nodes per decade.
  constexpr int kDepths = 8;
  constexpr int kDecadesPerDepth = 8;
  constexpr int kNodes = 64;
  const double ds = std::log(10.0) / kNodes;
  std::vector<double> increments;
  double total = 0.0;
  double s_hi = 0.0;
  for (int d = 0; d < kDepths; ++d) {
    long double part = 0.0L;
    for (int k = 0; k < kDecadesPerDepth * kNodes; ++k) {
      const double s = s_hi - (k + 0.5) * ds;
      const double v = omega(std::exp(s));
      if (!std::isfinite(v) || v < 0.0) throw ModulusNotDini("ω is not finite and non-negative on (0, 1]");
      part += v;
    }
    s_hi -= kDecadesPerDepth * kNodes * ds;
    increments.push_back(static_cast<double>(part) * ds);
    total += increments.back();
  }
  const double first = increments.front(), last = increments.back();
  if (last > 1e-12 && last > 1e-2 * first)
    throw ModulusNotDini("∫ω(t)/t dt keeps growing as t → 0 (last increment " + std::to_string(last) + ")");
  return total;
}

KernelReport validate_kernel(const KernelSpec& K, int samples, std::uint64_t seed) {
  if (samples < 1000) throw Error("validate_kernel: need at least 10³ samples");
  KernelReport rep;
  rep.dini_integral = dini_integral(K.omega);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> expo(-3.0, 0.0);
  std::uniform_real_distribution<double> frac(0.0, 0.5);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double scale = K.period > 0.0 ? 0.25 * K.period : 1.0;
  auto direction = [&](int k) -> Point {
    if (K.dim == 1) return {unit(rng) < 0 ? -1.0 : 1.0, 0.0};
    if (k % 4 == 0) return {1.0, 0.0};
    if (k % 4 == 1) return {0.0, 1.0};
    const double a = angle(rng);
    return {std::cos(a), std::sin(a)};
  };
  for (int k = 0; k < samples; ++k) {
    const Point x{unit(rng) * scale, K.dim == 2 ? unit(rng) * scale : 0.0};
    const Point u = direction(k);
    const double r = scale * std::pow(10.0, expo(rng));
    const Point y{x[0] + r * u[0], x[1] + r * u[1]};
    const double dxy = distance(x, y, K.dim);
    const double rn = K.dim == 1 ? dxy : dxy * dxy;
    rep.C_size = std::max(rep.C_size, std::abs(K.kernel(x, y)) * rn);
    ++rep.pairs;

    const Point v = direction(k + 2);
    const double s = dxy * frac(rng) * 0.999;
    const Point z{y[0] + s * v[0], y[1] + s * v[1]};
    const double dyz = distance(y, z, K.dim);
    if (dyz <= 0.0) continue;
    const double om = K.omega(dyz / dxy);
    if (!(om > 0.0)) continue;
    const double d1 = std::abs(K.kernel(x, y) - K.kernel(x, z));
    const double d2 = std::abs(K.kernel(y, x) - K.kernel(z, x));
    rep.C_smooth = std::max(rep.C_smooth, std::max(d1, d2) * rn / om);
    ++rep.triples;
  }
  return rep;
}

double empirical_l2_ratio(const KernelSpec& K, const Grid& g, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    GridFunction f(g);
    double mean = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = coin(rng) ? 1.0 : -1.0;
      mean += f[i];
    }
    mean /= static_cast<double>(f.size());
    long double nf = 0.0L, nt = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] -= mean;
      nf += static_cast<long double>(f[i]) * f[i];
    }
    const auto tf = cz_apply(f, K).output;
    for (std::size_t i = 0; i < tf.size(); ++i) nt += static_cast<long double>(tf[i]) * tf[i];
    if (nf > 0.0L) best = std::max(best, static_cast<double>(std::sqrt(nt / nf)));
  }
  return best;
}

OperatorResult cz_apply(const GridFunction& f, const KernelSpec& K) {
  const Grid& g = f.grid();
  if (K.dim != g.dim()) throw GridMismatch("kernel " + K.name + " does not match the grid dimension");
  if (!K.translation_invariant) return cz_direct(f, K);
  const auto table = offset_table(g, K);
  auto out = g.dim() == 1 ? convolve_direct_1d(g, f.values(), table) : convolve_fft_2d(g, f.values(), table);
  return {GridFunction(g, std::move(out)), OperatorMethod::TruncatedQuadrature, box_diameter(g)};
}

OperatorResult cz_direct(const GridFunction& f, const KernelSpec& K) {
  const Grid& g = f.grid();
  if (K.dim != g.dim()) throw GridMismatch("kernel " + K.name + " does not match the grid dimension");
  std::vector<Point> pts(f.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = g.point(i);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (j == i || f[j] == 0.0) continue;
      s += static_cast<long double>(K.kernel(pts[i], pts[j])) * f[j];
    }
    out[i] = static_cast<double>(s * g.cell_volume());
  }
  return {GridFunction(g, std::move(out)), OperatorMethod::TruncatedQuadrature, box_diameter(g)};
}

OperatorResult cz_local(const GridFunction& f, const KernelSpec& K, const Region& region) {
  GridFunction restricted(f.grid());
  const int n = f.grid().n();
  for (const auto& s : region.spans())
    for (int i = s.lo; i < s.hi; ++i) {
      const std::size_t c = static_cast<std::size_t>(s.row) * n + i;
      restricted[c] = f[c];
    }
  return cz_apply(restricted, K);
}

OperatorResult hilbert_fft(const GridFunction& f) {
  const Grid& g = f.grid();
  if (g.dim() != 1 || g.boundary() != Boundary::Periodic)
    throw Error("hilbert_fft: needs a periodic 1D grid");
  const int n = g.n();
  std::unique_ptr<double, FftwFree> a(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> fa(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  std::copy(f.values().begin(), f.values().end(), a.get());
  fftw_plan fwd = fftw_plan_dft_r2c_1d(n, a.get(), fa.get(), FFTW_ESTIMATE);
  fftw_execute(fwd);
  // −i·(x + iy) = y − ix; the mean and the Nyquist mode go to 0.
  for (int k = 0; k <= n / 2; ++k) {
    const double re = fa.get()[k][0], im = fa.get()[k][1];
    if (k == 0 || k == n / 2) {
      fa.get()[k][0] = fa.get()[k][1] = 0.0;
    } else {
      fa.get()[k][0] = im;
      fa.get()[k][1] = -re;
    }
  }
  fftw_plan inv = fftw_plan_dft_c2r_1d(n, fa.get(), a.get(), FFTW_ESTIMATE);
  fftw_execute(inv);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(inv);
  std::vector<double> out(a.get(), a.get() + n);
  for (double& v : out) v /= n;
  return {GridFunction(g, std::move(out)), OperatorMethod::FftMultiplier, 0.0};
}

Ball doubled(const Ball& b) { return Ball{b.center2, 2 * b.radius2}; }

GridFunction cz_global(const GridFunction& f, const KernelSpec& K, const Ball& b) {
  const Grid& g = f.grid();
  const int n = g.n();
  const Region twice = Region::of(g, doubled(b));
  const auto local = cz_local(f, K, twice).output;
  std::vector<char> inside(f.size(), 0);
  for (auto c : twice.cells(n)) inside[c] = 1;
  std::vector<std::size_t> outside;
  for (std::size_t c = 0; c < f.size(); ++c)
    if (!inside[c] && f[c] != 0.0) outside.push_back(c);
  GridFunction out(g);
  for (auto x : Region::of(g, b).cells(n)) {
    const Point px = g.point(x);
    long double tail = 0.0L;
    for (auto y : outside) tail += static_cast<long double>(K.kernel(px, g.point(y))) * f[y];
    out[x] = local[x] + static_cast<double>(tail * g.cell_volume());
  }
  return out;
}

TailBound tail_bounds(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                      const GrowthContext& ctx, const Ball& b, const std::optional<KernelSpec>& K, NormKind kind,
                      const BallFamily& norm_family) {
  const double norm = global_norm(f, Phi, phi, ctx, norm_family, kind).value;
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error("tail bounds: normalization failure");
  GridFunction scaled(f.grid());
  for (std::size_t c = 0; c < f.size(); ++c) scaled[c] = f[c] / norm;
  TailBound out = tail_bound_normalized(scaled, Phi, phi, ctx, b, K);
  out.norm = norm;
  return out;
}

TailBound tail_bound_normalized(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                const GrowthContext& ctx, const Ball& b, const std::optional<KernelSpec>& K) {
  const Grid& g = f.grid();
  const int n = g.n();
  TailBound out;
  out.norm = 1.0;
  const Region twice = Region::of(g, doubled(b));
  std::vector<char> inside(f.size(), 0);
  for (auto c : twice.cells(n)) inside[c] = 1;
  GridFunction tail(g);
  for (std::size_t c = 0; c < f.size(); ++c)
    if (!inside[c]) tail[c] = f[c];
  const auto ball_cells = Region::of(g, b).cells(n);
  if (!K) {
    const auto m = maximal(tail).output;
    for (auto x : ball_cells) out.sup_tail = std::max(out.sup_tail, m[x]);
  } else {
    std::vector<std::size_t> support;
    for (std::size_t c = 0; c < f.size(); ++c)
      if (tail[c] != 0.0) support.push_back(c);
    for (auto x : ball_cells) {
      const Point px = g.point(x);
      long double s = 0.0L;
      for (auto y : support) s += std::abs(static_cast<long double>(K->kernel(px, g.point(y))) * tail[y]);
      out.sup_tail = std::max(out.sup_tail, static_cast<double>(s * g.cell_volume()));
    }
  }
  out.phi_inv = generalized_inverse(Phi, phi(ctx, b));
  out.ratio = out.sup_tail / out.phi_inv;
  return out;
}

}  // namespace omlab
