#include "omlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "omlab/error.hpp"
#include "omlab/expr.hpp"

namespace omlab {
namespace {

double norm_of(const std::array<double, 2>& x, int dim) {
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

// Sparse-table range minimum for each row.
class RowMin {
 public:
  explicit RowMin(const Weight& w) : n_(w.grid().n()) {
    const int rows = w.grid().dim() == 1 ? 1 : n_;
    levels_ = 1;
    while ((1 << levels_) <= n_) ++levels_;
    table_.assign(static_cast<std::size_t>(rows) * levels_ * n_, 0.0);
    for (int row = 0; row < rows; ++row) {
      double* base = &table_[static_cast<std::size_t>(row) * levels_ * n_];
      for (int i = 0; i < n_; ++i) base[i] = w[static_cast<std::size_t>(row) * n_ + i];
      for (int k = 1; k < levels_; ++k) {
        double* cur = base + static_cast<std::size_t>(k) * n_;
        const double* prev = base + static_cast<std::size_t>(k - 1) * n_;
        for (int i = 0; i + (1 << k) <= n_; ++i) cur[i] = std::min(prev[i], prev[i + (1 << (k - 1))]);
      }
    }
  }

  [[nodiscard]] double min(const Region& region) const {
    double best = kHuge;
    for (const auto& s : region.spans()) {
      const double* base = &table_[static_cast<std::size_t>(s.row) * levels_ * n_];
      const int len = s.hi - s.lo;
      int k = 0;
      while ((2 << k) <= len) ++k;
      const double* lvl = base + static_cast<std::size_t>(k) * n_;
      best = std::min({best, lvl[s.lo], lvl[s.hi - (1 << k)]});
    }
    return best;
  }

 private:
  static constexpr double kHuge = 1e308;
  int n_;
  int levels_ = 1;
  std::vector<double> table_;
};

}  // namespace

Weight parse_weight(std::string_view text, const Grid& g) {
  const expr::Node node = expr::parse(text);
  std::vector<double> v(g.size());
  auto fill = [&](auto&& fn) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.point(i));
  };
  if (expr::names(node, "one")) {
    return Weight::unit(g);
  } else if (expr::names(node, "abspow")) {
    expr::expect_arity(node, 1, 1);
    const double a = node.items[0].as_number();
    fill([&](const std::array<double, 2>& x) { return std::pow(norm_of(x, g.dim()), a); });
  } else if (expr::names(node, "shiftpow")) {
    expr::expect_arity(node, 1, 1);
    const double a = node.items[0].as_number();
    fill([&](const std::array<double, 2>& x) { return std::pow(1.0 + norm_of(x, g.dim()), a); });
  } else if (expr::names(node, "prodpow")) {
    expr::expect_arity(node, 2, 2);
    if (g.dim() != 2) throw ParseError("prodpow needs a 2D grid");
    const double a1 = node.items[0].as_number();
    const double a2 = node.items[1].as_number();
    fill([&](const std::array<double, 2>& x) { return std::pow(std::abs(x[0]), a1) * std::pow(std::abs(x[1]), a2); });
  } else if (expr::names(node, "table")) {
    expr::expect_arity(node, 1, 1);
    GridFunction f = read_grid_function(node.items[0].as_word(), g.half_extent(), g.boundary());
    require_same_grid(f.grid(), g, "weight table");
    Weight w(std::move(f));
    w.set_label(node.to_string());
    return w;
  } else {
    throw ParseError("unknown weight '" + node.to_string() + "'");
  }
  Weight w(GridFunction(g, std::move(v)));
  w.set_label(node.to_string());
  return w;
}

ApReport ap_constant(const Weight& w, double p, const BallFamily& family, bool keep_per_ball) {
  const auto balls = enumerate(w.grid(), family);
  ApReport rep = ap_constant(w, p, balls, keep_per_ball);
  rep.ball_family_id = family.id();
  return rep;
}

ApReport ap_constant(const Weight& w, double p, std::span<const Ball> balls, bool keep_per_ball) {
  if (!(p >= 1.0)) throw Error("ap_constant: p must be >= 1");
  if (balls.empty()) throw Error("ap_constant: empty ball family");
  const Grid& g = w.grid();
  const PrefixSums sw(w.function());
  std::optional<PrefixSums> sdual;
  std::optional<RowMin> wmin;
  if (p > 1.0) {
    std::vector<double> dual(w.values().size());
    const double e = -1.0 / (p - 1.0);
    for (std::size_t i = 0; i < dual.size(); ++i) dual[i] = std::pow(w[i], e);
    sdual.emplace(GridFunction(g, std::move(dual)));
  } else {
    wmin.emplace(w);
  }
  ApReport rep;
  rep.p = p;
  rep.constant = 0.0;
  rep.ball_family_id = "explicit[" + std::to_string(balls.size()) + "]";
  for (const Ball& b : balls) {
    const Region region = Region::of(g, b);
    const double vol = static_cast<double>(region.cell_count()) * g.cell_volume();
    const double avg_w = sw.sum(region) / vol;
    double value = 0.0;
    if (p > 1.0) {
      value = avg_w * std::pow(sdual->sum(region) / vol, p - 1.0);
    } else {
      value = avg_w / wmin->min(region);
    }
    if (keep_per_ball) rep.per_ball.push_back(value);
    if (value > rep.constant) {
      rep.constant = value;
      rep.argmax_ball = b;
    }
  }
  return rep;
}

AInftyFit ainfty_fit(const Weight& w, const BallFamily& family, int subsets_per_ball, int max_balls) {
  if (subsets_per_ball < 8) throw Error("ainfty_fit: subsets_per_ball must be >= 8");
  const Grid& g = w.grid();
  std::vector<Ball> candidates;
  for (const Ball& b : enumerate(g, family))
    if (Region::of(g, b).cell_count() >= 16) candidates.push_back(b);
  std::vector<Ball> chosen;
  if (static_cast<int>(candidates.size()) <= max_balls) {
    chosen = candidates;
  } else {
    for (int k = 0; k < max_balls; ++k)
      chosen.push_back(candidates[candidates.size() * static_cast<std::size_t>(k) / static_cast<std::size_t>(max_balls)]);
  }

  AInftyFit fit;
  const int per_side = std::max(4, subsets_per_ball / 2);
  for (const Ball& b : chosen) {
    const Region region = Region::of(g, b);
    std::vector<double> vals;
    for (std::size_t c : region.cells(g.n())) vals.push_back(w[c]);
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    std::vector<long double> prefix(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + vals[i];
    const long double total = prefix[n];
    std::vector<std::size_t> ks;
    for (int j = 0; j < per_side; ++j) {
      const double frac = std::pow(2.0 / static_cast<double>(n), static_cast<double>(j) / (per_side - 1));
      ks.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(n) * frac))));
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (std::size_t k : ks) {
      const double x = static_cast<double>(k) / static_cast<double>(n);
      fit.samples.emplace_back(x, static_cast<double>(prefix[k] / total));
      fit.samples.emplace_back(x, static_cast<double>((total - prefix[n - k]) / total));
    }
    const double wb = static_cast<double>(total);
    for (Ball sub = b; sub.radius2 > 2;) {
      sub.radius2 /= 2;
      const Region r = Region::of(g, sub);
      const double x = static_cast<double>(r.cell_count()) / static_cast<double>(n);
      long double s = 0.0L;
      for (std::size_t c : r.cells(g.n())) s += w[c];
      fit.samples.emplace_back(x, static_cast<double>(s) / wb);
    }
  }

  auto c_of = [&](double delta) {
    double c = 0.0;
    for (const auto& [x, y] : fit.samples) c = std::max(c, y / std::pow(x, delta));
    return c;
  };
  bool degenerate = fit.samples.empty();
  if (!degenerate) {
    degenerate = std::all_of(fit.samples.begin(), fit.samples.end(),
                             [&](const auto& s) { return s == fit.samples.front(); });
  }
  if (degenerate) {
    fit.delta = 1.0;
    fit.C = 1.0;
    return fit;
  }

  // Upper envelope per dyadic bin of |E|/|B|, then least squares in log-log.
  std::vector<std::pair<int, std::pair<double, double>>> bins;
  for (const auto& [x, y] : fit.samples) {
    if (!(x < 1.0) || !(y > 0.0)) continue;
    const int bin = static_cast<int>(std::floor(std::log2(x)));
    auto it = std::find_if(bins.begin(), bins.end(), [&](const auto& e) { return e.first == bin; });
    if (it == bins.end()) {
      bins.push_back({bin, {x, y}});
    } else if (y > it->second.second) {
      it->second = {x, y};
    }
  }
  std::sort(bins.begin(), bins.end());
  if (bins.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(bins.size());
    for (const auto& [bin, pt] : bins) {
      const double lx = std::log(pt.first), ly = std::log(pt.second);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    fit.ls_slope = denom > 0.0 ? (m * sxy - sx * sy) / denom : 1.0;
  }

  // C(δ) is increasing in δ since every x < 1.
  double lo = 0.0, hi = 1.0;
  if (c_of(1.0) <= fit.c_cap) {
    lo = 1.0;
  } else {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (c_of(mid) <= fit.c_cap ? lo : hi) = mid;
    }
  }
  fit.delta_at_cap = lo;
  fit.delta = std::clamp(std::min(fit.ls_slope, fit.delta_at_cap), 1e-6, 1.0);
  fit.C = std::max(1.0, c_of(fit.delta));
  return fit;
}

double check_weighted_average(const Weight& w, double p, double ap, const GridFunction& f, const Ball& b) {
  require_same_grid(w.grid(), f.grid(), "check_weighted_average");
  const Grid& g = w.grid();
  const Region region = Region::of(g, b);
  long double sum_f = 0.0L, sum_fpw = 0.0L, sum_w = 0.0L;
  for (std::size_t c : region.cells(g.n())) {
    const double a = std::abs(f[c]);
    sum_f += a;
    sum_fpw += std::pow(a, p) * w[c];
    sum_w += w[c];
  }
  const double count = static_cast<double>(region.cell_count());
  const double lhs = std::pow(static_cast<double>(sum_f) / count, p);
  const double rhs = ap * static_cast<double>(sum_fpw / sum_w);
  if (lhs == 0.0) return 0.0;
  return lhs / rhs;
}

double dilation_measure_ratio(const Weight& w, const BallFamily& family, double k) {
  const Grid& g = w.grid();
  const PrefixSums sw(w.function());
  double worst = 0.0;
  for (const Ball& b : enumerate(g, family)) {
    const Ball big = dilate(g, b, k).ball;
    worst = std::max(worst, sw.sum(Region::of(g, big)) / sw.sum(Region::of(g, b)));
  }
  return worst;
}

OpennessScan openness_scan(const Weight& coarse, const Weight& fine, double p, const BallFamily& family,
                           double drift) {
  OpennessScan scan;
  scan.smallest_stable_r = p;
  bool found = false;
  for (int k = 0;; ++k) {
    double r = 1.0 + 0.1 * k;
    if (r > p + 1e-12) break;
    if (std::abs(r - p) < 1e-12) r = p;
    scan.r_values.push_back(r);
    scan.coarse.push_back(ap_constant(coarse, r, family).constant);
    scan.fine.push_back(ap_constant(fine, r, family).constant);
    if (!found && scan.fine.back() < drift * scan.coarse.back() && scan.coarse.back() < drift * scan.fine.back()) {
      scan.smallest_stable_r = r;
      found = true;
    }
  }
  if (scan.r_values.empty() || scan.r_values.back() < p - 1e-12) {
    scan.r_values.push_back(p);
    scan.coarse.push_back(ap_constant(coarse, p, family).constant);
    scan.fine.push_back(ap_constant(fine, p, family).constant);
  }
  return scan;
}

}  // namespace omlab
