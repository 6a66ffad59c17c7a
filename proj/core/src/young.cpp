#include "omlab/young.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "omlab/error.hpp"
#include "omlab/expr.hpp"
#include "omlab/io.hpp"

namespace omlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kE = std::numbers::e;

double eval_segment(const YoungFunction::Segment& s, double t) {
  return s.alpha * std::pow(t, s.beta) + s.gamma;
}

// Index of the segment owning t, i.e. start < t ≤ next start (segment 0 owns 0).
std::size_t segment_index(const YoungFunction::Piecewise& pw, double t) {
  const auto& segs = pw.segments;
  auto it = std::lower_bound(segs.begin(), segs.end(), t,
                             [](const YoungFunction::Segment& s, double x) { return s.start < x; });
  if (it == segs.begin()) return 0;
  return static_cast<std::size_t>(std::distance(segs.begin(), it)) - 1;
}

double eval_table(const YoungFunction::Table& tb, double t) {
  const auto& ts = tb.t;
  const auto& vs = tb.v;
  const std::size_t n = ts.size();
  auto interp = [&](std::size_t k, double x) {
    const double t0 = ts[k], t1 = ts[k + 1], v0 = vs[k], v1 = vs[k + 1];
    if (v0 > 0.0 && v1 > 0.0 && t0 > 0.0) {
      const double slope = std::log(v1 / v0) / std::log(t1 / t0);
      return v0 * std::pow(x / t0, slope);
    }
    const double lin = v0 + (v1 - v0) * (x - t0) / (t1 - t0);
    return std::max(lin, 0.0);
  };
  if (t <= ts.front()) {
    if (vs.front() <= 0.0) return 0.0;
    if (n == 1) return vs.front() * t / ts.front();
    return interp(0, t);
  }
  if (t >= ts.back()) {
    if (n == 1) return vs.front() * t / ts.front();
    return interp(n - 2, t);
  }
  const auto k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  if (t == ts[k]) return vs[k];
  return interp(k, t);
}

double numeric_derivative(const YoungFunction& phi, double u) {
  const double d = u * 1e-5;
  return (phi(u + d) - phi(u - d)) / (2.0 * d);
}

// inf{t : Φ(t) > u} for 0 < u < ∞ by geometric bisection.
double bisect_inverse(const YoungFunction& phi, double u) {
  double lo = 0.0;
  double hi = 1.0;
  if (phi(hi) > u) {
    lo = 0.5;
    while (phi(lo) > u) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    }
  } else {
    lo = hi;
    while (phi(hi) <= u) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) return kInf;
    }
  }
  for (int it = 0; it < 400 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > u) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

bool numerically_convex(const YoungFunction& phi, double upper) {
  std::vector<double> ts{0.0};
  for (int k = -60; k <= 60; ++k) {
    const double t = std::pow(10.0, k / 10.0);
    if (t < upper) ts.push_back(t);
  }
  for (double bp : phi.breakpoints()) {
    if (bp > 0.0 && bp < upper) {
      ts.push_back(bp);
      ts.push_back(bp * (1 - 1e-3));
      ts.push_back(bp * (1 + 1e-3));
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  while (!ts.empty() && ts.back() >= upper) ts.pop_back();
  if (ts.size() < 3) return true;
  double prev_slope = (phi(ts[1]) - phi(ts[0])) / (ts[1] - ts[0]);
  for (std::size_t k = 2; k < ts.size(); ++k) {
    const double slope = (phi(ts[k]) - phi(ts[k - 1])) / (ts[k] - ts[k - 1]);
    if (slope < prev_slope - 1e-7 * std::abs(prev_slope) - 1e-300) return false;
    prev_slope = slope;
  }
  return true;
}

// Convex samples plus extrapolation exponents ≥ 1 give a convex interpolant up
// to rounding in the log-log segments.
bool table_samples_convex(const YoungFunction::Table& tb) {
  const auto& t = tb.t;
  const auto& v = tb.v;
  double prev = (v[1] - v[0]) / (t[1] - t[0]);
  for (std::size_t k = 2; k < t.size(); ++k) {
    const double slope = (v[k] - v[k - 1]) / (t[k] - t[k - 1]);
    if (slope < prev * (1 - 1e-6)) return false;
    prev = slope;
  }
  auto exponent = [&](std::size_t k) {
    if (!(v[k] > 0.0) || !(t[k] > 0.0)) return 1.0;
    return std::log(v[k + 1] / v[k]) / std::log(t[k + 1] / t[k]);
  };
  return exponent(0) >= 1.0 - 1e-6 && exponent(t.size() - 2) >= 1.0 - 1e-6;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(12);
  ss << x;
  return ss.str();
}

}  // namespace

YoungFunction::YoungFunction(Kind kind) : kind_(std::move(kind)) {
  std::visit(
      Overloaded{
          [&](const Power& k) {
            if (!(k.p >= 1.0)) throw Error("power(p) needs p >= 1, got " + fmt(k.p));
            if (!(k.coef > 0.0)) throw Error("power coefficient must be positive");
            convex_ = true;
          },
          [&](const PowerLog& k) {
            if (!(k.p >= 1.0) || !(k.q >= 0.0)) throw Error("powerlog(p,q) needs p >= 1, q >= 0");
            convex_ = true;
          },
          [&](const Piecewise& k) {
            const auto& s = k.segments;
            if (s.empty() || s.front().start != 0.0)
              throw Error("piecewise: first segment must start at 0");
            for (std::size_t i = 0; i < s.size(); ++i) {
              if (!(s[i].alpha >= 0.0) || !(s[i].beta > 0.0))
                throw Error("piecewise: segments need alpha >= 0, beta > 0");
              if (i > 0) {
                if (!(s[i].start > s[i - 1].start)) throw Error("piecewise: starts must increase");
                breakpoints_.push_back(s[i].start);
                const double left = eval_segment(s[i - 1], s[i].start);
                const double right = eval_segment(s[i], s[i].start);
                if (right < left - 1e-12 * std::abs(left))
                  throw Error("piecewise: function decreases at " + fmt(s[i].start));
              }
            }
            if (std::abs(eval_segment(s.front(), 0.0)) > 0.0) throw Error("piecewise: Φ(0) must be 0");
            for (std::size_t i = 0; i < s.size(); ++i) {
              const double end = i + 1 < s.size() ? s[i + 1].start : kInf;
              const bool zero = s[i].alpha == 0.0 && s[i].gamma == 0.0;
              if (!zero) break;
              a_value_ = end;
            }
            if (s.back().alpha == 0.0) throw Error("piecewise: last segment must grow to infinity");
          },
          [&](const Table& k) {
            if (k.t.size() != k.v.size() || k.t.size() < 2)
              throw Error("table: need at least two (t, phi) samples");
            for (std::size_t i = 0; i < k.t.size(); ++i) {
              if (!(k.t[i] >= 0.0) || !(k.v[i] >= 0.0) || !std::isfinite(k.v[i]))
                throw Error("table: samples must be finite and nonnegative");
              if (i > 0 && !(k.t[i] > k.t[i - 1])) throw Error("table: t must be strictly ascending");
              if (i > 0 && k.v[i] < k.v[i - 1]) throw Error("table: phi must be non-decreasing");
              if (k.v[i] == 0.0) a_value_ = k.t[i];
            }
            if (k.v.back() <= 0.0) throw Error("table: phi must become positive");
            if (k.t.front() == 0.0 && k.v.front() != 0.0) throw Error("table: Φ(0) must be 0");
            breakpoints_.assign(k.t.begin(), k.t.end());
          },
          [&](const Capped& k) {
            if (!(k.b > 0.0)) throw Error("capped: b must be positive");
            b_value_ = k.b;
            if (k.inner) {
              a_value_ = std::min(k.inner->a_value(), k.b);
              b_value_ = std::min(k.b, k.inner->b_value());
              for (double bp : k.inner->breakpoints())
                if (bp < k.b) breakpoints_.push_back(bp);
            } else {
              a_value_ = k.b;
            }
            breakpoints_.push_back(k.b);
          },
          [&](const Dilated& k) {
            if (!k.inner || !(k.scale > 0.0)) throw Error("dilate: scale must be positive");
            a_value_ = k.scale * k.inner->a_value();
            b_value_ = k.scale * k.inner->b_value();
            convex_ = k.inner->convex();
            for (double bp : k.inner->breakpoints()) breakpoints_.push_back(k.scale * bp);
          },
      },
      kind_);
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  if (std::holds_alternative<Piecewise>(kind_)) {
    convex_ = numerically_convex(*this, kInf);
  } else if (const auto* tb = std::get_if<Table>(&kind_)) {
    convex_ = table_samples_convex(*tb);
  } else if (const auto* c = std::get_if<Capped>(&kind_)) {
    convex_ = !c->inner || (c->inner->convex() || numerically_convex(*this, c->b));
  }
}

double YoungFunction::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t == kInf) return kInf;
  return std::visit(
      Overloaded{
          [&](const Power& k) { return k.coef * std::pow(t, k.p); },
          [&](const PowerLog& k) { return std::pow(t, k.p) * std::pow(std::log(kE + t), k.q); },
          [&](const Piecewise& k) { return eval_segment(k.segments[segment_index(k, t)], t); },
          [&](const Table& k) { return eval_table(k, t); },
          [&](const Capped& k) {
            if (t > k.b) return kInf;
            return k.inner ? (*k.inner)(t) : 0.0;
          },
          [&](const Dilated& k) { return (*k.inner)(t / k.scale); },
      },
      kind_);
}

std::string YoungFunction::describe() const {
  return std::visit(
      Overloaded{
          [](const Power& k) {
            return k.coef == 1.0 ? "power(" + fmt(k.p) + ")" : "power(" + fmt(k.p) + "," + fmt(k.coef) + ")";
          },
          [](const PowerLog& k) { return "powerlog(" + fmt(k.p) + "," + fmt(k.q) + ")"; },
          [](const Piecewise& k) {
            std::string out = "piecewise([";
            for (std::size_t i = 0; i < k.segments.size(); ++i) {
              const auto& s = k.segments[i];
              if (i) out += ",";
              out += "(" + fmt(s.start) + "," + fmt(s.alpha) + "," + fmt(s.beta) + "," + fmt(s.gamma) + ")";
            }
            return out + "])";
          },
          [](const Table& k) { return "table[" + std::to_string(k.t.size()) + " samples]"; },
          [](const Capped& k) {
            return "capped(" + (k.inner ? k.inner->describe() : std::string("zero")) + "," + fmt(k.b) + ")";
          },
          [](const Dilated& k) { return "dilate(" + k.inner->describe() + "," + fmt(k.scale) + ")"; },
      },
      kind_);
}

YoungFunction power(double p, double coef) { return YoungFunction(YoungFunction::Power{p, coef}); }

YoungFunction power_log(double p, double q) { return YoungFunction(YoungFunction::PowerLog{p, q}); }

YoungFunction piecewise(std::vector<YoungFunction::Segment> segments) {
  return YoungFunction(YoungFunction::Piecewise{std::move(segments)});
}

YoungFunction table(std::vector<double> t, std::vector<double> v) {
  return YoungFunction(YoungFunction::Table{std::move(t), std::move(v)});
}

YoungFunction table_from_csv(const std::string& path) {
  std::vector<double> t, v;
  for (const auto& row : io::read_numeric_csv(path)) {
    if (row.size() < 2) throw ParseError("table '" + path + "': rows need columns t,phi");
    t.push_back(row[0]);
    v.push_back(row[1]);
  }
  return table(std::move(t), std::move(v));
}

YoungFunction capped(YoungFunction inner, double b) {
  return YoungFunction(YoungFunction::Capped{std::make_shared<const YoungFunction>(std::move(inner)), b});
}

YoungFunction zero_until(double b) { return YoungFunction(YoungFunction::Capped{nullptr, b}); }

YoungFunction dilated(YoungFunction inner, double scale) {
  return YoungFunction(YoungFunction::Dilated{std::make_shared<const YoungFunction>(std::move(inner)), scale});
}

YoungFunction kinked_quadratic() {
  return piecewise({{0.0, 1.0, 2.0, 0.0}, {0.25, 0.5, 1.0, -1.0 / 16}, {0.5, 0.5, 2.0, 1.0 / 16}});
}

namespace {

YoungFunction build_young(const expr::Node& node) {
  using expr::expect_arity;
  if (expr::names(node, "power")) {
    expect_arity(node, 1, 2);
    return power(node.items[0].as_number(), node.items.size() > 1 ? node.items[1].as_number() : 1.0);
  }
  if (expr::names(node, "powerlog")) {
    expect_arity(node, 2, 2);
    return power_log(node.items[0].as_number(), node.items[1].as_number());
  }
  if (expr::names(node, "kinked") && node.items.empty()) return kinked_quadratic();
  if (expr::names(node, "piecewise")) {
    expect_arity(node, 1, 1);
    std::vector<YoungFunction::Segment> segs;
    for (const auto& item : node.items[0].items) {
      if (item.kind != expr::Node::Kind::List || item.items.size() != 4)
        throw ParseError("piecewise: segments are (t0,alpha,beta,gamma)");
      segs.push_back({item.items[0].as_number(), item.items[1].as_number(), item.items[2].as_number(),
                      item.items[3].as_number()});
    }
    return piecewise(std::move(segs));
  }
  if (expr::names(node, "table")) {
    expect_arity(node, 1, 1);
    return table_from_csv(node.items[0].as_word());
  }
  if (expr::names(node, "capped")) {
    expect_arity(node, 2, 2);
    if (expr::names(node.items[0], "zero")) return zero_until(node.items[1].as_number());
    return capped(build_young(node.items[0]), node.items[1].as_number());
  }
  if (expr::names(node, "dilate")) {
    expect_arity(node, 2, 2);
    return dilated(build_young(node.items[0]), node.items[1].as_number());
  }
  throw ParseError("unknown Young function '" + node.to_string() + "'");
}

}  // namespace

YoungFunction parse_young(std::string_view text) { return build_young(expr::parse(text)); }

double evaluate(const YoungFunction& phi, double t) { return phi(t); }

double generalized_inverse(const YoungFunction& phi, double u) {
  if (u == kInf) return kInf;
  if (u <= 0.0) return phi.a_value();
  using YF = YoungFunction;
  return std::visit(
      Overloaded{
          [&](const YF::Power& k) { return std::pow(u / k.coef, 1.0 / k.p); },
          [&](const YF::PowerLog&) { return bisect_inverse(phi, u); },
          [&](const YF::Piecewise& k) {
            const auto& s = k.segments;
            for (std::size_t i = 0; i < s.size(); ++i) {
              const double end = i + 1 < s.size() ? s[i + 1].start : kInf;
              const double at_end = end == kInf ? kInf : eval_segment(s[i], end);
              if (at_end <= u) continue;
              const double at_start = eval_segment(s[i], s[i].start);
              if (at_start > u) return s[i].start;
              const double t = std::pow((u - s[i].gamma) / s[i].alpha, 1.0 / s[i].beta);
              return std::clamp(t, s[i].start, end);
            }
            return kInf;
          },
          [&](const YF::Table&) { return bisect_inverse(phi, u); },
          [&](const YF::Capped& k) {
            if (!k.inner) return k.b;
            if ((*k.inner)(k.b) <= u) return k.b;
            return std::min(generalized_inverse(*k.inner, u), k.b);
          },
          [&](const YF::Dilated& k) { return k.scale * generalized_inverse(*k.inner, u); },
      },
      phi.kind());
}

namespace {

YoungFunction numeric_complement(const YoungFunction& phi) {
  const double b = phi.b_value();
  const double u_cap = std::min(1e12, b);
  const double tiny = 1e-12;
  double s0 = phi(tiny) / tiny;
  if (s0 < 1e-9) s0 = 0.0;

  // Affine growth in the tail makes Φ̃ infinite beyond the asymptotic slope.
  double tail_slope = kInf;
  if (b == kInf) {
    const double d8 = numeric_derivative(phi, 1e8);
    const double d12 = numeric_derivative(phi, 1e12);
    if (std::abs(d12 - d8) <= 1e-7 * d12) tail_slope = d12;
  }

  const double u_lo = 1e-6;
  const double u_hi = std::min(1e6, b * (1 - 1e-6));
  double t_lo = std::max(numeric_derivative(phi, u_lo), s0 * (1 + 1e-6));
  double t_hi = numeric_derivative(phi, u_hi);
  if (tail_slope < kInf) t_hi = std::min(t_hi, tail_slope * (1 - 1e-6));
  if (!(t_lo > 0.0)) t_lo = 1e-12;
  if (!(t_hi > t_lo * 1.0001)) t_hi = t_lo * 1e6;

  auto legendre = [&](double t) {
    auto g = [&](double lu) {
      const double u = std::exp(lu);
      return t * u - phi(u);
    };
    double lo = std::log(tiny), hi = std::log(u_cap);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (g(m1) < g(m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    double u = std::exp(0.5 * (lo + hi));
    double best = t * u - phi(u);
    const double d = u * 1e-5;
    const double second = (phi(u + d) - 2.0 * phi(u) + phi(u - d)) / (d * d);
    if (second > 0.0 && std::isfinite(second)) {
      const double step = (t - numeric_derivative(phi, u)) / second;
      const double polished = u + step;
      if (polished > 0.0 && polished <= u_cap) {
        const double value = t * polished - phi(polished);
        if (value > best) best = value;
      }
    }
    return std::max(best, 0.0);
  };

  constexpr int kSamples = 512;
  std::vector<double> ts, vs;
  ts.reserve(kSamples + 1);
  vs.reserve(kSamples + 1);
  if (s0 > 0.0) {
    ts.push_back(s0);
    vs.push_back(0.0);
  }
  const double ratio = std::log(t_hi / t_lo);
  for (int k = 0; k < kSamples; ++k) {
    const double t = t_lo * std::exp(ratio * k / (kSamples - 1));
    double v = legendre(t);
    if (!vs.empty()) v = std::max(v, vs.back());
    if (!ts.empty() && t <= ts.back()) continue;
    ts.push_back(t);
    vs.push_back(v);
  }
  YoungFunction tab = table(std::move(ts), std::move(vs));
  if (tail_slope < kInf) return capped(std::move(tab), tail_slope);
  return tab;
}

}  // namespace

YoungFunction complementary(const YoungFunction& phi) {
  if (!phi.convex()) throw NonConvexInput("complementary: '" + phi.describe() + "' is not convex");
  using YF = YoungFunction;
  if (const auto* k = std::get_if<YF::Power>(&phi.kind())) {
    if (k->p == 1.0) return zero_until(k->coef);
    const double pc = k->p / (k->p - 1.0);
    const double coef = (k->p - 1.0) * k->coef * std::pow(k->coef * k->p, -pc);
    return power(pc, coef);
  }
  if (const auto* k = std::get_if<YF::Dilated>(&phi.kind())) {
    return dilated(complementary(*k->inner), 1.0 / k->scale);
  }
  if (const auto* k = std::get_if<YF::Capped>(&phi.kind()); k && !k->inner) {
    return power(1.0, k->b);
  }
  return numeric_complement(phi);
}

std::vector<double> index_t_grid(const YoungFunction& phi, const IndexGrid& grid) {
  const double decades = std::log10(grid.t_max / grid.t_min);
  const int n = static_cast<int>(std::lround(decades * grid.t_per_decade));
  std::vector<double> ts;
  ts.reserve(n + 1 + phi.breakpoints().size());
  for (int k = 0; k <= n; ++k) ts.push_back(grid.t_min * std::pow(10.0, static_cast<double>(k) / grid.t_per_decade));
  for (double bp : phi.breakpoints())
    if (bp > grid.t_min && bp < grid.t_max) ts.push_back(bp);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

namespace {

void require_full_range(const YoungFunction& phi) {
  if (phi.a_value() > 0.0 || phi.b_value() < kInf)
    throw DomainNotFullRange("indices need a(Φ)=0 and b(Φ)=∞ for '" + phi.describe() + "'");
}

double dilation_on(const YoungFunction& phi, double lambda, const std::vector<double>& ts,
                   const std::vector<double>& values) {
  double best = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (!(values[k] > 0.0)) continue;
    best = std::max(best, phi(lambda * ts[k]) / values[k]);
  }
  return best;
}

}  // namespace

double dilation(const YoungFunction& phi, double lambda, const IndexGrid& grid) {
  require_full_range(phi);
  if (!(lambda > 0.0)) throw Error("dilation: lambda must be positive");
  const auto ts = index_t_grid(phi, grid);
  std::vector<double> values(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) values[k] = phi(ts[k]);
  return dilation_on(phi, lambda, ts, values);
}

IndexReport indices(const YoungFunction& phi, const IndexGrid& grid) {
  require_full_range(phi);
  const auto ts = index_t_grid(phi, grid);
  std::vector<double> values(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) values[k] = phi(ts[k]);

  IndexReport rep;
  rep.t_range = {ts.front(), ts.back()};
  rep.t_per_decade = grid.t_per_decade;
  rep.i_lower = -kInf;
  rep.I_upper = kInf;
  for (int k = -grid.lambda_steps; k <= grid.lambda_steps; ++k) {
    const double lambda = std::pow(10.0, static_cast<double>(k) / grid.lambda_per_decade);
    const double h = k == 0 ? 1.0 : dilation_on(phi, lambda, ts, values);
    rep.h_samples.emplace_back(lambda, h);
    if (k == 0) continue;
    const double q = std::log(h) / std::log(lambda);
    if (k < 0) rep.i_lower = std::max(rep.i_lower, q);
    if (k > 0) rep.I_upper = std::min(rep.I_upper, q);
  }
  rep.lambda_range = {rep.h_samples.front().first, rep.h_samples.back().first};

  rep.a_slope = kInf;
  rep.b_slope = -kInf;
  const auto& bps = phi.breakpoints();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double t = ts[k];
    const double d = t * 1e-5;
    const double f0 = values[k];
    if (!(f0 > 0.0)) continue;
    const auto near = std::lower_bound(bps.begin(), bps.end(), t - d);
    const bool at_break = near != bps.end() && *near <= t + d;
    auto take = [&](double derivative) {
      const double quotient = t * derivative / f0;
      rep.a_slope = std::min(rep.a_slope, quotient);
      rep.b_slope = std::max(rep.b_slope, quotient);
    };
    if (at_break) {
      take((f0 - phi(t - d)) / d);
      take((phi(t + d) - f0) / d);
    } else {
      take((phi(t + d) - phi(t - d)) / (2.0 * d));
    }
  }

  rep.upper_unbounded = !(rep.I_upper < ClassThresholds{}.delta2_max_index);
  if (!rep.upper_unbounded) {
    rep.fit_p = std::max(rep.i_lower - 0.1, 1e-3);
    rep.fit_q = rep.I_upper + 0.1;
    for (const auto& [lambda, h] : rep.h_samples) {
      const double bound = std::max(std::pow(lambda, rep.fit_p), std::pow(lambda, rep.fit_q));
      rep.fit_C = std::max(rep.fit_C, h / bound);
    }
  }
  return rep;
}

double almost_increasing_constant(const YoungFunction& phi, double p, const IndexGrid& grid) {
  const auto ts = index_t_grid(phi, grid);
  double running = 0.0;
  double constant = 1.0;
  for (double t : ts) {
    const double g = phi(t) / std::pow(t, p);
    if (!std::isfinite(g)) break;
    if (g > 0.0 && running > 0.0) constant = std::max(constant, running / g);
    running = std::max(running, g);
  }
  return constant;
}

YoungClass classify(const YoungFunction& phi, const IndexReport& report, const ClassThresholds& thresholds) {
  YoungClass cls;
  cls.thresholds = thresholds;
  cls.in_nabla2 = report.i_lower > 1.0 + thresholds.nabla2_margin;
  cls.in_delta2 = report.I_upper < thresholds.delta2_max_index;
  cls.almost_increasing_constant = almost_increasing_constant(phi, 1.0);
  cls.in_quasi_convex = cls.almost_increasing_constant <= thresholds.quasi_convex_max_constant;
  return cls;
}

}  // namespace omlab
