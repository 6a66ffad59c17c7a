#include "omlab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
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

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(12);
  ss << x;
  return ss.str();
}

Ball ball_at(const Grid& g, std::array<std::int64_t, 2> center2, double r) {
  Ball b;
  b.center2 = center2;
  const double rho = 2.0 * r / g.h();
  b.radius2 = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(rho - 1e-9)));
  return b;
}

double table_eval(const GrowthFunction::Table& tb, double r) {
  const auto& rs = tb.r;
  const auto& vs = tb.v;
  std::size_t k = 0;
  if (r <= rs.front()) {
    k = 0;
  } else if (r >= rs.back()) {
    k = rs.size() - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(rs.begin(), rs.end(), r) - rs.begin()) - 1;
    k = std::min(k, rs.size() - 2);
  }
  const double slope = std::log(vs[k + 1] / vs[k]) / std::log(rs[k + 1] / rs[k]);
  return vs[k] * std::pow(r / rs[k], slope);
}

}  // namespace

GrowthContext::GrowthContext(Weight w) : weight_(std::move(w)), sums_(weight_.function()) {}

GrowthFunction::GrowthFunction(Kind kind) : kind_(std::move(kind)) {
  if (const auto* m = std::get_if<Mul>(&kind_); m && (!m->left || !m->right))
    throw Error("mul: both factors are required");
  if (const auto* t = std::get_if<Table>(&kind_)) {
    if (t->r.size() < 2 || t->r.size() != t->v.size()) throw Error("growth table: need at least two (r, phi) rows");
    for (std::size_t i = 0; i < t->r.size(); ++i) {
      if (!(t->r[i] > 0.0) || !(t->v[i] > 0.0)) throw Error("growth table: r and phi must be positive");
      if (i > 0 && !(t->r[i] > t->r[i - 1])) throw Error("growth table: r must ascend");
    }
  }
}

bool GrowthFunction::uses_weight() const {
  return std::visit(Overloaded{
                        [](const InvWBall&) { return true; },
                        [](const WBallPow&) { return true; },
                        [](const RPow&) { return false; },
                        [](const Mul& m) { return m.left->uses_weight() || m.right->uses_weight(); },
                        [](const Table&) { return false; },
                    },
                    kind_);
}

std::string GrowthFunction::describe() const {
  return std::visit(Overloaded{
                        [](const InvWBall&) { return std::string("invwball"); },
                        [](const WBallPow& k) { return "wballpow(" + fmt(k.kappa) + ")"; },
                        [](const RPow& k) { return "rpow(" + fmt(k.beta) + ")"; },
                        [](const Mul& m) { return "mul(" + m.left->describe() + "," + m.right->describe() + ")"; },
                        [](const Table& t) { return "table[" + std::to_string(t.r.size()) + " rows]"; },
                    },
                    kind_);
}

double GrowthFunction::in_box(const GrowthContext& ctx, std::array<std::int64_t, 2> center2, double r) const {
  return std::visit(Overloaded{
                        [&](const InvWBall&) { return 1.0 / ctx.weight_of(ball_at(ctx.grid(), center2, r)); },
                        [&](const WBallPow& k) {
                          return std::pow(ctx.weight_of(ball_at(ctx.grid(), center2, r)), k.kappa - 1.0);
                        },
                        [&](const RPow& k) { return std::pow(r, -k.beta); },
                        [&](const Mul& m) { return m.left->in_box(ctx, center2, r) * m.right->in_box(ctx, center2, r); },
                        [&](const Table& t) { return table_eval(t, r); },
                    },
                    kind_);
}

double GrowthFunction::operator()(const GrowthContext& ctx, const Ball& b) const {
  return std::visit(Overloaded{
                        [&](const InvWBall&) { return 1.0 / ctx.weight_of(b); },
                        [&](const WBallPow& k) { return std::pow(ctx.weight_of(b), k.kappa - 1.0); },
                        [&](const RPow& k) { return std::pow(b.radius(ctx.grid()), -k.beta); },
                        [&](const Mul& m) { return (*m.left)(ctx, b) * (*m.right)(ctx, b); },
                        [&](const Table& t) { return table_eval(t, b.radius(ctx.grid())); },
                    },
                    kind_);
}

double GrowthFunction::tail_slope(const GrowthContext& ctx, std::array<std::int64_t, 2> center2) const {
  return std::visit(Overloaded{
                        [&](const RPow& k) { return -k.beta; },
                        [&](const Mul& m) {
                          return m.left->tail_slope(ctx, center2) + m.right->tail_slope(ctx, center2);
                        },
                        [&](const Table& t) {
                          const std::size_t n = t.r.size();
                          return std::log(t.v[n - 1] / t.v[n - 2]) / std::log(t.r[n - 1] / t.r[n - 2]);
                        },
                        [&](const auto&) {
                          // least squares over the dyadic radii L/8 … L
                          const double top = ctx.grid().half_extent();
                          double sx = 0, sy = 0, sxx = 0, sxy = 0;
                          const int m = 4;
                          for (int k = 0; k < m; ++k) {
                            const double r = top / static_cast<double>(1 << k);
                            const double lx = std::log(r), ly = std::log(in_box(ctx, center2, r));
                            sx += lx;
                            sy += ly;
                            sxx += lx * lx;
                            sxy += lx * ly;
                          }
                          return (m * sxy - sx * sy) / (m * sxx - sx * sx);
                        },
                    },
                    kind_);
}

double GrowthFunction::at(const GrowthContext& ctx, std::array<std::int64_t, 2> center2, double r) const {
  if (const auto* m = std::get_if<Mul>(&kind_)) return m->left->at(ctx, center2, r) * m->right->at(ctx, center2, r);
  if (!uses_weight()) return in_box(ctx, center2, r);
  const double top = ctx.grid().half_extent();
  if (r <= top) return in_box(ctx, center2, r);
  return in_box(ctx, center2, top) * std::pow(r / top, tail_slope(ctx, center2));
}

GrowthFunction invwball() { return GrowthFunction(GrowthFunction::InvWBall{}); }
GrowthFunction wballpow(double kappa) { return GrowthFunction(GrowthFunction::WBallPow{kappa}); }
GrowthFunction rpow(double beta) { return GrowthFunction(GrowthFunction::RPow{beta}); }

GrowthFunction mul(GrowthFunction a, GrowthFunction b) {
  return GrowthFunction(GrowthFunction::Mul{std::make_shared<const GrowthFunction>(std::move(a)),
                                            std::make_shared<const GrowthFunction>(std::move(b))});
}

GrowthFunction growth_table_from_csv(const std::string& path) {
  GrowthFunction::Table t;
  for (const auto& row : io::read_numeric_csv(path)) {
    if (row.size() < 2) throw ParseError("growth table '" + path + "': rows need r,phi");
    t.r.push_back(row[0]);
    t.v.push_back(row[1]);
  }
  return GrowthFunction(std::move(t));
}

namespace {

GrowthFunction build_growth(const expr::Node& node) {
  if (expr::names(node, "invwball") && node.items.empty()) return invwball();
  if (expr::names(node, "wballpow")) {
    expr::expect_arity(node, 1, 1);
    return wballpow(node.items[0].as_number());
  }
  if (expr::names(node, "rpow")) {
    expr::expect_arity(node, 1, 1);
    return rpow(node.items[0].as_number());
  }
  if (expr::names(node, "mul")) {
    expr::expect_arity(node, 2, 2);
    return mul(build_growth(node.items[0]), build_growth(node.items[1]));
  }
  if (expr::names(node, "table")) {
    expr::expect_arity(node, 1, 1);
    return growth_table_from_csv(node.items[0].as_word());
  }
  throw ParseError("unknown growth function '" + node.to_string() + "'");
}

}  // namespace

GrowthFunction parse_growth(std::string_view text) { return build_growth(expr::parse(text)); }

ClassCertificate certify_Gdec(const GrowthFunction& phi, const GrowthContext& ctx, std::size_t max_centers,
                              bool full) {
  const Grid& g = ctx.grid();
  const int n = g.n();
  std::vector<std::size_t> centers;
  if (g.dim() == 1) {
    const int stride = full ? 1 : std::max<int>(1, static_cast<int>((static_cast<std::size_t>(n) + max_centers - 1) / max_centers));
    for (int i = stride / 2; i < n; i += stride) centers.push_back(static_cast<std::size_t>(i));
  } else {
    int stride = 1;
    while (!full && static_cast<std::size_t>(n / stride) * static_cast<std::size_t>(n / stride) > max_centers) stride *= 2;
    for (int j = stride / 2; j < n; j += stride)
      for (int i = stride / 2; i < n; i += stride) centers.push_back(static_cast<std::size_t>(j) * n + i);
  }

  ClassCertificate cert;
  cert.centers = centers.size();
  const int top = g.max_level();
  std::vector<double> vals(static_cast<std::size_t>(top) + 1), mass(vals.size());
  for (std::size_t c : centers) {
    for (int j = 0; j <= top; ++j) {
      const Ball b = centered_ball(g, c, j);
      vals[j] = phi(ctx, b);
      mass[j] = ctx.weight_of(b);
    }
    for (int r = 0; r <= top; ++r) {
      for (int s = r + 1; s <= top; ++s) {
        ++cert.pairs;
        cert.almost_decreasing_C = std::max(cert.almost_decreasing_C, vals[s] / vals[r]);
        cert.almost_increasing_C = std::max(cert.almost_increasing_C, (vals[r] * mass[r]) / (vals[s] * mass[s]));
      }
      if (r + 1 <= top) {
        cert.doubling_C = std::max({cert.doubling_C, vals[r] / vals[r + 1], vals[r + 1] / vals[r]});
        cert.weight_doubling = std::max(cert.weight_doubling, mass[r + 1] / mass[r]);
      }
    }
  }
  return cert;
}

namespace {

double log_midpoint(const std::function<double(double)>& f, double r, double r_max, int nodes_per_decade) {
  const double span = std::log(r_max / r);
  const int nodes = std::max(1, static_cast<int>(std::ceil(nodes_per_decade * span / std::log(10.0))));
  const double step = span / nodes;
  long double sum = 0.0L;
  for (int k = 0; k < nodes; ++k) sum += f(r * std::exp((k + 0.5) * step));
  return static_cast<double>(sum) * step;
}

}  // namespace

IntegralCondition check_integral_condition(const GrowthFunction& phi, const GrowthContext& ctx, const Ball& b,
                                           int nodes_per_decade, double r_max_factor) {
  IntegralCondition out;
  const double r = b.radius(ctx.grid());
  out.r_max = r_max_factor * ctx.grid().half_extent();
  out.tail_slope = phi.tail_slope(ctx, b.center2);
  if (!(out.tail_slope < -1e-9))
    throw TailNotExtrapolable("integral condition: tail slope " + fmt(out.tail_slope) + " of " + phi.describe() +
                              " does not decay");
  const double base = phi(ctx, b);
  if (const auto* k = std::get_if<GrowthFunction::RPow>(&phi.kind())) {
    out.analytic = true;
    out.C = 1.0 / k->beta;
    out.integral = out.C * base;
    return out;
  }
  auto f = [&](double t) { return phi.at(ctx, b.center2, t); };
  out.integral = log_midpoint(f, r, out.r_max, nodes_per_decade) + f(out.r_max) / -out.tail_slope;
  out.C = out.integral / base;
  return out;
}

IntegralCondition check_lemma_int_phi_inv(const GrowthFunction& phi, const YoungFunction& Phi,
                                          const GrowthContext& ctx, const Ball& b, int nodes_per_decade,
                                          double r_max_factor) {
  const IntegralCondition outer = check_integral_condition(phi, ctx, b, nodes_per_decade, r_max_factor);
  IntegralCondition out;
  out.r_max = outer.r_max;
  const double r = b.radius(ctx.grid());
  const double base = generalized_inverse(Phi, phi(ctx, b));
  const auto* pk = std::get_if<YoungFunction::Power>(&Phi.kind());
  const auto* gk = std::get_if<GrowthFunction::RPow>(&phi.kind());
  if (pk && gk) {
    out.analytic = true;
    out.tail_slope = -gk->beta / pk->p;
    out.C = pk->p / gk->beta;
    out.integral = out.C * base;
    return out;
  }
  auto f = [&](double t) { return generalized_inverse(Phi, phi.at(ctx, b.center2, t)); };
  const double top = f(out.r_max);
  out.tail_slope = std::log(top / f(out.r_max / 10.0)) / std::log(10.0);
  if (!(out.tail_slope < -1e-9))
    throw TailNotExtrapolable("integral condition: Φ⁻¹∘φ tail slope " + fmt(out.tail_slope) + " does not decay");
  out.integral = log_midpoint(f, r, out.r_max, nodes_per_decade) + top / -out.tail_slope;
  out.C = out.integral / base;
  return out;
}

}  // namespace omlab
