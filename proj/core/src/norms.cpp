#include "omlab/norms.hpp"

#include <algorithm>
#include <cmath>

#include "omlab/error.hpp"

namespace omlab {
namespace {

// ρ(λ) is non-increasing in λ. Returns inf{λ > 0 : ρ(λ) ≤ 1}, approached from
// above: bracket doubling from `start`, then Illinois steps on log ρ against log λ
// with a bisection every fourth step so the bracket always shrinks.
template <class Rho>
NormResult solve_level(Rho&& rho, double start, NormKind kind) {
  NormResult out;
  out.kind = kind;
  if (!(start > 0.0)) return out;
  int evals = 0;
  auto eval = [&](double lambda) {
    ++evals;
    return rho(lambda);
  };
  double lo = 0.0, hi = start;
  double fhi = eval(hi);
  double flo = kInf;
  if (!(fhi <= 1.0)) {
    lo = hi;
    flo = fhi;
    for (int k = 0; k < 4000; ++k) {
      hi *= 2.0;
      fhi = eval(hi);
      if (fhi <= 1.0) break;
      lo = hi;
      flo = fhi;
    }
    if (!(fhi <= 1.0)) throw Error("norm: modular stays above 1 for every tested λ");
  } else {
    lo = hi * 0.5;
    flo = eval(lo);
    while (flo <= 1.0) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      if (lo < 1e-300) {
        out.value = 0.0;
        out.iterations = evals;
        return out;
      }
      flo = eval(lo);
    }
  }

  int side = 0;
  double glo_scale = 1.0, ghi_scale = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double slo = std::log(lo), shi = std::log(hi);
    const double glo = std::log(flo) * glo_scale;
    const double ghi = (fhi > 0.0 ? std::log(fhi) : -kInf) * ghi_scale;
    double s = 0.5 * (slo + shi);
    if (it % 4 != 3 && std::isfinite(glo) && std::isfinite(ghi) && glo > ghi) {
      const double cand = slo + glo * (shi - slo) / (glo - ghi);
      if (cand > slo && cand < shi) s = cand;
    }
    double mid = std::exp(s);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double fm = eval(mid);
    if (fm <= 1.0) {
      hi = mid;
      fhi = fm;
      glo_scale = side == 1 ? glo_scale * 0.5 : 1.0;
      ghi_scale = 1.0;
      side = 1;
      if (fm == 1.0) break;
    } else {
      lo = mid;
      flo = fm;
      ghi_scale = side == -1 ? ghi_scale * 0.5 : 1.0;
      glo_scale = 1.0;
      side = -1;
    }
  }
  out.value = hi;
  out.bracket = {lo, hi};
  out.iterations = evals;
  return out;
}

}  // namespace

std::string to_string(NormKind k) { return k == NormKind::Strong ? "strong" : "weak"; }

BallSample::BallSample(const GridFunction& f, const Weight& w, const Region& region, double phi_b) : phi_b_(phi_b) {
  require_same_grid(f.grid(), w.grid(), "ball sample");
  const int n = f.grid().n();
  const double vol = f.grid().cell_volume();
  long double total = 0.0L;
  for (const auto& span : region.spans()) {
    const std::size_t base = static_cast<std::size_t>(span.row) * n;
    for (int i = span.lo; i < span.hi; ++i) {
      const double wi = w[base + i] * vol;
      total += wi;
      const double a = std::abs(f[base + i]);
      if (a > 0.0) {
        mag_.push_back(a);
        wt_.push_back(wi);
        max_ = std::max(max_, a);
      }
    }
  }
  w_total_ = static_cast<double>(total);
  if (!(phi_b_ > 0.0)) throw Error("ball sample: φ(B) must be positive");
}

const std::vector<std::pair<double, double>>& BallSample::level_sets() const {
  if (levels_ready_) return levels_;
  std::vector<std::size_t> order(mag_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag_[a] < mag_[b]; });
  levels_.clear();
  long double suffix = 0.0L;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    suffix += wt_[*it];
    const double v = mag_[*it];
    if (!levels_.empty() && levels_.back().first == v) {
      levels_.back().second = static_cast<double>(suffix);
    } else {
      levels_.emplace_back(v, static_cast<double>(suffix));
    }
  }
  std::reverse(levels_.begin(), levels_.end());
  levels_ready_ = true;
  return levels_;
}

double modular(const YoungFunction& Phi, const BallSample& s, double lambda) {
  const auto mags = s.magnitudes();
  const auto wts = s.weights();
  long double sum = 0.0L;
  if (const auto* k = std::get_if<YoungFunction::Power>(&Phi.kind())) {
    for (std::size_t i = 0; i < mags.size(); ++i) sum += std::pow(mags[i] / lambda, k->p) * wts[i];
    return static_cast<double>(sum) * k->coef / s.normalization();
  }
  for (std::size_t i = 0; i < mags.size(); ++i) {
    const double v = Phi(mags[i] / lambda);
    if (v == kInf) return kInf;
    sum += v * wts[i];
  }
  return static_cast<double>(sum) / s.normalization();
}

double weak_modular(const YoungFunction& Phi, const BallSample& s, double lambda) {
  double best = 0.0;
  for (const auto& [v, mass] : s.level_sets()) {
    const double term = Phi(v / lambda);
    if (term == kInf) return kInf;
    best = std::max(best, term * mass);
  }
  return best / s.normalization();
}

double modular(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi, const GrowthContext& ctx,
               const Ball& b, double lambda) {
  if (!(lambda > 0.0)) throw Error("modular: λ must be positive");
  const BallSample s(f, ctx.weight(), Region::of(ctx.grid(), b), phi(ctx, b));
  return modular(Phi, s, lambda);
}

NormResult luxemburg_norm(const YoungFunction& Phi, const BallSample& s) {
  const auto* pk = std::get_if<YoungFunction::Power>(&Phi.kind());
  long double power_sum = 0.0L;
  if (pk) {
    const auto mags = s.magnitudes();
    const auto wts = s.weights();
    const double top = s.max_magnitude();
    for (std::size_t i = 0; i < mags.size(); ++i) power_sum += std::pow(mags[i] / top, pk->p) * wts[i];
  }
  const double scaled = static_cast<double>(power_sum) * (pk ? pk->coef : 0.0) / s.normalization();
  auto rho = [&](double lambda) {
    if (pk) return scaled * std::pow(s.max_magnitude() / lambda, pk->p);
    return modular(Phi, s, lambda);
  };
  return solve_level(rho, s.max_magnitude(), NormKind::Strong);
}

NormResult weak_norm(const YoungFunction& Phi, const BallSample& s) {
  const auto* pk = std::get_if<YoungFunction::Power>(&Phi.kind());
  double peak = 0.0;
  if (pk) {
    const double top = s.max_magnitude();
    for (const auto& [v, mass] : s.level_sets()) peak = std::max(peak, std::pow(v / top, pk->p) * mass);
    peak *= pk->coef / s.normalization();
  }
  auto rho = [&](double lambda) {
    if (pk) return peak * std::pow(s.max_magnitude() / lambda, pk->p);
    return weak_modular(Phi, s, lambda);
  };
  return solve_level(rho, s.max_magnitude(), NormKind::Weak);
}

NormResult luxemburg_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                          const GrowthContext& ctx, const Ball& b) {
  const BallSample s(f, ctx.weight(), Region::of(ctx.grid(), b), phi(ctx, b));
  NormResult r = luxemburg_norm(Phi, s);
  r.ball = b;
  return r;
}

NormResult weak_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                     const GrowthContext& ctx, const Ball& b) {
  const BallSample s(f, ctx.weight(), Region::of(ctx.grid(), b), phi(ctx, b));
  NormResult r = weak_norm(Phi, s);
  r.ball = b;
  return r;
}

double weak_norm_by_levels(const YoungFunction& Phi, const BallSample& s) {
  double best = 0.0;
  for (const auto& [v, mass] : s.level_sets()) {
    const double t = generalized_inverse(Phi, s.normalization() / mass);
    best = std::max(best, v / t);
  }
  return best;
}

WeakTypeIdentity weak_type_identity(const GridFunction& f, const YoungFunction& Phi, const Weight& w,
                                    const Region& region) {
  require_same_grid(f.grid(), w.grid(), "weak type identity");
  WeakTypeIdentity out;
  const BallSample s(f, w, region, 1.0);
  for (const auto& [v, mass] : s.level_sets()) out.lhs = std::max(out.lhs, Phi(v) * mass);
  std::vector<double> phi_values(f.size());
  for (std::size_t i = 0; i < phi_values.size(); ++i) phi_values[i] = Phi(std::abs(f[i]));
  bool infinite = std::any_of(phi_values.begin(), phi_values.end(), [](double v) { return v == kInf; });
  if (infinite) {
    out.rhs = kInf;
    return out;
  }
  const BallSample composed(GridFunction(f.grid(), std::move(phi_values)), w, region, 1.0);
  for (const auto& [u, mass] : composed.level_sets()) out.rhs = std::max(out.rhs, u * mass);
  return out;
}

NormResult global_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                       const GrowthContext& ctx, std::span<const Ball> balls, NormKind kind) {
  const Grid& g = ctx.grid();
  require_same_grid(f.grid(), g, "global norm");
  NormResult best;
  best.kind = kind;
  best.global = true;
  best.balls_total = balls.size();
  double peak = 0.0;
  std::size_t peak_at = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f[i]) > peak) {
      peak = std::abs(f[i]);
      peak_at = i;
    }
  }
  if (peak == 0.0 || balls.empty()) {
    if (!balls.empty()) best.ball = balls.front();
    return best;
  }

  auto solve = [&](const Ball& b, const Region& region) {
    const BallSample s(f, ctx.weight(), region, phi(ctx, b));
    ++best.balls_solved;
    const NormResult r = kind == NormKind::Strong ? luxemburg_norm(Phi, s) : weak_norm(Phi, s);
    if (r.value > best.value) {
      best.value = r.value;
      best.ball = b;
      best.bracket = r.bracket;
      best.iterations = r.iterations;
    }
  };

  // Seed with the balls nearest the peak of |f| so the pre-check prunes early.
  const auto peak_point = g.point(peak_at);
  std::vector<char> done(balls.size(), 0);
  for (int level = 0; level <= g.max_level(); ++level) {
    std::size_t pick = balls.size();
    double dist = kInf;
    for (std::size_t k = 0; k < balls.size(); ++k) {
      if (balls[k].radius2 != (std::int64_t{2} << level)) continue;
      const double h2 = 0.5 * g.h();
      const double dx = -g.half_extent() + static_cast<double>(balls[k].center2[0]) * h2 - peak_point[0];
      const double dy = g.dim() == 2 ? -g.half_extent() + static_cast<double>(balls[k].center2[1]) * h2 - peak_point[1] : 0.0;
      const double d = dx * dx + dy * dy;
      if (d < dist) {
        dist = d;
        pick = k;
      }
    }
    if (pick < balls.size()) {
      solve(balls[pick], Region::of(g, balls[pick]));
      done[pick] = 1;
    }
  }

  // Balls whose modular at the running sup is ≤ 1 cannot raise it; for weak
  // norms the strong modular bounds the weak one from above.
  std::optional<PrefixSums> level_sums;
  double level_lambda = 0.0;
  std::size_t since_rebuild = 0;
  auto rebuild = [&] {
    level_lambda = best.value;
    std::vector<double> vals(f.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = Phi(std::abs(f[i]) / level_lambda);
    level_sums.emplace(GridFunction(g, std::move(vals)), ctx.weight());
    since_rebuild = 0;
  };
  bool finite_phi = Phi.b_value() == kInf;
  for (std::size_t k = 0; k < balls.size(); ++k) {
    if (done[k]) continue;
    const Ball& b = balls[k];
    const Region region = Region::of(g, b);
    if (best.value > 0.0 && finite_phi) {
      if (!level_sums || (best.value > level_lambda && since_rebuild >= 32)) rebuild();
      const double m = level_sums->sum(region) / (phi(ctx, b) * ctx.weight_of(b));
      if (m <= 1.0) continue;
    }
    const double before = best.value;
    solve(b, region);
    if (best.value > before) ++since_rebuild;
  }
  return best;
}

NormResult global_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                       const GrowthContext& ctx, const BallFamily& family, NormKind kind) {
  const auto balls = enumerate(ctx.grid(), family);
  return global_norm(f, Phi, phi, ctx, balls, kind);
}

double generalized_holder(const GridFunction& f, const GridFunction& g, const YoungFunction& Phi,
                          const YoungFunction& Phi_tilde, const GrowthFunction& phi, const GrowthContext& ctx,
                          const Ball& b) {
  require_same_grid(f.grid(), g.grid(), "generalized holder");
  const Region region = Region::of(ctx.grid(), b);
  const double phi_b = phi(ctx, b);
  const double nf = luxemburg_norm(Phi, BallSample(f, ctx.weight(), region, phi_b)).value;
  const double ng = luxemburg_norm(Phi_tilde, BallSample(g, ctx.weight(), region, phi_b)).value;
  if (nf == 0.0 || ng == 0.0) return 0.0;
  GridFunction fg(f.grid());
  for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = std::abs(f[i] * g[i]);
  const double lhs = integrate(fg, ctx.weight(), region) / (phi_b * ctx.weight_of(b));
  return lhs / (nf * ng);
}

double generalized_holder(const GridFunction& f, const GridFunction& g, const YoungFunction& Phi,
                          const GrowthFunction& phi, const GrowthContext& ctx, const Ball& b) {
  return generalized_holder(f, g, Phi, complementary(Phi), phi, ctx, b);
}

LemmaPChecks lemma_p_checks(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                            const GrowthContext& ctx, const Ball& b, double p, double q,
                            double almost_increasing_limit) {
  LemmaPChecks out;
  const Region region = Region::of(ctx.grid(), b);
  const double phi_b = phi(ctx, b);
  const BallSample s(f, ctx.weight(), region, phi_b);
  const double wb = s.weight_total();
  const double scale = generalized_inverse(Phi, phi_b);
  const double strong = luxemburg_norm(Phi, s).value;
  const double weak = weak_norm(Phi, s).value;
  auto moment = [&](double r) {
    long double sum = 0.0L;
    const auto mags = s.magnitudes();
    const auto wts = s.weights();
    for (std::size_t i = 0; i < mags.size(); ++i) sum += std::pow(mags[i], r) * wts[i];
    return std::pow(static_cast<double>(sum) / wb, 1.0 / r);
  };
  out.almost_increasing_C = almost_increasing_constant(Phi, p);
  out.p_precondition = p > 1.0 && out.almost_increasing_C <= almost_increasing_limit;
  out.q_precondition = out.p_precondition && q >= 1.0 && q < p;
  if (strong > 0.0) {
    out.fint1 = moment(1.0) / (scale * strong);
    out.fintp = moment(p) / (scale * strong);
  }
  if (weak > 0.0) out.fintq = moment(q) / (scale * weak);
  return out;
}

double weak_quasi_triangle(std::span<const GridFunction> fs, std::span<const GridFunction> gs,
                           const YoungFunction& Phi, const GrowthFunction& phi, const GrowthContext& ctx,
                           const Ball& b) {
  double k = 0.0;
  for (std::size_t i = 0; i < std::min(fs.size(), gs.size()); ++i) {
    GridFunction sum(fs[i].grid());
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] = fs[i][j] + gs[i][j];
    const double denom = weak_norm(fs[i], Phi, phi, ctx, b).value + weak_norm(gs[i], Phi, phi, ctx, b).value;
    if (denom > 0.0) k = std::max(k, weak_norm(sum, Phi, phi, ctx, b).value / denom);
  }
  return k;
}

}  // namespace omlab
