#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "omlab/error.hpp"
#include "omlab/growth.hpp"
#include "omlab/norms.hpp"
#include "omlab/weights.hpp"

using namespace omlab;

namespace {

struct Case {
  YoungFunction Phi;
  GrowthFunction phi;
  GrowthContext ctx;
  Ball b;
};

GridFunction indicator(const Grid& g, const Ball& b, double c = 1.0) {
  GridFunction f(g);
  for (auto i : Region::of(g, b).cells(g.n())) f[i] = c;
  return f;
}

GridFunction random_field(const Grid& g, std::mt19937_64& rng, double zero_fraction = 0.2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n01;
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng) < zero_fraction ? 0.0 : 3.0 * n01(rng);
  return f;
}

const std::vector<std::string>& young_pool() {
  static const std::vector<std::string> v{"power(1)", "power(2)", "power(3.5)", "powerlog(2,1)", "kinked"};
  return v;
}
const std::vector<std::string>& growth_pool() {
  static const std::vector<std::string> v{"invwball", "wballpow(0.5)", "rpow(0.5)"};
  return v;
}
const std::vector<std::string>& weight_pool() {
  static const std::vector<std::string> v{"one", "abspow(0.5)", "shiftpow(2)"};
  return v;
}

// Naive modular straight from the definition.
double naive_modular(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                     const GrowthContext& ctx, const Ball& b, double lambda) {
  const Grid& g = f.grid();
  long double s = 0.0L, wb = 0.0L;
  for (auto i : Region::of(g, b).cells(g.n())) {
    s += static_cast<long double>(Phi(std::abs(f[i]) / lambda)) * ctx.weight()[i] * g.cell_volume();
    wb += static_cast<long double>(ctx.weight()[i]) * g.cell_volume();
  }
  return static_cast<double>(s / (phi(ctx, b) * wb));
}

// Weak modular by scanning a dense log grid of t.
double scanned_weak_modular(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                            const GrowthContext& ctx, const Ball& b, double lambda) {
  const Grid& g = f.grid();
  const auto cells = Region::of(g, b).cells(g.n());
  double best = 0.0;
  for (int k = 0; k <= 120000; ++k) {
    const double t = std::pow(10.0, -6.0 + 12.0 * k / 120000.0);
    long double mass = 0.0L;
    for (auto i : cells)
      if (std::abs(f[i]) / lambda > t) mass += static_cast<long double>(ctx.weight()[i]) * g.cell_volume();
    best = std::max(best, Phi(t) * static_cast<double>(mass));
  }
  return best / (phi(ctx, b) * ctx.weight_of(b));
}

double bisect(const std::function<double(double)>& rho) {
  double lo = 1e-12, hi = 1e12;
  for (int k = 0; k < 200; ++k) {
    const double mid = std::sqrt(lo * hi);
    (rho(mid) > 1.0 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

TEST(Norms, ModularOfIndicator) {
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  for (const auto& b : enumerate(g, BallFamily::lattice(0, 5))) {
    const GrowthFunction phi = wballpow(0.5);
    EXPECT_NEAR(modular(indicator(g, b), kinked_quadratic(), phi, ctx, b, 1.0), kinked_quadratic()(1.0) / phi(ctx, b),
                1e-12 * kinked_quadratic()(1.0) / phi(ctx, b));
  }
}

TEST(Norms, ModularVanishesForLargeLambda) {
  const Grid g(1, 64, 1.0);
  std::mt19937_64 rng(1);
  const auto f = random_field(g, rng);
  const GrowthContext ctx(Weight::unit(g));
  const Ball b = centered_ball(g, 32, 4);
  EXPECT_LT(modular(f, power(2.0), invwball(), ctx, b, 1e12), 1e-20);
}

TEST(NormsProperty, ModularMatchesNaiveLoop) {
  std::mt19937_64 rng(2);
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 256 : 32, 1.0);
    for (const auto& wexpr : weight_pool()) {
      const GrowthContext ctx(parse_weight(wexpr, g));
      const auto f = random_field(g, rng);
      for (const auto& b : enumerate(g, BallFamily::lattice(0, 3))) {
        for (const auto& yexpr : young_pool()) {
          const auto Phi = parse_young(yexpr);
          const double got = modular(f, Phi, rpow(0.5), ctx, b, 1.7);
          const double want = naive_modular(f, Phi, rpow(0.5), ctx, b, 1.7);
          ASSERT_NEAR(got, want, 1e-12 * (1.0 + want)) << yexpr << ' ' << wexpr;
        }
      }
    }
  }
}

TEST(Norms, CharacteristicNormIdentity) {
  int cases = 0;
  for (const auto& yexpr : young_pool()) {
    for (const auto& pexpr : growth_pool()) {
      for (const auto& wexpr : weight_pool()) {
        const Grid g(1, 1024, 1.0);
        const GrowthContext ctx(parse_weight(wexpr, g));
        const auto Phi = parse_young(yexpr);
        const auto phi = parse_growth(pexpr);
        for (int level : {1, 5, 9}) {
          const Ball b = centered_ball(g, 300 + 37 * level, level);
          const double want = 1.0 / generalized_inverse(Phi, phi(ctx, b));
          const auto chi = indicator(g, b);
          EXPECT_NEAR(luxemburg_norm(chi, Phi, phi, ctx, b).value, want, 1e-6 * want) << yexpr << pexpr << wexpr;
          EXPECT_NEAR(weak_norm(chi, Phi, phi, ctx, b).value, want, 1e-6 * want) << yexpr << pexpr << wexpr;
          ++cases;
        }
      }
    }
  }
  EXPECT_GE(cases, 50);
}

TEST(Norms, HomogeneityAndZero) {
  const Grid g(1, 512, 1.0);
  std::mt19937_64 rng(3);
  const auto f = random_field(g, rng);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  const Ball b = centered_ball(g, 200, 5);
  for (const auto& yexpr : young_pool()) {
    const auto Phi = parse_young(yexpr);
    const double base = luxemburg_norm(f, Phi, invwball(), ctx, b).value;
    const double wbase = weak_norm(f, Phi, invwball(), ctx, b).value;
    for (double c : {0.1, 3.0, 100.0}) {
      GridFunction cf(g);
      for (std::size_t i = 0; i < f.size(); ++i) cf[i] = -c * f[i];
      EXPECT_NEAR(luxemburg_norm(cf, Phi, invwball(), ctx, b).value, c * base, 1e-6 * c * base) << yexpr;
      EXPECT_NEAR(weak_norm(cf, Phi, invwball(), ctx, b).value, c * wbase, 1e-6 * c * wbase) << yexpr;
    }
    EXPECT_EQ(luxemburg_norm(GridFunction(g), Phi, invwball(), ctx, b).value, 0.0);
  }
}

TEST(Norms, TwoPointClosedForm) {
  // One non-zero cell in a ball, φ ≡ 1, w ≡ 1, Φ(t) = t²: (a/λ)²·h/w(B) = 1.
  const Grid g(1, 8, 1.0);
  const GrowthContext ctx(Weight::unit(g));
  const auto phi = wballpow(1.0);
  const Ball b = centered_ball(g, 4, 1);
  const double a = 2.5;
  GridFunction f(g);
  f[4] = a;
  const double wb = ctx.weight_of(b);
  const double closed = a * std::sqrt(g.h() / wb);
  const double oracle = bisect([&](double l) { return naive_modular(f, power(2.0), phi, ctx, b, l); });
  const auto r = luxemburg_norm(f, power(2.0), phi, ctx, b);
  EXPECT_NEAR(oracle, closed, 1e-12 * closed);
  EXPECT_NEAR(r.value, closed, 1e-10 * closed);
}

TEST(NormsProperty, BisectionCertificate) {
  std::mt19937_64 rng(4);
  const Grid g(1, 256, 1.0);
  for (const auto& wexpr : weight_pool()) {
    const GrowthContext ctx(parse_weight(wexpr, g));
    const auto f = random_field(g, rng);
    for (const auto& yexpr : young_pool()) {
      const auto Phi = parse_young(yexpr);
      for (const auto& b : enumerate(g, BallFamily::lattice(2, 6))) {
        const double v = luxemburg_norm(f, Phi, invwball(), ctx, b).value;
        if (v == 0.0) continue;
        EXPECT_LE(naive_modular(f, Phi, invwball(), ctx, b, v * (1 + 1e-6)), 1.0);
        EXPECT_GE(naive_modular(f, Phi, invwball(), ctx, b, v * (1 - 1e-6)), 1.0);
        const BallSample s(f, ctx.weight(), Region::of(g, b), invwball()(ctx, b));
        const double wv = weak_norm(Phi, s).value;
        EXPECT_LE(weak_modular(Phi, s, wv * (1 + 1e-8)), 1.0);
      }
    }
  }
}

TEST(NormsProperty, WeakBelowStrong) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, 1000);
  int cases = 0;
  const Grid g(1, 256, 1.0);
  const auto balls = enumerate(g, BallFamily::lattice());
  while (cases < 200) {
    const auto Phi = parse_young(young_pool()[pick(rng) % young_pool().size()]);
    const auto phi = parse_growth(growth_pool()[pick(rng) % growth_pool().size()]);
    const GrowthContext ctx(parse_weight(weight_pool()[pick(rng) % weight_pool().size()], g));
    const auto f = random_field(g, rng, 0.5);
    const auto& b = balls[pick(rng) % balls.size()];
    EXPECT_LE(weak_norm(f, Phi, phi, ctx, b).value, luxemburg_norm(f, Phi, phi, ctx, b).value * (1 + 1e-9));
    ++cases;
  }
}

TEST(Norms, WeakModularMatchesDenseScan) {
  std::mt19937_64 rng(6);
  const Grid g(1, 64, 1.0);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  for (const auto& yexpr : young_pool()) {
    const auto Phi = parse_young(yexpr);
    const auto f = random_field(g, rng);
    const Ball b = centered_ball(g, 30, 4);
    const BallSample s(f, ctx.weight(), Region::of(g, b), invwball()(ctx, b));
    for (double lambda : {0.5, 2.0}) {
      const double exact = weak_modular(Phi, s, lambda);
      const double scan = scanned_weak_modular(f, Phi, invwball(), ctx, b, lambda);
      EXPECT_GE(exact, scan * (1 - 1e-12)) << yexpr;
      EXPECT_NEAR(exact, scan, 2e-3 * exact) << yexpr;
    }
  }
}

TEST(Norms, WeakNormByLevelsAgrees) {
  std::mt19937_64 rng(7);
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("shiftpow(2)", g));
  for (const auto& yexpr : young_pool()) {
    const auto Phi = parse_young(yexpr);
    const auto f = random_field(g, rng);
    for (const auto& b : enumerate(g, BallFamily::lattice(3, 6))) {
      const BallSample s(f, ctx.weight(), Region::of(g, b), rpow(0.5)(ctx, b));
      const double a = weak_norm(Phi, s).value;
      EXPECT_NEAR(weak_norm_by_levels(Phi, s), a, 1e-8 * a) << yexpr;
    }
  }
}

TEST(Norms, WeakTypeIdentityForIndicator) {
  const Grid g(1, 128, 1.0);
  const auto w = parse_weight("abspow(0.5)", g);
  const Ball b = centered_ball(g, 64, 3);
  for (const auto& yexpr : young_pool()) {
    const auto Phi = parse_young(yexpr);
    const auto id = weak_type_identity(indicator(g, b, 1.5), Phi, w, Region::whole(g));
    const double want = Phi(1.5) * measure(w, Region::of(g, b));
    EXPECT_NEAR(id.lhs, want, 1e-12 * want);
    EXPECT_NEAR(id.rhs, want, 1e-12 * want);
  }
}

TEST(NormsProperty, WeakTypeIdentityOnRandomInputs) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> level(0, 2);
  int cases = 0;
  for (const auto& yexpr : young_pool()) {
    const auto Phi = parse_young(yexpr);
    for (int trial = 0; trial < 20; ++trial, ++cases) {
      const Grid g(1, 128, 1.0);
      const auto w = parse_weight(weight_pool()[static_cast<std::size_t>(trial) % 3], g);
      GridFunction f = random_field(g, rng);
      if (trial % 2 == 0)
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::array<double, 3>{0.0, 0.7, 2.3}[level(rng)];
      const auto id = weak_type_identity(f, Phi, w, Region::whole(g));
      EXPECT_NEAR(id.lhs, id.rhs, 1e-10 * id.lhs) << yexpr;
    }
  }
  EXPECT_GE(cases, 100);
}

TEST(Norms, GlobalNormMatchesExhaustiveLoop) {
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(Weight::unit(g));
  const auto f = indicator(g, centered_ball(g, 100, 3));
  for (NormKind kind : {NormKind::Strong, NormKind::Weak}) {
    for (const auto& pexpr : {"wballpow(1)", "invwball", "wballpow(0.5)"}) {
      const auto phi = parse_growth(pexpr);
      const auto balls = enumerate(g, BallFamily::lattice());
      double best = 0.0;
      Ball arg;
      for (const auto& b : balls) {
        const double v = kind == NormKind::Strong ? luxemburg_norm(f, power(2.0), phi, ctx, b).value
                                                  : weak_norm(f, power(2.0), phi, ctx, b).value;
        if (v > best) {
          best = v;
          arg = b;
        }
      }
      const auto r = global_norm(f, power(2.0), phi, ctx, balls, kind);
      EXPECT_NEAR(r.value, best, 1e-12 * best) << pexpr;
      const double at_arg = kind == NormKind::Strong ? luxemburg_norm(f, power(2.0), phi, ctx, r.ball).value
                                                     : weak_norm(f, power(2.0), phi, ctx, r.ball).value;
      EXPECT_NEAR(at_arg, r.value, 1e-12 * best);
      EXPECT_TRUE(r.global);
    }
  }
}

TEST(NormsProperty, GlobalNormOnRandomFieldsMatchesExhaustiveLoop) {
  std::mt19937_64 rng(9);
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 512 : 32, 1.0);
    for (const auto& wexpr : weight_pool()) {
      const GrowthContext ctx(parse_weight(wexpr, g));
      const auto f = random_field(g, rng, 0.7);
      const auto balls = enumerate(g, BallFamily::lattice());
      for (const auto& yexpr : {"power(2)", "kinked"}) {
        const auto Phi = parse_young(yexpr);
        for (NormKind kind : {NormKind::Strong, NormKind::Weak}) {
          double best = 0.0;
          for (const auto& b : balls)
            best = std::max(best, kind == NormKind::Strong ? luxemburg_norm(f, Phi, wballpow(0.5), ctx, b).value
                                                           : weak_norm(f, Phi, wballpow(0.5), ctx, b).value);
          EXPECT_NEAR(global_norm(f, Phi, wballpow(0.5), ctx, balls, kind).value, best, 1e-12 * best);
        }
      }
    }
  }
}

TEST(Norms, GlobalNormOfZeroAndMonotoneFamily) {
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  EXPECT_EQ(global_norm(GridFunction(g), power(2.0), invwball(), ctx, BallFamily::lattice(), NormKind::Strong).value, 0.0);
  std::mt19937_64 rng(10);
  const auto f = random_field(g, rng);
  const double small = global_norm(f, power(2.0), invwball(), ctx, BallFamily::lattice(), NormKind::Strong).value;
  const double big = global_norm(f, power(2.0), invwball(), ctx, BallFamily::dense(), NormKind::Strong).value;
  EXPECT_GE(big, small * (1 - 1e-12));
}

TEST(Norms, EquivalentYoungScalesNorms) {
  std::mt19937_64 rng(11);
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  const auto f = random_field(g, rng);
  const Ball b = centered_ball(g, 128, 5);
  for (const auto& yexpr : {"power(2)", "kinked", "powerlog(2,1)"}) {
    const auto Phi = parse_young(yexpr);
    const double c = 3.0;
    // Ψ(t) = Φ(t/c)
    const auto Psi = dilated(Phi, c);
    const double s = luxemburg_norm(f, Phi, invwball(), ctx, b).value;
    const double w = weak_norm(f, Phi, invwball(), ctx, b).value;
    EXPECT_NEAR(luxemburg_norm(f, Psi, invwball(), ctx, b).value, s / c, 1e-6 * s / c);
    EXPECT_NEAR(weak_norm(f, Psi, invwball(), ctx, b).value, w / c, 1e-6 * w / c);
  }
}

TEST(Norms, HolderOnIndicators) {
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  const auto Phi = power(2.0);
  const auto tilde = complementary(Phi);
  for (const auto& b : enumerate(g, BallFamily::lattice(1, 6))) {
    const auto chi = indicator(g, b);
    const double phib = invwball()(ctx, b);
    const double want = generalized_inverse(Phi, phib) * generalized_inverse(tilde, phib) / phib;
    const double got = generalized_holder(chi, chi, Phi, tilde, invwball(), ctx, b);
    EXPECT_NEAR(got, want, 1e-6 * want);
    EXPECT_GE(got, 1.0 - 1e-6);
    EXPECT_LE(got, 2.0 + 1e-6);
  }
  EXPECT_EQ(generalized_holder(indicator(g, centered_ball(g, 10, 2)), GridFunction(g), Phi, tilde, invwball(), ctx,
                               centered_ball(g, 10, 2)),
            0.0);
}

TEST(NormsProperty, HolderOnRandomPairs) {
  std::mt19937_64 rng(12);
  const Grid g(1, 256, 1.0);
  const auto balls = enumerate(g, BallFamily::lattice());
  std::uniform_int_distribution<std::size_t> pick(0, 1 << 20);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto Phi = power(p);
    const auto tilde = complementary(Phi);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const GrowthContext ctx(parse_weight(weight_pool()[pick(rng) % 3], g));
      const auto phi = parse_growth(growth_pool()[pick(rng) % 3]);
      const auto f = random_field(g, rng), h = random_field(g, rng);
      worst = std::max(worst, generalized_holder(f, h, Phi, tilde, phi, ctx, balls[pick(rng) % balls.size()]));
    }
    // p = 2 attains the bound on single-cell balls; allow rounding only
    EXPECT_LE(worst, 2.0 * (1 + 1e-12)) << "p=" << p << " excess " << worst - 2.0;
  }
}

TEST(NormsProperty, HolderWithTableComplement) {
  std::mt19937_64 rng(13);
  const Grid g(1, 256, 1.0);
  const auto balls = enumerate(g, BallFamily::lattice());
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  for (const auto& yexpr : {"powerlog(2,1)", "kinked"}) {
    const auto Phi = parse_young(yexpr);
    const auto tilde = complementary(Phi);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto f = random_field(g, rng), h = random_field(g, rng);
      worst = std::max(worst, generalized_holder(f, h, Phi, tilde, invwball(), ctx, balls[static_cast<std::size_t>(trial) * 31 % balls.size()]));
    }
    EXPECT_LE(worst, 2.1) << yexpr;
  }
}

TEST(Norms, ExponentAveragesOnIndicator) {
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("abspow(0.5)", g));
  const Ball b = centered_ball(g, 128, 4);
  const auto r = lemma_p_checks(indicator(g, b), kinked_quadratic(), invwball(), ctx, b, 1.5, 1.2);
  EXPECT_NEAR(r.fint1, 1.0, 1e-6);
  EXPECT_LE(r.fint1, 2.0);
}

TEST(Norms, PowerAverageIsJensenEquality) {
  std::mt19937_64 rng(14);
  const Grid g(1, 256, 1.0);
  const GrowthContext ctx(parse_weight("shiftpow(1)", g));
  for (double p : {1.5, 2.0, 3.0}) {
    const auto f = random_field(g, rng);
    for (const auto& b : enumerate(g, BallFamily::lattice(2, 6))) {
      const auto r = lemma_p_checks(f, power(p), wballpow(0.5), ctx, b, p, 1.0);
      if (r.fintp == 0.0) continue;
      EXPECT_LE(r.fintp, 1.0 + 1e-9);
      EXPECT_NEAR(r.fintp, 1.0, 1e-6);
      EXPECT_TRUE(r.p_precondition);
    }
  }
}

TEST(Norms, WeakAverageStableUnderRefinement) {
  std::vector<double> sup;
  for (int n : {512, 1024}) {
    const Grid g(1, n, 1.0);
    const GrowthContext ctx(Weight::unit(g));
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(7.0 * g.coord(static_cast<int>(i))) + 0.3;
    double worst = 0.0;
    for (const auto& b : enumerate(g, BallFamily::lattice(3)))
      worst = std::max(worst, lemma_p_checks(f, power(2.0), invwball(), ctx, b, 2.0, 1.0).fintq);
    sup.push_back(worst);
  }
  EXPECT_GT(sup[0], 0.0);
  EXPECT_LT(std::max(sup[0], sup[1]) / std::min(sup[0], sup[1]), 2.0);
}

TEST(Norms, ExponentPreconditionFlags) {
  const Grid g(1, 128, 1.0);
  const GrowthContext ctx(Weight::unit(g));
  const Ball b = centered_ball(g, 64, 3);
  const auto f = indicator(g, b);
  const auto bad = lemma_p_checks(f, power(1.0), invwball(), ctx, b, 2.0, 1.5);
  EXPECT_FALSE(bad.p_precondition);
  EXPECT_FALSE(bad.q_precondition);
  const auto q_bad = lemma_p_checks(f, power(2.0), invwball(), ctx, b, 2.0, 2.0);
  EXPECT_TRUE(q_bad.p_precondition);
  EXPECT_FALSE(q_bad.q_precondition);
}

TEST(Norms, WeakQuasiTriangleConstant) {
  std::mt19937_64 rng(15);
  const Grid g(1, 128, 1.0);
  const GrowthContext ctx(Weight::unit(g));
  std::vector<GridFunction> fs, gs;
  for (int k = 0; k < 6; ++k) {
    fs.push_back(random_field(g, rng, 0.6));
    gs.push_back(random_field(g, rng, 0.6));
  }
  const Ball b = centered_ball(g, 64, 5);
  const double K = weak_quasi_triangle(fs, gs, power(2.0), invwball(), ctx, b);
  EXPECT_GT(K, 0.0);
  EXPECT_LE(K, 2.0);
}
