#include "omlab/harness.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "omlab/error.hpp"
#include "omlab/expr.hpp"
#include "omlab/growth.hpp"
#include "omlab/io.hpp"
#include "omlab/norms.hpp"
#include "omlab/operators.hpp"
#include "omlab/weights.hpp"

#ifndef OMLAB_VERSION
#define OMLAB_VERSION "unknown"
#endif

namespace omlab {
namespace {

constexpr std::array<double, 4> kInner{1.0, 2.0, 4.0, 8.0};

const std::vector<std::string>& known_inequalities() {
  static const std::vector<std::string> ids{"fint1", "fintp",  "fintq",  "gholder", "sandwich", "chinorm",
                                            "weaktype", "modM", "wwmodM", "wmodM", "modT",     "wwmodT",
                                            "wmodT",  "czM",    "normW",  "normS",   "normWW",   "necessity"};
  return ids;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double safe_ratio(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) return kInf;
  return lhs / rhs;
}

// ∫Φ(c|g|)w over the grid
double strong_modular(const YoungFunction& Phi, std::span<const double> g, const Weight& w, double c) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = Phi(c * std::abs(g[i]));
    if (v == kInf) return kInf;
    s += static_cast<long double>(v) * w[i];
  }
  return static_cast<double>(s * w.grid().cell_volume());
}

// sup_t Φ(t)w({c|g| > t}) over the finite level sets
double weak_modular_whole(const YoungFunction& Phi, const GridFunction& g, const Weight& w, double c) {
  const BallSample s(g, w, Region::whole(g.grid()), 1.0);
  double best = 0.0;
  for (const auto& [v, mass] : s.level_sets()) best = std::max(best, Phi(c * v) * mass);
  return best;
}

GridFunction magnitudes(const GridFunction& f) {
  GridFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

struct YoungInfo {
  std::string text;
  YoungFunction phi;
  IndexReport index;
  YoungClass cls;
  std::optional<YoungFunction> tilde;
  std::string tilde_error;
  bool i_is_one = false;
  bool I_finite = true;
  bool finite_b = false;
};

// One grid of the refinement list, with lazily built inputs and operator outputs.
struct Level {
  GridSpec spec;
  Grid grid;
  std::map<std::string, GrowthContext> contexts;
  std::map<std::string, GridFunction> functions;
  std::map<std::string, GridFunction> maximal_of;
  std::map<std::string, GridFunction> transform_of;
  std::map<std::string, GridFunction> weighted_maximal_of;
  std::map<std::string, double> norms;
  std::vector<Ball> family;
  std::vector<Ball> sampled;
  std::optional<KernelSpec> kernel;

  explicit Level(const GridSpec& s) : spec(s), grid(s.grid()) {}
};

struct Sample {
  double lhs = 0.0;
  std::array<double, 4> rhs{0.0, 0.0, 0.0, 0.0};
  bool uses_c = false;
  std::map<std::string, double> extras;
};

class Workbench {
 public:
  explicit Workbench(const Suite& suite) : suite_(suite) {
    for (const auto& text : suite.young) {
      YoungInfo info{text, parse_young(text), {}, {}, std::nullopt, {}, false, true, false};
      info.index = indices(info.phi);
      info.cls = classify(info.phi, info.index);
      info.i_is_one = !info.cls.in_nabla2;
      info.I_finite = info.cls.in_delta2 && !info.index.upper_unbounded;
      info.finite_b = info.phi.b_value() < kInf;
      try {
        info.tilde = complementary(info.phi);
      } catch (const Error& e) {
        info.tilde_error = e.what();
      }
      young_.push_back(std::move(info));
    }
    for (const auto& text : suite.growth) growth_.push_back(parse_growth(text));
    for (const auto& spec : suite.grids) levels_.emplace_back(spec);
  }

  const Suite& suite() const { return suite_; }
  std::vector<YoungInfo>& young() { return young_; }
  const GrowthFunction& growth(std::size_t k) const { return growth_[k]; }
  std::vector<Level>& levels() { return levels_; }

  const GrowthContext& context(Level& L, const std::string& w) {
    auto it = L.contexts.find(w);
    if (it == L.contexts.end()) {
      Weight weight = parse_weight(w, L.grid);
      weight.set_label(w);
      it = L.contexts.emplace(w, GrowthContext(std::move(weight))).first;
    }
    return it->second;
  }

  const GridFunction& function(Level& L, const std::string& f) {
    auto it = L.functions.find(f);
    if (it == L.functions.end()) it = L.functions.emplace(f, parse_function(f, L.grid, suite_.seed)).first;
    return it->second;
  }

  const GridFunction& maximal_of(Level& L, const std::string& f) {
    auto it = L.maximal_of.find(f);
    if (it == L.maximal_of.end()) it = L.maximal_of.emplace(f, maximal(function(L, f)).output).first;
    return it->second;
  }

  const KernelSpec& kernel(Level& L) {
    if (!L.kernel) L.kernel = L.grid.dim() == 1 ? hilbert_kernel(L.grid) : riesz_kernel(1);
    return *L.kernel;
  }

  const GridFunction& transform_of(Level& L, const std::string& f) {
    auto it = L.transform_of.find(f);
    if (it == L.transform_of.end())
      it = L.transform_of.emplace(f, magnitudes(cz_apply(function(L, f), kernel(L)).output)).first;
    return it->second;
  }

  const GridFunction& weighted_maximal_of(Level& L, const std::string& f, const std::string& w) {
    const std::string key = f + "|" + w;
    auto it = L.weighted_maximal_of.find(key);
    if (it == L.weighted_maximal_of.end())
      it = L.weighted_maximal_of.emplace(key, weighted_maximal(function(L, f), context(L, w).weight()).output).first;
    return it->second;
  }

  const std::vector<Ball>& family(Level& L) {
    if (L.family.empty()) L.family = enumerate(L.grid, suite_.ball_family);
    return L.family;
  }

  // A deterministic spread of family balls: a few per radius, always the one nearest the origin.
  const std::vector<Ball>& sampled(Level& L) {
    if (!L.sampled.empty()) return L.sampled;
    std::map<std::int64_t, std::vector<Ball>> by_radius;
    for (const auto& b : family(L)) by_radius[b.radius2].push_back(b);
    const std::size_t per = std::max<std::size_t>(
        1, static_cast<std::size_t>(suite_.balls_per_case) / std::max<std::size_t>(1, by_radius.size()));
    const std::int64_t mid = L.grid.n();
    for (const auto& [r2, balls] : by_radius) {
      auto nearest = std::min_element(balls.begin(), balls.end(), [&](const Ball& a, const Ball& b) {
        auto d = [&](const Ball& x) {
          const auto dx = x.center2[0] - mid;
          const auto dy = L.grid.dim() == 2 ? x.center2[1] - mid : 0;
          return dx * dx + dy * dy;
        };
        return d(a) < d(b);
      });
      std::set<std::size_t> picks{static_cast<std::size_t>(nearest - balls.begin())};
      for (std::size_t k = 0; k + 1 < per && balls.size() > 1; ++k)
        picks.insert(k * (balls.size() - 1) / std::max<std::size_t>(1, per - 1));
      for (auto k : picks) L.sampled.push_back(balls[k]);
    }
    return L.sampled;
  }

  double global(Level& L, const YoungInfo& y, std::size_t phi_index, const std::string& w, const std::string& tag,
                const GridFunction& g, NormKind kind) {
    const std::string key = y.text + "|" + suite_.growth[phi_index] + "|" + w + "|" + tag + "|" + to_string(kind);
    auto it = L.norms.find(key);
    if (it != L.norms.end()) return it->second;
    const double v = global_norm(g, y.phi, growth_[phi_index], context(L, w), family(L), kind).value;
    L.norms.emplace(key, v);
    return v;
  }

  // w ∈ A_p on every grid: bounded constant that does not grow under refinement.
  std::pair<bool, std::string> in_Ap(const std::string& w, double p) {
    std::ostringstream key;
    key << w << "|" << std::setprecision(6) << p;
    auto it = ap_cache_.find(key.str());
    if (it != ap_cache_.end()) return it->second;
    std::vector<double> constants;
    for (auto& L : levels_) constants.push_back(ap_constant(context(L, w).weight(), p, family(L)).constant);
    const double top = *std::max_element(constants.begin(), constants.end());
    const double growth = constants.back() / constants.front();
    std::ostringstream why;
    why << std::setprecision(4) << "[w]_A" << p << " = " << constants.back() << ", growth " << growth;
    const bool ok = top <= suite_.thresholds.ap_max && growth < suite_.thresholds.ap_growth;
    return ap_cache_[key.str()] = {ok, why.str()};
  }

  std::pair<bool, std::string> in_Ainfty(const std::string& w) {
    auto it = ainfty_cache_.find(w);
    if (it != ainfty_cache_.end()) return it->second;
    double delta = 1.0;
    for (auto& L : levels_) delta = std::min(delta, ainfty_fit(context(L, w).weight(), suite_.ball_family).delta);
    std::ostringstream why;
    why << std::setprecision(4) << "A_inf delta = " << delta;
    return ainfty_cache_[w] = {delta >= suite_.thresholds.ainfty_delta, why.str()};
  }

  std::pair<bool, std::string> in_Gdec(std::size_t phi_index, const std::string& w) {
    const std::string key = suite_.growth[phi_index] + "|" + w;
    auto it = gdec_cache_.find(key);
    if (it != gdec_cache_.end()) return it->second;
    double worst = 1.0;
    for (auto& L : levels_) {
      const auto cert = certify_Gdec(growth_[phi_index], context(L, w));
      worst = std::max({worst, cert.almost_decreasing_C, cert.almost_increasing_C});
    }
    std::ostringstream why;
    why << std::setprecision(4) << "Gdec constant " << worst;
    return gdec_cache_[key] = {worst <= suite_.thresholds.gdec_max, why.str()};
  }

  std::pair<bool, std::string> integral_condition(std::size_t phi_index, const std::string& w) {
    const std::string key = suite_.growth[phi_index] + "|" + w;
    auto it = integral_cache_.find(key);
    if (it != integral_cache_.end()) return it->second;
    double worst = 0.0;
    std::string failure;
    for (auto& L : levels_) {
      for (const auto& b : sampled(L)) {
        try {
          worst = std::max(worst, check_integral_condition(growth_[phi_index], context(L, w), b).C);
        } catch (const Error& e) {
          failure = e.what();
        }
      }
    }
    std::ostringstream why;
    if (!failure.empty()) {
      why << "(int vp x) fails: " << failure;
    } else {
      why << std::setprecision(4) << "(int vp x) constant " << worst;
    }
    const bool ok = failure.empty() && worst <= suite_.thresholds.integral_max;
    return integral_cache_[key] = {ok, why.str()};
  }

  static double ap_exponent(const YoungInfo& y) {
    if (y.i_is_one) return 1.0;
    return std::min(y.index.i_lower, 50.0);
  }

 private:
  const Suite& suite_;
  std::vector<YoungInfo> young_;
  std::vector<GrowthFunction> growth_;
  std::vector<Level> levels_;
  std::map<std::string, std::pair<bool, std::string>> ap_cache_;
  std::map<std::string, std::pair<bool, std::string>> ainfty_cache_;
  std::map<std::string, std::pair<bool, std::string>> gdec_cache_;
  std::map<std::string, std::pair<bool, std::string>> integral_cache_;
};

CaseRecord base_record(std::string id, std::string variant, const std::string& young, const std::string& growth,
                       const std::string& weight, const std::string& function) {
  CaseRecord r;
  r.inequality = std::move(id);
  r.variant = std::move(variant);
  r.young = young;
  r.growth = growth;
  r.weight = weight;
  r.function = function;
  return r;
}

CaseRecord skipped(CaseRecord r, std::size_t grids, std::string why) {
  r.verdict = Verdict::Skipped;
  r.trend.assign(grids, 0.0);
  r.note = std::move(why);
  return r;
}

// The inner constant is fixed on the coarsest grid by minimizing max(c, lhs/rhs(c)) and then
// held for the whole refinement trend.
CaseRecord finish(CaseRecord r, const std::vector<Sample>& samples, const Thresholds& t) {
  std::size_t ci = 0;
  if (!samples.empty() && samples.front().uses_c) {
    double best = kInf;
    for (std::size_t k = 0; k < kInner.size(); ++k) {
      const double cost = std::max(kInner[k], safe_ratio(samples.front().lhs, samples.front().rhs[k]));
      if (cost < best) {
        best = cost;
        ci = k;
      }
    }
  }
  r.trend.clear();
  for (const auto& s : samples) r.trend.push_back(safe_ratio(s.lhs, s.rhs[ci]));
  const auto& last = samples.back();
  r.lhs = last.lhs;
  r.rhs = last.rhs[ci];
  r.c = last.uses_c ? kInner[ci] : 1.0;
  r.ratio = r.trend.back();
  r.extras = last.extras;
  r.verdict = classify_trend(r.trend, t);
  return r;
}

Sample fixed(double lhs, double rhs) {
  Sample s;
  s.lhs = lhs;
  s.rhs.fill(rhs);
  return s;
}

template <class Fn>
Sample scanned(double lhs, Fn&& rhs_at) {
  Sample s;
  s.uses_c = true;
  s.lhs = lhs;
  for (std::size_t k = 0; k < kInner.size(); ++k) s.rhs[k] = rhs_at(kInner[k]);
  return s;
}

void annotate(CaseRecord& r, const std::pair<bool, std::string>& check, const std::string& label) {
  if (!check.first) {
    r.hypothesis = false;
    if (!r.note.empty()) r.note += "; ";
    r.note += "hypothesis violated: " + label + " (" + check.second + ")";
  }
}

// p halfway between 1 and i(Φ), q halfway between 1 and p.
std::pair<double, double> lemma_exponents(const YoungInfo& y) {
  const double p = 1.0 + 0.5 * (std::min(y.index.i_lower, 10.0) - 1.0);
  return {p, 0.5 * (1.0 + p)};
}

std::vector<CaseRecord> run_lemma_rows(Workbench& wb, const std::string& id) {
  std::vector<CaseRecord> out;
  const Suite& s = wb.suite();
  const std::size_t grids = s.grids.size();
  for (auto& y : wb.young()) {
    if (id == "sandwich") {
      CaseRecord r = base_record(id, "", y.text, "-", "-", "-");
      if (!y.tilde) {
        out.push_back(skipped(r, grids, "complementary function unavailable: " + y.tilde_error));
        continue;
      }
      double hi = 0.0, lo = kInf;
      for (int k = -60; k <= 60; ++k) {
        const double t = std::pow(10.0, k / 10.0);
        const double v = generalized_inverse(y.phi, t) * generalized_inverse(*y.tilde, t) / t;
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
      Sample smp = fixed(hi, 2.0);
      smp.extras["min"] = lo;
      out.push_back(finish(r, std::vector<Sample>(grids, smp), s.thresholds));
      continue;
    }
    for (std::size_t gi = 0; gi < s.growth.size(); ++gi) {
      for (const auto& w : s.weights) {
        const std::vector<std::string> fs = id == "chinorm" ? std::vector<std::string>{"-"} : s.functions;
        for (std::size_t fi = 0; fi < fs.size(); ++fi) {
          const auto& f = fs[fi];
          CaseRecord r = base_record(id, "", y.text, s.growth[gi], w, f);
          if (y.finite_b) {
            out.push_back(skipped(r, grids, "b(Phi) < inf is outside the harness"));
            continue;
          }
          const auto [p, q] = lemma_exponents(y);
          if ((id == "fintp" || id == "fintq") && y.i_is_one) {
            out.push_back(skipped(r, grids, "needs Phi(t)/t^p almost increasing for some p > 1; i(Phi) = 1"));
            continue;
          }
          if (id == "gholder" && !y.tilde) {
            out.push_back(skipped(r, grids, "complementary function unavailable: " + y.tilde_error));
            continue;
          }
          if (id == "fintp" || id == "fintq") {
            r.extras["p"] = p;
            if (id == "fintq") r.extras["q"] = q;
          }
          std::vector<Sample> samples;
          for (auto& L : wb.levels()) {
            const auto& ctx = wb.context(L, w);
            const auto& phi = wb.growth(gi);
            double hi = 0.0, lo = kInf;
            for (const auto& b : wb.sampled(L)) {
              double v = 0.0;
              if (id == "chinorm") {
                GridFunction chi(L.grid);
                for (auto c : Region::of(L.grid, b).cells(L.grid.n())) chi[c] = 1.0;
                v = luxemburg_norm(chi, y.phi, phi, ctx, b).value * generalized_inverse(y.phi, phi(ctx, b));
              } else if (id == "gholder") {
                const auto& g = wb.function(L, s.functions[(fi + 1) % s.functions.size()]);
                v = generalized_holder(wb.function(L, f), g, y.phi, *y.tilde, phi, ctx, b);
              } else {
                const auto checks = lemma_p_checks(wb.function(L, f), y.phi, phi, ctx, b, p, q);
                v = id == "fint1" ? checks.fint1 : (id == "fintp" ? checks.fintp : checks.fintq);
                if (id != "fint1" && !checks.p_precondition) r.extras["almost_increasing_C"] = checks.almost_increasing_C;
              }
              hi = std::max(hi, v);
              lo = std::min(lo, v);
            }
            Sample smp = fixed(hi, 1.0);
            if (id == "chinorm") smp.extras["min"] = lo;
            samples.push_back(smp);
          }
          const auto extras = r.extras;
          r = finish(r, samples, s.thresholds);
          for (const auto& [k, v] : extras) r.extras[k] = v;
          out.push_back(r);
        }
      }
    }
  }
  return out;
}

std::vector<CaseRecord> run_weaktype_rows(Workbench& wb) {
  std::vector<CaseRecord> out;
  const Suite& s = wb.suite();
  for (auto& y : wb.young())
    for (const auto& w : s.weights)
      for (const auto& f : s.functions) {
        CaseRecord r = base_record("weaktype", "", y.text, "-", w, f);
        std::vector<Sample> samples;
        for (auto& L : wb.levels()) {
          const auto id = weak_type_identity(wb.function(L, f), y.phi, wb.context(L, w).weight(),
                                             Region::whole(L.grid));
          samples.push_back(fixed(id.lhs, id.rhs));
        }
        out.push_back(finish(r, samples, s.thresholds));
      }
  return out;
}

// Which modular rows the index regime allows; empty string means applicable.
std::string regime_gate(const std::string& id, const YoungInfo& y) {
  if (y.finite_b) return "b(Phi) < inf is outside the harness";
  const bool t_row = id == "modT" || id == "wwmodT" || id == "wmodT";
  if (t_row && !y.I_finite) return "I(Phi) = inf";
  if ((id == "modM" || id == "wwmodM" || id == "modT" || id == "wwmodT") && y.i_is_one)
    return "i(Phi) = 1: only the weak-strong form applies";
  if ((id == "wmodM" || id == "wmodT") && !y.i_is_one) return "i(Phi) > 1: the stronger forms apply";
  return {};
}

Sample modular_sample(Workbench& wb, Level& L, const std::string& id, const YoungInfo& y, const std::string& w,
                      const std::string& f) {
  const auto& weight = wb.context(L, w).weight();
  const auto& fv = wb.function(L, f);
  const bool t_row = id.back() == 'T';
  const auto& image = t_row ? wb.transform_of(L, f) : wb.maximal_of(L, f);
  const bool weak_lhs = id.rfind("ww", 0) == 0 || id.rfind("wmod", 0) == 0;
  const bool weak_rhs = id.rfind("ww", 0) == 0;
  const double lhs = weak_lhs ? weak_modular_whole(y.phi, image, weight, 1.0)
                              : strong_modular(y.phi, image.values(), weight, 1.0);
  Sample smp = scanned(lhs, [&](double c) {
    return weak_rhs ? weak_modular_whole(y.phi, fv, weight, c) : strong_modular(y.phi, fv.values(), weight, c);
  });
  if (id == "wwmodM") {
    const double mw = weak_modular_whole(y.phi, wb.weighted_maximal_of(L, f, w), weight, 1.0);
    smp.extras["Mw_ratio"] = safe_ratio(mw, weak_modular_whole(y.phi, fv, weight, 1.0));
  }
  return smp;
}

std::vector<CaseRecord> run_modular_rows(Workbench& wb, const std::string& id) {
  std::vector<CaseRecord> out;
  const Suite& s = wb.suite();
  for (auto& y : wb.young())
    for (const auto& w : s.weights)
      for (const auto& f : s.functions) {
        CaseRecord r = base_record(id, id.back() == 'T' ? wb.kernel(wb.levels().front()).name : "M", y.text, "-", w, f);
        if (const auto gate = regime_gate(id, y); !gate.empty()) {
          out.push_back(skipped(r, s.grids.size(), gate));
          continue;
        }
        std::vector<Sample> samples;
        for (auto& L : wb.levels()) samples.push_back(modular_sample(wb, L, id, y, w, f));
        r = finish(r, samples, s.thresholds);
        annotate(r, wb.in_Ap(w, Workbench::ap_exponent(y)), "w in A_i(Phi)");
        out.push_back(r);
      }
  return out;
}

std::vector<CaseRecord> run_czm_rows(Workbench& wb) {
  std::vector<CaseRecord> out;
  const Suite& s = wb.suite();
  for (auto& y : wb.young())
    for (const auto& w : s.weights)
      for (const auto& f : s.functions)
        for (const std::string variant : {"modular", "weak"}) {
          CaseRecord r = base_record("czM", variant, y.text, "-", w, f);
          if (y.finite_b || !y.I_finite) {
            out.push_back(skipped(r, s.grids.size(), y.finite_b ? "b(Phi) < inf is outside the harness" : "I(Phi) = inf"));
            continue;
          }
          std::vector<Sample> samples;
          for (auto& L : wb.levels()) {
            const auto& weight = wb.context(L, w).weight();
            const auto& tf = wb.transform_of(L, f);
            const auto& mf = wb.maximal_of(L, f);
            if (variant == "modular") {
              samples.push_back(fixed(strong_modular(y.phi, tf.values(), weight, 1.0),
                                      strong_modular(y.phi, mf.values(), weight, 1.0)));
            } else {
              samples.push_back(fixed(weak_modular_whole(y.phi, tf, weight, 1.0),
                                      weak_modular_whole(y.phi, mf, weight, 1.0)));
            }
          }
          r = finish(r, samples, s.thresholds);
          annotate(r, wb.in_Ainfty(w), "w in A_inf");
          out.push_back(r);
        }
  return out;
}

// The ball of radius about L/2^k centred at the origin, in the family's own encoding.
Ball origin_ball(const Grid& g, int level) {
  const std::size_t mid = g.dim() == 1 ? static_cast<std::size_t>(g.n() / 2)
                                       : static_cast<std::size_t>(g.n() / 2) * g.n() + g.n() / 2;
  return centered_ball(g, mid, std::clamp(level, 0, g.max_level()));
}

// M(fχ_{2B}) on B. In 1D the optimal window around x ∈ B clips to the support, so the
// maximal function of the restriction on a small zero-padded grid gives the same values.
GridFunction local_maximal(const GridFunction& f, const Ball& b) {
  const Grid& g = f.grid();
  const Region twice = Region::of(g, doubled(b));
  GridFunction restricted(g);
  const int n = g.n();
  for (const auto& span : twice.spans())
    for (int i = span.lo; i < span.hi; ++i) restricted[static_cast<std::size_t>(span.row) * n + i] = f[static_cast<std::size_t>(span.row) * n + i];
  if (g.dim() == 2 || g.boundary() == Boundary::Periodic || twice.spans().size() != 1) return maximal(restricted).output;
  const auto& span = twice.spans().front();
  int m = 8;
  while (m < span.hi - span.lo) m *= 2;
  if (m >= n) return maximal(restricted).output;
  const Grid small(1, m, 0.5 * m * g.h(), Boundary::Truncate);
  GridFunction piece(small);
  for (int i = span.lo; i < span.hi; ++i) piece[static_cast<std::size_t>(i - span.lo)] = f[static_cast<std::size_t>(i)];
  const auto mp = maximal(piece).output;
  GridFunction out(g);
  for (int i = span.lo; i < span.hi; ++i) out[static_cast<std::size_t>(i)] = mp[static_cast<std::size_t>(i - span.lo)];
  return out;
}

GridFunction local_transform(const GridFunction& f, const KernelSpec& K, const Ball& b) {
  const Grid& g = f.grid();
  const int n = g.n();
  const auto twice = Region::of(g, doubled(b)).cells(n);
  GridFunction out(g);
  for (auto x : Region::of(g, b).cells(n)) {
    const auto px = g.point(x);
    long double s = 0.0L;
    for (auto y : twice)
      if (y != x && f[y] != 0.0) s += static_cast<long double>(K.kernel(px, g.point(y))) * f[y];
    out[x] = std::abs(static_cast<double>(s * g.cell_volume()));
  }
  return out;
}

std::vector<CaseRecord> run_norm_rows(Workbench& wb, const std::string& id) {
  std::vector<CaseRecord> out;
  const Suite& s = wb.suite();
  const NormKind in_kind = id == "normWW" ? NormKind::Weak : NormKind::Strong;
  const NormKind out_kind = id == "normS" ? NormKind::Strong : NormKind::Weak;
  for (auto& y : wb.young())
    for (std::size_t gi = 0; gi < s.growth.size(); ++gi)
      for (const auto& w : s.weights)
        for (const auto& f : s.functions)
          for (const std::string op : {"M", "T"}) {
            const std::string variant = op == "M" ? "M" : wb.kernel(wb.levels().front()).name;
            CaseRecord r = base_record(id, variant, y.text, s.growth[gi], w, f);
            if (y.finite_b) {
              out.push_back(skipped(r, s.grids.size(), "b(Phi) < inf is outside the harness"));
              continue;
            }
            if (op == "T" && !y.I_finite) {
              out.push_back(skipped(r, s.grids.size(), "I(Phi) = inf"));
              continue;
            }
            if (id != "normW" && y.i_is_one) {
              out.push_back(skipped(r, s.grids.size(), "i(Phi) = 1: only the strong-weak pairing applies"));
              continue;
            }
            if (op == "T") {
              const auto cond = wb.integral_condition(gi, w);
              if (!cond.first) {
                out.push_back(skipped(r, s.grids.size(), cond.second));
                continue;
              }
            }
            std::vector<Sample> samples;
            bool degenerate = false;
            for (auto& L : wb.levels()) {
              const auto& fv = wb.function(L, f);
              const auto& image = op == "M" ? wb.maximal_of(L, f) : wb.transform_of(L, f);
              const double nf = wb.global(L, y, gi, w, "f:" + f, fv, in_kind);
              const double nt = wb.global(L, y, gi, w, op + ":" + f, image, out_kind);
              Sample smp = fixed(nt, nf);
              if (nf > 0.0 && std::isfinite(nf)) {
                const auto& ctx = wb.context(L, w);
                const auto& phi = wb.growth(gi);
                GridFunction normalized(L.grid);
                for (std::size_t c = 0; c < fv.size(); ++c) normalized[c] = fv[c] / nf;
                double local_max = 0.0;
                for (int level : {1, L.grid.max_level() / 2}) {
                  const Ball b = origin_ball(L.grid, level);
                  const auto local = op == "M" ? local_maximal(normalized, b) : local_transform(normalized, wb.kernel(L), b);
                  const BallSample bs(local, ctx.weight(), Region::of(L.grid, b), phi(ctx, b));
                  const double v = out_kind == NormKind::Strong ? luxemburg_norm(y.phi, bs).value
                                                                : weak_norm(y.phi, bs).value;
                  local_max = std::max(local_max, v);
                }
                smp.extras["local_max"] = local_max;
                if (id == "normW") {
                  const Ball b = origin_ball(L.grid, L.grid.max_level() / 2);
                  std::optional<KernelSpec> k;
                  if (op == "T") k = wb.kernel(L);
                  smp.extras["tail_ratio"] = tail_bound_normalized(normalized, y.phi, phi, ctx, b, k).ratio;
                }
              } else {
                degenerate = true;
              }
              samples.push_back(smp);
            }
            r = finish(r, samples, s.thresholds);
            if (degenerate && r.ratio != 0.0) r.note = "input norm vanished on some grid";
            annotate(r, wb.in_Ap(w, Workbench::ap_exponent(y)), "w in A_i(Phi)");
            annotate(r, wb.in_Gdec(gi, w), "phi in Gdec_w");
            out.push_back(r);
          }
  return out;
}

std::vector<CaseRecord> run_necessity_rows(Workbench& wb) {
  std::vector<CaseRecord> out;
  const Suite& s = wb.suite();
  for (auto& y : wb.young())
    for (const auto& w : s.weights)
      for (const auto& f : s.functions)
        for (const std::string variant : {"modM", "weakT"}) {
          CaseRecord r = base_record("necessity", variant, y.text, "-", w, f);
          if (y.finite_b || y.i_is_one || !y.I_finite) {
            out.push_back(skipped(r, s.grids.size(), "the equivalence needs 1 < i(Phi) <= I(Phi) < inf"));
            continue;
          }
          std::vector<Sample> samples;
          for (auto& L : wb.levels())
            samples.push_back(modular_sample(wb, L, variant == "modM" ? "modM" : "wmodT", y, w, f));
          r = finish(r, samples, s.thresholds);
          const auto ap = wb.in_Ap(w, Workbench::ap_exponent(y));
          r.hypothesis = ap.first;
          r.extras["expect_blowup"] = ap.first ? 0.0 : 1.0;
          r.note = ap.second;
          out.push_back(r);
        }
  return out;
}

std::vector<CaseRecord> run_ids(const Suite& suite, const std::vector<std::string>& ids) {
  Workbench wb(suite);
  std::vector<CaseRecord> out;
  for (const auto& id : ids) {
    std::vector<CaseRecord> rows;
    if (id == "fint1" || id == "fintp" || id == "fintq" || id == "gholder" || id == "sandwich" || id == "chinorm") {
      rows = run_lemma_rows(wb, id);
    } else if (id == "weaktype") {
      rows = run_weaktype_rows(wb);
    } else if (id == "czM") {
      rows = run_czm_rows(wb);
    } else if (id == "normW" || id == "normS" || id == "normWW") {
      rows = run_norm_rows(wb, id);
    } else if (id == "necessity") {
      rows = run_necessity_rows(wb);
    } else {
      rows = run_modular_rows(wb, id);
    }
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].index = k;
  return out;
}

nlohmann::ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::nan("");
  }
  return j.get<double>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable:
      return "stable";
    case Verdict::Blowup:
      return "blowup";
    case Verdict::Skipped:
      return "skipped";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return {};
}

Verdict parse_verdict(std::string_view text) {
  if (text == "stable") return Verdict::Stable;
  if (text == "blowup") return Verdict::Blowup;
  if (text == "skipped") return Verdict::Skipped;
  if (text == "inconclusive") return Verdict::Inconclusive;
  throw ParseError("unknown verdict '" + std::string(text) + "'");
}

Verdict classify_trend(const std::vector<double>& trend, const Thresholds& t) {
  if (trend.empty()) return Verdict::Skipped;
  for (double v : trend)
    if (!std::isfinite(v)) return Verdict::Inconclusive;
  const double first = trend.front(), last = trend.back();
  const auto [lo, hi] = std::minmax_element(trend.begin(), trend.end());
  if (*hi == 0.0) return Verdict::Stable;
  if (first > 0.0 && last / first >= t.blowup) return Verdict::Blowup;
  if (*lo == 0.0) return Verdict::Inconclusive;
  return *hi / *lo < t.drift ? Verdict::Stable : Verdict::Inconclusive;
}

std::string config_hash(const nlohmann::json& config) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.dump());
  return os.str();
}

Suite parse_suite(const nlohmann::json& config) {
  static const std::set<std::string> keys{"grids",       "young", "growth", "weights",      "functions",
                                          "inequalities", "thresholds", "seed", "ball_family", "balls_per_case"};
  if (!config.is_object()) throw ParseError("suite config must be a JSON object");
  for (const auto& [k, v] : config.items())
    if (!keys.count(k)) throw ParseError("suite config: unknown key '" + k + "'");
  Suite s;
  s.source = config;
  try {
    for (const auto& g : config.at("grids")) {
      GridSpec spec;
      spec.dim = g.value("dim", 1);
      spec.n = g.value("N", 1024);
      spec.half_extent = g.value("L", 1.0);
      spec.boundary = parse_boundary(g.value("boundary", std::string("truncate")));
      (void)spec.grid();
      s.grids.push_back(spec);
    }
    s.young = config.at("young").get<std::vector<std::string>>();
    s.growth = config.value("growth", std::vector<std::string>{"invwball"});
    s.weights = config.value("weights", std::vector<std::string>{"one"});
    s.functions = config.at("functions").get<std::vector<std::string>>();
    s.inequalities = config.at("inequalities").get<std::vector<std::string>>();
    s.seed = config.value("seed", s.seed);
    s.balls_per_case = config.value("balls_per_case", s.balls_per_case);
    if (config.contains("thresholds")) {
      const auto& t = config["thresholds"];
      s.thresholds.blowup = t.value("blowup", s.thresholds.blowup);
      s.thresholds.drift = t.value("drift", s.thresholds.drift);
      s.thresholds.ap_max = t.value("ap_max", s.thresholds.ap_max);
      s.thresholds.ap_growth = t.value("ap_growth", s.thresholds.ap_growth);
      s.thresholds.gdec_max = t.value("gdec_max", s.thresholds.gdec_max);
      s.thresholds.integral_max = t.value("integral_max", s.thresholds.integral_max);
      s.thresholds.ainfty_delta = t.value("ainfty_delta", s.thresholds.ainfty_delta);
    }
    if (config.contains("ball_family")) {
      const auto& b = config["ball_family"];
      const auto kind = b.value("kind", std::string("lattice"));
      const int lo = b.value("min_level", 0), hi = b.value("max_level", -1);
      if (kind == "lattice") {
        s.ball_family = BallFamily::lattice(lo, hi);
      } else if (kind == "dense") {
        s.ball_family = BallFamily::dense(lo, hi);
      } else {
        throw ParseError("ball_family.kind must be lattice or dense");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("suite config: ") + e.what());
  }
  if (s.grids.empty()) throw ParseError("suite config: grids is empty");
  for (const auto& g : s.grids)
    if (g.dim != s.grids.front().dim) throw ParseError("suite config: all grids must share one dimension");
  if (s.young.empty() || s.functions.empty() || s.growth.empty() || s.weights.empty())
    throw ParseError("suite config: young, growth, weights and functions must be non-empty");
  for (const auto& id : s.inequalities)
    if (std::find(known_inequalities().begin(), known_inequalities().end(), id) == known_inequalities().end())
      throw ParseError("suite config: unknown inequality id '" + id + "'");
  return s;
}

Suite load_suite(const std::string& path) {
  const auto text = io::read_text(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
  return parse_suite(doc);
}

GridFunction parse_function(std::string_view text, const Grid& g, std::uint64_t seed) {
  const auto node = expr::parse(text);
  GridFunction f(g);
  auto radius = [&](std::size_t i) {
    const auto p = g.point(i);
    return std::sqrt(p[0] * p[0] + (g.dim() == 2 ? p[1] * p[1] : 0.0));
  };
  auto arg = [&](std::size_t k, double fallback) {
    return node.items.size() > k ? node.items[k].as_number() : fallback;
  };
  if (expr::names(node, "indicator")) {
    expr::expect_arity(node, 2, 2);
    const double a = arg(0, 0), b = arg(1, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto p = g.point(i);
      const bool in = p[0] >= a && p[0] <= b && (g.dim() == 1 || (p[1] >= a && p[1] <= b));
      f[i] = in ? 1.0 : 0.0;
    }
  } else if (expr::names(node, "disk")) {
    expr::expect_arity(node, 1, 1);
    const double r = arg(0, 1);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = radius(i) < r ? 1.0 : 0.0;
  } else if (expr::names(node, "spike")) {
    expr::expect_arity(node, 1, 1);
    const double a = arg(0, 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double r = radius(i);
      f[i] = r <= 1.0 ? std::pow(r, -a) : 0.0;
    }
  } else if (expr::names(node, "bump")) {
    expr::expect_arity(node, 0, 1);
    const double r = arg(0, 1);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double s = radius(i) / r;
      f[i] = s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    }
  } else if (expr::names(node, "randsign")) {
    expr::expect_arity(node, 0, 1);
    const double r = arg(0, kInf);
    std::mt19937_64 rng(seed ^ fnv1a(text));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double v = coin(rng) ? 1.0 : -1.0;
      f[i] = radius(i) <= r ? v : 0.0;
    }
  } else if (expr::names(node, "cell")) {
    expr::expect_arity(node, 0, 0);
    const std::size_t mid = g.n() / 2;
    f[g.dim() == 1 ? mid : mid * g.n() + mid] = 1.0;
  } else if (expr::names(node, "sin") || expr::names(node, "cos")) {
    expr::expect_arity(node, 1, 1);
    const double k = arg(0, 1);
    const bool is_sin = expr::names(node, "sin");
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double t = k * std::numbers::pi * g.point(i)[0] / g.half_extent();
      f[i] = is_sin ? std::sin(t) : std::cos(t);
    }
  } else if (expr::names(node, "const")) {
    expr::expect_arity(node, 1, 1);
    const double c = arg(0, 0);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = c;
  } else if (expr::names(node, "file")) {
    expr::expect_arity(node, 1, 1);
    GridFunction loaded = read_grid_function(node.items[0].text, g.half_extent(), g.boundary());
    require_same_grid(loaded.grid(), g, "function file");
    return loaded;
  } else {
    throw ParseError("unknown test function '" + std::string(text) + "'");
  }
  return f;
}

std::vector<CaseRecord> run_modular_suite(const Suite& suite) {
  return run_ids(suite, {"modM", "wwmodM", "wmodM", "modT", "wwmodT", "wmodT"});
}

std::vector<CaseRecord> run_cz_comparison(const Suite& suite) { return run_ids(suite, {"czM"}); }

std::vector<CaseRecord> run_norm_suite(const Suite& suite) { return run_ids(suite, {"normW", "normS", "normWW"}); }

std::vector<CaseRecord> run_necessity_probe(const Suite& suite) { return run_ids(suite, {"necessity"}); }

Report run_suite(const Suite& suite) {
  Report r;
  r.seed = suite.seed;
  r.config_hash = config_hash(suite.source);
  r.versions = {{"omlab", OMLAB_VERSION},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"fftw", fftw_version}};
  r.cases = run_ids(suite, suite.inequalities);
  return r;
}

nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json doc;
  doc["meta"]["seed"] = r.seed;
  doc["meta"]["config_hash"] = r.config_hash;
  doc["meta"]["versions"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.versions) doc["meta"]["versions"][k] = v;
  doc["cases"] = nlohmann::ordered_json::array();
  for (const auto& c : r.cases) {
    nlohmann::ordered_json j;
    j["index"] = c.index;
    j["inequality"] = c.inequality;
    j["variant"] = c.variant;
    j["young"] = c.young;
    j["growth"] = c.growth;
    j["weight"] = c.weight;
    j["function"] = c.function;
    j["hypothesis"] = c.hypothesis;
    j["lhs"] = number(c.lhs);
    j["rhs"] = number(c.rhs);
    j["c"] = number(c.c);
    j["ratio"] = number(c.ratio);
    j["trend"] = nlohmann::ordered_json::array();
    for (double v : c.trend) j["trend"].push_back(number(v));
    j["verdict"] = to_string(c.verdict);
    j["note"] = c.note;
    j["extras"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.extras) j["extras"][k] = number(v);
    doc["cases"].push_back(std::move(j));
  }
  return doc;
}

Report report_from_json(const nlohmann::json& j) {
  Report r;
  try {
    r.seed = j.at("meta").at("seed").get<std::uint64_t>();
    r.config_hash = j.at("meta").at("config_hash").get<std::string>();
    for (const auto& [k, v] : j.at("meta").at("versions").items()) r.versions[k] = v.get<std::string>();
    for (const auto& c : j.at("cases")) {
      CaseRecord rec;
      rec.index = c.at("index").get<std::size_t>();
      rec.inequality = c.at("inequality").get<std::string>();
      rec.variant = c.at("variant").get<std::string>();
      rec.young = c.at("young").get<std::string>();
      rec.growth = c.at("growth").get<std::string>();
      rec.weight = c.at("weight").get<std::string>();
      rec.function = c.at("function").get<std::string>();
      rec.hypothesis = c.at("hypothesis").get<bool>();
      rec.lhs = number_from(c.at("lhs"));
      rec.rhs = number_from(c.at("rhs"));
      rec.c = number_from(c.at("c"));
      rec.ratio = number_from(c.at("ratio"));
      for (const auto& v : c.at("trend")) rec.trend.push_back(number_from(v));
      rec.verdict = parse_verdict(c.at("verdict").get<std::string>());
      rec.note = c.at("note").get<std::string>();
      for (const auto& [k, v] : c.at("extras").items()) rec.extras[k] = number_from(v);
      r.cases.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

std::string to_csv(const Report& r) {
  std::ostringstream os;
  os << "index,inequality,variant,young,growth,weight,function,hypothesis,lhs,rhs,c,ratio,trend,verdict,note,extras\n";
  for (const auto& c : r.cases) {
    std::string trend, extras;
    for (std::size_t k = 0; k < c.trend.size(); ++k) trend += (k ? ";" : "") + csv_number(c.trend[k]);
    for (const auto& [k, v] : c.extras) extras += (extras.empty() ? "" : ";") + k + "=" + csv_number(v);
    os << c.index << ',' << csv_field(c.inequality) << ',' << csv_field(c.variant) << ',' << csv_field(c.young) << ','
       << csv_field(c.growth) << ',' << csv_field(c.weight) << ',' << csv_field(c.function) << ','
       << (c.hypothesis ? "true" : "false") << ',' << csv_number(c.lhs) << ',' << csv_number(c.rhs) << ','
       << csv_number(c.c) << ',' << csv_number(c.ratio) << ',' << trend << ',' << to_string(c.verdict) << ','
       << csv_field(c.note) << ',' << csv_field(extras) << '\n';
  }
  return os.str();
}

void emit_report(const Report& r, const std::string& path, std::string_view format) {
  if (format == "json") {
    io::write_text(path, to_json(r).dump(2) + "\n");
  } else if (format == "csv") {
    io::write_text(path, to_csv(r));
  } else {
    throw Error("emit_report: unknown format '" + std::string(format) + "'");
  }
}

}  // namespace omlab
