#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omlab/grid.hpp"
#include "omlab/growth.hpp"
#include "omlab/young.hpp"

namespace omlab {

enum class NormKind { Strong, Weak };

std::string to_string(NormKind k);

struct NormResult {
  double value = 0.0;
  NormKind kind = NormKind::Strong;
  // the ball of a per-ball norm, or the maximizing ball of a global norm
  Ball ball;
  bool global = false;
  int iterations = 0;
  std::pair<double, double> bracket{0.0, 0.0};
  // global norms: balls solved individually after the modular pre-check
  std::size_t balls_solved = 0;
  std::size_t balls_total = 0;
};

// (|f|, w) restricted to a ball, with the normalization φ(B)w(B).
class BallSample {
 public:
  BallSample(const GridFunction& f, const Weight& w, const Region& region, double phi_b);

  [[nodiscard]] std::span<const double> magnitudes() const { return mag_; }
  [[nodiscard]] std::span<const double> weights() const { return wt_; }
  [[nodiscard]] double weight_total() const { return w_total_; }
  [[nodiscard]] double normalization() const { return phi_b_ * w_total_; }
  [[nodiscard]] double phi_b() const { return phi_b_; }
  [[nodiscard]] double max_magnitude() const { return max_; }

  // distinct positive levels v_1 < … < v_m with w({|f| ≥ v_k})
  [[nodiscard]] const std::vector<std::pair<double, double>>& level_sets() const;

 private:
  std::vector<double> mag_;
  std::vector<double> wt_;
  double w_total_ = 0.0;
  double phi_b_ = 1.0;
  double max_ = 0.0;
  mutable std::vector<std::pair<double, double>> levels_;
  mutable bool levels_ready_ = false;
};

// (1/(φ(B)w(B))) Σ_B Φ(|f|/λ) w hⁿ
[[nodiscard]] double modular(const YoungFunction& Phi, const BallSample& s, double lambda);
// (1/(φ(B)w(B))) sup_t Φ(t) w(B, f/λ, t), exact over the level sets
[[nodiscard]] double weak_modular(const YoungFunction& Phi, const BallSample& s, double lambda);

[[nodiscard]] double modular(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                             const GrowthContext& ctx, const Ball& b, double lambda);

[[nodiscard]] NormResult luxemburg_norm(const YoungFunction& Phi, const BallSample& s);
[[nodiscard]] NormResult weak_norm(const YoungFunction& Phi, const BallSample& s);

[[nodiscard]] NormResult luxemburg_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                        const GrowthContext& ctx, const Ball& b);
[[nodiscard]] NormResult weak_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                   const GrowthContext& ctx, const Ball& b);

// max_k v_k / Φ⁻¹(φ(B)w(B)/w({|f| ≥ v_k})): the weak norm without root finding.
[[nodiscard]] double weak_norm_by_levels(const YoungFunction& Phi, const BallSample& s);

struct WeakTypeIdentity {
  // sup_t Φ(t) w(G, f, t)
  double lhs = 0.0;
  // sup_t t·w(G, Φ(|f|), t)
  double rhs = 0.0;
};

[[nodiscard]] WeakTypeIdentity weak_type_identity(const GridFunction& f, const YoungFunction& Phi, const Weight& w,
                                                  const Region& region);

// sup of the per-ball norm over the family.
[[nodiscard]] NormResult global_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                     const GrowthContext& ctx, std::span<const Ball> balls, NormKind kind);
[[nodiscard]] NormResult global_norm(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                     const GrowthContext& ctx, const BallFamily& family, NormKind kind);

// [(1/(φ(B)w(B)))∫_B|fg|w] / [‖f‖_{Φ,φ,w,B}·‖g‖_{Φ̃,φ,w,B}], 0 when either norm vanishes.
[[nodiscard]] double generalized_holder(const GridFunction& f, const GridFunction& g, const YoungFunction& Phi,
                                        const YoungFunction& Phi_tilde, const GrowthFunction& phi,
                                        const GrowthContext& ctx, const Ball& b);
[[nodiscard]] double generalized_holder(const GridFunction& f, const GridFunction& g, const YoungFunction& Phi,
                                        const GrowthFunction& phi, const GrowthContext& ctx, const Ball& b);

struct LemmaPChecks {
  // (1/w(B))∫|f|w / (Φ⁻¹(φ(B))‖f‖)
  double fint1 = 0.0;
  // ((1/w(B))∫|f|^p w)^{1/p} / (Φ⁻¹(φ(B))‖f‖)
  double fintp = 0.0;
  // ((1/w(B))∫|f|^q w)^{1/q} / (Φ⁻¹(φ(B))‖f‖_weak)
  double fintq = 0.0;
  // sup_{s<t} (Φ(s)/s^p)/(Φ(t)/t^p); the precondition of the p and q ratios
  double almost_increasing_C = 0.0;
  bool p_precondition = false;
  bool q_precondition = false;
};

[[nodiscard]] LemmaPChecks lemma_p_checks(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                          const GrowthContext& ctx, const Ball& b, double p, double q,
                                          double almost_increasing_limit = 100.0);

// max over pairs of ‖f+g‖_weak / (‖f‖_weak + ‖g‖_weak)
[[nodiscard]] double weak_quasi_triangle(std::span<const GridFunction> fs, std::span<const GridFunction> gs,
                                         const YoungFunction& Phi, const GrowthFunction& phi,
                                         const GrowthContext& ctx, const Ball& b);

}  // namespace omlab
