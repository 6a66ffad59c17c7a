#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "omlab/grid.hpp"
#include "omlab/young.hpp"

namespace omlab {

// Weight plus cached ball sums; the evaluation context of w(B)-dependent growth functions.
class GrowthContext {
 public:
  explicit GrowthContext(Weight w);

  [[nodiscard]] const Grid& grid() const { return weight_.grid(); }
  [[nodiscard]] const Weight& weight() const { return weight_; }
  [[nodiscard]] double weight_of(const Ball& b) const { return sums_.sum(Region::of(grid(), b)); }

 private:
  Weight weight_;
  PrefixSums sums_;
};

// φ(x, r) on grid centres × radii.
class GrowthFunction {
 public:
  struct InvWBall {};
  struct WBallPow {
    double kappa;
  };
  struct RPow {
    double beta;
  };
  struct Mul {
    std::shared_ptr<const GrowthFunction> left;
    std::shared_ptr<const GrowthFunction> right;
  };
  // (r, φ) samples, log-log interpolation
  struct Table {
    std::vector<double> r;
    std::vector<double> v;
  };
  using Kind = std::variant<InvWBall, WBallPow, RPow, Mul, Table>;

  explicit GrowthFunction(Kind kind);

  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] bool uses_weight() const;
  [[nodiscard]] std::string describe() const;

  // φ(B)
  [[nodiscard]] double operator()(const GrowthContext& ctx, const Ball& b) const;
  // φ(x, r) with x the ball centre in half-cell units and real r > 0; radii past the
  // box use the power law fitted on the last decade.
  [[nodiscard]] double at(const GrowthContext& ctx, std::array<std::int64_t, 2> center2, double r) const;
  // Exponent of the power law used past the box, or the exact exponent for RPow products.
  [[nodiscard]] double tail_slope(const GrowthContext& ctx, std::array<std::int64_t, 2> center2) const;

 private:
  [[nodiscard]] double in_box(const GrowthContext& ctx, std::array<std::int64_t, 2> center2, double r) const;
  Kind kind_;
};

GrowthFunction invwball();
GrowthFunction wballpow(double kappa);
GrowthFunction rpow(double beta);
GrowthFunction mul(GrowthFunction a, GrowthFunction b);
GrowthFunction growth_table_from_csv(const std::string& path);

// Grammar: invwball, wballpow(kappa), rpow(beta), mul(g1,g2), table(path)
GrowthFunction parse_growth(std::string_view text);

struct ClassCertificate {
  // sup φ(x,s)/φ(x,r), r < s
  double almost_decreasing_C = 1.0;
  // sup φ(x,r)w(B(x,r)) / φ(x,s)w(B(x,s)), r < s
  double almost_increasing_C = 1.0;
  // sup max(φ(x,r)/φ(x,2r), φ(x,2r)/φ(x,r))
  double doubling_C = 1.0;
  // sup w(B(x,2r))/w(B(x,r)) on the sampled pairs
  double weight_doubling = 1.0;
  std::size_t centers = 0;
  std::size_t pairs = 0;
};

// Centres subsampled to at most max_centers unless full is set; all dyadic radius pairs.
ClassCertificate certify_Gdec(const GrowthFunction& phi, const GrowthContext& ctx, std::size_t max_centers = 256,
                              bool full = false);

struct IntegralCondition {
  double C = 0.0;
  double integral = 0.0;
  double tail_slope = 0.0;
  double r_max = 0.0;
  bool analytic = false;
};

// ∫_r^∞ φ(x,t) dt/t / φ(x,r). Throws TailNotExtrapolable when the tail slope is ≥ 0.
IntegralCondition check_integral_condition(const GrowthFunction& phi, const GrowthContext& ctx, const Ball& b,
                                           int nodes_per_decade = 64, double r_max_factor = 1024.0);

// ∫_r^∞ Φ⁻¹(φ(x,t)) dt/t / Φ⁻¹(φ(x,r)).
IntegralCondition check_lemma_int_phi_inv(const GrowthFunction& phi, const YoungFunction& Phi,
                                          const GrowthContext& ctx, const Ball& b, int nodes_per_decade = 64,
                                          double r_max_factor = 1024.0);

}  // namespace omlab
