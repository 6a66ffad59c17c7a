#pragma once

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace omlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// An element of 𝒫̄: increasing, left continuous on [0, b), Φ(0) = 0, Φ(∞) = ∞.
// Values are immutable; nested kinds share their inner function.
class YoungFunction {
 public:
  // coef·t^p
  struct Power {
    double p;
    double coef = 1.0;
  };
  // t^p·log(e + t)^q
  struct PowerLog {
    double p;
    double q;
  };
  // alpha·t^beta + gamma on (start, next start]
  struct Segment {
    double start;
    double alpha;
    double beta;
    double gamma;
  };
  struct Piecewise {
    std::vector<Segment> segments;
  };
  // Samples (t, Φ(t)), t ascending. Log-log interpolation between positive
  // samples, linear next to a zero sample.
  struct Table {
    std::vector<double> t;
    std::vector<double> v;
  };
  // inner on [0, b], ∞ beyond. A null inner is the zero function.
  struct Capped {
    std::shared_ptr<const YoungFunction> inner;
    double b;
  };
  // inner(t / scale)
  struct Dilated {
    std::shared_ptr<const YoungFunction> inner;
    double scale;
  };
  using Kind = std::variant<Power, PowerLog, Piecewise, Table, Capped, Dilated>;

  explicit YoungFunction(Kind kind);

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] double a_value() const { return a_value_; }
  [[nodiscard]] double b_value() const { return b_value_; }
  [[nodiscard]] bool convex() const { return convex_; }
  // Points where Φ may fail to be differentiable.
  [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] std::string describe() const;

 private:
  Kind kind_;
  double a_value_ = 0.0;
  double b_value_ = kInf;
  bool convex_ = false;
  std::vector<double> breakpoints_;
};

YoungFunction power(double p, double coef = 1.0);
YoungFunction power_log(double p, double q);
YoungFunction piecewise(std::vector<YoungFunction::Segment> segments);
YoungFunction table(std::vector<double> t, std::vector<double> v);
YoungFunction table_from_csv(const std::string& path);
YoungFunction capped(YoungFunction inner, double b);
YoungFunction zero_until(double b);
// t ↦ Φ(t/scale)
YoungFunction dilated(YoungFunction inner, double scale);
// t² on [0,1/4], t/2 − 1/16 on (1/4,1/2], t²/2 + 1/16 beyond.
YoungFunction kinked_quadratic();

// Grammar: power(p[,c]) powerlog(p,q) piecewise([(t0,a,b,g),...]) table(path)
// capped(expr,b) dilate(expr,c) kinked
YoungFunction parse_young(std::string_view text);

[[nodiscard]] double evaluate(const YoungFunction& phi, double t);
// inf{t ≥ 0 : Φ(t) > u}
[[nodiscard]] double generalized_inverse(const YoungFunction& phi, double u);
// sup{tu − Φ(u)}. Throws NonConvexInput.
[[nodiscard]] YoungFunction complementary(const YoungFunction& phi);

struct IndexGrid {
  double t_min = 1e-8;
  double t_max = 1e8;
  int t_per_decade = 400;
  // λ = 10^{±k/lambda_per_decade}, k = 1..lambda_steps
  int lambda_per_decade = 4;
  int lambda_steps = 36;
};

// sup over the t grid of Φ(λt)/Φ(t); a lower bound of h_Φ(λ).
[[nodiscard]] double dilation(const YoungFunction& phi, double lambda, const IndexGrid& grid = {});

struct IndexReport {
  double i_lower = 0.0;
  double I_upper = 0.0;
  double a_slope = 0.0;
  double b_slope = 0.0;
  std::vector<std::pair<double, double>> h_samples;
  std::pair<double, double> lambda_range;
  std::pair<double, double> t_range;
  int t_per_decade = 0;
  // I exceeded the Δ₂ proxy: the grid can only say I ≥ I_upper.
  bool upper_unbounded = false;
  // Fit of Φ(λt) ≤ C·max(λ^p, λ^q)·Φ(t) with p = i − 0.1, q = I + 0.1.
  double fit_p = 0.0;
  double fit_q = 0.0;
  double fit_C = 0.0;
};

[[nodiscard]] IndexReport indices(const YoungFunction& phi, const IndexGrid& grid = {});

struct ClassThresholds {
  double nabla2_margin = 0.02;
  double delta2_max_index = 50.0;
  double quasi_convex_max_constant = 100.0;
};

struct YoungClass {
  bool in_quasi_convex = false;
  bool in_delta2 = false;
  bool in_nabla2 = false;
  // sup_{s<t} (Φ(s)/s)/(Φ(t)/t) on the t grid
  double almost_increasing_constant = 0.0;
  ClassThresholds thresholds;
};

[[nodiscard]] YoungClass classify(const YoungFunction& phi, const IndexReport& report,
                                  const ClassThresholds& thresholds = {});

// sup over the t grid of Φ(t)/t^p on s < t relative to later values; used to
// test “t ↦ Φ(t)/t^p is almost increasing”.
[[nodiscard]] double almost_increasing_constant(const YoungFunction& phi, double p,
                                                const IndexGrid& grid = {});

// Log-spaced t grid with every breakpoint of phi inside the range inserted.
[[nodiscard]] std::vector<double> index_t_grid(const YoungFunction& phi, const IndexGrid& grid);

}  // namespace omlab
