#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "omlab/grid.hpp"
#include "omlab/growth.hpp"
#include "omlab/norms.hpp"
#include "omlab/young.hpp"

namespace omlab {

enum class OperatorMethod { ExactBruteforce, PrefixFast, FftMultiplier, TruncatedQuadrature };

std::string to_string(OperatorMethod m);

struct OperatorResult {
  GridFunction output;
  OperatorMethod method;
  // largest ball radius (maximal) or the box diameter (quadrature); 0 for the FFT path
  double truncation_radius = 0.0;
};

// Mf(x) = max over family balls containing x (or centred at x) of the |f| average.
OperatorResult maximal(const GridFunction& f, const BallFamily& balls = BallFamily::windows(), bool centered = false);
OperatorResult maximal_bruteforce(const GridFunction& f, const BallFamily& balls = BallFamily::windows(),
                                  bool centered = false);
// M_w f(x) = max over balls containing x of (1/w(B))∫_B|f|w.
OperatorResult weighted_maximal(const GridFunction& f, const Weight& w,
                                const BallFamily& balls = BallFamily::windows(), bool centered = false);
OperatorResult weighted_maximal_bruteforce(const GridFunction& f, const Weight& w,
                                           const BallFamily& balls = BallFamily::windows(), bool centered = false);

using Point = std::array<double, 2>;

struct KernelSpec {
  std::string name;
  int dim = 1;
  std::function<double(Point x, Point y)> kernel;
  std::function<double(double t)> omega;
  // K(x, y) depends on x − y only; enables the FFT convolution path.
  bool translation_invariant = true;
  // Period of the box when the kernel is the periodized one, else 0.
  double period = 0.0;
};

// 1/(π(x−y)); on a periodic grid the periodized kernel (1/(2L))cot(π(x−y)/(2L)).
KernelSpec hilbert_kernel(const Grid& g);
// c₂(x_j − y_j)/|x−y|³ with c₂ = 1/(2π), j ∈ {1, 2}.
KernelSpec riesz_kernel(int component);
// JSON: {"dim", "kernel": formula in x,y (1D) or x1,x2,y1,y2, "omega": formula in t,
// "translation_invariant"}.
KernelSpec kernel_from_file(const std::string& path);
// hilbert | riesz1 | riesz2 | kernel(path)
KernelSpec parse_kernel(std::string_view text, const Grid& g);

struct KernelReport {
  double C_size = 0.0;
  double C_smooth = 0.0;
  double dini_integral = 0.0;
  std::size_t pairs = 0;
  std::size_t triples = 0;
};

// Sampled size and regularity constants; ∫₀¹ω(t)/t dt by quadrature. Throws ModulusNotDini.
KernelReport validate_kernel(const KernelSpec& K, int samples, std::uint64_t seed = 0x5eed);

// ∫_ε^1 ω(t)/t dt with ε → 0 by refinement; throws ModulusNotDini when it keeps growing.
double dini_integral(const std::function<double(double)>& omega);

// sup over random mean-zero fields of ‖Tf‖₂/‖f‖₂; an empirical number, not a certificate.
double empirical_l2_ratio(const KernelSpec& K, const Grid& g, int trials, std::uint64_t seed = 0x5eed);

// Σ_{y∈region, y≠x} K(x,y) f(y) hⁿ for every cell x.
OperatorResult cz_local(const GridFunction& f, const KernelSpec& K, const Region& region);
// Same sum over the whole grid.
OperatorResult cz_apply(const GridFunction& f, const KernelSpec& K);
// Direct O(N²) double loop; the oracle of the convolution path.
OperatorResult cz_direct(const GridFunction& f, const KernelSpec& K);
// Periodic 1D Hilbert transform via the multiplier −i·sgn(k).
OperatorResult hilbert_fft(const GridFunction& f);

// cz_local(fχ_{2B}) + Σ_{y∉2B} K(x,y)f(y)hⁿ for x ∈ B, 0 elsewhere.
GridFunction cz_global(const GridFunction& f, const KernelSpec& K, const Ball& b);

// 2B: same centre, radius2 doubled.
[[nodiscard]] Ball doubled(const Ball& b);

struct TailBound {
  double ratio = 0.0;
  double sup_tail = 0.0;
  double phi_inv = 0.0;
  double norm = 0.0;
};

// sup_{x∈B} of M(fχ_{(2B)ᶜ}) (K empty) or Σ_{y∉2B}|K(x,y)f(y)|hⁿ, over Φ⁻¹(φ(B)), with f
// first normalized to 1 in the given global norm. Throws when the norm is 0 or infinite.
TailBound tail_bounds(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                      const GrowthContext& ctx, const Ball& b, const std::optional<KernelSpec>& K, NormKind kind,
                      const BallFamily& norm_family = BallFamily::lattice());
// Same with f already normalized; norm is reported as 1.
TailBound tail_bound_normalized(const GridFunction& f, const YoungFunction& Phi, const GrowthFunction& phi,
                                const GrowthContext& ctx, const Ball& b, const std::optional<KernelSpec>& K);

}  // namespace omlab
