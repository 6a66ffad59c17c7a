#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "omlab/grid.hpp"

namespace omlab {

// Grammar: one, abspow(a) = |x|^a, shiftpow(a) = (1+|x|)^a,
// prodpow(a1,a2) = |x1|^a1·|x2|^a2 (2D), table(path)
Weight parse_weight(std::string_view text, const Grid& g);

struct ApReport {
  double p = 1.0;
  double constant = 1.0;
  Ball argmax_ball;
  std::string ball_family_id;
  std::vector<double> per_ball;
};

// sup_B (avg_B w)(avg_B w^{−1/(p−1)})^{p−1}; for p = 1, (avg_B w)·max_B w⁻¹.
ApReport ap_constant(const Weight& w, double p, const BallFamily& family, bool keep_per_ball = false);
ApReport ap_constant(const Weight& w, double p, std::span<const Ball> balls, bool keep_per_ball = false);

struct AInftyFit {
  double delta = 1.0;
  double C = 1.0;
  // (|E|/|B|, w(E)/w(B))
  std::vector<std::pair<double, double>> samples;
  double ls_slope = 1.0;
  double delta_at_cap = 1.0;
  double c_cap = 1e3;
};

// Deterministic subsets per ball: the k smallest-w and k largest-w cells for
// dyadic k, plus concentric sub-balls.
AInftyFit ainfty_fit(const Weight& w, const BallFamily& family, int subsets_per_ball = 16, int max_balls = 64);

// (avg_B|f|)^p / ([w]_{A_p}·(1/w(B))∫_B|f|^p w)
double check_weighted_average(const Weight& w, double p, double ap, const GridFunction& f, const Ball& b);

// sup_B w(kB)/w(B) over the family, with kB snapped as in dilate.
double dilation_measure_ratio(const Weight& w, const BallFamily& family, double k);

struct OpennessScan {
  std::vector<double> r_values;
  std::vector<double> coarse;
  std::vector<double> fine;
  // smallest r whose constant drifts by less than `drift` between the grids; p if none
  double smallest_stable_r = 0.0;
};

OpennessScan openness_scan(const Weight& coarse, const Weight& fine, double p, const BallFamily& family,
                           double drift = 2.0);

}  // namespace omlab
