#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "omlab/grid.hpp"
#include "omlab/young.hpp"

namespace omlab {

struct GridSpec {
  int dim = 1;
  int n = 1024;
  double half_extent = 1.0;
  Boundary boundary = Boundary::Truncate;

  [[nodiscard]] Grid grid() const { return Grid(dim, n, half_extent, boundary); }
};

struct Thresholds {
  // last/first trend ratio at or above which a row blows up
  double blowup = 4.0;
  // max/min trend ratio below which a row is stable
  double drift = 2.0;
  // empirical A_p: the constant must stay below ap_max and grow by less than ap_growth over the grids
  double ap_max = 100.0;
  double ap_growth = 1.5;
  // class constants of φ ∈ 𝒢dec_w and of (int vp x)
  double gdec_max = 100.0;
  double integral_max = 100.0;
  // A_∞ rows need a fitted δ above this
  double ainfty_delta = 0.01;
};

struct Suite {
  std::vector<GridSpec> grids;
  std::vector<std::string> young;
  std::vector<std::string> growth;
  std::vector<std::string> weights;
  std::vector<std::string> functions;
  std::vector<std::string> inequalities;
  Thresholds thresholds;
  std::uint64_t seed = 0x0a11ce;
  // family of the Morrey suprema; the maximal operator always uses BallFamily::windows()
  BallFamily ball_family = BallFamily::lattice();
  // sampled balls for per-ball rows
  int balls_per_case = 24;
  nlohmann::json source;
};

// Throws ParseError on unknown keys or inequality ids.
Suite parse_suite(const nlohmann::json& config);
Suite load_suite(const std::string& path);

// FNV-1a 64 of the canonical (sorted-key) dump.
std::string config_hash(const nlohmann::json& config);

// Grammar: indicator(a,b), disk(r), spike(a), bump(r), randsign, cell, sin(k), cos(k),
// const(c), file(path). The random field draws from seed mixed with the text.
GridFunction parse_function(std::string_view text, const Grid& g, std::uint64_t seed);

enum class Verdict { Stable, Blowup, Skipped, Inconclusive };

std::string to_string(Verdict v);
Verdict parse_verdict(std::string_view text);

struct CaseRecord {
  std::size_t index = 0;
  std::string inequality;
  std::string variant;
  std::string young;
  std::string growth;
  std::string weight;
  std::string function;
  // the (Φ, w) pair meets the row's hypotheses (w ∈ A_{i(Φ)}, φ ∈ 𝒢dec_w, …)
  bool hypothesis = true;
  // values at the finest grid
  double lhs = 0.0;
  double rhs = 0.0;
  double c = 1.0;
  double ratio = 0.0;
  std::vector<double> trend;
  Verdict verdict = Verdict::Skipped;
  std::string note;
  std::map<std::string, double> extras;

  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

struct Report {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> versions;
  std::vector<CaseRecord> cases;

  friend bool operator==(const Report&, const Report&) = default;
};

// stable / blowup / inconclusive from a trend, per the thresholds.
Verdict classify_trend(const std::vector<double>& trend, const Thresholds& t);

// Modular rows: modM, wwmodM, wmodM, modT, wwmodT, wmodT.
std::vector<CaseRecord> run_modular_suite(const Suite& suite);
// czM: ∫Φ(|Tf|)w against ∫Φ(Mf)w, and the weak forms.
std::vector<CaseRecord> run_cz_comparison(const Suite& suite);
// normW, normS, normWW for M and T.
std::vector<CaseRecord> run_norm_suite(const Suite& suite);
// necessity: (modular M) and the weak Hilbert ratio with the expected verdict recorded.
std::vector<CaseRecord> run_necessity_probe(const Suite& suite);
// Everything the suite asks for, in its inequality order, indexed.
Report run_suite(const Suite& suite);

nlohmann::ordered_json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
std::string to_csv(const Report& r);
// format: json | csv
void emit_report(const Report& r, const std::string& path, std::string_view format);

}  // namespace omlab
