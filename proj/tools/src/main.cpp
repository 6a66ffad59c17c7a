#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "omlab/error.hpp"
#include "omlab/grid.hpp"
#include "omlab/growth.hpp"
#include "omlab/harness.hpp"
#include "omlab/norms.hpp"
#include "omlab/operators.hpp"
#include "omlab/weights.hpp"
#include "omlab/young.hpp"

namespace {

using omlab::kInf;

nlohmann::ordered_json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct GridOptions {
  int dim = 1;
  int n = 1024;
  double L = 1.0;
  std::string boundary = "truncate";

  void attach(CLI::App* app) {
    app->add_option("--dim", dim, "1 or 2")->check(CLI::IsMember({1, 2}));
    app->add_option("--N", n, "Cells per axis");
    app->add_option("--L", L, "Half extent of the box");
    app->add_option("--boundary", boundary)->check(CLI::IsMember({"truncate", "periodic"}));
  }
  [[nodiscard]] omlab::Grid grid() const { return {dim, n, L, omlab::parse_boundary(boundary)}; }
};

omlab::BallFamily family_from(const std::string& kind) {
  if (kind == "dense") return omlab::BallFamily::dense();
  if (kind == "windows") return omlab::BallFamily::windows();
  return omlab::BallFamily::lattice();
}

void print(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_indices(const std::string& expr) {
  const auto phi = omlab::parse_young(expr);
  nlohmann::ordered_json out;
  out["young"] = phi.describe();
  out["a"] = num(phi.a_value());
  out["b"] = num(phi.b_value());
  if (phi.a_value() == 0.0 && phi.b_value() == kInf) {
    const auto r = omlab::indices(phi);
    const auto cls = omlab::classify(phi, r);
    out["i"] = num(r.i_lower);
    out["I"] = num(r.I_upper);
    out["I_unbounded"] = r.upper_unbounded;
    out["a_phi"] = num(r.a_slope);
    out["b_phi"] = num(r.b_slope);
    out["fit"] = {{"p", num(r.fit_p)}, {"q", num(r.fit_q)}, {"C", num(r.fit_C)}};
    out["lambda_range"] = {r.lambda_range.first, r.lambda_range.second};
    out["t_range"] = {r.t_range.first, r.t_range.second};
    out["t_per_decade"] = r.t_per_decade;
    out["class"] = {{"quasi_convex", cls.in_quasi_convex},
                    {"delta2", cls.in_delta2},
                    {"nabla2", cls.in_nabla2},
                    {"almost_increasing_constant", num(cls.almost_increasing_constant)},
                    {"nabla2_margin", cls.thresholds.nabla2_margin},
                    {"delta2_max_index", cls.thresholds.delta2_max_index}};
  } else {
    out["note"] = "indices need a(Phi) = 0 and b(Phi) = inf";
  }
  print(out);
  return 0;
}

int cmd_apconst(const GridOptions& go, const std::string& weight, double p, const std::string& family) {
  const auto g = go.grid();
  const auto w = omlab::parse_weight(weight, g);
  const auto r = omlab::ap_constant(w, p, family_from(family));
  nlohmann::ordered_json out;
  out["grid"] = g.describe();
  out["weight"] = weight;
  out["p"] = r.p;
  out["constant"] = num(r.constant);
  out["argmax_ball"] = omlab::describe(g, r.argmax_ball);
  out["family"] = r.ball_family_id;
  print(out);
  return 0;
}

struct NormOptions {
  std::string file;
  std::string phi = "power(2)";
  std::string growth = "invwball";
  std::string weight = "one";
  std::string family = "lattice";
  double L = 1.0;
  std::string boundary = "truncate";
  std::optional<std::size_t> cell;
  int level = 0;
};

int cmd_norm(const NormOptions& o, omlab::NormKind kind) {
  const auto f = omlab::read_grid_function(o.file, o.L, omlab::parse_boundary(o.boundary));
  const auto& g = f.grid();
  const auto Phi = omlab::parse_young(o.phi);
  const auto phi = omlab::parse_growth(o.growth);
  const omlab::GrowthContext ctx(omlab::parse_weight(o.weight, g));
  omlab::NormResult r;
  if (o.cell) {
    const auto b = omlab::centered_ball(g, *o.cell, o.level);
    r = kind == omlab::NormKind::Strong ? omlab::luxemburg_norm(f, Phi, phi, ctx, b) : omlab::weak_norm(f, Phi, phi, ctx, b);
  } else {
    r = omlab::global_norm(f, Phi, phi, ctx, family_from(o.family), kind);
  }
  nlohmann::ordered_json out;
  out["kind"] = omlab::to_string(kind);
  out["value"] = num(r.value);
  out["ball"] = omlab::describe(g, r.ball);
  out["global"] = r.global;
  out["iterations"] = r.iterations;
  out["bracket"] = {num(r.bracket.first), num(r.bracket.second)};
  if (r.global) {
    out["balls_solved"] = r.balls_solved;
    out["balls_total"] = r.balls_total;
  }
  print(out);
  return 0;
}

int cmd_operator(const std::string& file, const std::string& op, const std::string& weight, double L,
                 const std::string& boundary, bool centered, const std::string& out_path) {
  const auto f = omlab::read_grid_function(file, L, omlab::parse_boundary(boundary));
  const auto& g = f.grid();
  std::optional<omlab::OperatorResult> r;
  if (op == "maximal") {
    r = omlab::maximal(f, omlab::BallFamily::windows(), centered);
  } else if (op == "maximal_w") {
    r = omlab::weighted_maximal(f, omlab::parse_weight(weight, g), omlab::BallFamily::windows(), centered);
  } else {
    r = omlab::cz_apply(f, omlab::parse_kernel(op, g));
  }
  nlohmann::ordered_json out;
  out["operator"] = op;
  out["method"] = omlab::to_string(r->method);
  out["truncation_radius"] = num(r->truncation_radius);
  double peak = 0.0;
  for (double v : r->output.values()) peak = std::max(peak, std::abs(v));
  out["max_abs"] = num(peak);
  if (!out_path.empty()) {
    omlab::write_grid_function_csv(r->output, out_path);
    out["output"] = out_path;
  }
  print(out);
  return 0;
}

int cmd_verify(const std::string& config, const std::string& out_dir, const std::string& format) {
  const auto suite = omlab::load_suite(config);
  const auto report = omlab::run_suite(suite);
  std::filesystem::create_directories(out_dir);
  const auto path = (std::filesystem::path(out_dir) / ("report." + format)).string();
  omlab::emit_report(report, path, format);
  std::map<std::string, int> counts;
  for (const auto& c : report.cases) ++counts[omlab::to_string(c.verdict)];
  std::cout << path << ": " << report.cases.size() << " cases";
  for (const auto& [k, v] : counts) std::cout << ", " << v << ' ' << k;
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Orlicz-Morrey numerical lab"};
  app.require_subcommand(1);

  std::string young_expr;
  auto* indices = app.add_subcommand("indices", "Dilation indices and class membership of a Young function");
  indices->add_option("phi", young_expr, "Young function expression")->required();

  GridOptions ap_grid;
  std::string ap_weight, ap_family = "lattice";
  double ap_p = 2.0;
  auto* apconst = app.add_subcommand("apconst", "Empirical Muckenhoupt constant");
  apconst->add_option("--weight", ap_weight)->required();
  apconst->add_option("--p", ap_p)->required()->check(CLI::Range(1.0, 1e300));
  apconst->add_option("--family", ap_family)->check(CLI::IsMember({"lattice", "dense", "windows"}));
  ap_grid.attach(apconst);

  NormOptions norm_opts;
  auto add_norm = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--f", norm_opts.file, "Grid function file (.csv or .bin)")->required();
    sub->add_option("--phi", norm_opts.phi);
    sub->add_option("--growth", norm_opts.growth);
    sub->add_option("--weight", norm_opts.weight);
    sub->add_option("--family", norm_opts.family)->check(CLI::IsMember({"lattice", "dense"}));
    sub->add_option("--L", norm_opts.L);
    sub->add_option("--boundary", norm_opts.boundary)->check(CLI::IsMember({"truncate", "periodic"}));
    sub->add_option("--cell", norm_opts.cell, "Centre cell of a single ball; global norm when absent");
    sub->add_option("--level", norm_opts.level, "Ball radius h*2^level");
    return sub;
  };
  auto* norm = add_norm("norm", "Orlicz-Morrey norm");
  auto* weaknorm = add_norm("weaknorm", "Weak Orlicz-Morrey norm");

  std::string op_file, op_name = "maximal", op_weight = "one", op_boundary = "truncate", op_out;
  double op_L = 1.0;
  bool op_centered = false;
  auto add_op = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--f", op_file)->required();
    sub->add_option("--op", op_name, "maximal | maximal_w | hilbert | riesz1 | riesz2 | kernel(path)");
    sub->add_option("--weight", op_weight);
    sub->add_option("--L", op_L);
    sub->add_option("--boundary", op_boundary)->check(CLI::IsMember({"truncate", "periodic"}));
    sub->add_option("--out", op_out, "Write the output grid function as CSV");
    sub->add_flag("--centered", op_centered);
    return sub;
  };
  auto* maximal = add_op("maximal", "Apply a maximal operator");
  auto* cz = add_op("cz", "Apply a singular integral operator");

  std::string config, out_dir = "out", format = "json";
  auto* verify = app.add_subcommand("verify", "Run an inequality suite");
  verify->add_option("--config", config)->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out_dir);
  verify->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*indices) return cmd_indices(young_expr);
    if (*apconst) return cmd_apconst(ap_grid, ap_weight, ap_p, ap_family);
    if (*norm) return cmd_norm(norm_opts, omlab::NormKind::Strong);
    if (*weaknorm) return cmd_norm(norm_opts, omlab::NormKind::Weak);
    if (*maximal) return cmd_operator(op_file, op_name, op_weight, op_L, op_boundary, op_centered, op_out);
    if (*cz) {
      if (op_name.rfind("maximal", 0) == 0) op_name = "hilbert";
      return cmd_operator(op_file, op_name, op_weight, op_L, op_boundary, false, op_out);
    }
    if (*verify) return cmd_verify(config, out_dir, format);
  } catch (const omlab::Error& e) {
    std::cerr << "omlab: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
