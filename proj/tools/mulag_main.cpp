// mulag: gradients and constrained critical points for perturbed problems.
//
//   mulag check <file>
//   mulag grad <file> --at x=1,y=2,z=0
//   mulag solve <file> [--general] [--seeds N] [--tol T] [--rng-seed S] [--json|--table]
//
// Output is JSON-lines by default (one record per line); exit codes are
// 0 = success with results, 1 = success with no results, 2 = user error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mulag/expr.hpp"
#include "mulag/lagrange.hpp"
#include "mulag/mudiff.hpp"

using json = nlohmann::json;

namespace {

void emit_diagnostic(const std::string& message) {
  json rec;
  rec["kind"] = "diagnostic";
  rec["message"] = message;
  std::cout << rec.dump() << "\n";
}

std::vector<double> parse_assignments(const std::string& at, const std::vector<std::string>& vars) {
  std::vector<double> values(vars.size());
  std::vector<bool> seen(vars.size(), false);
  std::stringstream ss(at);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw mulag::ConfigError("bad assignment '" + item + "' (expected var=value)");
    }
    std::string name = item.substr(0, eq);
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) throw mulag::ConfigError("unknown variable '" + name + "' in --at");
    std::size_t idx = static_cast<std::size_t>(it - vars.begin());
    values[idx] = std::stod(item.substr(eq + 1));
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!seen[i]) throw mulag::ConfigError("variable '" + vars[i] + "' missing from --at");
  }
  return values;
}

int cmd_check(const std::string& file) {
  mulag::ProblemDef p = mulag::load_problem_file(file);
  json rec;
  rec["kind"] = "diagnostic";
  rec["message"] = "ok";
  rec["vars"] = p.vars;
  rec["generators"] = p.generators.names();
  rec["constraints"] = p.constraints.size();
  rec["trunc"] = p.trunc_order;
  rec["tol"] = p.tol.tol;
  std::cout << rec.dump() << "\n";
  return 0;
}

int cmd_grad(const std::string& file, const std::string& at) {
  mulag::ProblemDef p = mulag::load_problem_file(file);
  std::vector<double> values = parse_assignments(at, p.vars);
  mulag::HyperPoint x = mulag::HyperPoint::standard(values, p.generators, p.trunc_order);
  mulag::DiffConfig cfg;
  cfg.tol = p.tol;
  mulag::Gradient g = mulag::gradient(*p.objective, x, cfg);

  json rec;
  rec["kind"] = "gradient";
  json point = json::object();
  for (std::size_t i = 0; i < p.vars.size(); ++i) point[p.vars[i]] = values[i];
  rec["point"] = point;
  json partials = json::array();
  json st = json::array();
  for (const auto& h : g.partials) {
    partials.push_back(h.to_string());
    st.push_back(h.st());
  }
  rec["partials"] = partials;
  rec["st"] = st;
  rec["step"] = g.step_name;
  std::cout << rec.dump() << "\n";
  return 0;
}

json point_record(const mulag::ProblemDef& p, const mulag::CriticalPoint& c) {
  json rec;
  rec["kind"] = "critical-point";
  rec["point"] = c.point;
  rec["mu"] = c.mu;
  rec["lambda"] = c.lambda;
  rec["residual"] = c.residual_norm;
  rec["objective"] = c.objective_st;
  rec["abnormal"] = c.abnormal;
  rec["constraint_degenerate"] = c.constraint_degenerate;
  rec["classification"] = c.classification();
  (void)p;
  return rec;
}

void print_table(const mulag::ProblemDef& p, const std::vector<mulag::CriticalPoint>& points) {
  std::printf("%-40s %-12s %-14s %-12s %s\n", "point", "objective", "multipliers", "residual",
              "classification");
  for (const auto& c : points) {
    std::string pt = "(";
    for (std::size_t i = 0; i < c.point.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", c.point[i]);
      pt += buf;
      if (i + 1 < c.point.size()) pt += ", ";
    }
    pt += ")";
    std::string mult;
    {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "mu=%.4g", c.mu);
      mult = buf;
      for (double l : c.lambda) {
        std::snprintf(buf, sizeof(buf), ",%.4g", l);
        mult += buf;
      }
    }
    std::printf("%-40s %-12.6g %-14s %-12.3g %s%s%s\n", pt.c_str(), c.objective_st, mult.c_str(),
                c.residual_norm, c.classification().c_str(), c.abnormal ? " [abnormal]" : "",
                c.constraint_degenerate ? " [degenerate-constraint]" : "");
  }
  (void)p;
}

int cmd_solve(const std::string& file, bool general, const mulag::SolverOptions& opts,
              double tol_override, bool table) {
  mulag::ProblemDef p = mulag::load_problem_file(file);
  if (tol_override >= 0) p.tol.tol = tol_override;

  std::vector<mulag::CriticalPoint> points =
      general ? mulag::solve_general(p, opts) : mulag::solve_normal(p, opts);
  points = mulag::classify(p, points);

  if (points.empty()) {
    emit_diagnostic("no critical points found (" + std::to_string(opts.seeds) + " seeds)");
    return 1;
  }
  if (table) {
    print_table(p, points);
  } else {
    for (const auto& c : points) std::cout << point_record(p, c).dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mu-differentiable gradients and Lagrange multiplier solving"};
  app.require_subcommand(1);

  std::string file, at;
  bool general = false, table = false, json_out = false;
  double tol_override = -1.0;
  mulag::SolverOptions opts;

  auto* check = app.add_subcommand("check", "parse and validate a problem file");
  check->add_option("file", file)->required();

  auto* grad = app.add_subcommand("grad", "evaluate the mu-gradient at a standard point");
  grad->add_option("file", file)->required();
  grad->add_option("--at", at, "assignments, e.g. x=1,y=2,z=0")->required();

  auto* solve = app.add_subcommand("solve", "find m-critical points under side conditions");
  solve->add_option("file", file)->required();
  solve->add_flag("--general", general, "general Lagrange rule (mu, lambda on the unit sphere)");
  solve->add_option("--seeds", opts.seeds, "number of Newton starts");
  solve->add_option("--tol", tol_override, "residual tolerance override");
  solve->add_option("--rng-seed", opts.rng_seed, "seed for the multistart sampler");
  solve->add_flag("--json", json_out, "JSON-lines output (default)");
  solve->add_flag("--table", table, "human-readable table output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return cmd_check(file);
    if (grad->parsed()) return cmd_grad(file, at);
    if (solve->parsed()) {
      if (json_out && table) throw mulag::ConfigError("--json and --table are exclusive");
      return cmd_solve(file, general, opts, tol_override, table);
    }
  } catch (const std::exception& e) {
    emit_diagnostic(std::string("error: ") + e.what());
    return 2;
  }
  return 2;
}
