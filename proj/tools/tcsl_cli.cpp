// tcsl: time-constrained scaling analysis from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tcsl/commands.hpp"

namespace {

using namespace tcsl;

struct Globals {
  std::string input = cmd::kEmbedded;
  std::string output_dir = "tcsl_out";
  std::string format;  // empty: command default
  std::string tie = "mean";
  std::uint64_t seed = 7;
  std::string hardware = "rtx4090";
  bool json = false;
};

ReportOptions report_options(const Globals& g) {
  ReportOptions o;
  o.tie = TiePolicy::make(parse_tie_mode(g.tie));
  o.seed = g.seed;
  return o;
}

void print_issues(const std::vector<IngestIssue>& issues) {
  for (const auto& i : issues) std::cerr << cmd::describe(i) << '\n';
}

int run_analyze(const Globals& g) {
  const auto in = cmd::load_grid(g.input);
  print_issues(in.warnings);
  const auto out = cmd::analyze(in, report_options(g), cmd::load_profile(g.hardware));
  cmd::write_outputs(g.output_dir, out.files);
  if (g.json) {
    std::cout << out.files.at("report.json");
    return cmd::kExitOk;
  }
  for (const auto& r : out.bundle.budget_reports) {
    std::string models;
    for (const auto& m : r.optimum_models) models += (models.empty() ? "" : ",") + m;
    std::printf("%8g min  optimum %-9s bpb %.3f  %s\n", r.budget_min, models.c_str(), r.optimum_bpb,
                r.regime ? to_string(*r.regime).c_str() : "-");
  }
  const auto& f = out.bundle.size_law->fit;
  std::printf("size law: N* = %.4g t^%.4f (R2 %.4f)\n", f.coeff_a, f.exponent_alpha, f.r2);
  std::printf("%zu discrepancy note(s); outputs in %s\n", out.bundle.discrepancy_notes.size(), g.output_dir.c_str());
  return cmd::kExitOk;
}

int run_fit(const Globals& g) {
  const auto in = cmd::load_grid(g.input);
  print_issues(in.warnings);
  const auto tie = TiePolicy::make(parse_tie_mode(g.tie));
  if (g.json || g.format == "json") {
    std::cout << cmd::fits_json(in.grid, tie).dump(2) << '\n';
  } else if (g.format == "csv") {
    std::cout << cmd::fits_csv(in.grid, tie);
  } else {
    std::cout << cmd::fits_text(in.grid, tie);
  }
  return cmd::kExitOk;
}

int run_plan(const Globals& g, const std::string& budget_text) {
  const double budget = cmd::parse_budget(budget_text);
  const auto in = cmd::load_grid(g.input);
  print_issues(in.warnings);
  const auto tie = TiePolicy::make(parse_tie_mode(g.tie));
  const auto profile = cmd::load_profile(g.hardware);
  std::optional<double> u;
  if (in.grid.dataset_tokens()) u = static_cast<double>(*in.grid.dataset_tokens());
  const auto rows = guidelines_table(cmd::laws_from_grid(in.grid, tie), in.configs, profile, {budget}, &in.grid, u, tie);
  if (g.json) {
    std::cout << to_json(rows.front()).dump(2) << '\n';
  } else {
    std::cout << cmd::render_plan(rows.front());
  }
  return cmd::kExitOk;
}

struct SimArgs {
  std::string params;
  std::string budgets;
  std::string out;
  std::string calibrate;
  int max_iters = 200;
};

int run_simulate(const Globals& g, const SimArgs& a, bool budgets_given) {
  const auto profile = cmd::load_profile(g.hardware);
  const auto initial = cmd::load_sim_params(a.params);
  if (!a.calibrate.empty()) {
    const auto target = cmd::load_grid(a.calibrate);
    const auto res = calibrate(initial, target.grid, profile, a.max_iters, g.seed);
    const std::string text = cmd::calibration_json(res).dump(2) + "\n";
    if (a.out.empty()) {
      std::cout << text;
    } else {
      cmd::write_text(a.out, text);
      std::printf("rmse %.6f (initial %.6f) after %d iterations; params written to %s\n", res.rmse, res.initial_rmse,
                  res.iterations, a.out.c_str());
    }
    return cmd::kExitOk;
  }
  const auto budgets = budgets_given ? cmd::parse_budget_list(a.budgets) : cmd::default_sim_budgets();
  const auto result = sweep(initial, profile, budgets, reference_configs());
  RunFormat fmt = g.format == "json" ? RunFormat::json : RunFormat::csv;
  if (g.format.empty() && !a.out.empty()) fmt = format_for_path(a.out);
  const std::string text = serialize_runs(result.grid, fmt);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    cmd::write_text(a.out, text);
  }
  return cmd::kExitOk;
}

int run_report(const Globals& g) {
  const auto in = cmd::load_grid(g.input);
  print_issues(in.warnings);
  const auto profile = cmd::load_profile(g.hardware);
  const auto bundle = build_report(in.grid, report_options(g), &profile, in.multiseed ? &*in.multiseed : nullptr, in.source);
  if (g.json || g.format == "json") {
    std::cout << to_json(bundle).dump(2) << '\n';
  } else if (g.format == "csv") {
    std::cout << to_csv(bundle);
  } else {
    std::cout << cmd::render_report(bundle);
  }
  return cmd::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-constrained scaling-law analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--input", g.input, "run grid (CSV or JSON) or 'embedded'");
  app.add_option("--output-dir", g.output_dir, "directory for analyze outputs");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--tie", g.tie, "tie policy")->check(CLI::IsMember({"mean", "larger", "smaller", "exclude"}));
  app.add_option("--seed", g.seed, "seed for bootstrap and calibration");
  app.add_option("--hardware", g.hardware, "'rtx4090' or a profile file");
  app.add_flag("--json", g.json, "machine-readable output on stdout");

  auto* analyze = app.add_subcommand("analyze", "full report: JSON, CSV and SVG charts");
  auto* fit = app.add_subcommand("fit", "fit the size, loss and depth laws");
  auto* plan = app.add_subcommand("plan", "recommend a model size for a budget");
  std::string budget;
  plan->add_option("--budget", budget, "wall-clock budget, e.g. 30m, 4h, 1440")->required();
  auto* simulate = app.add_subcommand("simulate", "generate a grid from the mechanistic simulator");
  SimArgs sim;
  simulate->add_option("--params", sim.params, "simulator params JSON (default: shipped defaults)");
  auto* budgets_opt = simulate->add_option("--budgets", sim.budgets, "comma-separated budgets");
  simulate->add_option("--out", sim.out, "output file (default stdout)");
  simulate->add_option("--calibrate", sim.calibrate, "fit params to 'embedded' or a run file");
  simulate->add_option("--max-iters", sim.max_iters, "calibration iteration limit");
  auto* report = app.add_subcommand("report", "print the report to stdout");
  for (auto* sub : {analyze, fit, plan, simulate, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cmd::kExitOk : cmd::kExitInput;
  }

  try {
    if (analyze->parsed()) return run_analyze(g);
    if (fit->parsed()) return run_fit(g);
    if (plan->parsed()) return run_plan(g, budget);
    if (simulate->parsed()) return run_simulate(g, sim, budgets_opt->count() > 0);
    if (report->parsed()) return run_report(g);
  } catch (const cmd::InputRejected& e) {
    print_issues(e.issues());
    return cmd::kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::invalid_argument && plan->parsed()) std::cerr << plan->help();
    return cmd::exit_code_for(e.kind());
  }
  return cmd::kExitInput;
}
