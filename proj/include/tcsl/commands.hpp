#pragma once

// Command implementations behind the tcsl executable, kept free of argument
// parsing so they can be driven from tests.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcsl/error.hpp"
#include "tcsl/ingest.hpp"
#include "tcsl/laws.hpp"
#include "tcsl/planner.hpp"
#include "tcsl/reference.hpp"
#include "tcsl/report.hpp"
#include "tcsl/sim.hpp"
#include "tcsl/svg.hpp"

namespace tcsl::cmd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCompute = 3;

inline constexpr const char* kEmbedded = "embedded";

/// Input problems (bad flags, unreadable or invalid files) map to exit 2;
/// everything the analysis itself cannot do maps to exit 3.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::empty_input:
    case ErrorKind::io:
    case ErrorKind::not_found:
      return kExitInput;
    default:
      return kExitCompute;
  }
}

/// Thrown when a run file parses with error-level issues.
class InputRejected : public Error {
 public:
  explicit InputRejected(std::vector<IngestIssue> issues)
      : Error(ErrorKind::invalid_argument, "input rejected"), issues_(std::move(issues)) {}
  const std::vector<IngestIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<IngestIssue> issues_;
};

inline std::string describe(const IngestIssue& i) {
  std::string s = i.severity == Severity::error ? "error" : "warning";
  if (i.row) s += " (row " + std::to_string(*i.row) + ")";
  return s + ": " + i.message;
}

/// "30m", "4h", "1.5h", "1440" (minutes).
inline double parse_budget(std::string_view text) {
  text = detail::trim(text);
  double scale = 1.0;
  if (!text.empty() && (text.back() == 'h' || text.back() == 'H')) {
    scale = 60.0;
    text.remove_suffix(1);
  } else if (!text.empty() && (text.back() == 'm' || text.back() == 'M')) {
    text.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorKind::invalid_argument, "malformed budget '" + std::string(text) + "' (expected e.g. 30m, 4h, 1440)");
  }
  return v * scale;
}

inline std::vector<double> parse_budget_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (detail::trim(item).empty()) continue;
    out.push_back(parse_budget(item));
  }
  if (out.empty()) fail(ErrorKind::invalid_argument, "budget list is empty");
  return out;
}

struct LoadedGrid {
  RunGrid grid;
  std::optional<RunGrid> multiseed;
  std::vector<ModelConfig> configs;
  std::vector<IngestIssue> warnings;
  std::string source;
};

namespace detail {

/// Seeded records at the budget with the most of them, when some model has
/// at least two seeds there.
inline std::optional<RunGrid> seeded_subgrid(const RunGrid& grid) {
  std::optional<double> best;
  std::size_t best_n = 0;
  for (double b : grid.budgets()) {
    std::map<std::string, int> per_model;
    std::size_t n = 0;
    for (const auto& r : grid.at_budget(b)) {
      if (r.seed) {
        ++per_model[r.model_id];
        ++n;
      }
    }
    const bool repeated = std::any_of(per_model.begin(), per_model.end(), [](const auto& p) { return p.second >= 2; });
    if (repeated && n > best_n) {
      best = b;
      best_n = n;
    }
  }
  if (!best) return std::nullopt;
  std::vector<RunRecord> recs;
  for (const auto& r : grid.at_budget(*best)) {
    if (r.seed) recs.push_back(r);
  }
  return RunGrid(std::move(recs), grid.dataset_tokens());
}

inline std::vector<ModelConfig> configs_from_grid(const RunGrid& grid) {
  std::map<int, ModelConfig> by_depth;
  for (const auto& r : grid.records()) {
    if (!by_depth.count(r.depth)) by_depth.emplace(r.depth, make_config(r.depth, r.params_m));
  }
  std::vector<ModelConfig> out;
  for (auto& [d, c] : by_depth) out.push_back(c);
  return out;
}

}  // namespace detail

inline LoadedGrid load_grid(const std::string& input) {
  if (input.empty() || input == kEmbedded) {
    auto ref = load_reference_dataset();
    return {ref.grid, ref.multiseed, ref.configs, {}, kEmbedded};
  }
  auto parsed = parse_runs(read_file(input), format_for_path(input));
  if (!parsed.ok()) throw InputRejected(std::move(parsed.issues));
  LoadedGrid out{*parsed.grid, detail::seeded_subgrid(*parsed.grid), {}, std::move(parsed.issues),
                 std::filesystem::path(input).filename().string()};
  // Depth table: the reference configs when every depth matches them, else the grid's own.
  const auto ref = reference_configs();
  bool matches = true;
  for (const auto& r : out.grid.records()) {
    const bool known = std::any_of(ref.begin(), ref.end(), [&](const ModelConfig& c) {
      return c.depth == r.depth && std::fabs(c.params_m - r.params_m) < 1e-9;
    });
    matches = matches && known;
  }
  out.configs = matches ? ref : detail::configs_from_grid(out.grid);
  return out;
}

inline HardwareProfile load_profile(const std::string& source) {
  if (source.empty() || source == "rtx4090") return rtx4090_profile();
  return with_fit(parse_hardware_profile(read_file(source)));
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorKind::io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOutput {
  ReportBundle bundle;
  std::map<std::string, std::string> files;  // file name -> content
};

inline AnalyzeOutput analyze(const LoadedGrid& in, const ReportOptions& opts, const HardwareProfile& profile) {
  AnalyzeOutput out;
  out.bundle = build_report(in.grid, opts, &profile, in.multiseed ? &*in.multiseed : nullptr, in.source);
  for (const auto& w : in.warnings) out.bundle.notices.push_back(describe(w));
  out.files["report.json"] = to_json(out.bundle).dump(2) + "\n";
  out.files["report.csv"] = to_csv(out.bundle);
  out.files["u_curves.svg"] = svg::u_curves(in.grid, opts.tie);
  out.files["size_law.svg"] = svg::size_law(*out.bundle.size_law);
  out.files["loss_law.svg"] = svg::loss_law(optimum_anchors(in.grid, opts.tie), *out.bundle.loss_law);
  out.files["heatmap.svg"] = svg::heatmap(in.grid, opts.tie);
  return out;
}

inline void write_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
  for (const auto& [name, content] : files) write_text(dir / name, content);
}

// ---------------------------------------------------------------- fit

inline nlohmann::ordered_json fits_json(const RunGrid& grid, const TiePolicy& tie) {
  nlohmann::ordered_json j;
  const auto size = fit_optimal_size_law(grid, tie);
  j["size_law"] = to_json(size.fit);
  j["loss_law"] = to_json(fit_loss_law(grid));
  j["depth_law"] = to_json(fit_depth_law(grid, tie));
  return j;
}

inline std::string fits_text(const RunGrid& grid, const TiePolicy& tie) {
  std::ostringstream out;
  auto line = [&](const char* name, const PowerLawFit& f) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-10s a=%-10.5g alpha=%-9.5f R2=%-7.4f se=%-8.5f CI95=[%.4f, %.4f] n=%d%s\n", name,
                  f.coeff_a, f.exponent_alpha, f.r2, f.stderr_alpha, f.ci95_low, f.ci95_high, f.n_points,
                  f.ci_degenerate ? " (CI degenerate)" : "");
    out << buf;
  };
  line("size_law", fit_optimal_size_law(grid, tie).fit);
  line("loss_law", fit_loss_law(grid));
  line("depth_law", fit_depth_law(grid, tie));
  return out.str();
}

inline std::string fits_csv(const RunGrid& grid, const TiePolicy& tie) {
  std::ostringstream out;
  out << "law,coeff_a,exponent_alpha,r2,stderr_alpha,ci95_low,ci95_high,n_points\n";
  auto row = [&](const char* name, const PowerLawFit& f) {
    out << name << ',' << tcsl::detail::format_double(f.coeff_a) << ',' << tcsl::detail::format_double(f.exponent_alpha) << ','
        << (f.r2_undefined ? "" : tcsl::detail::format_double(f.r2)) << ',' << tcsl::detail::format_double(f.stderr_alpha) << ','
        << (f.ci_degenerate ? "" : tcsl::detail::format_double(f.ci95_low)) << ','
        << (f.ci_degenerate ? "" : tcsl::detail::format_double(f.ci95_high)) << ',' << f.n_points << '\n';
  };
  row("size_law", fit_optimal_size_law(grid, tie).fit);
  row("loss_law", fit_loss_law(grid));
  row("depth_law", fit_depth_law(grid, tie));
  return out.str();
}

// ---------------------------------------------------------------- report

inline std::string render_report(const ReportBundle& b) {
  std::ostringstream out;
  char buf[256];
  out << "source: " << b.source << "\n\nper-budget optima\n";
  for (const auto& r : b.budget_reports) {
    std::string models, flagged;
    for (const auto& m : r.optimum_models) models += (models.empty() ? "" : ",") + m;
    for (const auto& m : r.overfit_models) flagged += (flagged.empty() ? "" : ",") + m;
    std::snprintf(buf, sizeof(buf), "  %7g min  %-9s %.3f  %-16s overfit: %s\n", r.budget_min, models.c_str(),
                  r.optimum_bpb, r.regime ? to_string(*r.regime).c_str() : "-", flagged.empty() ? "-" : flagged.c_str());
    out << buf;
  }
  out << "\nfits\n";
  auto fit_line = [&](const char* name, const PowerLawFit& f) {
    std::snprintf(buf, sizeof(buf), "  %-10s a=%.5g alpha=%.4f R2=%.4f CI95=[%.4f, %.4f] n=%d\n", name, f.coeff_a,
                  f.exponent_alpha, f.r2, f.ci95_low, f.ci95_high, f.n_points);
    out << buf;
  };
  if (b.size_law) fit_line("size", b.size_law->fit);
  if (b.size_law_bootstrap) {
    std::snprintf(buf, sizeof(buf), "  %-10s bootstrap CI95=[%.4f, %.4f]\n", "", b.size_law_bootstrap->low,
                  b.size_law_bootstrap->high);
    out << buf;
  }
  if (b.loss_law) fit_line("loss", *b.loss_law);
  if (b.depth_law) fit_line("depth", *b.depth_law);
  if (!b.marginal.empty()) out << "\nmarginal returns\n";
  for (const auto& m : b.marginal) {
    std::snprintf(buf, sizeof(buf), "  %6g -> %-6g  %+.3f bpb  %+.4f bpb/h\n", m.from_min, m.to_min, m.delta_bpb,
                  m.bpb_per_hour);
    out << buf;
  }
  if (!b.alpha_evolution.empty()) out << "\nexponent as budgets are added\n";
  for (const auto& p : b.alpha_evolution) {
    std::snprintf(buf, sizeof(buf), "  %d points (to %g min): %.4f\n", p.n_points, p.last_budget_min, p.fit.exponent_alpha);
    out << buf;
  }
  if (!b.sensitivity.variants.empty()) out << "\nsensitivity\n";
  for (const auto& v : b.sensitivity.variants) {
    std::snprintf(buf, sizeof(buf), "  %-40s %.4f\n", v.name.c_str(), v.fit.exponent_alpha);
    out << buf;
  }
  if (b.throughput) {
    std::snprintf(buf, sizeof(buf), "\nthroughput (%s): tau = %.4g N^-%.4f, R2 %.4f\n", b.throughput->profile_name.c_str(),
                  b.throughput->law.c, b.throughput->law.beta, b.throughput->law.r2);
    out << buf;
  }
  if (b.multiseed) {
    out << "\nmulti-seed\n";
    for (const auto& s : b.multiseed->models) {
      std::snprintf(buf, sizeof(buf), "  %-6s mean %.4f  std %.4f (sample) %.4f (population)\n", s.model_id.c_str(), s.mean,
                    s.sample_std, s.population_std);
      out << buf;
    }
  }
  if (!b.discrepancy_notes.empty()) out << "\ndiscrepancies versus published figures\n";
  for (const auto& n : b.discrepancy_notes) out << "  - " << n << '\n';
  if (!b.notices.empty()) out << "\nnotices\n";
  for (const auto& n : b.notices) out << "  - " << n << '\n';
  return out.str();
}

// ---------------------------------------------------------------- plan

inline PlanLaws laws_from_grid(const RunGrid& grid, const TiePolicy& tie) {
  const auto size = fit_optimal_size_law(grid, tie);
  const auto& first = size.anchors.front();
  return plan_laws(size.fit, fit_loss_law(grid), first.budget_min, first.params_m);
}

inline std::string render_plan(const PlanRecommendation& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "budget            %g min\n", r.budget_min);
  out << buf;
  std::snprintf(buf, sizeof(buf), "optimal size      %.1fM (continuous)\n", r.n_star_continuous_m);
  out << buf;
  std::snprintf(buf, sizeof(buf), "recommended       D%d (%.1fM params)\n", r.snapped_depth, r.snapped_params_m);
  out << buf;
  std::snprintf(buf, sizeof(buf), "expected BPB      %.4f\n", r.expected_bpb);
  out << buf;
  std::snprintf(buf, sizeof(buf), "tokens            %.3g\n", r.tokens);
  out << buf;
  if (r.epochs) {
    std::snprintf(buf, sizeof(buf), "epochs            %.2f\n", *r.epochs);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "training FLOPs    %.3g\n", r.flops);
  out << buf;
  std::snprintf(buf, sizeof(buf), "alpha=0.50 size   %.1fM\n", r.chinchilla_n_m);
  out << buf;
  if (r.measured_bpb) {
    std::string models;
    for (const auto& m : r.measured_models) models += (models.empty() ? "" : ",") + m;
    std::snprintf(buf, sizeof(buf), "measured optimum  %s at %.4f BPB\n", models.c_str(), *r.measured_bpb);
    out << buf;
  }
  for (const auto& n : r.notes) out << "note: " << n << '\n';
  return out.str();
}

// ---------------------------------------------------------------- simulate

inline const std::vector<double>& default_sim_budgets() {
  static const std::vector<double> b(kReferenceBudgets.begin(), kReferenceBudgets.end());
  return b;
}

inline SimParams load_sim_params(const std::string& path) {
  if (path.empty()) return SimParams::defaults();
  try {
    return sim_params_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("cannot parse sim params: ") + e.what());
  }
}

inline nlohmann::ordered_json calibration_json(const CalibrationResult& r) {
  nlohmann::ordered_json j;
  j["params"] = to_json(r.params);
  j["rmse"] = r.rmse;
  j["initial_rmse"] = r.initial_rmse;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["notes"] = r.notes;
  return j;
}

}  // namespace tcsl::cmd
