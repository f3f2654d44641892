#pragma once

// Aggregated analysis of a run grid and its deterministic JSON/CSV output.

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcsl/budget.hpp"
#include "tcsl/domain.hpp"
#include "tcsl/hardware.hpp"
#include "tcsl/laws.hpp"
#include "tcsl/planner.hpp"
#include "tcsl/powerlaw.hpp"
#include "tcsl/reference.hpp"

namespace tcsl {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kBootstrapResamples = 10'000;

struct RatioComparison {
  double multiplier = 0.0;
  double fitted = 0.0;      // multiplier^alpha with the fitted size-law exponent
  double headline = 0.0;    // multiplier^0.60
  double chinchilla = 0.0;  // multiplier^0.50
};

struct ThroughputSummary {
  std::string profile_name;
  ThroughputLaw law;
  double compute_exponent = 0.0;
};

struct ReportOptions {
  TiePolicy tie;
  double flag_epsilon = kDefaultFlagEpsilon;
  std::uint64_t seed = 7;
  int bootstrap_resamples = kBootstrapResamples;
};

struct ReportBundle {
  std::string source;
  ReportOptions options;
  std::optional<SizeLawResult> size_law;
  std::optional<Interval> size_law_bootstrap;
  std::optional<PowerLawFit> loss_law;
  std::optional<PowerLawFit> depth_law;
  std::vector<BudgetReport> budget_reports;
  std::vector<OverfitFlag> overfit;
  std::vector<MarginalReturn> marginal;
  SensitivityResult sensitivity;
  std::vector<PrefixFit> alpha_evolution;
  std::vector<RatioComparison> comparison;
  std::optional<ThroughputSummary> throughput;
  std::optional<MultiSeedReport> multiseed;
  std::vector<std::string> discrepancy_notes;
  std::vector<std::string> notices;
};

namespace detail {

inline std::string fmt(double v, int digits = 4) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// Appends a note for every computed value that departs from the published
/// figure by more than its tolerance.
inline void add_discrepancy_notes(ReportBundle& b, const HardwareProfile* profile) {
  using detail::fmt;
  namespace pub = published;
  auto& out = b.discrepancy_notes;

  if (b.size_law) {
    const auto& f = b.size_law->fit;
    if (std::fabs(f.exponent_alpha - pub::size_law_alpha) > 0.01 || std::fabs(f.coeff_a / pub::size_law_a - 1.0) > 0.05) {
      out.push_back("size law: fitted N*(t) = " + fmt(f.coeff_a, 3) + " t^" + fmt(f.exponent_alpha) +
                    " (log-OLS on per-budget optima) vs published " + fmt(pub::size_law_a, 2) + " t^" +
                    fmt(pub::size_law_alpha, 3));
    }
    if (!f.r2_undefined && std::fabs(f.r2 - pub::size_law_r2) > 0.005) {
      out.push_back("size law: R^2 " + fmt(f.r2) + " vs published " + fmt(pub::size_law_r2, 3));
    }
    if (!f.ci_degenerate &&
        (std::fabs(f.ci95_low - pub::size_law_ci_low) > 0.01 || std::fabs(f.ci95_high - pub::size_law_ci_high) > 0.01)) {
      out.push_back("size law: 95% CI [" + fmt(f.ci95_low) + ", " + fmt(f.ci95_high) + "] vs published [" +
                    fmt(pub::size_law_ci_low, 2) + ", " + fmt(pub::size_law_ci_high, 2) + "]");
    }
    if (!f.ci_degenerate && f.ci95_low <= pub::chinchilla_alpha) {
      out.push_back("size law: 95% CI lower bound " + fmt(f.ci95_low) +
                    " does not exclude the compute-optimal 0.50 (published interval excludes it)");
    }
    if (b.size_law_bootstrap && b.size_law_bootstrap->low <= pub::chinchilla_alpha) {
      out.push_back("size law: bootstrap 95% interval [" + fmt(b.size_law_bootstrap->low) + ", " +
                    fmt(b.size_law_bootstrap->high) + "] does not exclude 0.50");
    }
  }
  if (b.loss_law && std::fabs(b.loss_law->exponent_alpha - pub::loss_law_alpha) > 0.002) {
    out.push_back("loss law: fitted exponent " + fmt(b.loss_law->exponent_alpha) + " vs published " +
                  fmt(pub::loss_law_alpha, 3));
  }
  if (b.depth_law && std::fabs(b.depth_law->exponent_alpha - pub::depth_law_alpha) > 0.01) {
    out.push_back("depth law: fitted exponent " + fmt(b.depth_law->exponent_alpha) + " vs published " +
                  fmt(pub::depth_law_alpha, 3));
  }
  for (const auto& p : b.alpha_evolution) {
    for (const auto& [k, alpha] : pub::alpha_evolution) {
      if (p.n_points == k && std::fabs(p.fit.exponent_alpha - alpha) > 0.05) {
        out.push_back("alpha evolution: " + std::to_string(k) + "-point exponent " + fmt(p.fit.exponent_alpha) +
                      " vs published " + fmt(alpha, 2));
      }
    }
  }
  static constexpr std::array<double, 4> published_variants{0.595, 0.747, 0.706, 0.805};
  for (std::size_t i = 0; i < b.sensitivity.variants.size() && i < published_variants.size(); ++i) {
    const auto& v = b.sensitivity.variants[i];
    if (std::fabs(v.fit.exponent_alpha - published_variants[i]) > 0.05) {
      out.push_back("sensitivity '" + v.name + "': exponent " + fmt(v.fit.exponent_alpha) + " vs published " +
                    fmt(published_variants[i], 3));
    }
  }
  for (const auto& row : pub::ratio_table) {
    const double computed = scaling_ratio(row.multiplier, pub::headline_alpha);
    if (std::fabs(computed - row.ours) > 0.01) {
      out.push_back("Chinchilla comparison: " + fmt(row.multiplier, 0) + "x time -> " + fmt(computed, 2) +
                    "x model at alpha 0.60, published table prints " + fmt(row.ours, 2) + "x");
    }
  }
  if (b.multiseed) {
    out.push_back("multi-seed: table CV column follows neither the sample nor the population convention "
                  "consistently; both are reported");
  }
  if (b.throughput) {
    const auto& t = *b.throughput;
    if (std::fabs(t.law.beta - pub::throughput_beta) > 0.05) {
      out.push_back("throughput: fitted beta " + fmt(t.law.beta, 3) + " on '" + t.profile_name + "' vs quoted " +
                    fmt(pub::throughput_beta, 1) + "; compute scales as N^" + fmt(t.compute_exponent, 3) +
                    " rather than N^0.2");
    }
  }
  if (profile && profile->name == "rtx4090") {
    const double d24 = tokens_processed(*profile, 855.6, 5.0);
    if (std::fabs(d24 / pub::d24_tokens_5min - 1.0) > 0.02) {
      out.push_back("tokens: D24 at 5 min processes " + fmt(d24 / 1e6, 1) + "M tokens at measured throughput vs quoted " +
                    fmt(pub::d24_tokens_5min / 1e6, 0) + "M");
    }
    const double d8 = tokens_processed(*profile, 50.3, 5.0);
    if (std::fabs(d8 / pub::d8_tokens_5min - 1.0) > 0.02) {
      out.push_back("tokens: D8 at 5 min processes " + fmt(d8 / 1e6, 1) + "M tokens vs quoted " +
                    fmt(pub::d8_tokens_5min / 1e6, 0) + "M");
    }
    const double u = static_cast<double>(kReferenceDatasetTokens);
    const double e8 = epochs(*profile, 50.3, 720.0, u);
    if (std::fabs(e8 / pub::d8_epochs_12h - 1.0) > 0.1) {
      out.push_back("epochs: D8 at 12h makes " + fmt(e8, 0) + " passes over 48M tokens vs quoted 250+");
    }
    const double e26 = epochs(*profile, 1031.0, 1440.0, u);
    if (e26 >= pub::d26_epochs_24h_max) {
      out.push_back("epochs: D26 at 24h makes " + fmt(e26, 1) + " passes at ~5K tok/s vs quoted fewer than 3");
    }
  }
}

inline ReportBundle build_report(const RunGrid& grid, const ReportOptions& opts, const HardwareProfile* profile,
                                 const RunGrid* multiseed, std::string source) {
  ReportBundle b;
  b.source = std::move(source);
  b.options = opts;

  b.size_law = fit_optimal_size_law(grid, opts.tie);
  b.loss_law = fit_loss_law(grid);
  b.depth_law = fit_depth_law(grid, opts.tie);
  {
    const auto pts = detail::anchor_points(b.size_law->anchors, detail::AnchorValue::params);
    if (pts.size() >= 3) {
      b.size_law_bootstrap = bootstrap_ci(pts, opts.bootstrap_resamples, opts.seed);
    } else {
      b.notices.push_back("bootstrap skipped: fewer than 3 anchors");
    }
  }
  if (b.size_law->fit.ci_degenerate) b.notices.push_back("size law: 2 anchors, confidence interval degenerate");

  b.budget_reports = budget_reports(grid, opts.tie, opts.flag_epsilon);
  b.overfit = overfit_flags(grid, opts.flag_epsilon);
  b.marginal = marginal_returns(grid);
  b.sensitivity = sensitivity_suite(grid, opts.tie.epsilon_bpb);
  for (auto& n : b.sensitivity.notices) b.notices.push_back(n);
  if (grid.budgets().size() >= 3) {
    b.alpha_evolution = prefix_fits(grid, opts.tie);
  } else {
    b.notices.push_back("alpha evolution skipped: fewer than 3 budgets");
  }
  for (double m : {2.0, 4.0, 10.0, 24.0}) {
    b.comparison.push_back({m, scaling_ratio(m, b.size_law->fit.exponent_alpha),
                            scaling_ratio(m, published::headline_alpha), scaling_ratio(m, published::chinchilla_alpha)});
  }
  if (profile) {
    const auto law = fit_throughput(*profile);
    const auto fitted = with_fit(*profile);
    b.throughput = ThroughputSummary{profile->name, law, compute_scaling_exponent(fitted)};
  }
  if (multiseed) {
    b.multiseed = multiseed_stats(*multiseed);
    for (auto& n : b.multiseed->notices) b.notices.push_back(n);
  }
  add_discrepancy_notes(b, profile);
  return b;
}

inline nlohmann::ordered_json to_json(const PowerLawFit& f) {
  using J = nlohmann::ordered_json;
  J j;
  j["coeff_a"] = f.coeff_a;
  j["exponent_alpha"] = f.exponent_alpha;
  j["r2"] = f.r2_undefined ? J(nullptr) : J(f.r2);
  j["stderr_alpha"] = std::isfinite(f.stderr_alpha) ? J(f.stderr_alpha) : J(nullptr);
  j["ci95"] = J::array({std::isfinite(f.ci95_low) ? J(f.ci95_low) : J(nullptr),
                        std::isfinite(f.ci95_high) ? J(f.ci95_high) : J(nullptr)});
  j["n_points"] = f.n_points;
  j["x_unit"] = f.x_unit;
  j["y_unit"] = f.y_unit;
  if (f.ci_degenerate) j["ci_degenerate"] = true;
  if (f.r2_undefined) j["r2_undefined"] = true;
  return j;
}

inline nlohmann::ordered_json to_json(const BudgetReport& r) {
  nlohmann::ordered_json j;
  j["budget_min"] = r.budget_min;
  j["optimum_models"] = r.optimum_models;
  j["optimum_params_m"] = r.optimum_params_m;
  j["optimum_bpb"] = r.optimum_bpb;
  j["regime"] = r.regime ? nlohmann::ordered_json(to_string(*r.regime)) : nlohmann::ordered_json(nullptr);
  j["overfit_models"] = r.overfit_models;
  return j;
}

inline nlohmann::ordered_json to_json(const PlanRecommendation& r) {
  using J = nlohmann::ordered_json;
  J j;
  j["budget_min"] = r.budget_min;
  j["n_star_continuous_m"] = r.n_star_continuous_m;
  j["snapped_depth"] = r.snapped_depth;
  j["snapped_model"] = "D" + std::to_string(r.snapped_depth);
  j["snapped_params_m"] = r.snapped_params_m;
  j["expected_bpb"] = r.expected_bpb;
  j["tokens"] = r.tokens;
  j["epochs"] = r.epochs ? J(*r.epochs) : J(nullptr);
  j["flops"] = r.flops;
  j["chinchilla_n_m"] = r.chinchilla_n_m;
  j["measured_bpb"] = r.measured_bpb ? J(*r.measured_bpb) : J(nullptr);
  j["measured_models"] = r.measured_models;
  j["notes"] = r.notes;
  return j;
}

inline nlohmann::ordered_json to_json(const ReportBundle& b) {
  using J = nlohmann::ordered_json;
  J j;
  j["schema_version"] = kReportSchemaVersion;
  j["source"] = b.source;
  j["tie_policy"] = {{"mode", to_string(b.options.tie.mode)}, {"epsilon_bpb", b.options.tie.epsilon_bpb}};
  j["flag_epsilon"] = b.options.flag_epsilon;
  j["seed"] = b.options.seed;

  J fits;
  if (b.size_law) {
    J s = to_json(b.size_law->fit);
    if (b.size_law_bootstrap) {
      s["bootstrap_ci95"] = J::array({b.size_law_bootstrap->low, b.size_law_bootstrap->high});
      s["bootstrap_resamples"] = b.options.bootstrap_resamples;
    }
    J anchors = J::array();
    for (const auto& a : b.size_law->anchors) {
      anchors.push_back({{"budget_min", a.budget_min}, {"params_m", a.params_m}, {"depth", a.depth}, {"bpb", a.bpb}, {"models", a.models}});
    }
    s["anchors"] = std::move(anchors);
    fits["size_law"] = std::move(s);
  }
  if (b.loss_law) fits["loss_law"] = to_json(*b.loss_law);
  if (b.depth_law) fits["depth_law"] = to_json(*b.depth_law);
  j["fits"] = std::move(fits);

  J reports = J::array();
  for (const auto& r : b.budget_reports) reports.push_back(to_json(r));
  j["budget_reports"] = std::move(reports);

  J flags = J::array();
  for (const auto& f : b.overfit) {
    flags.push_back({{"model_id", f.model_id}, {"seed", f.seed ? J(*f.seed) : J(nullptr)}, {"budget_min", f.budget_min}, {"delta_bpb", f.delta_bpb}});
  }
  j["overfit_flags"] = std::move(flags);

  J marginal = J::array();
  for (const auto& m : b.marginal) {
    marginal.push_back({{"from_min", m.from_min}, {"to_min", m.to_min}, {"delta_bpb", m.delta_bpb}, {"bpb_per_hour", m.bpb_per_hour}});
  }
  j["marginal_returns"] = std::move(marginal);

  J sens = J::array();
  for (const auto& v : b.sensitivity.variants) sens.push_back({{"variant", v.name}, {"fit", to_json(v.fit)}});
  j["sensitivity"] = std::move(sens);

  J evo = J::array();
  for (const auto& p : b.alpha_evolution) {
    evo.push_back({{"n_points", p.n_points}, {"last_budget_min", p.last_budget_min}, {"fit", to_json(p.fit)}});
  }
  j["alpha_evolution"] = std::move(evo);

  J cmp = J::array();
  for (const auto& c : b.comparison) {
    cmp.push_back({{"multiplier", c.multiplier}, {"fitted", c.fitted}, {"alpha_0_60", c.headline}, {"chinchilla_0_50", c.chinchilla}});
  }
  j["comparison"] = std::move(cmp);

  if (b.throughput) {
    j["throughput"] = {{"profile", b.throughput->profile_name},
                       {"c", b.throughput->law.c},
                       {"beta", b.throughput->law.beta},
                       {"r2", b.throughput->law.r2},
                       {"n_points", b.throughput->law.n_points},
                       {"compute_exponent", b.throughput->compute_exponent}};
  } else {
    j["throughput"] = nullptr;
  }

  if (b.multiseed) {
    J ms = J::array();
    for (const auto& s : b.multiseed->models) {
      ms.push_back({{"model_id", s.model_id},
                    {"values", s.values},
                    {"mean", s.mean},
                    {"sample_std", s.sample_std},
                    {"population_std", s.population_std},
                    {"cv_pct", s.cv_pct},
                    {"cv_population_pct", s.cv_population_pct}});
    }
    J dom = J::array();
    for (std::size_t a = 0; a < b.multiseed->models.size(); ++a) {
      for (std::size_t c = 0; c < b.multiseed->models.size(); ++c) {
        if (b.multiseed->dominance[a][c]) dom.push_back({b.multiseed->models[a].model_id, b.multiseed->models[c].model_id});
      }
    }
    j["multiseed"] = {{"models", std::move(ms)}, {"dominates", std::move(dom)}};
  } else {
    j["multiseed"] = nullptr;
  }
  j["discrepancy_notes"] = b.discrepancy_notes;
  j["notices"] = b.notices;
  return j;
}

/// Long-format CSV: section,item,field,value.
inline std::string to_csv(const ReportBundle& b) {
  std::ostringstream out;
  auto num = [](double v) {
    if (!std::isfinite(v)) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  auto row = [&](const std::string& section, const std::string& item, const std::string& field, const std::string& value) {
    auto esc = [](const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string e = "\"";
      for (char c : s) e += c == '"' ? std::string("\"\"") : std::string(1, c);
      return e + "\"";
    };
    out << esc(section) << ',' << esc(item) << ',' << esc(field) << ',' << esc(value) << '\n';
  };
  auto fit_rows = [&](const std::string& section, const std::string& item, const PowerLawFit& f) {
    row(section, item, "coeff_a", num(f.coeff_a));
    row(section, item, "exponent_alpha", num(f.exponent_alpha));
    row(section, item, "r2", f.r2_undefined ? "" : num(f.r2));
    row(section, item, "stderr_alpha", num(f.stderr_alpha));
    row(section, item, "ci95_low", num(f.ci95_low));
    row(section, item, "ci95_high", num(f.ci95_high));
    row(section, item, "n_points", std::to_string(f.n_points));
  };
  out << "section,item,field,value\n";
  row("meta", "report", "schema_version", std::to_string(kReportSchemaVersion));
  row("meta", "report", "source", b.source);
  if (b.size_law) fit_rows("fit", "size_law", b.size_law->fit);
  if (b.size_law_bootstrap) {
    row("fit", "size_law", "bootstrap_ci95_low", num(b.size_law_bootstrap->low));
    row("fit", "size_law", "bootstrap_ci95_high", num(b.size_law_bootstrap->high));
  }
  if (b.loss_law) fit_rows("fit", "loss_law", *b.loss_law);
  if (b.depth_law) fit_rows("fit", "depth_law", *b.depth_law);
  for (const auto& r : b.budget_reports) {
    const std::string item = num(r.budget_min);
    std::string models;
    for (const auto& m : r.optimum_models) models += (models.empty() ? "" : ";") + m;
    std::string overfit;
    for (const auto& m : r.overfit_models) overfit += (overfit.empty() ? "" : ";") + m;
    row("budget", item, "optimum_models", models);
    row("budget", item, "optimum_params_m", num(r.optimum_params_m));
    row("budget", item, "optimum_bpb", num(r.optimum_bpb));
    row("budget", item, "regime", r.regime ? to_string(*r.regime) : "");
    row("budget", item, "overfit_models", overfit);
  }
  for (const auto& m : b.marginal) {
    const std::string item = num(m.from_min) + "->" + num(m.to_min);
    row("marginal", item, "delta_bpb", num(m.delta_bpb));
    row("marginal", item, "bpb_per_hour", num(m.bpb_per_hour));
  }
  for (const auto& v : b.sensitivity.variants) fit_rows("sensitivity", v.name, v.fit);
  for (const auto& p : b.alpha_evolution) fit_rows("alpha_evolution", std::to_string(p.n_points), p.fit);
  for (const auto& c : b.comparison) {
    const std::string item = num(c.multiplier);
    row("comparison", item, "fitted", num(c.fitted));
    row("comparison", item, "alpha_0_60", num(c.headline));
    row("comparison", item, "chinchilla_0_50", num(c.chinchilla));
  }
  if (b.throughput) {
    row("throughput", b.throughput->profile_name, "c", num(b.throughput->law.c));
    row("throughput", b.throughput->profile_name, "beta", num(b.throughput->law.beta));
    row("throughput", b.throughput->profile_name, "r2", num(b.throughput->law.r2));
    row("throughput", b.throughput->profile_name, "compute_exponent", num(b.throughput->compute_exponent));
  }
  if (b.multiseed) {
    for (const auto& s : b.multiseed->models) {
      row("multiseed", s.model_id, "mean", num(s.mean));
      row("multiseed", s.model_id, "sample_std", num(s.sample_std));
      row("multiseed", s.model_id, "population_std", num(s.population_std));
      row("multiseed", s.model_id, "cv_pct", num(s.cv_pct));
      row("multiseed", s.model_id, "cv_population_pct", num(s.cv_population_pct));
    }
  }
  for (std::size_t i = 0; i < b.discrepancy_notes.size(); ++i) {
    row("discrepancy", std::to_string(i + 1), "note", b.discrepancy_notes[i]);
  }
  return out.str();
}

}  // namespace tcsl
