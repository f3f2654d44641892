// Sweep the mechanistic simulator and show how the regime changes as the
// dataset shrinks, then fit the simulator back to the embedded grid.

#include <cstdio>

#include "tcsl/budget.hpp"
#include "tcsl/reference.hpp"
#include "tcsl/sim.hpp"

int main() {
  using namespace tcsl;
  const auto profile = rtx4090_profile();
  const std::vector<double> budgets(kReferenceBudgets.begin(), kReferenceBudgets.end());

  for (double u : {480e6, 48e6, 12e6}) {
    auto params = SimParams::defaults();
    params.u_tokens = u;
    const auto grid = sweep(params, profile, budgets, reference_configs()).grid;
    std::printf("dataset %4.0fM tokens:", u / 1e6);
    for (const auto& r : budget_reports(grid)) {
      const char* tag = !r.regime ? "-" : *r.regime == RegimeLabel::compute_bounded ? "C"
                                      : *r.regime == RegimeLabel::transitional    ? "T"
                                                                                  : "D";
      std::printf("  %s:%s", r.optimum_models.front().c_str(), tag);
    }
    std::printf("\n");
  }
  std::printf("(C compute-bounded, T transitional, D data-bounded; budgets 5 min to 24 h)\n\n");

  const auto ref = load_reference_dataset();
  const auto fit = calibrate(SimParams::defaults(), ref.grid, profile, 200, 7);
  std::printf("calibrated to the embedded grid: rmse %.4f (from %.4f) in %d iterations\n", fit.rmse, fit.initial_rmse,
              fit.iterations);
  std::printf("%s\n", to_json(fit.params).dump(2).c_str());
  return 0;
}
