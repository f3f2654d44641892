// Recommend a model size for a few wall-clock budgets on the built-in
// RTX 4090 profile, using laws fitted to the embedded run grid.

#include <cstdio>

#include "tcsl/commands.hpp"

int main() {
  using namespace tcsl;
  const auto ref = load_reference_dataset();
  const auto laws = cmd::laws_from_grid(ref.grid, TiePolicy{});
  const auto profile = rtx4090_profile();

  std::printf("N*(t) = %.3f t^%.4f\n\n", laws.size_law.coeff_a, laws.size_law.exponent_alpha);
  std::printf("%8s %10s %6s %9s %10s %8s %12s\n", "budget", "N* (M)", "snap", "exp. bpb", "tokens", "epochs", "compute-opt");
  const auto rows = guidelines_table(laws, ref.configs, profile, {45, 90, 180, 360, 960, 2000}, &ref.grid,
                                     static_cast<double>(ref.dataset_tokens));
  for (const auto& r : rows) {
    std::printf("%6gm %10.1f %6s %9.4f %9.1fM %8.1f %11.1fM\n", r.budget_min, r.n_star_continuous_m,
                ("D" + std::to_string(r.snapped_depth)).c_str(), r.expected_bpb, r.tokens / 1e6, r.epochs.value_or(0),
                r.chinchilla_n_m);
    for (const auto& n : r.notes) std::printf("         note: %s\n", n.c_str());
  }
  return 0;
}
