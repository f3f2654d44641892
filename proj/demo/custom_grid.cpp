// Analyze a user-supplied run grid against a custom hardware profile and
// write the full report next to it.
//
//   demo_custom_grid [runs.csv] [profile.json] [out_dir]

#include <cstdio>
#include <string>

#include "tcsl/commands.hpp"

#ifndef TCSL_DEMO_DATA
#define TCSL_DEMO_DATA "demo/data"
#endif

int main(int argc, char** argv) {
  using namespace tcsl;
  const std::string runs = argc > 1 ? argv[1] : TCSL_DEMO_DATA "/small_gpu_runs.csv";
  const std::string hw = argc > 2 ? argv[2] : TCSL_DEMO_DATA "/small_gpu.json";
  const std::string out_dir = argc > 3 ? argv[3] : "custom_grid_out";
  try {
    const auto in = cmd::load_grid(runs);
    const auto profile = cmd::load_profile(hw);
    const auto out = cmd::analyze(in, ReportOptions{}, profile);
    cmd::write_outputs(out_dir, out.files);

    const auto& b = out.bundle;
    for (const auto& r : b.budget_reports) {
      std::printf("%6g min  %-8s %.3f  %s\n", r.budget_min, r.optimum_models.front().c_str(), r.optimum_bpb,
                  r.regime ? to_string(*r.regime).c_str() : "-");
    }
    const auto& f = b.size_law->fit;
    std::printf("alpha %.3f, 95%% CI [%.3f, %.3f]", f.exponent_alpha, f.ci95_low, f.ci95_high);
    if (b.size_law_bootstrap) std::printf(", bootstrap [%.3f, %.3f]", b.size_law_bootstrap->low, b.size_law_bootstrap->high);
    std::printf("\nthroughput beta on '%s': %.3f\n", profile.name.c_str(), b.throughput->law.beta);
    if (b.multiseed) {
      for (const auto& s : b.multiseed->models) {
        std::printf("%s over %zu seeds: %.4f +/- %.4f\n", s.model_id.c_str(), s.values.size(), s.mean, s.sample_std);
      }
    }
    std::printf("report written to %s/\n", out_dir.c_str());
  } catch (const cmd::InputRejected& e) {
    for (const auto& i : e.issues()) std::fprintf(stderr, "%s\n", cmd::describe(i).c_str());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cmd::exit_code_for(e.kind());
  }
  return 0;
}
