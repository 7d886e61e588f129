// Relative computational time of the Taylor and coreset subsamplers against
// the full-data chain on a simulated ARTFIMA(1,0) series.
//
//   rct_large_scale [n_time] [iterations]
//
// Defaults (400001, 20000) take a few minutes on one core. Around n_time = 1e5
// the log_lambda posterior has a flat ridge toward large lambda and the
// subsampled chains can wander along it.

#include "specsub/specsub.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

using namespace specsub;

int main(int argc, char **argv) {
  const std::size_t n_time = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 400001;
  const std::size_t iterations = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20000;

  ExperimentConfig base;
  SimulateBlock sim;
  sim.phi = {0.4};
  sim.d = 0.3;
  sim.lambda = 0.05;
  sim.n = n_time;
  sim.seed = 12;
  base.data.simulate = sim;
  base.model.ar_order = 1;
  base.model.fractional = Fractional::artfima;
  base.sampler.iterations = iterations;
  base.sampler.burn_in = iterations / 10;
  base.sampler.group_count = 1000;
  base.sampler.m_percent = 1.0;

  try {
    const WhittleData data = prepare_data(base);
    const auto names = base.model.parameter_names();
    std::printf("n_freq %zu  iterations %zu\n", data.size(), iterations);

    ExperimentConfig full_cfg = base;
    full_cfg.sampler.method = Method::full;
    full_cfg.sampler.iterations = iterations / 4;
    full_cfg.sampler.burn_in = iterations / 40;
    const FitResult full = run_fit(full_cfg, data);
    std::printf("full      acc %.3f  %.1fs\n", full.chain.acceptance_rate, full.wall_seconds);

    for (CvKind kind : {CvKind::taylor, CvKind::coreset}) {
      ExperimentConfig cfg = base;
      cfg.sampler.cv = kind;
      const FitResult sub = run_fit(cfg, data);
      const CompareResult c = compare_fits(names, full.chain, sub.chain);
      std::printf("%-8s  acc %.3f  %.1fs  evals/iter %.0f", cv_name(kind),
                  sub.chain.acceptance_rate, sub.wall_seconds, c.sub.density_evals);
      if (kind == CvKind::coreset)
        std::printf("  mean atoms %.1f", sub.coreset_mean_atoms);
      std::printf("\n");
      for (std::size_t j = 0; j < names.size(); ++j)
        std::printf("  %-12s IF %6.2f  RCT %7.2f  shift %.3f  sd ratio %.3f\n",
                    names[j].c_str(), c.sub.inefficiency[j], c.rct[j], c.mean_shift[j],
                    c.sd_ratio[j]);
    }
  } catch (const Error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
