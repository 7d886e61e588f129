#ifndef SPECSUB_PIPELINE_HPP
#define SPECSUB_PIPELINE_HPP

/** @file
 * End-to-end drivers behind the command-line tool: load or simulate data,
 * fit a model by full or subsampled MCMC, and write run artifacts.
 */

#include "specsub/config.hpp"
#include "specsub/control_variates.hpp"
#include "specsub/diagnostics.hpp"
#include "specsub/error.hpp"
#include "specsub/groups.hpp"
#include "specsub/models.hpp"
#include "specsub/sampler.hpp"
#include "specsub/series.hpp"
#include "specsub/spectral.hpp"
#include "specsub/whittle.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

namespace specsub {

/// Series described by the config's data source, before any transform.
inline TimeSeries raw_series(const DataBlock &data) {
  if (data.path)
    return load_series(*data.path, data.column);
  if (!data.simulate)
    fail(ErrorCategory::config, "no data source configured");
  const SimulateBlock &s = *data.simulate;
  if (!s.d) {
    if (s.lambda)
      fail(ErrorCategory::config, "simulate lambda requires d");
    return s.burn_in ? simulate_arma(s.phi, s.theta, s.sigma2, s.n, s.seed, *s.burn_in)
                     : simulate_arma(s.phi, s.theta, s.sigma2, s.n, s.seed);
  }
  ModelSpec spec;
  spec.ar_order = s.phi.size();
  spec.ma_order = s.theta.size();
  spec.fractional = s.lambda ? Fractional::artfima : Fractional::arfima;
  NaturalParams p;
  p.phi = s.phi;
  p.theta = s.theta;
  p.d = *s.d;
  p.lambda = s.lambda;
  p.sigma2 = s.sigma2;
  const SpectralDensity f(spec, p);
  return synthesize_gaussian(
      [&](double w) { return std::exp(f.log_density(FrequencyPoint::at(w))); }, s.n,
      s.seed);
}

/// Demeaned (and optionally log-squared) series ready for the periodogram.
inline TimeSeries prepare_series(const DataBlock &data) {
  const TimeSeries raw = raw_series(data);
  return data.log_square ? log_square_transform(raw, data.log_square_floor)
                         : demean(raw);
}

inline WhittleData prepare_data(const ExperimentConfig &cfg) {
  return WhittleData(periodogram(prepare_series(cfg.data)), cfg.model);
}

struct FitResult {
  ModeResult mode;
  ChainOutput chain;
  std::size_t group_count = 0;
  std::size_t group_size = 0;
  std::size_t m = 0;
  double coreset_mean_atoms = 0.0;
  double wall_seconds = 0.0;
};

inline ChainSettings chain_settings(const ExperimentConfig &cfg) {
  ChainSettings s;
  s.iterations = cfg.sampler.iterations;
  s.burn_in = cfg.sampler.burn_in;
  s.blocks = cfg.sampler.blocks;
  s.m = cfg.subsample_size();
  s.proposal_scale = cfg.sampler.proposal_scale;
  s.seed = derive_seed(cfg.sampler.seed, "chain");
  return s;
}

/// Mode, control variates and chain for a prepared data set.
inline FitResult run_fit(const ExperimentConfig &cfg, const WhittleData &data) {
  const auto t0 = std::chrono::steady_clock::now();
  FitResult r;
  r.mode = find_mode(data, default_start(data));
  const ChainInit init = chain_init(r.mode);
  const ChainSettings settings = chain_settings(cfg);

  if (cfg.sampler.method == Method::full) {
    r.chain = run_full_chain(data, settings, init);
    r.group_count = data.size();
    r.group_size = 1;
    r.m = data.size();
  } else {
    const GroupIndex groups = make_groups(data.size(), cfg.sampler.group_count);
    r.group_count = groups.count();
    r.group_size = groups.max_cell_size();
    r.m = settings.m;
    ControlVariate cv;
    std::uint64_t setup = 0;
    switch (cfg.sampler.cv) {
    case CvKind::none:
      cv = NoControlVariate{};
      break;
    case CvKind::taylor:
      cv = build_taylor_cv(data, groups, r.mode.mode);
      break;
    case CvKind::coreset: {
      const WeightingDistribution wd =
          laplace_weighting(r.mode.mode, -r.mode.neg_hessian);
      CoresetCV c = build_coreset_cv(data, groups, wd, cfg.sampler.coreset_iterations,
                                     cfg.sampler.projections,
                                     derive_seed(cfg.sampler.seed, "coreset"));
      r.coreset_mean_atoms = c.mean_atoms();
      setup = static_cast<std::uint64_t>(cfg.sampler.projections) * data.size();
      cv = std::move(c);
      break;
    }
    }
    r.chain = run_pm_chain(data, groups, cv, settings, init);
    if (cfg.sampler.cv == CvKind::coreset)
      r.chain.setup_density_evals = setup;
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path &p) {
  std::ofstream out(p);
  if (!out)
    fail(ErrorCategory::io, "cannot write '" + p.string() + "'");
  return out;
}

inline void check_written(std::ofstream &out, const std::filesystem::path &p) {
  out.flush();
  if (!out)
    fail(ErrorCategory::io, "write to '" + p.string() + "' failed");
}

inline void make_dir(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    fail(ErrorCategory::io, "cannot create '" + dir.string() + "': " + ec.message());
}

} // namespace detail

/// Rows of draws with an unconstrained-parameter header.
inline void write_draws_csv(const Eigen::MatrixXd &draws,
                            const std::vector<std::string> &names,
                            const std::filesystem::path &path) {
  auto out = detail::open_out(path);
  for (std::size_t j = 0; j < names.size(); ++j)
    out << (j ? "," : "") << names[j];
  out << '\n';
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    for (Eigen::Index j = 0; j < draws.cols(); ++j)
      out << (j ? "," : "") << detail::fmt17(draws(r, j));
    out << '\n';
  }
  detail::check_written(out, path);
}

/// Evenly spaced subset of at most `count` rows (all rows if count is 0).
inline Eigen::MatrixXd thin_rows(const Eigen::MatrixXd &draws, std::size_t count) {
  const auto n = static_cast<std::size_t>(draws.rows());
  if (count == 0 || count >= n)
    return draws;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), draws.cols());
  for (std::size_t i = 0; i < count; ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        draws.row(static_cast<Eigen::Index>(i * n / count));
  return out;
}

/// Writes draws.csv, summary.txt, kde_<param>.csv, spectrum.csv,
/// periodogram.csv and timing.txt into `dir`. Everything except timing.txt
/// is a deterministic function of config and seed.
inline void write_fit_artifacts(const ExperimentConfig &cfg, const WhittleData &data,
                                const FitResult &r, const std::filesystem::path &dir) {
  detail::make_dir(dir);
  const ModelSpec &spec = data.spec();
  const auto names = spec.parameter_names();
  const auto nat_names = spec.natural_names();
  const ChainOutput &ch = r.chain;

  write_draws_csv(ch.draws, names, dir / "draws.csv");
  write_periodogram_csv(data.periodogram(), (dir / "periodogram.csv").string());

  const MarginalSummary ms = summarize(ch.draws);
  const MarginalSummary nat = summarize(natural_draws(ch.draws, spec));
  const auto mode_nat = to_natural(spec, r.mode.mode).flatten(spec);
  const EfficiencyReport eff = efficiency_report(names, ch);

  {
    const auto p = dir / "summary.txt";
    auto out = detail::open_out(p);
    using detail::fmt17;
    out << "method=" << method_name(cfg.sampler.method) << '\n';
    out << "cv="
        << (cfg.sampler.method == Method::full ? "none" : cv_name(cfg.sampler.cv))
        << '\n';
    out << "model_ar_order=" << spec.ar_order << '\n';
    out << "model_ma_order=" << spec.ma_order << '\n';
    out << "model_fractional=" << fractional_name(spec.fractional) << '\n';
    out << "model_sv=" << (spec.sv_wrapper ? "true" : "false") << '\n';
    out << "n_time=" << data.periodogram().grid().n_time() << '\n';
    out << "n_freq=" << data.size() << '\n';
    out << "dim=" << spec.dim() << '\n';
    out << "group_count=" << r.group_count << '\n';
    out << "group_size=" << r.group_size << '\n';
    out << "m=" << r.m << '\n';
    out << "blocks=" << cfg.sampler.blocks << '\n';
    out << "iterations=" << cfg.sampler.iterations << '\n';
    out << "burn_in=" << cfg.sampler.burn_in << '\n';
    out << "seed=" << cfg.sampler.seed << '\n';
    out << "acceptance_rate=" << fmt17(ch.acceptance_rate) << '\n';
    out << "density_evals=" << ch.density_evals << '\n';
    out << "density_evals_per_iteration=" << fmt17(ch.evals_per_iteration()) << '\n';
    out << "setup_density_evals=" << ch.setup_density_evals << '\n';
    if (cfg.sampler.method == Method::subsample && cfg.sampler.cv == CvKind::coreset)
      out << "coreset_mean_atoms=" << fmt17(r.coreset_mean_atoms) << '\n';
    out << "mode_log_posterior=" << fmt17(r.mode.log_posterior) << '\n';
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      out << "mode." << names[j] << '=' << fmt17(r.mode.mode[i]) << '\n';
      out << "mean." << names[j] << '=' << fmt17(ms.mean[i]) << '\n';
      out << "sd." << names[j] << '=' << fmt17(ms.sd[i]) << '\n';
      out << "if." << names[j] << '=' << fmt17(eff.inefficiency[j]) << '\n';
      out << "ct." << names[j] << '=' << fmt17(eff.computational_time[j]) << '\n';
    }
    for (std::size_t j = 0; j < nat_names.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      out << "natural.mode." << nat_names[j] << '=' << fmt17(mode_nat[j]) << '\n';
      out << "natural.mean." << nat_names[j] << '=' << fmt17(nat.mean[i]) << '\n';
      out << "natural.sd." << nat_names[j] << '=' << fmt17(nat.sd[i]) << '\n';
    }
    detail::check_written(out, p);
  }

  for (std::size_t j = 0; j < names.size(); ++j) {
    const Eigen::VectorXd col = ch.draws.col(static_cast<Eigen::Index>(j));
    const KdeGrid kde = kde_grid(std::span<const double>(col.data(), col.size()),
                                 cfg.output.kde_grid);
    const auto p = dir / ("kde_" + names[j] + ".csv");
    auto out = detail::open_out(p);
    out << "x,density\n";
    for (std::size_t g = 0; g < kde.x.size(); ++g)
      out << detail::fmt17(kde.x[g]) << ',' << detail::fmt17(kde.density[g]) << '\n';
    detail::check_written(out, p);
  }

  {
    const auto &grid = data.periodogram().grid();
    const auto spectrum = posterior_mean_spectrum(
        thin_rows(ch.draws, cfg.output.spectrum_draws), spec, grid);
    const auto p = dir / "spectrum.csv";
    auto out = detail::open_out(p);
    out << "omega,log_density\n";
    for (std::size_t k = 0; k < spectrum.size(); ++k)
      out << detail::fmt17(grid[k]) << ',' << detail::fmt17(spectrum[k]) << '\n';
    detail::check_written(out, p);
  }

  {
    const auto p = dir / "timing.txt";
    auto out = detail::open_out(p);
    out << "wall_seconds=" << detail::fmt17(r.wall_seconds) << '\n';
    detail::check_written(out, p);
  }
}

// ---------------------------------------------------------------------------
// Commands

/// Periodogram of one column of a series file (demeaned, optionally after
/// the log-square transform) written as omega,ordinate.
inline void cmd_periodogram(const std::string &input, const std::string &output,
                            std::size_t column = 0, bool log_square = false) {
  const TimeSeries raw = load_series(input, column);
  const TimeSeries s = log_square ? log_square_transform(raw) : demean(raw);
  write_periodogram_csv(periodogram(s), output);
}

/// Series described by the config written one value per line.
inline void cmd_simulate(const ExperimentConfig &cfg, const std::string &output) {
  const TimeSeries s = raw_series(cfg.data);
  auto out = detail::open_out(output);
  out << "# value\n";
  for (double v : s.values())
    out << detail::fmt17(v) << '\n';
  detail::check_written(out, output);
}

inline FitResult cmd_fit(const ExperimentConfig &cfg) {
  const WhittleData data = prepare_data(cfg);
  FitResult r = run_fit(cfg, data);
  write_fit_artifacts(cfg, data, r, cfg.output.dir);
  return r;
}

struct CompareResult {
  EfficiencyReport full;
  EfficiencyReport sub;
  std::vector<double> rct;
  std::vector<double> mean_shift; // |mean_sub - mean_full| / sd_full
  std::vector<double> sd_ratio;   // sd_sub / sd_full
};

inline CompareResult compare_fits(const std::vector<std::string> &names,
                                  const ChainOutput &full, const ChainOutput &sub) {
  CompareResult c;
  c.full = efficiency_report(names, full);
  c.sub = efficiency_report(names, sub);
  c.rct = relative_ct(c.sub, c.full);
  const MarginalSummary a = summarize(full.draws);
  const MarginalSummary b = summarize(sub.draws);
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    c.mean_shift.push_back(std::abs(b.mean[i] - a.mean[i]) / a.sd[i]);
    c.sd_ratio.push_back(b.sd[i] / a.sd[i]);
  }
  return c;
}

/// Runs both configs (concurrently) on the shared data set and writes
/// full/ and sub/ run directories plus efficiency.csv and agreement.csv.
inline CompareResult cmd_compare(const ExperimentConfig &full_cfg,
                                 const ExperimentConfig &sub_cfg,
                                 const std::filesystem::path &out_dir) {
  if (!(full_cfg.data == sub_cfg.data))
    fail(ErrorCategory::config, "compare: configs use different data sources");
  if (!(full_cfg.model == sub_cfg.model))
    fail(ErrorCategory::config, "compare: configs use different models");
  const WhittleData data = prepare_data(full_cfg);
  auto fut_full = std::async(std::launch::async, [&] { return run_fit(full_cfg, data); });
  FitResult sub = run_fit(sub_cfg, data);
  FitResult full = fut_full.get();

  write_fit_artifacts(full_cfg, data, full, out_dir / "full");
  write_fit_artifacts(sub_cfg, data, sub, out_dir / "sub");

  const auto names = data.spec().parameter_names();
  CompareResult c = compare_fits(names, full.chain, sub.chain);
  using detail::fmt17;
  {
    const auto p = out_dir / "efficiency.csv";
    auto out = detail::open_out(p);
    out << "run,parameter,IF,density_evals,CT,RCT\n";
    for (std::size_t j = 0; j < names.size(); ++j)
      out << "full," << names[j] << ',' << fmt17(c.full.inefficiency[j]) << ','
          << fmt17(c.full.density_evals) << ',' << fmt17(c.full.computational_time[j])
          << ",1\n";
    for (std::size_t j = 0; j < names.size(); ++j)
      out << "sub," << names[j] << ',' << fmt17(c.sub.inefficiency[j]) << ','
          << fmt17(c.sub.density_evals) << ',' << fmt17(c.sub.computational_time[j])
          << ',' << fmt17(c.rct[j]) << '\n';
    detail::check_written(out, p);
  }
  {
    const auto p = out_dir / "agreement.csv";
    auto out = detail::open_out(p);
    out << "parameter,abs_mean_diff_over_sd,sd_ratio\n";
    for (std::size_t j = 0; j < names.size(); ++j)
      out << names[j] << ',' << fmt17(c.mean_shift[j]) << ',' << fmt17(c.sd_ratio[j])
          << '\n';
    detail::check_written(out, p);
  }
  return c;
}

} // namespace specsub

#endif
