#include "specsub/error.hpp"
#include "specsub/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace specsub;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("specsub_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> read_summary(const fs::path &p) {
  std::map<std::string, std::string> kv;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    EXPECT_NE(eq, std::string::npos) << line;
    EXPECT_TRUE(kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) << "duplicate " << line;
  }
  return kv;
}

std::size_t count_lines(const fs::path &p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line))
    ++n;
  return n;
}

ExperimentConfig base_config(std::size_t n_time, const fs::path &out) {
  ExperimentConfig c;
  SimulateBlock s;
  s.phi = {0.22, -0.1};
  s.theta = {0.5};
  s.n = n_time;
  s.seed = 5;
  c.data.simulate = s;
  c.model.ar_order = 2;
  c.model.ma_order = 1;
  c.sampler.iterations = 400;
  c.sampler.burn_in = 50;
  c.sampler.seed = 3;
  c.output.dir = out.string();
  c.output.kde_grid = 64;
  c.output.spectrum_draws = 50;
  return c;
}

} // namespace

TEST(CmdFit, FullMethodEmitsArtifacts) {
  const auto dir = scratch("full");
  auto cfg = base_config(4001, dir);
  cfg.sampler.method = Method::full;
  cmd_fit(cfg);
  for (const char *f : {"draws.csv", "summary.txt", "spectrum.csv", "periodogram.csv",
                        "timing.txt", "kde_phi_tilde1.csv", "kde_log_sigma2.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(count_lines(dir / "draws.csv"), 401u);
  EXPECT_EQ(count_lines(dir / "spectrum.csv"), 2001u);
  EXPECT_EQ(slurp(dir / "draws.csv").substr(0, 46),
            "phi_tilde1,phi_tilde2,theta_tilde1,log_sigma2\n");
  const auto kv = read_summary(dir / "summary.txt");
  EXPECT_EQ(kv.at("method"), "full");
  EXPECT_EQ(kv.at("n_freq"), "2000");
  EXPECT_EQ(std::stod(kv.at("density_evals_per_iteration")), 2000.0);
  EXPECT_TRUE(kv.count("if.theta_tilde1"));
  EXPECT_TRUE(kv.count("natural.mean.sigma2"));
}

TEST(CmdFit, TableScaleTaylorDensityEvaluations) {
  const auto dir = scratch("taylor");
  auto cfg = base_config(44001, dir);
  cfg.sampler.method = Method::subsample;
  cfg.sampler.cv = CvKind::taylor;
  cfg.sampler.group_count = 1000;
  cfg.sampler.m_percent = 2;
  cfg.sampler.iterations = 200;
  cmd_fit(cfg);
  const auto kv = read_summary(dir / "summary.txt");
  EXPECT_EQ(kv.at("n_freq"), "22000");
  EXPECT_EQ(kv.at("group_size"), "22");
  EXPECT_EQ(kv.at("m"), "20");
  EXPECT_EQ(std::stod(kv.at("density_evals_per_iteration")), 440.0);
}

TEST(CmdFit, DeterministicGivenConfigAndSeed) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto cfg = base_config(4001, a);
  cfg.sampler.group_count = 100;
  cfg.sampler.m_percent = 5;
  cmd_fit(cfg);
  cfg.output.dir = b.string();
  cmd_fit(cfg);
  for (const char *f : {"draws.csv", "summary.txt", "spectrum.csv", "kde_log_sigma2.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(CmdFit, CoresetRun) {
  const auto dir = scratch("coreset");
  auto cfg = base_config(4001, dir);
  cfg.sampler.cv = CvKind::coreset;
  cfg.sampler.group_count = 20;
  cfg.sampler.m_percent = 20;
  cfg.sampler.coreset_iterations = 30;
  cfg.sampler.projections = 100;
  cmd_fit(cfg);
  const auto kv = read_summary(dir / "summary.txt");
  EXPECT_EQ(kv.at("cv"), "coreset");
  EXPECT_GT(std::stod(kv.at("coreset_mean_atoms")), 0.0);
  EXPECT_LE(std::stod(kv.at("coreset_mean_atoms")), 30.0);
  EXPECT_EQ(kv.at("setup_density_evals"), "200000");
}

TEST(CmdCompare, IdenticalConfigsGiveUnitRct) {
  const auto dir = scratch("cmp_same");
  auto cfg = base_config(4001, dir);
  cfg.sampler.iterations = 1000;
  const auto c = cmd_compare(cfg, cfg, dir);
  for (double r : c.rct)
    EXPECT_NEAR(r, 1.0, 1e-12);
  EXPECT_EQ(c.rct.size(), 4u);
  EXPECT_EQ(count_lines(dir / "efficiency.csv"), 9u);
  EXPECT_EQ(slurp(dir / "efficiency.csv").substr(0, 36), "run,parameter,IF,density_evals,CT,RC");
  EXPECT_TRUE(fs::exists(dir / "agreement.csv"));
  EXPECT_TRUE(fs::exists(dir / "sub" / "draws.csv"));
}

TEST(CmdCompare, ModelMismatchIsAnError) {
  const auto dir = scratch("cmp_bad");
  auto a = base_config(4001, dir);
  auto b = a;
  b.model.ma_order = 0;
  try {
    cmd_compare(a, b, dir);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::config);
  }
}

TEST(CmdPeriodogram, RowCountAndErrors) {
  const auto dir = scratch("pg");
  fs::create_directories(dir);
  ExperimentConfig cfg = base_config(44001, dir);
  cmd_simulate(cfg, (dir / "series.txt").string());
  cmd_periodogram((dir / "series.txt").string(), (dir / "pg.csv").string());
  EXPECT_EQ(count_lines(dir / "pg.csv"), 22001u);
  std::ofstream(dir / "bad.txt") << "1\n2\nx\n";
  try {
    cmd_periodogram((dir / "bad.txt").string(), (dir / "bad.csv").string());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.category(), ErrorCategory::parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(CmdSimulate, ArtfimaSynthesis) {
  const auto dir = scratch("sim");
  fs::create_directories(dir);
  auto cfg = base_config(1000, dir);
  cfg.data.simulate->d = 0.3;
  cfg.data.simulate->lambda = 0.1;
  cmd_simulate(cfg, (dir / "s.txt").string());
  EXPECT_EQ(count_lines(dir / "s.txt"), 1001u);
  EXPECT_EQ(raw_series(cfg.data).n_time(), 1000u);
}
