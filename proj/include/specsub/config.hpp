#ifndef SPECSUB_CONFIG_HPP
#define SPECSUB_CONFIG_HPP

/** @file
 * Experiment configuration: a flat INI-style file with typed keys.
 *
 *   [data]        path, column, transform (none | log_square), log_square_floor
 *   [simulate]    phi, theta, sigma2, d, lambda, n, seed, burn_in
 *   [model]       ar_order, ma_order, fractional (none | arfima | artfima),
 *                 sv, prior.<block>.mean, prior.<block>.variance
 *   [sampler]     method (full | subsample), cv (none | taylor | coreset),
 *                 group_count, m_percent, blocks, coreset_iterations,
 *                 projections, iterations, burn_in, proposal_scale, seed
 *   [output]      dir, kde_grid, spectrum_draws
 *
 * Exactly one of [data] path or [simulate] must be given. '#' and ';' start
 * comments. Unknown keys are errors.
 */

#include "specsub/error.hpp"
#include "specsub/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace specsub {

enum class Method { full, subsample };
enum class CvKind { none, taylor, coreset };

inline const char *method_name(Method m) {
  return m == Method::full ? "full" : "subsample";
}
inline const char *cv_name(CvKind c) {
  switch (c) {
  case CvKind::none:
    return "none";
  case CvKind::taylor:
    return "taylor";
  case CvKind::coreset:
    return "coreset";
  }
  return "none";
}

/// Simulated input. Without d the series is a Gaussian ARMA recursion;
/// with d (and optionally lambda) it is synthesized from the ARFIMA/ARTFIMA
/// spectral density.
struct SimulateBlock {
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 1.0;
  std::optional<double> d;
  std::optional<double> lambda;
  std::size_t n = 10001;
  std::uint64_t seed = 1;
  std::optional<std::size_t> burn_in;
  bool operator==(const SimulateBlock &) const = default;
};

struct DataBlock {
  std::optional<std::string> path;
  std::size_t column = 0;
  std::optional<SimulateBlock> simulate;
  bool log_square = false;
  double log_square_floor = 1e-300;
  bool operator==(const DataBlock &) const = default;
};

struct SamplerBlock {
  Method method = Method::subsample;
  CvKind cv = CvKind::taylor;
  std::size_t group_count = 1000;
  double m_percent = 1.0;
  std::size_t blocks = 10;
  std::size_t coreset_iterations = 200;
  std::size_t projections = 500;
  std::size_t iterations = 50000;
  std::size_t burn_in = 5000;
  std::optional<double> proposal_scale;
  std::uint64_t seed = 1;
  bool operator==(const SamplerBlock &) const = default;
};

struct OutputBlock {
  std::string dir = "out";
  std::size_t kde_grid = 256;
  std::size_t spectrum_draws = 500;
  bool operator==(const OutputBlock &) const = default;
};

struct ExperimentConfig {
  DataBlock data;
  ModelSpec model;
  SamplerBlock sampler;
  OutputBlock output;
  bool operator==(const ExperimentConfig &) const = default;

  /// Number of sampled groups, m = round(m_percent% of group_count), >= 2.
  std::size_t subsample_size() const {
    const double m = std::round(sampler.m_percent / 100.0 *
                                static_cast<double>(sampler.group_count));
    return std::max<std::size_t>(2, static_cast<std::size_t>(m));
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

class ConfigReader {
public:
  ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(std::size_t line, const std::string &what) const {
    fail(ErrorCategory::config,
         source_ + ":" + std::to_string(line) + ": " + what);
  }

  double to_double(const std::string &v, std::size_t line) const {
    double x = 0.0;
    const char *b = v.data();
    const char *e = v.data() + v.size();
    if (b != e && *b == '+')
      ++b;
    auto [ptr, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || ptr != e || !std::isfinite(x))
      error(line, "'" + v + "' is not a finite number");
    return x;
  }

  std::uint64_t to_uint(const std::string &v, std::size_t line) const {
    std::uint64_t x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
      error(line, "'" + v + "' is not a non-negative integer");
    return x;
  }

  bool to_bool(const std::string &v, std::size_t line) const {
    if (v == "true" || v == "1" || v == "yes")
      return true;
    if (v == "false" || v == "0" || v == "no")
      return false;
    error(line, "'" + v + "' is not a boolean");
  }

  std::vector<double> to_list(const std::string &v, std::size_t line) const {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty())
        continue;
      out.push_back(to_double(item, line));
    }
    return out;
  }

private:
  std::string source_;
};

inline std::string list_to_string(const std::vector<double> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i)
      s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

} // namespace detail

inline ExperimentConfig parse_config(std::istream &in,
                                     const std::string &source = "<config>") {
  detail::ConfigReader r(source);
  ExperimentConfig cfg;
  bool have_simulate = false;
  SimulateBlock sim;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;

  const auto gaussian = [&](GaussianPrior &g, const std::string &field,
                            const std::string &v, std::size_t line) {
    if (field == "mean")
      g.mean = r.to_double(v, line);
    else if (field == "variance") {
      g.variance = r.to_double(v, line);
      if (!(g.variance > 0.0))
        r.error(line, "prior variance must be positive");
    } else
      r.error(line, "unknown prior field '" + field + "'");
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';')
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        r.error(lineno, "malformed section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (section == "simulate")
        have_simulate = true;
      else if (section != "data" && section != "model" && section != "sampler" &&
               section != "output")
        r.error(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      r.error(lineno, "expected key = value");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos)
      value = detail::trim(value.substr(0, hash));
    const auto unknown = [&] {
      r.error(lineno, "unknown key '" + key + "' in [" + section + "]");
    };

    if (section == "data") {
      if (key == "path")
        cfg.data.path = value;
      else if (key == "column")
        cfg.data.column = r.to_uint(value, lineno);
      else if (key == "transform") {
        if (value == "none")
          cfg.data.log_square = false;
        else if (value == "log_square")
          cfg.data.log_square = true;
        else
          r.error(lineno, "transform must be none or log_square");
      } else if (key == "log_square_floor")
        cfg.data.log_square_floor = r.to_double(value, lineno);
      else
        unknown();
    } else if (section == "simulate") {
      if (key == "phi")
        sim.phi = r.to_list(value, lineno);
      else if (key == "theta")
        sim.theta = r.to_list(value, lineno);
      else if (key == "sigma2")
        sim.sigma2 = r.to_double(value, lineno);
      else if (key == "d")
        sim.d = r.to_double(value, lineno);
      else if (key == "lambda")
        sim.lambda = r.to_double(value, lineno);
      else if (key == "n")
        sim.n = r.to_uint(value, lineno);
      else if (key == "seed")
        sim.seed = r.to_uint(value, lineno);
      else if (key == "burn_in")
        sim.burn_in = r.to_uint(value, lineno);
      else
        unknown();
    } else if (section == "model") {
      if (key == "ar_order")
        cfg.model.ar_order = r.to_uint(value, lineno);
      else if (key == "ma_order")
        cfg.model.ma_order = r.to_uint(value, lineno);
      else if (key == "fractional") {
        if (value == "none")
          cfg.model.fractional = Fractional::none;
        else if (value == "arfima")
          cfg.model.fractional = Fractional::arfima;
        else if (value == "artfima")
          cfg.model.fractional = Fractional::artfima;
        else
          r.error(lineno, "fractional must be none, arfima or artfima");
      } else if (key == "sv")
        cfg.model.sv_wrapper = r.to_bool(value, lineno);
      else if (key.rfind("prior.", 0) == 0) {
        const std::string rest = key.substr(6);
        const auto dot = rest.find('.');
        if (dot == std::string::npos)
          unknown();
        const std::string block = rest.substr(0, dot);
        const std::string field = rest.substr(dot + 1);
        auto &p = cfg.model.prior;
        if (block == "d")
          gaussian(p.d, field, value, lineno);
        else if (block == "log_lambda")
          gaussian(p.log_lambda, field, value, lineno);
        else if (block == "log_sigma2")
          gaussian(p.log_sigma2, field, value, lineno);
        else if (block == "log_sigma2_eps")
          gaussian(p.log_sigma2_eps, field, value, lineno);
        else
          unknown();
      } else
        unknown();
    } else if (section == "sampler") {
      auto &s = cfg.sampler;
      if (key == "method") {
        if (value == "full")
          s.method = Method::full;
        else if (value == "subsample")
          s.method = Method::subsample;
        else
          r.error(lineno, "method must be full or subsample");
      } else if (key == "cv") {
        if (value == "none")
          s.cv = CvKind::none;
        else if (value == "taylor")
          s.cv = CvKind::taylor;
        else if (value == "coreset")
          s.cv = CvKind::coreset;
        else
          r.error(lineno, "cv must be none, taylor or coreset");
      } else if (key == "group_count")
        s.group_count = r.to_uint(value, lineno);
      else if (key == "m_percent")
        s.m_percent = r.to_double(value, lineno);
      else if (key == "blocks")
        s.blocks = r.to_uint(value, lineno);
      else if (key == "coreset_iterations")
        s.coreset_iterations = r.to_uint(value, lineno);
      else if (key == "projections")
        s.projections = r.to_uint(value, lineno);
      else if (key == "iterations")
        s.iterations = r.to_uint(value, lineno);
      else if (key == "burn_in")
        s.burn_in = r.to_uint(value, lineno);
      else if (key == "proposal_scale")
        s.proposal_scale = r.to_double(value, lineno);
      else if (key == "seed")
        s.seed = r.to_uint(value, lineno);
      else
        unknown();
    } else if (section == "output") {
      if (key == "dir")
        cfg.output.dir = value;
      else if (key == "kde_grid")
        cfg.output.kde_grid = r.to_uint(value, lineno);
      else if (key == "spectrum_draws")
        cfg.output.spectrum_draws = r.to_uint(value, lineno);
      else
        unknown();
    } else {
      r.error(lineno, "key outside of any section");
    }
  }

  if (have_simulate)
    cfg.data.simulate = sim;
  if (cfg.data.path.has_value() == cfg.data.simulate.has_value())
    r.error(lineno, "exactly one data source required: [data] path or [simulate]");
  if (!(cfg.sampler.m_percent > 0.0 && cfg.sampler.m_percent <= 100.0))
    r.error(lineno, "m_percent must lie in (0, 100]");
  if (cfg.sampler.blocks < 1)
    r.error(lineno, "blocks must be at least 1");
  if (cfg.sampler.group_count < 1)
    r.error(lineno, "group_count must be at least 1");
  if (cfg.sampler.iterations < 1)
    r.error(lineno, "iterations must be at least 1");
  if (cfg.sampler.proposal_scale && !(*cfg.sampler.proposal_scale > 0.0))
    r.error(lineno, "proposal_scale must be positive");
  if (cfg.model.fractional != Fractional::artfima && sim.lambda && have_simulate &&
      !sim.d)
    r.error(lineno, "simulate lambda requires d");
  return cfg;
}

inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCategory::io, "cannot open config '" + path + "'");
  return parse_config(in, path);
}

inline std::string serialize_config(const ExperimentConfig &cfg) {
  using detail::format_double;
  std::ostringstream o;
  if (cfg.data.path) {
    o << "[data]\npath = " << *cfg.data.path << "\ncolumn = " << cfg.data.column
      << '\n';
  } else {
    o << "[data]\n";
  }
  o << "transform = " << (cfg.data.log_square ? "log_square" : "none") << '\n';
  o << "log_square_floor = " << format_double(cfg.data.log_square_floor) << "\n\n";
  if (cfg.data.simulate) {
    const auto &s = *cfg.data.simulate;
    o << "[simulate]\n";
    o << "phi = " << detail::list_to_string(s.phi) << '\n';
    o << "theta = " << detail::list_to_string(s.theta) << '\n';
    o << "sigma2 = " << format_double(s.sigma2) << '\n';
    if (s.d)
      o << "d = " << format_double(*s.d) << '\n';
    if (s.lambda)
      o << "lambda = " << format_double(*s.lambda) << '\n';
    o << "n = " << s.n << '\n';
    o << "seed = " << s.seed << '\n';
    if (s.burn_in)
      o << "burn_in = " << *s.burn_in << '\n';
    o << '\n';
  }
  const auto &m = cfg.model;
  o << "[model]\nar_order = " << m.ar_order << "\nma_order = " << m.ma_order
    << "\nfractional = " << fractional_name(m.fractional)
    << "\nsv = " << (m.sv_wrapper ? "true" : "false") << '\n';
  const auto prior = [&](const char *name, const GaussianPrior &g) {
    o << "prior." << name << ".mean = " << format_double(g.mean) << '\n';
    o << "prior." << name << ".variance = " << format_double(g.variance) << '\n';
  };
  prior("d", m.prior.d);
  prior("log_lambda", m.prior.log_lambda);
  prior("log_sigma2", m.prior.log_sigma2);
  prior("log_sigma2_eps", m.prior.log_sigma2_eps);
  const auto &s = cfg.sampler;
  o << "\n[sampler]\nmethod = " << method_name(s.method) << "\ncv = " << cv_name(s.cv)
    << "\ngroup_count = " << s.group_count
    << "\nm_percent = " << format_double(s.m_percent) << "\nblocks = " << s.blocks
    << "\ncoreset_iterations = " << s.coreset_iterations
    << "\nprojections = " << s.projections << "\niterations = " << s.iterations
    << "\nburn_in = " << s.burn_in << '\n';
  if (s.proposal_scale)
    o << "proposal_scale = " << format_double(*s.proposal_scale) << '\n';
  o << "seed = " << s.seed << '\n';
  o << "\n[output]\ndir = " << cfg.output.dir << "\nkde_grid = " << cfg.output.kde_grid
    << "\nspectrum_draws = " << cfg.output.spectrum_draws << '\n';
  return o.str();
}

} // namespace specsub

#endif
