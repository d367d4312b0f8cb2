// rmtdetect: command-line front end.
//
//   rmtdetect run        --config FILE [--seed N] [--out DIR] [--trials N] [--jobs N]
//   rmtdetect endpoints  --config FILE [--y LIST] [--out DIR]
//   rmtdetect density    (--config FILE | --sigma2 S [--spike B --y1 Y1]) --y Y [--points N] [--out FILE]
//   rmtdetect critical-y (--config FILE | --sigma2 S [--spike B --y1 Y1])
//
// Exit codes: 0 success, 1 invalid input or config, 2 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmtdetect/config.hpp"
#include "rmtdetect/errors.hpp"
#include "rmtdetect/experiment.hpp"
#include "rmtdetect/io.hpp"
#include "rmtdetect/stieltjes.hpp"
#include "rmtdetect/support.hpp"

using namespace rmtdetect;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct ModelSource {
  std::string config;
  std::optional<double> sigma2;
  std::optional<double> spike;
  std::optional<double> y1;

  void add_options(CLI::App* app) {
    app->add_option("--config", config, "Scenario or experiment config file");
    app->add_option("--sigma2", sigma2, "Noise power (instead of --config)");
    app->add_option("--spike", spike, "Single signal eigenvalue b (with --sigma2)");
    app->add_option("--y1", y1, "Signal fraction for --spike");
  }

  // Returns the model and, when read from a config, the experiment sample sizes and p.
  NoiseSignalModel<double> load(std::vector<int>* sizes = nullptr, int* p = nullptr) const {
    if (!config.empty()) {
      if (sigma2 || spike || y1) throw ConfigError("command line", 0, "--config", "cannot combine with --sigma2/--spike/--y1");
      const auto kv = load_key_values(config);
      ScenarioConfig sc;
      if (kv.has("n") || kv.has("y") || kv.has("scenario")) {
        auto ec = parse_experiment(kv);
        sc = ec.scenario;
        if (sizes) *sizes = ec.sample_sizes;
      } else {
        sc = parse_scenario(kv);
      }
      if (p) *p = sc.p;
      return sc.build().population_model();
    }
    if (!sigma2) throw ConfigError("command line", 0, "--config", "give --config or --sigma2");
    if (spike.has_value() != y1.has_value()) throw ConfigError("command line", 0, "--spike", "--spike and --y1 go together");
    if (spike) return NoiseSignalModel<double>::single_spike(*sigma2, *y1, *spike);
    return NoiseSignalModel<double>::pure_noise(*sigma2);
  }
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where, 0, "seed", "expected an unsigned integer, got '" + text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal detection from sample-covariance eigenvalue spectra"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Simulate trials, detect, and write outputs");
  std::string run_config;
  std::optional<std::string> run_seed, run_out;
  std::optional<int> run_trials;
  int jobs = 1;
  run->add_option("--config", run_config, "Experiment config file")->required();
  run->add_option("--seed", run_seed, "Master seed (overrides RMTDETECT_SEED and the config)");
  run->add_option("--out", run_out, "Output directory (overrides RMTDETECT_OUT and the config)");
  run->add_option("--trials", run_trials, "Trials per sample size")->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* endpoints = app.add_subcommand("endpoints", "Support endpoints x1..x4 for a list of aspect ratios");
  ModelSource ep_src;
  std::vector<double> ep_y;
  std::string ep_out;
  ep_src.add_options(endpoints);
  endpoints->add_option("--y", ep_y, "Aspect ratios p/n (default: from the config's sample sizes)")->delimiter(',');
  endpoints->add_option("--out", ep_out, "Directory for endpoints.csv");

  auto* density = app.add_subcommand("density", "Limiting spectral density on a grid");
  ModelSource d_src;
  double d_y = 0;
  int d_points = 100;
  std::string d_out;
  d_src.add_options(density);
  density->add_option("--y", d_y, "Aspect ratio p/n")->required();
  density->add_option("--points", d_points, "Points per support component")->check(CLI::PositiveNumber);
  density->add_option("--out", d_out, "CSV file (default: stdout)");

  auto* crit = app.add_subcommand("critical-y", "Largest aspect ratio at which the support splits");
  ModelSource c_src;
  c_src.add_options(crit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      auto cfg = load_experiment_config(run_config);
      if (run_seed)
        cfg.master_seed = parse_seed(*run_seed, "--seed");
      else if (auto s = env("RMTDETECT_SEED"))
        cfg.master_seed = parse_seed(*s, "RMTDETECT_SEED");
      if (run_out)
        cfg.out_dir = *run_out;
      else if (auto o = env("RMTDETECT_OUT"))
        cfg.out_dir = *o;
      if (run_trials) cfg.trials = *run_trials;
      const auto report = run_experiment(cfg, jobs);
      write_report(report, cfg.out_dir);
      write_summary(std::cout, report);
      std::cout << "outputs written to " << cfg.out_dir << "\n";
      return report.failures() > 0 ? kExitNumeric : 0;
    }
    if (*endpoints) {
      std::vector<int> sizes;
      int p = 0;
      const auto model = ep_src.load(&sizes, &p);
      std::vector<LabeledLayout> layouts{{"0", population_layout(model)}};
      if (ep_y.empty()) {
        if (sizes.empty()) throw ConfigError("command line", 0, "--y", "no aspect ratios given");
        for (int n : sizes) layouts.push_back({ratio_label(p, n), find_support_layout(double(p) / n, model)});
      } else {
        for (double y : ep_y) {
          if (!(y > 0)) throw ConfigError("command line", 0, "--y", "aspect ratios must be > 0");
          layouts.push_back({format_number(y), find_support_layout(y, model)});
        }
      }
      write_endpoints_table(std::cout, layouts);
      if (!ep_out.empty()) {
        std::filesystem::create_directories(ep_out);
        std::ofstream f(std::filesystem::path(ep_out) / "endpoints.csv");
        write_endpoints_csv(f, layouts);
      }
      return 0;
    }
    if (*density) {
      if (!(d_y > 0)) throw ConfigError("command line", 0, "--y", "must be > 0");
      const auto model = d_src.load();
      const auto layout = find_support_layout(d_y, model);
      const auto ds = sample_density(layout, model, d_points);
      const auto& xs = ds.x;
      const auto& d = ds.density;
      std::vector<double> mp;
      for (double x : xs) mp.push_back(mp_density(x, d_y, model.sigma2()));
      if (d_out.empty()) {
        write_density_csv(std::cout, xs, d, &mp);
      } else {
        std::ofstream f(d_out);
        if (!f) throw ConfigError(d_out, 0, "--out", "cannot open for writing");
        write_density_csv(f, xs, d, &mp);
      }
      return 0;
    }
    if (*crit) {
      const auto model = c_src.load();
      std::cout << format_number(critical_y(model)) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
