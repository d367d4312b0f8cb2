#include "rmtdetect/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "rmtdetect/arraysim.hpp"
#include "rmtdetect/io.hpp"
#include "rmtdetect/random.hpp"
#include "rmtdetect/stieltjes.hpp"

namespace rmtdetect {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void run_trial(const ExperimentConfig& cfg, const Scenario<double>& sc, const SampleSizeReport& setting,
               TrialRecord& rec) {
  const auto batch = snapshots(sc, rec.n, rec.seed);
  const auto spec = hermitian_eigenvalues(sample_covariance(batch));
  rec.spectrum.assign(spec.values().begin(), spec.values().end());
  rec.moments = spectrum_moments(spec, cfg.moment_order);
  if (sc.p >= 3) rec.blind = detect_blind(spec, cfg.min_noise_fraction);
  const auto& layout = setting.layout;
  if (setting.noise_separated) {
    rec.model_based = detect_model_based(spec, layout);
    const double x1 = layout.x1();
    const double x2 = layout.x2();
    const double pad = cfg.coverage_margin;
    const auto noise = static_cast<std::size_t>(sc.p - sc.q);
    rec.noise_covered = spec[0] >= x1 - pad && spec[noise - 1] <= x2 + pad;
  }
}

}  // namespace

int ExperimentReport::failures() const {
  int f = 0;
  for (const auto& s : settings)
    for (const auto& t : s.trials) f += t.ok() ? 0 : 1;
  return f;
}

std::uint64_t trial_seed(std::uint64_t master, int n, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial)});
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  if (cfg.sample_sizes.empty()) throw DomainError("run_experiment: no sample sizes");
  ExperimentReport rep;
  rep.config = cfg;
  rep.scenario = cfg.scenario.build();
  rep.model = rep.scenario.population_model();
  rep.population = population_layout(rep.model);
  rep.critical_y = critical_y(rep.model);
  const auto mu = spectrum_moments(rep.scenario.true_spectrum, cfg.moment_order);

  const int p = rep.scenario.p;
  for (int n : cfg.sample_sizes) {
    SampleSizeReport s;
    s.n = n;
    s.y = static_cast<double>(p) / n;
    s.layout = find_support_layout(s.y, rep.model);
    s.noise_separated = split_exists(s.y, rep.model).splits;
    s.theory_moments = nu_from_mu(mu, s.y);
    for (int t = 0; t < cfg.trials; ++t) {
      TrialRecord r;
      r.n = n;
      r.trial = t;
      r.seed = trial_seed(cfg.master_seed, n, t);
      s.trials.push_back(std::move(r));
    }
    rep.settings.push_back(std::move(s));
  }

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t i = 0; i < rep.settings.size(); ++i)
    for (std::size_t t = 0; t < rep.settings[i].trials.size(); ++t) tasks.emplace_back(i, t);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      auto& setting = rep.settings[tasks[k].first];
      auto& rec = setting.trials[tasks[k].second];
      try {
        run_trial(cfg, rep.scenario, setting, rec);
      } catch (const std::exception& e) {
        rec.spectrum.clear();
        rec.error = e.what();
      }
    }
  };
  const int nthreads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const int q = rep.scenario.q;
  for (auto& s : rep.settings) {
    int ok = 0, blind_hits = 0, model_hits = 0, covered = 0;
    for (const auto& t : s.trials) {
      if (!t.ok()) continue;
      ++ok;
      blind_hits += t.blind && t.blind->q_hat == q;
      model_hits += t.model_based && t.model_based->q_hat == q;
      covered += t.noise_covered;
    }
    const double denom = ok > 0 ? ok : kNaN;
    s.blind_rate = blind_hits / denom;
    s.model_rate = s.noise_separated ? model_hits / denom : kNaN;
    s.coverage = s.noise_separated ? covered / denom : kNaN;
  }
  return rep;
}

std::vector<double> histogram_edges(const std::vector<double>& values, int bins) {
  if (values.empty() || bins < 2) throw DomainError("histogram_edges: need values and at least 2 bins");
  const double top = *std::max_element(values.begin(), values.end());
  if (!(top > 0)) return {0.0, 1.0};
  const double floor = 1e-12 * top;
  double low = top;
  bool zeros = false;
  for (double v : values) {
    if (v > floor)
      low = std::min(low, v);
    else
      zeros = true;
  }
  std::vector<double> edges;
  if (zeros) {
    edges.push_back(0.0);
    --bins;
  }
  const double a = std::log(low * (1 - 1e-9));
  const double b = std::log(top * (1 + 1e-9));
  for (int i = 0; i <= bins; ++i) edges.push_back(std::exp(a + (b - a) * i / bins));
  if (zeros && edges[1] <= 0) edges.erase(edges.begin());
  return edges;
}

std::vector<double> density_grid(const SupportLayout<double>& layout, int points_per_component) {
  std::vector<double> xs;
  for (const auto& iv : layout.intervals)
    for (int i = 0; i < points_per_component; ++i) {
      const double t = std::numbers::pi * (i + 0.5) / points_per_component;
      const double x = iv.lo + (iv.hi - iv.lo) * (1 - std::cos(t)) / 2;
      if (x > 0) xs.push_back(x);
    }
  return xs;
}

DensitySamples sample_density(const SupportLayout<double>& layout, const NoiseSignalModel<double>& model,
                              int points_per_component, int gap_points) {
  DensitySamples out;
  const auto& ivs = layout.intervals;
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    const SupportLayout<double> one{layout.y, 0.0, {ivs[i]}};
    const auto xs = density_grid(one, points_per_component);
    const auto d = density_curve(xs, layout.y, model, default_eta(ivs[i].hi - ivs[i].lo));
    out.x.insert(out.x.end(), xs.begin(), xs.end());
    out.density.insert(out.density.end(), d.begin(), d.end());
    if (i + 1 < ivs.size()) {
      const double lo = ivs[i].hi;
      const double hi = ivs[i + 1].lo;
      for (int k = 1; k <= gap_points; ++k) {
        const double x = lo + (hi - lo) * k / (gap_points + 1);
        out.x.push_back(x);
        out.density.push_back(limiting_density(x, layout.y, model, default_eta(hi - lo)));
      }
    }
  }
  return out;
}

void write_summary(std::ostream& out, const ExperimentReport& rep) {
  const auto& sc = rep.scenario;
  out << "p = " << sc.p << ", q = " << sc.q << ", sigma2 = " << sc.sigma2 << ", bandwidth = " << sc.bandwidth
      << ", scenario seed = " << sc.seed << ", master seed = " << rep.config.master_seed << "\n";
  out << "signal eigenvalues: " << rep.model.signal().size() << " distinct";
  if (rep.model.has_signal())
    out << ", b1 = " << format_number(rep.model.b_first()) << ", bL = " << format_number(rep.model.b_last());
  out << "\ncritical y (largest y with a split support): " << format_number(rep.critical_y) << "\n\n";

  out << std::setw(8) << "n" << std::setw(10) << "y" << std::setw(7) << "split" << std::setw(12) << "x1"
      << std::setw(12) << "x2" << std::setw(12) << "x3" << std::setw(12) << "x4" << std::setw(8) << "blind"
      << std::setw(8) << "model" << std::setw(10) << "coverage" << std::setw(8) << "failed" << "\n";
  for (const auto& s : rep.settings) {
    int failed = 0;
    for (const auto& t : s.trials) failed += !t.ok();
    auto cell = [&](double v, int w, const char* fmt) {
      char buf[32];
      if (std::isnan(v))
        std::snprintf(buf, sizeof buf, "-");
      else
        std::snprintf(buf, sizeof buf, fmt, v);
      out << std::setw(w) << buf;
    };
    out << std::setw(8) << s.n;
    cell(s.y, 10, "%.4g");
    out << std::setw(7) << (s.noise_separated ? "yes" : "no");
    cell(s.layout.x1(), 12, "%.4f");
    cell(s.layout.x2(), 12, "%.4f");
    cell(s.layout.x3(), 12, "%.4f");
    cell(s.layout.x4(), 12, "%.4f");
    cell(s.blind_rate, 8, "%.2f");
    cell(s.model_rate, 8, "%.2f");
    cell(s.coverage, 10, "%.2f");
    out << std::setw(8) << failed << "\n";
  }
  for (const auto& s : rep.settings)
    for (const auto& t : s.trials)
      if (!t.ok()) out << "trial n=" << t.n << " #" << t.trial << " failed: " << t.error << "\n";
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& sc = rep.scenario;
  {
    auto f = open_out(dir / "scenario.cfg");
    write_scenario_config(f, rep.config.scenario);
  }
  {
    auto f = open_out(dir / "summary.txt");
    write_summary(f, rep);
  }

  std::vector<LabeledLayout> layouts{{"0", rep.population}};
  for (const auto& s : rep.settings) layouts.push_back({ratio_label(sc.p, s.n), s.layout});
  {
    auto f = open_out(dir / "endpoints.csv");
    write_endpoints_csv(f, layouts);
  }
  {
    auto f = open_out(dir / "endpoints.txt");
    write_endpoints_table(f, layouts);
  }

  std::vector<DetectionRow> rows;
  std::vector<double> truth(sc.true_spectrum.values().begin(), sc.true_spectrum.values().end());
  auto mom = open_out(dir / "moments.csv");
  mom << "n,y,k,theory,empirical_mean,empirical_se\n";
  for (const auto& s : rep.settings) {
    const std::string tag = "_n" + std::to_string(s.n);
    std::vector<std::vector<double>> spectra;
    std::vector<double> pooled;
    for (const auto& t : s.trials) {
      spectra.push_back(t.spectrum);
      pooled.insert(pooled.end(), t.spectrum.begin(), t.spectrum.end());
      if (t.blind) rows.push_back({t.seed, s.n, s.y, sc.q, *t.blind});
      if (t.model_based) rows.push_back({t.seed, s.n, s.y, sc.q, *t.model_based});
    }
    {
      auto f = open_out(dir / ("spectra" + tag + ".csv"));
      write_spectra_csv(f, spectra, truth);
    }
    {
      auto f = open_out(dir / ("spectra" + tag + ".txt"));
      write_spectra_table(f, spectra, truth);
    }
    if (!pooled.empty()) {
      const auto edges = histogram_edges(pooled, rep.config.histogram_bins);
      auto f = open_out(dir / ("histogram" + tag + ".csv"));
      write_histogram_csv(f, histogram(DiscreteSpectrum<double>(pooled), std::span<const double>(edges)));
    }
    {
      const auto ds = sample_density(s.layout, rep.model, 100);
      const auto& xs = ds.x;
      const auto& d = ds.density;
      std::vector<double> mp;
      for (double x : xs) mp.push_back(mp_density(x, s.y, sc.sigma2));
      auto f = open_out(dir / ("density" + tag + ".csv"));
      write_density_csv(f, xs, d, &mp);
    }
    for (int k = 1; k <= rep.config.moment_order; ++k) {
      double sum = 0, sum2 = 0;
      int m = 0;
      for (const auto& t : s.trials) {
        if (!t.ok()) continue;
        const double v = t.moments.moment(k);
        sum += v;
        sum2 += v * v;
        ++m;
      }
      const double mean = m ? sum / m : kNaN;
      const double se = m > 1 ? std::sqrt(std::max(0.0, (sum2 - m * mean * mean) / (m - 1)) / m) : kNaN;
      mom << s.n << ',' << format_number(s.y) << ',' << k << ',' << format_number(s.theory_moments.moment(k)) << ','
          << format_number(mean) << ',' << format_number(se) << '\n';
    }
  }
  auto f = open_out(dir / "detections.csv");
  write_detections_csv(f, rows);
}

}  // namespace rmtdetect
