// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rmtdetect.hpp"
#include "rmtdetect/config.hpp"
#include "rmtdetect/experiment.hpp"

using namespace rmtdetect;
using Model = NoiseSignalModel<double>;
using CM = CMatrix<double>;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("AC%-2d %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Independent moment map: odometer over (m_1..m_k) in [0,k]^k.
std::vector<double> odometer_nu(const std::vector<double>& mu, double y) {
  const int K = static_cast<int>(mu.size());
  std::vector<double> nu;
  for (int k = 1; k <= K; ++k) {
    long double total = 0;
    std::vector<int> m(static_cast<std::size_t>(k), 0);
    while (true) {
      int count = 0, weight = 0;
      for (int i = 0; i < k; ++i) count += m[i], weight += (i + 1) * m[i];
      const int w = k - count + 1;
      if (weight == k && w >= 1 && w <= k) {
        long double c = std::tgamma(static_cast<long double>(k + 1)) / std::tgamma(static_cast<long double>(w + 1));
        long double prod = 1;
        for (int i = 0; i < k; ++i) {
          c /= std::tgamma(static_cast<long double>(m[i] + 1));
          prod *= std::pow(static_cast<long double>(mu[i]), m[i]);
        }
        total += c * std::pow(static_cast<long double>(y), k - w) * prod;
      }
      int pos = 0;
      while (pos < k && ++m[pos] > k) m[pos++] = 0;
      if (pos == k) break;
    }
    nu.push_back(static_cast<double>(total));
  }
  return nu;
}

Model random_model(RandomStream& rs) {
  const double s2 = std::exp(rs.uniform(-1, 1));
  const int atoms = static_cast<int>(rs.uniform(0, 4.999));
  if (atoms == 0) return Model::pure_noise(s2);
  std::vector<SignalAtom<double>> sig;
  double loc = s2;
  double wsum = 0;
  for (int j = 0; j < atoms; ++j) {
    loc *= 1.2 + rs.uniform(0, 20);
    const double w = rs.uniform(0.1, 1);
    sig.push_back({loc, w});
    wsum += w;
  }
  for (auto& a : sig) a.weight /= wsum;
  double acc = 0;
  for (std::size_t j = 0; j + 1 < sig.size(); ++j) acc += sig[j].weight;
  sig.back().weight = 1 - acc;
  return Model(s2, rs.uniform(0.02, 0.9), sig);
}

// (1/p) tr M^k, k = 1..4, for a square matrix with real spectrum.
std::array<double, 4> trace_moments(const CM& m) {
  std::array<double, 4> out{};
  CM pw = m;
  const double p = static_cast<double>(m.rows());
  for (int k = 0; k < 4; ++k) {
    out[static_cast<std::size_t>(k)] = pw.trace().real() / p;
    pw = (pw * m).eval();
  }
  return out;
}

// T^{1/2} (1/n) Y Y* T^{1/2} for diagonal T.
DiscreteSpectrum<double> diagonal_model_spectrum(const std::vector<double>& t, int n, std::uint64_t seed) {
  const int p = static_cast<int>(t.size());
  RandomStream rs(seed);
  CM y = complex_gaussian_matrix<double>(p, n, rs);
  for (int i = 0; i < p; ++i) y.row(i) *= std::sqrt(t[static_cast<std::size_t>(i)]);
  CM m = y * y.adjoint() / static_cast<double>(n);
  m = (m + m.adjoint()).eval() / 2.0;
  return hermitian_eigenvalues(m);
}

ScenarioConfig reference_scenario() {
  std::istringstream in(
      "p = 50\nq = 35\nangles = uniform(-70, 70, 35)\nsigma2 = 1\nsnr_db = uniform(0, 10)\n"
      "bandwidth = 2\nseed = 1990\n");
  return parse_scenario(parse_key_values(in, "acceptance"));
}

}  // namespace

int main() {
  std::printf("rmtdetect acceptance suite\n");

  report(1, "MP endpoints", [] {
    double worst = 0;
    bool atoms_exact = true;
    bool shape = true;
    for (double y : {0.04, 0.25, 0.5, 1.0, 2.0, 4.0}) {
      for (double s2 : {0.5, 1.0, 3.0}) {
        const auto l = find_support_layout(y, Model::pure_noise(s2));
        shape &= l.intervals.size() == 1;
        worst = std::max(worst, std::abs(l.x1() - s2 * std::pow(1 - std::sqrt(y), 2)));
        worst = std::max(worst, std::abs(l.x4() - s2 * std::pow(1 + std::sqrt(y), 2)));
        if (y > 1) atoms_exact &= l.atom_at_zero == 1 - 1 / y;
        else atoms_exact &= l.atom_at_zero == 0;
      }
    }
    return Outcome{worst < 1e-8 && atoms_exact && shape,
                   "max |endpoint error| = " + fmt("%.2e", worst) + " (tol 1e-8), zero atom exact: " +
                       (atoms_exact ? "yes" : "no")};
  });

  report(2, "Moment identities", [] {
    const auto nu = nu_from_mu(MomentSequence<double>{{1, 1, 1, 1, 1}}, 1.0);
    const auto oracle = odometer_nu({1, 1, 1, 1, 1}, 1.0);
    const std::vector<double> catalan{1, 2, 5, 14, 42};
    double cat_err = 0;
    for (int k = 1; k <= 5; ++k) {
      cat_err = std::max(cat_err, std::abs(nu.moment(k) - catalan[k - 1]));
      cat_err = std::max(cat_err, std::abs(oracle[static_cast<std::size_t>(k - 1)] - catalan[k - 1]));
    }
    RandomStream rs(derive_seed(2, {0}));
    double trip = 0;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> mu(8);
      for (double& m : mu) m = rs.uniform(1e-6, 2);
      const double y = std::vector<double>{0.1, 0.5, 1.0, 2.0}[static_cast<std::size_t>(t % 4)];
      const auto back = mu_from_nu(nu_from_mu(MomentSequence<double>{mu}, y), y);
      for (int k = 1; k <= 8; ++k) trip = std::max(trip, std::abs(back.moment(k) - mu[static_cast<std::size_t>(k - 1)]));
    }
    return Outcome{cat_err < 1e-12 && trip < 1e-9,
                   "Catalan error " + fmt("%.1e", cat_err) + " (tol 1e-12), order-8 round trip max error " +
                       fmt("%.1e", trip) + " over 100 (mu, y) (tol 1e-9)"};
  });

  report(3, "f/g consistency", [] {
    RandomStream rs(derive_seed(3, {0}));
    double worst = 0;
    int samples = 0;
    while (samples < 1000) {
      const auto m = random_model(rs);
      const double y = std::exp(rs.uniform(std::log(1e-3), std::log(10.0)));
      // alpha spread over all pole-separated pieces, including alpha > 0.
      const double scale = 1 / m.sigma2();
      const double a = rs.uniform(0, 1) < 0.85 ? -scale * std::exp(rs.uniform(std::log(1e-4), std::log(1e3)))
                                               : scale * std::exp(rs.uniform(std::log(1e-3), std::log(1e3)));
      bool near = std::abs(a) < 1e-3 * scale;
      for (const auto& at : m.population_atoms()) near |= std::abs(a * at.location + 1) < 1e-3;
      if (near) continue;
      const double h = 1e-6 * std::abs(a);
      const double fd = (f_alpha(a + h, y, m) - f_alpha(a - h, y, m)) / (2 * h);
      const double exact = (1 - g_alpha(a, y, m)) / (a * a);
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
      ++samples;
    }
    return Outcome{worst < 1e-6, "max relative error " + fmt("%.2e", worst) + " over 1000 samples (tol 1e-6)"};
  });

  report(4, "Split criterion cross-validation", [] {
    double worst = 0;
    bool flips = true;
    for (double b : {2.0, 5.0, 10.0}) {
      for (double y1 : {0.05, 0.2, 0.5}) {
        const auto m = Model::single_spike(1.0, y1, b);
        const double closed = std::pow(b - 1, 2) / std::pow(std::cbrt(b * b * y1) + std::cbrt(1 - y1), 3);
        worst = std::max(worst, std::abs(critical_y(m) / closed - 1));
        flips &= split_exists(closed - 1e-6, m).splits && !split_exists(closed + 1e-6, m).splits;
        flips &= single_spike_split(closed - 1e-6, y1, 1.0, b) && !single_spike_split(closed + 1e-6, y1, 1.0, b);
      }
    }
    return Outcome{worst < 1e-6 && flips, "max relative error " + fmt("%.2e", worst) +
                                              " (tol 1e-6), flips at boundary +/- 1e-6: " + (flips ? "yes" : "no")};
  });

  report(5, "Stieltjes solver", [] {
    double worst_res = 0;
    const std::vector<Model> models{Model::pure_noise(1.0), Model::single_spike(1.0, 0.1, 5.0),
                                    Model(1.0, 0.3, {{6.0, 0.3}, {40.0, 0.3}, {300.0, 0.4}})};
    for (const auto& m : models)
      for (double y : {0.05, 0.5, 1.0, 3.0})
        for (double x : {0.01, 0.5, 1.0, 2.0, 5.5, 35.0, 320.0})
          for (double eta : {1e-2, 1e-5, 1e-8})
            worst_res = std::max(worst_res, solve_stieltjes(std::complex<double>{x, eta}, y, m).residual);

    double dens_err = 0;
    for (double y : {0.25, 0.5}) {
      const double lo = std::pow(1 - std::sqrt(y), 2), hi = std::pow(1 + std::sqrt(y), 2);
      std::vector<double> xs;
      for (int i = 0; i < 100; ++i) xs.push_back(lo + (hi - lo) * (i + 0.5) / 100);
      std::optional<std::complex<double>> warm;
      for (double x : xs) {
        const auto s1 = solve_stieltjes(std::complex<double>{x, 1e-5}, y, models[0], {}, warm);
        worst_res = std::max(worst_res, s1.residual);
        warm = s1.a_value;
        dens_err = std::max(dens_err, std::abs(limiting_density(x, y, models[0], 1e-5) - mp_density(x, y, 1.0)));
      }
    }

    double mass_err = 0;
    for (std::size_t i = 1; i < models.size(); ++i)
      for (double y : {0.01, 0.1, 0.5}) {
        if (!split_exists(y, models[i]).splits) continue;
        const auto l = find_support_layout(y, models[i]);
        mass_err = std::max(mass_err, std::abs(interval_mass(l.x1(), l.x2(), y, models[i]) - (1 - models[i].y1())));
      }
    return Outcome{worst_res < 1e-12 && dens_err < 1e-6 && mass_err < 1e-4,
                   "max residual " + fmt("%.1e", worst_res) + " (tol 1e-12), MP density error " + fmt("%.1e", dens_err) +
                       " (tol 1e-6), noise mass error " + fmt("%.1e", mass_err) + " (tol 1e-4)"};
  });

  report(6, "Equivalent construction", [] {
    const int p = 30, n = 60, trials = 200;
    std::vector<double> ang, snr;
    for (int i = 0; i < 8; ++i) {
      ang.push_back(-1.0 + 2.0 * i / 7);
      snr.push_back(10.0 * i / 7);
    }
    const auto sc = build_scenario<double>(p, 8, ang, 1.0, snr, 2, 606);
    std::array<std::vector<double>, 4> a, b;
    for (int t = 0; t < trials; ++t) {
      const auto ma = trace_moments(sample_covariance(snapshots(sc, n, derive_seed(606, {1, std::uint64_t(t)}))));
      const auto mb = trace_moments(sample_covariance_equiv(sc, n, derive_seed(606, {2, std::uint64_t(t)})));
      for (int k = 0; k < 4; ++k) a[k].push_back(ma[k]), b[k].push_back(mb[k]);
    }
    bool ok = true;
    std::string detail;
    for (int k = 0; k < 4; ++k) {
      auto stats = [&](const std::vector<double>& v) {
        double mean = 0, ss = 0;
        for (double x : v) mean += x;
        mean /= v.size();
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::pair{mean, ss / (v.size() - 1) / v.size()};
      };
      const auto [ma, va] = stats(a[k]);
      const auto [mb, vb] = stats(b[k]);
      const double z = std::abs(ma - mb) / std::sqrt(va + vb);
      ok &= z < 3;
      detail += (k ? ", " : "") + std::string("k=") + std::to_string(k + 1) + ": " + fmt("%.2f", z) + " SE";
    }
    return Outcome{ok, detail + " (tol 3 SE, 200 trials each)"};
  });

  report(7, "Uniform convergence", [] {
    // H: noise 0.8 at 1, signal 0.1 at 4 and 0.1 at 10.
    const Model m(1.0, 0.2, {{4.0, 0.5}, {10.0, 0.5}});
    const double y = 1.0 / 3;
    const auto lc = limiting_cdf(y, m, 400);
    std::vector<double> med;
    for (int p : {100, 400}) {
      std::vector<double> t;
      for (int i = 0; i < p; ++i) t.push_back(i < p * 8 / 10 ? 1.0 : i < p * 9 / 10 ? 4.0 : 10.0);
      std::vector<double> d;
      for (std::uint64_t s = 0; s < 5; ++s)
        d.push_back(sup_distance(empirical_df(diagonal_model_spectrum(t, 3 * p, derive_seed(7, {std::uint64_t(p), s}))),
                                 lc.cdf));
      med.push_back(median(d));
    }
    const bool ok = med[0] < 0.08 && med[1] < 0.04 && med[1] < med[0];
    return Outcome{ok, "median sup distance p=100: " + fmt("%.4f", med[0]) + " (tol 0.08), p=400: " +
                           fmt("%.4f", med[1]) + " (tol 0.04); cdf interpolation bound " +
                           fmt("%.1e", lc.cdf.max_grid_increment()) + ", mass defect " + fmt("%.1e", lc.max_mass_defect)};
  });

  report(8, "Detection at desk scale", [] {
    ExperimentConfig cfg;
    cfg.scenario = reference_scenario();
    cfg.sample_sizes = {50, 250, 1500};
    cfg.trials = 20;
    cfg.master_seed = 8;
    cfg.coverage_margin = 0.1;
    const auto rep = run_experiment(cfg, 1);
    const auto& s250 = rep.settings[1];
    const auto& s1500 = rep.settings[2];
    const bool rates = s1500.blind_rate >= 0.95 && s1500.coverage >= 0.90 && s250.blind_rate >= 0.90;
    const bool no_failures = rep.failures() == 0;

    const auto& model = rep.model;
    const double g1 = rep.settings[0].layout.x3() - rep.settings[0].layout.x2();
    const double g5 = s250.layout.x3() - s250.layout.x2();
    const double g30 = s1500.layout.x3() - s1500.layout.x2();
    const bool all_split = rep.settings[0].noise_separated && s250.noise_separated && s1500.noise_separated;
    const bool widening = all_split && g1 < g5 && g5 < g30;

    // Distances to (sigma2, sigma2, b1, bL) shrink along y = 1/5, 1/30, 1/300, 1/3000.
    bool converging = true;
    std::array<double, 4> prev{1e300, 1e300, 1e300, 1e300};
    const std::array<double, 4> target{model.sigma2(), model.sigma2(), model.b_first(), model.b_last()};
    std::array<double, 4> last{};
    for (double y : {1.0 / 5, 1.0 / 30, 1.0 / 300, 1.0 / 3000}) {
      const auto l = find_support_layout(y, model);
      const std::array<double, 4> x{l.x1(), l.x2(), l.x3(), l.x4()};
      for (int i = 0; i < 4; ++i) {
        const double d = std::abs(x[i] - target[i]) / target[i];
        converging &= d < prev[i];
        prev[i] = d;
        last[i] = d;
      }
    }
    converging &= *std::max_element(last.begin(), last.end()) < 0.05;

    return Outcome{rates && no_failures && widening && converging,
                   "critical y " + fmt("%.4f", rep.critical_y) + "; n=1500: blind " + fmt("%.2f", s1500.blind_rate) +
                       " (>= 0.95), coverage " + fmt("%.2f", s1500.coverage) + " (>= 0.90); n=250: blind " +
                       fmt("%.2f", s250.blind_rate) + " (>= 0.90); x3-x2 at y=1,1/5,1/30: " + fmt("%.3f", g1) + ", " +
                       fmt("%.3f", g5) + ", " + fmt("%.3f", g30) + (widening ? " (increasing)" : " (NOT increasing)") +
                       "; endpoint convergence: " + (converging ? "yes" : "no") + ", trial failures " +
                       std::to_string(rep.failures())};
  });

  report(9, "Product spectrum bound", [] {
    RandomStream rs(derive_seed(9, {0}));
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
      const int m = 1 + static_cast<int>(rs.uniform(0, 7.999));
      const int ra = 1 + static_cast<int>(rs.uniform(0, m - 0.001));
      const int rb = 1 + static_cast<int>(rs.uniform(0, m - 0.001));
      const CM ga = complex_gaussian_matrix<double>(m, ra, rs);
      const CM gb = complex_gaussian_matrix<double>(m, rb, rs);
      const CM a = ga * ga.adjoint(), b = gb * gb.adjoint();
      const double alpha = std::exp(rs.uniform(-3, 3)), beta = std::exp(rs.uniform(-3, 3));
      violations += !product_spectrum_bound(a, b, alpha, beta).holds();
    }
    return Outcome{violations == 0, std::to_string(violations) + " violations in 1000 random pairs, m <= 8"};
  });

  report(10, "Extreme eigenvalue", [] {
    const std::vector<double> none;
    const auto sc = build_scenario<double>(200, 0, none, 1.0, none, 0, 10);
    int inside = 0;
    double lo = 1e300, hi = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const double top = hermitian_eigenvalues(sample_covariance(snapshots(sc, 800, derive_seed(10, {s})))).max();
      inside += std::abs(top - 2.25) < 0.1;
      lo = std::min(lo, top), hi = std::max(hi, top);
    }
    return Outcome{inside >= 18, std::to_string(inside) + "/20 seeds within 0.1 of 2.25 (need >= 18); range [" +
                                     fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]"};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
