#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "rmtdetect/detect.hpp"

using namespace rmtdetect;
using Catch::Approx;
using Model = NoiseSignalModel<double>;

namespace {

// Column L1 of an observed-spectra table, listed indices only (1-based);
// unlisted indices are filled geometrically between their neighbours, or
// linearly when the lower neighbour is zero.
DiscreteSpectrum<double> fill_column(const std::map<int, double>& listed, int p) {
  std::vector<double> v(static_cast<std::size_t>(p));
  auto it = listed.begin();
  for (auto next = std::next(it); next != listed.end(); ++it, ++next) {
    const int i0 = it->first, i1 = next->first;
    const double a = it->second, b = next->second;
    for (int i = i0; i <= i1; ++i) {
      const double t = static_cast<double>(i - i0) / (i1 - i0);
      v[static_cast<std::size_t>(i - 1)] = a > 0 ? a * std::pow(b / a, t) : a + (b - a) * t;
    }
  }
  return DiscreteSpectrum<double>(v);
}

// y = 1/30, first realisation.
DiscreteSpectrum<double> table4_l1() {
  return fill_column({{1, 0.82},  {2, 0.84},  {10, 1.02}, {11, 1.04}, {12, 1.06}, {13, 1.08},
                      {14, 1.10}, {15, 1.16}, {16, 5.32}, {17, 5.97}, {18, 20.5}, {19, 22.0},
                      {20, 24.8}, {21, 48.6}, {49, 764}, {50, 944}},
                     50);
}

// y = 1, first realisation.
DiscreteSpectrum<double> table1_l1() {
  return fill_column({{1, 0.00},  {2, 0.00},  {10, 0.31}, {11, 0.43}, {12, 0.45}, {13, 0.57},
                      {14, 0.67}, {15, 0.86}, {16, 1.38}, {17, 2.59}, {18, 5.61}, {19, 7.98},
                      {20, 11.4}, {21, 14.8}, {49, 1159}, {50, 1470}},
                     50);
}

// Theoretical bounds at y = 1/30 for the published scenario.
SupportLayout<double> table5_y30() {
  SupportLayout<double> l;
  l.y = 1.0 / 30;
  const double nan = std::nan("");
  l.intervals = {{0.789, 1.184, 0.3, nan, nan}, {5.785, 995.4, 0.7, nan, nan}};
  return l;
}

DiscreteSpectrum<double> spec(std::vector<double> v) { return DiscreteSpectrum<double>(std::move(v)); }

}  // namespace

TEST_CASE("fixture reproduces the listed entries") {
  const auto s = table4_l1();
  CHECK(s[0] == 0.82);
  CHECK(s[14] == Approx(1.16));
  CHECK(s[15] == Approx(5.32));
  CHECK(s[49] == 944);
}

TEST_CASE("model-based detection on the y = 1/30 realisation") {
  const auto r = detect_model_based(table4_l1(), table5_y30());
  CHECK(r.q_hat == 35);
  CHECK(r.gap_index == 15);
  CHECK(r.method == DetectionMethod::model_based);
  CHECK(r.consistent);
  CHECK(r.gap_ratio == Approx(5.32 / 1.16));
  CHECK(r.sigma2_hat == Approx(1.0).margin(0.05));
}

TEST_CASE("blind detection on the y = 1/30 realisation") {
  const auto r = detect_blind(table4_l1(), 0.1);
  CHECK(r.q_hat == 35);
  CHECK(r.gap_ratio == Approx(4.586).epsilon(1e-3));
  CHECK(r.method == DetectionMethod::blind_gap);
  CHECK(estimate_sigma2(table4_l1(), 35) == Approx(1.0).margin(0.05));
}

TEST_CASE("blind detection can fail near the critical ratio") {
  // Largest relative gap sits inside the signal part: 5.61/2.59 > 1.38/0.86.
  const auto r = detect_blind(table1_l1(), 0.1);
  CHECK(r.q_hat == 33);
  CHECK(r.gap_ratio == Approx(5.61 / 2.59));
}

TEST_CASE("small spectra") {
  const auto r = detect_blind(spec({1, 1, 1, 10}), 0.1);
  CHECK(r.q_hat == 1);
  CHECK(r.sigma2_hat == Approx(1.0));
  CHECK(r.gap_ratio == Approx(10.0));

  const auto flat = detect_blind(spec({2, 2, 2, 2}), 0.1);
  CHECK(flat.q_hat == 0);
  CHECK(flat.gap_ratio == 1.0);
  CHECK(flat.sigma2_hat == Approx(2.0));
}

TEST_CASE("model-based guard cases") {
  const auto layout = table5_y30();
  const auto quiet = detect_model_based(spec({0.8, 0.9, 1.0, 1.1}), layout);
  CHECK(quiet.q_hat == 0);
  CHECK(quiet.sigma2_hat == Approx(0.95));

  const auto loud = detect_model_based(spec({10, 20, 30}), layout);
  CHECK(loud.q_hat == 3);
  CHECK(!loud.consistent);
  CHECK(loud.sigma2_hat == 10.0);

  SupportLayout<double> merged = layout;
  merged.intervals.pop_back();
  CHECK_THROWS_AS(detect_model_based(spec({1, 2}), merged), DomainError);
  CHECK_THROWS_AS(detect_model_based(DiscreteSpectrum<double>(), layout), DomainError);
}

TEST_CASE("detector error paths") {
  CHECK_THROWS_AS(detect_blind(spec({1, 2}), 0.1), DomainError);
  CHECK_THROWS_AS(detect_blind(spec({1, 2, 3}), 0.0), DomainError);
  CHECK_THROWS_AS(detect_blind(spec({1, 2, 3}), 1.0), DomainError);
  CHECK_THROWS_AS(estimate_sigma2(spec({1, 2, 3}), 3), DomainError);
  CHECK_THROWS_AS(estimate_sigma2(spec({1, 2, 3}), -1), DomainError);
}

TEST_CASE("min_noise_fraction restricts the boundary") {
  // Biggest ratio is between the first two values; a guard of 0.3 skips it.
  const auto s = spec({0.01, 1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 8, 9});
  CHECK(detect_blind(s, 0.05).q_hat == 9);
  CHECK(detect_blind(s, 0.3).q_hat == 2);
}

TEST_CASE("duplicate eigenvalues never create a spurious gap") {
  const auto s = spec({1, 1, 1, 1, 1, 1, 7, 7, 7, 7});
  const auto r = detect_blind(s, 0.1);
  CHECK(r.q_hat == 4);
  CHECK(r.gap_ratio == Approx(7.0));
}

TEST_CASE("ties go to fewer signals") {
  const auto s = spec({1, 1, 2, 2, 4, 4});
  const auto r = detect_blind(s, 0.1);
  CHECK(r.q_hat == 2);
}

TEST_CASE("scale equivariance") {
  const auto base = table4_l1();
  const auto layout = table5_y30();
  const auto b0 = detect_blind(base, 0.1);
  const auto m0 = detect_model_based(base, layout);
  for (double c : {1e-3, 0.37, 12.0, 5e4}) {
    const auto s = base.scaled(c);
    const auto b = detect_blind(s, 0.1);
    CHECK(b.q_hat == b0.q_hat);
    CHECK(b.sigma2_hat == Approx(c * b0.sigma2_hat));
    CHECK(b.gap_ratio == Approx(b0.gap_ratio));
    SupportLayout<double> scaled = layout;
    for (auto& iv : scaled.intervals) iv.lo *= c, iv.hi *= c;
    const auto m = detect_model_based(s, scaled);
    CHECK(m.q_hat == m0.q_hat);
    CHECK(m.sigma2_hat == Approx(c * m0.sigma2_hat));
  }
}

TEST_CASE("exact population spectra are enumerated exactly") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (auto [p, q] : std::vector<std::pair<int, int>>{{50, 35}, {20, 4}, {12, 6}}) {
      std::vector<double> ang, snr;
      for (int i = 0; i < q; ++i) {
        ang.push_back(-1.2 + 2.4 * i / std::max(1, q - 1));
        snr.push_back(10.0 * i / std::max(1, q - 1));
      }
      const auto sc = build_scenario<double>(p, q, ang, 1.0, snr, 2, seed);
      const auto model = sc.population_model();
      const double y = std::min(0.5, 0.5 * critical_y(model));
      const auto layout = find_support_layout(y, model);
      REQUIRE(split_exists(y, model).splits);
      CHECK(detect_model_based(sc.true_spectrum, layout).q_hat == q);
      CHECK(detect_blind(sc.true_spectrum, 0.1).q_hat == q);
      CHECK(detect_blind(sc.true_spectrum, 0.1).sigma2_hat == Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("noise-power estimate from a Marchenko-Pastur cluster lies in the support") {
  const std::vector<double> none;
  const auto sc = build_scenario<double>(100, 0, none, 1.5, none, 0, 4);
  const auto layout = find_support_layout(0.25, sc.population_model());
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto spec = hermitian_eigenvalues(sample_covariance(snapshots(sc, 400, s)));
    const double est = estimate_sigma2(spec, 0);
    CHECK(est > layout.x1());
    CHECK(est < layout.x4());
  }
}

TEST_CASE("product spectrum bound on small examples") {
  CMatrix<double> a = CMatrix<double>::Zero(2, 2), b = CMatrix<double>::Zero(2, 2);
  a(0, 0) = 1, a(1, 1) = 4;
  b(0, 0) = 2, b(1, 1) = 3;
  // AB = diag(2, 12): F^{AB}(6) = 1/2, F^A(2) + F^B(3) = 1/2 + 1.
  const auto r = product_spectrum_bound(a, b, 2.0, 3.0);
  CHECK(r.lhs == Approx(0.5));
  CHECK(r.rhs == Approx(1.5));
  CHECK(r.holds());
  CHECK_THROWS_AS(product_spectrum_bound(a, b, 0.0, 1.0), DomainError);

  RandomStream rs(808);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 8;
    const auto ga = complex_gaussian_matrix<double>(m, m, rs);
    const auto gb = complex_gaussian_matrix<double>(m, 1 + t % 3, rs);
    const CMatrix<double> aa = ga * ga.adjoint(), bb = gb * gb.adjoint();
    const double alpha = std::exp(2 * rs.normal()), beta = std::exp(2 * rs.normal());
    CHECK(product_spectrum_bound(aa, bb, alpha, beta).holds(1e-12));
  }
}
