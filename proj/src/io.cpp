#include "rmtdetect/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace rmtdetect {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string ratio_label(int p, int n) {
  const int g = std::gcd(p, n);
  const int a = p / g;
  const int b = n / g;
  if (b == 1) return std::to_string(a);
  if (a == 1) return "1/" + std::to_string(b);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(p) / n);
  return buf;
}

void write_step_df_csv(std::ostream& out, const StepDF<double>& f) {
  out << "x,cdf\n";
  std::vector<double> atom_locs;
  for (const auto& a : f.atoms()) atom_locs.push_back(a.location);
  for (double x : f.breakpoints()) {
    if (std::binary_search(atom_locs.begin(), atom_locs.end(), x))
      out << format_number(x) << ',' << format_number(f.left_limit(x)) << '\n';
    out << format_number(x) << ',' << format_number(f(x)) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const Histogram<double>& h) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << format_number(h.bin_edges[i]) << ',' << format_number(h.bin_edges[i + 1]) << ',' << h.counts[i] << '\n';
}

void write_endpoints_csv(std::ostream& out, const std::vector<LabeledLayout>& layouts) {
  out << "y,x1,x2,x3,x4,atom_at_zero,components\n";
  for (const auto& l : layouts) {
    const auto& s = l.layout;
    out << format_number(s.y) << ',' << format_number(s.x1()) << ',' << format_number(s.x2()) << ','
        << format_number(s.x3()) << ',' << format_number(s.x4()) << ',' << format_number(s.atom_at_zero) << ','
        << s.intervals.size() << '\n';
  }
}

void write_endpoints_table(std::ostream& out, const std::vector<LabeledLayout>& layouts) {
  constexpr int kWidth = 12;
  out << std::left << std::setw(6) << "" << std::right;
  for (const auto& l : layouts) out << std::setw(kWidth) << ("y=" + l.label);
  out << '\n';
  const char* names[] = {"x1", "x2", "x3", "x4"};
  for (int r = 0; r < 4; ++r) {
    out << std::left << std::setw(6) << names[r] << std::right;
    for (const auto& l : layouts) {
      const auto& s = l.layout;
      const double v = r == 0 ? s.x1() : r == 1 ? s.x2() : r == 2 ? s.x3() : s.x4();
      char buf[32];
      if (std::isnan(v))
        std::snprintf(buf, sizeof buf, "-");
      else
        std::snprintf(buf, sizeof buf, "%.4f", v);
      out << std::setw(kWidth) << buf;
    }
    out << '\n';
  }
}

void write_density_csv(std::ostream& out, const std::vector<double>& xs, const std::vector<double>& density,
                       const std::vector<double>* mp_reference) {
  out << (mp_reference ? "x,density,mp_reference\n" : "x,density\n");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << format_number(xs[i]) << ',' << format_number(density[i]);
    if (mp_reference) out << ',' << format_number((*mp_reference)[i]);
    out << '\n';
  }
}

void write_detections_csv(std::ostream& out, const std::vector<DetectionRow>& rows) {
  out << "seed,n,y,q_true,q_hat,sigma2_hat,gap_ratio,method\n";
  for (const auto& r : rows)
    out << r.seed << ',' << r.n << ',' << format_number(r.y) << ',' << r.q_true << ',' << r.result.q_hat << ','
        << format_number(r.result.sigma2_hat) << ',' << format_number(r.result.gap_ratio) << ','
        << to_string(r.result.method) << '\n';
}

void write_spectra_table(std::ostream& out, const std::vector<std::vector<double>>& trials,
                         const std::vector<double>& truth) {
  constexpr int kWidth = 11;
  out << std::setw(5) << "i";
  for (std::size_t t = 0; t < trials.size(); ++t) out << std::setw(kWidth) << ("#" + std::to_string(t + 1));
  out << std::setw(kWidth) << "true" << '\n';
  const std::size_t p = truth.size();
  auto cell = [&](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, v >= 100 ? "%.1f" : v >= 10 ? "%.2f" : "%.4f", v);
    out << std::setw(kWidth) << buf;
  };
  for (std::size_t i = 0; i < p; ++i) {
    out << std::setw(5) << i + 1;
    for (const auto& s : trials) {
      if (s.size() == p)
        cell(s[p - 1 - i]);
      else
        out << std::setw(kWidth) << "-";
    }
    cell(truth[p - 1 - i]);
    out << '\n';
  }
}

void write_spectra_csv(std::ostream& out, const std::vector<std::vector<double>>& trials,
                       const std::vector<double>& truth) {
  out << "index";
  for (std::size_t t = 0; t < trials.size(); ++t) out << ",trial_" << t + 1;
  out << ",true\n";
  const std::size_t p = truth.size();
  for (std::size_t i = 0; i < p; ++i) {
    out << i + 1;
    for (const auto& s : trials) out << ',' << (s.size() == p ? format_number(s[p - 1 - i]) : std::string());
    out << ',' << format_number(truth[p - 1 - i]) << '\n';
  }
}

}  // namespace rmtdetect
