#pragma once

// CSV and plain-text writers for experiment outputs. CSV cells use %.10g;
// undefined values (NaN) are written as empty cells.

#include <iosfwd>
#include <string>
#include <vector>

#include "rmtdetect/detect.hpp"
#include "rmtdetect/dist.hpp"
#include "rmtdetect/support.hpp"

namespace rmtdetect {

std::string format_number(double v);

/// "1", "1/5", "1/30" when p/n reduces to a unit-numerator fraction, else p/n in %.6g.
std::string ratio_label(int p, int n);

/// Columns x,cdf. Each atom contributes its left limit then its value.
void write_step_df_csv(std::ostream& out, const StepDF<double>& f);

/// Columns bin_lo,bin_hi,count.
void write_histogram_csv(std::ostream& out, const Histogram<double>& h);

struct LabeledLayout {
  std::string label;
  SupportLayout<double> layout;
};

/// Columns y,x1,x2,x3,x4,atom_at_zero,components.
void write_endpoints_csv(std::ostream& out, const std::vector<LabeledLayout>& layouts);

/// Endpoint table with one row per endpoint and one column per layout.
void write_endpoints_table(std::ostream& out, const std::vector<LabeledLayout>& layouts);

/// Columns x,density[,mp_reference].
void write_density_csv(std::ostream& out, const std::vector<double>& xs, const std::vector<double>& density,
                       const std::vector<double>* mp_reference = nullptr);

struct DetectionRow {
  std::uint64_t seed;
  int n;
  double y;
  int q_true;
  DetectionResult<double> result;
};

/// Columns seed,n,y,q_true,q_hat,sigma2_hat,gap_ratio,method.
void write_detections_csv(std::ostream& out, const std::vector<DetectionRow>& rows);

/// Eigenvalue table: one row per index (largest first), one column per
/// trial, and a final column with the true eigenvalues.
void write_spectra_table(std::ostream& out, const std::vector<std::vector<double>>& trials,
                         const std::vector<double>& truth);

/// Same layout as CSV: index,trial_1,...,trial_T,true.
void write_spectra_csv(std::ostream& out, const std::vector<std::vector<double>>& trials,
                       const std::vector<double>& truth);

}  // namespace rmtdetect
