#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"
#include "pdistill/distill.hpp"
#include "pdistill/mlp.hpp"
#include "pdistill/parity_data.hpp"

namespace pdistill {

struct NeuronGap {
  int neuron;
  double min_in;
  double mean_in;
  double max_out;
  double mean_out;
  double ratio;  // min_in / max_out
};

struct WeightGapReport {
  int d = 0;
  int k = 0;
  std::vector<int> support;
  std::vector<NeuronGap> neurons;
  double min_in = 0, mean_in = 0, max_out = 0, mean_out = 0;
  double ratio = 0;           // min over all in-support / max over all out-of-support
  double predicted_in = 0;    // 1/(2k)
  double predicted_out = 0;   // |zeta_{k+1} / zeta_{k-1}| / (2k)

  // neuron,min_in,mean_in,max_out,mean_out,ratio (neurons 1-based)
  void write_csv(std::ostream& out) const;
  nlohmann::json summary() const;
};

WeightGapReport weight_gap(const TwoLayerMlp& model, const ParityTask& task);

enum class EstimateMode { kExact, kSampled };

struct HistogramBin {
  double left;
  double right;
  std::size_t count_in;
  std::size_t count_out;
};

// 41 uniform bins over [-max|v|, max|v|].
std::vector<HistogramBin> split_histogram(const RowMat<double>& values, const ParityTask& task, int bins = 41);
void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out);

struct CorrelationReport {
  int d = 0;
  std::vector<int> support;
  RowMat<double> C;         // m_s x d, E[(A f_t^(1))_l(x) x_j]
  RowMat<double> s;         // (m_t/2) x d, E[phi_{b_i}(w_i.x) x_j]; empty without pairing
  RowMat<double> s_direct;  // same through the teacher's paired hidden units
  Vec<double> sigma;        // per-coordinate std of C over rows
  double sd_in = 0;         // std of in-support entries of C
  double sd_out = 0;
  double dispersion_ratio = 0;
  double mean_abs_in = 0;
  double max_abs_out = 0;
  std::vector<HistogramBin> histogram;

  // row,coordinate,in_support,value (1-based)
  void write_csv(std::ostream& out) const;
  nlohmann::json summary() const;
};

CorrelationReport correlation_report(const TwoLayerMlp& teacher, const SymmetricProjection& A, const ParityTask& task,
                                     EstimateMode mode, std::size_t B = 0, Rng* rng = nullptr);

struct GradientDecompositionReport {
  RowMat<double> term1;  // E[g_i x_j]
  RowMat<double> term2;  // E[g_i Maj(w_i . x) x_j]
  RowMat<double> total;  // stage-1 gradient of the distillation loss
  double max_residual = 0;            // max |total + (term1 + term2)/2|
  double max_residual_nonneg_bias = 0;  // same over neurons with b_i >= 0
  double median_ratio_in = 0;         // |term2|/|term1| over in-support entries
  double fraction_ratio_in_below_half = 0;
  double max_ratio_in = 0;

  nlohmann::json summary() const;
};

GradientDecompositionReport gradient_decomposition(const TwoLayerMlp& student_init, const TwoLayerMlp& teacher,
                                                   const SymmetricProjection& A, const ParityTask& task,
                                                   EstimateMode mode, std::size_t B = 0, Rng* rng = nullptr);

// E_x[Maj(w * x)] by enumeration, w in {+-1}^d.
double expected_majority(std::span<const double> w);

struct ConcentrationPoint {
  std::size_t B;
  double mean_abs_error;
};

struct ConcentrationCurve {
  double exact_value = 0;
  std::vector<ConcentrationPoint> points;
  double slope = 0;  // least squares, log error vs log B; 0 when every error is 0
};

// Errors of B-sample means against the exact mean over {+-1}^d.
ConcentrationCurve concentration_curve(const std::function<double(std::span<const double>)>& statistic, int d,
                                       const std::vector<std::size_t>& batch_sizes, int repeats, Rng& rng);

// Fraction of neurons whose k largest |w_ij| are exactly the support
// (strict: min in-support > max out-of-support).
double support_recovery_score(const TwoLayerMlp& model, const ParityTask& task);

struct ScalingBounds {
  std::vector<double> in_threshold;  // per support coordinate: the (m_t/8)-th largest |s_ij|
  double out_ceiling = 0;            // max |s_ij| over j outside S
};

ScalingBounds scaling_factor_bounds(const CorrelationReport& report, int m_t);

}  // namespace pdistill
