#include "pdistill/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pdistill/boolean_fourier.hpp"
#include "pdistill/errors.hpp"
#include "pdistill/parallel.hpp"
#include "pdistill/textio.hpp"

namespace pdistill {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_ratio(double num, double den) { return den == 0.0 ? (num == 0.0 ? 0.0 : kInf) : num / den; }

double json_number(double v) { return std::isfinite(v) ? v : (v > 0 ? 1e308 : -1e308); }

// Mean of fn(batch) over the cube or over B samples, chunked and tree-reduced.
template <class Fn>
RowMat<double> moment(const ParityTask& task, EstimateMode mode, std::size_t B, Rng* rng, Fn&& fn) {
  std::uint64_t n;
  if (mode == EstimateMode::kExact) {
    n = cube_size(task.d());
  } else {
    if (B < 1 || !rng) throw ArgumentError("sampled mode needs B >= 1 and a generator");
    n = B;
  }
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  const Rng base = rng ? *rng : Rng(0);
  RowMat<double> sum = map_reduce_chunks<RowMat<double>>(chunks, [&](std::size_t c) {
    const std::uint64_t first = c * kChunk;
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n - first));
    if (mode == EstimateMode::kExact) return fn(population_chunk<double>(task, first, count));
    Rng r = base.split(c);
    return fn(sample_batch_as<double>(task, count, r));
  });
  return sum / static_cast<double>(n);
}

double zeta_for(int d, int i) {
  if (d <= kMaxEnumerationDim) return majority_zeta(d, i);
  if (d <= kMaxCombinatorialDim) return majority_zeta(d, i, ZetaMode::kCombinatorial);
  return majority_zeta(d, i, ZetaMode::kAsymptotic);
}

struct Pool {
  double sum = 0, sq = 0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sq += v * v;
    ++n;
  }
  double sd() const {
    if (n == 0) return 0.0;
    double m = sum / static_cast<double>(n);
    return std::sqrt(std::max(0.0, sq / static_cast<double>(n) - m * m));
  }
};

}  // namespace

// ---- weight gap ----

WeightGapReport weight_gap(const TwoLayerMlp& model, const ParityTask& task) {
  if (model.input_dim() != task.d()) throw ArgumentError("model and task dimensions differ");
  WeightGapReport r;
  r.d = task.d();
  r.k = task.k();
  r.support = task.support();
  r.predicted_in = 1.0 / (2.0 * r.k);
  if (r.k + 1 <= r.d) {
    double zl = zeta_for(r.d, r.k - 1), zh = zeta_for(r.d, r.k + 1);
    r.predicted_out = zl == 0.0 ? kInf : std::abs(zh / zl) / (2.0 * r.k);
  }
  r.min_in = kInf;
  double sum_in = 0, sum_out = 0;
  std::size_t n_in = 0, n_out = 0;
  for (int i = 0; i < model.width(); ++i) {
    NeuronGap g{i + 1, kInf, 0, 0, 0, 0};
    int ni = 0, no = 0;
    for (int j = 0; j < r.d; ++j) {
      double v = std::abs(model.W(i, j));
      if (task.in_support(j + 1)) {
        g.min_in = std::min(g.min_in, v);
        g.mean_in += v;
        ++ni;
      } else {
        g.max_out = std::max(g.max_out, v);
        g.mean_out += v;
        ++no;
      }
    }
    sum_in += g.mean_in;
    sum_out += g.mean_out;
    n_in += static_cast<std::size_t>(ni);
    n_out += static_cast<std::size_t>(no);
    g.mean_in /= ni;
    g.mean_out = no ? g.mean_out / no : 0.0;
    g.ratio = safe_ratio(g.min_in, g.max_out);
    r.min_in = std::min(r.min_in, g.min_in);
    r.max_out = std::max(r.max_out, g.max_out);
    r.neurons.push_back(g);
  }
  r.mean_in = n_in ? sum_in / static_cast<double>(n_in) : 0.0;
  r.mean_out = n_out ? sum_out / static_cast<double>(n_out) : 0.0;
  r.ratio = safe_ratio(r.min_in, r.max_out);
  return r;
}

void WeightGapReport::write_csv(std::ostream& out) const {
  out << "neuron,min_in,mean_in,max_out,mean_out,ratio\n";
  for (const auto& g : neurons)
    out << g.neuron << ',' << format_g17(g.min_in) << ',' << format_g17(g.mean_in) << ',' << format_g17(g.max_out)
        << ',' << format_g17(g.mean_out) << ',' << format_g17(g.ratio) << '\n';
}

nlohmann::json WeightGapReport::summary() const {
  return {{"d", d},
          {"k", k},
          {"support", support},
          {"min_in", min_in},
          {"mean_in", mean_in},
          {"max_out", max_out},
          {"mean_out", mean_out},
          {"gap_ratio", json_number(ratio)},
          {"predicted_in", predicted_in},
          {"predicted_out", json_number(predicted_out)}};
}

// ---- correlations ----

std::vector<HistogramBin> split_histogram(const RowMat<double>& values, const ParityTask& task, int bins) {
  if (bins < 1) throw ArgumentError("need at least one bin");
  if (values.cols() != task.d()) throw ArgumentError("histogram columns must be coordinates");
  double M = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  if (M == 0.0) M = 1.0;
  std::vector<HistogramBin> h;
  for (int b = 0; b < bins; ++b)
    h.push_back({-M + 2 * M * b / bins, -M + 2 * M * (b + 1) / bins, 0, 0});
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      double v = values(r, j);
      int b = static_cast<int>(std::floor((v + M) / (2 * M) * bins));
      b = std::clamp(b, 0, bins - 1);
      (task.in_support(static_cast<int>(j) + 1) ? h[static_cast<std::size_t>(b)].count_in
                                                 : h[static_cast<std::size_t>(b)].count_out)++;
    }
  return h;
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, std::ostream& out) {
  out << "bin_left,bin_right,count_in_support,count_out_support\n";
  for (const auto& b : bins)
    out << format_g17(b.left) << ',' << format_g17(b.right) << ',' << b.count_in << ',' << b.count_out << '\n';
}

CorrelationReport correlation_report(const TwoLayerMlp& teacher, const SymmetricProjection& A, const ParityTask& task,
                                     EstimateMode mode, std::size_t B, Rng* rng) {
  if (teacher.input_dim() != task.d()) throw ArgumentError("teacher and task dimensions differ");
  ProjectedHidden g(teacher, A);
  CorrelationReport r;
  r.d = task.d();
  r.support = task.support();
  r.C = moment(task, mode, B, rng, [&](const Batch& b) -> RowMat<double> {
    RowMat<double> out(g.output_dim(), b.x.cols());
    out.noalias() = g.evaluate<double>(b.x).transpose() * b.x;
    return out;
  });
  if (has_symmetric_pairing(teacher)) {
    const int h = teacher.width() / 2;
    BasicMlp<double> half{teacher.W.topRows(h), teacher.b.head(h), teacher.a.head(h)};
    r.s = moment(task, mode, B, rng, [&](const Batch& b) -> RowMat<double> {
      RowMat<double> T = b.x * half.W.transpose();
      RowMat<double> Phi(T.rows(), T.cols());
      for (Eigen::Index x = 0; x < T.rows(); ++x)
        for (Eigen::Index i = 0; i < T.cols(); ++i) Phi(x, i) = phi_b(T(x, i), half.b(i));
      return Phi.transpose() * b.x;
    });
    r.s_direct = moment(task, mode, B, rng, [&](const Batch& b) -> RowMat<double> {
      RowMat<double> H = hidden_batch(teacher, b.x);
      RowMat<double> D = H.leftCols(h) - H.rightCols(h);
      return D.transpose() * b.x;
    });
  }
  r.sigma.resize(r.d);
  Pool in, out;
  for (int j = 0; j < r.d; ++j) {
    Pool col;
    for (Eigen::Index l = 0; l < r.C.rows(); ++l) {
      double v = r.C(l, j);
      col.add(v);
      if (task.in_support(j + 1)) {
        in.add(v);
        r.mean_abs_in += std::abs(v);
      } else {
        out.add(v);
        r.max_abs_out = std::max(r.max_abs_out, std::abs(v));
      }
    }
    r.sigma(j) = col.sd();
  }
  r.mean_abs_in = in.n ? r.mean_abs_in / static_cast<double>(in.n) : 0.0;
  r.sd_in = in.sd();
  r.sd_out = out.sd();
  r.dispersion_ratio = safe_ratio(r.sd_in, r.sd_out);
  r.histogram = split_histogram(r.C, task);
  return r;
}

void CorrelationReport::write_csv(std::ostream& out) const {
  out << "row,coordinate,in_support,value\n";
  for (Eigen::Index l = 0; l < C.rows(); ++l)
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
      bool in = std::find(support.begin(), support.end(), static_cast<int>(j) + 1) != support.end();
      out << l + 1 << ',' << j + 1 << ',' << (in ? 1 : 0) << ',' << format_g17(C(l, j)) << '\n';
    }
}

nlohmann::json CorrelationReport::summary() const {
  std::vector<double> sig(sigma.data(), sigma.data() + sigma.size());
  return {{"d", d},
          {"support", support},
          {"rows", C.rows()},
          {"sd_in", sd_in},
          {"sd_out", sd_out},
          {"dispersion_ratio", json_number(dispersion_ratio)},
          {"mean_abs_in", mean_abs_in},
          {"max_abs_out", max_abs_out},
          {"sigma", sig}};
}

// ---- gradient decomposition ----

GradientDecompositionReport gradient_decomposition(const TwoLayerMlp& student_init, const TwoLayerMlp& teacher,
                                                   const SymmetricProjection& A, const ParityTask& task,
                                                   EstimateMode mode, std::size_t B, Rng* rng) {
  if (student_init.input_dim() != task.d()) throw ArgumentError("student and task dimensions differ");
  if (A.m_s() != student_init.width()) throw ArgumentError("projection rows must equal the student width");
  ProjectedHidden g(teacher, A);
  const int m = student_init.width(), d = task.d();
  // Stack [term1 | term2 | total] as one m x 3d moment so all three share the sample.
  RowMat<double> all = moment(task, mode, B, rng, [&](const Batch& b) -> RowMat<double> {
    RowMat<double> G = g.evaluate<double>(b.x);
    RowMat<double> T = b.x * student_init.W.transpose();
    RowMat<double> maj = (T.array() >= 0.0).select(G.array(), -G.array());
    RowMat<double> out(m, 3 * d);
    out.leftCols(d).noalias() = G.transpose() * b.x;
    out.middleCols(d, d).noalias() = maj.transpose() * b.x;
    out.rightCols(d) = distill_gradient_sum(student_init, b.x, G);
    return out;
  });
  GradientDecompositionReport r;
  r.term1 = all.leftCols(d);
  r.term2 = all.middleCols(d, d);
  r.total = all.rightCols(d);
  RowMat<double> resid = (r.total + 0.5 * (r.term1 + r.term2)).cwiseAbs();
  r.max_residual = resid.maxCoeff();
  for (int i = 0; i < m; ++i)
    if (student_init.b(i) >= 0) r.max_residual_nonneg_bias = std::max(r.max_residual_nonneg_bias, resid.row(i).maxCoeff());
  std::vector<double> ratios;
  for (int i = 0; i < m; ++i)
    for (int j : task.support()) ratios.push_back(safe_ratio(std::abs(r.term2(i, j - 1)), std::abs(r.term1(i, j - 1))));
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    std::size_t n = ratios.size();
    r.median_ratio_in = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
    r.fraction_ratio_in_below_half =
        static_cast<double>(std::upper_bound(ratios.begin(), ratios.end(), 0.5) - ratios.begin()) / static_cast<double>(n);
    r.max_ratio_in = ratios.back();
  }
  return r;
}

nlohmann::json GradientDecompositionReport::summary() const {
  return {{"max_residual", max_residual},
          {"max_residual_nonneg_bias", max_residual_nonneg_bias},
          {"median_ratio_in", json_number(median_ratio_in)},
          {"fraction_ratio_in_below_half", fraction_ratio_in_below_half},
          {"max_ratio_in", json_number(max_ratio_in)}};
}

double expected_majority(std::span<const double> w) {
  std::vector<double> wx(w.size());
  return exact_expectation(
      [&](const BooleanPoint& x) {
        for (std::size_t j = 0; j < w.size(); ++j) wx[j] = w[j] * x[static_cast<int>(j)];
        return majority(wx);
      },
      static_cast<int>(w.size()));
}

// ---- concentration ----

ConcentrationCurve concentration_curve(const std::function<double(std::span<const double>)>& statistic, int d,
                                       const std::vector<std::size_t>& batch_sizes, int repeats, Rng& rng) {
  if (repeats < 1) throw ArgumentError("need at least one repeat");
  ConcentrationCurve c;
  c.exact_value = exact_expectation([&](const BooleanPoint& x) { return statistic(x.values()); }, d);
  std::vector<double> lx, ly;
  for (std::size_t bi = 0; bi < batch_sizes.size(); ++bi) {
    const std::size_t B = batch_sizes[bi];
    if (B < 1) throw ArgumentError("batch sizes must be positive");
    std::vector<double> errs(static_cast<std::size_t>(repeats));
    parallel_for(errs.size(), [&](std::size_t rep) {
      Rng r = rng.split(bi).split(rep);
      std::vector<double> x(static_cast<std::size_t>(d)), vals(B);
      for (std::size_t n = 0; n < B; ++n) {
        for (double& v : x) v = r.sign();
        vals[n] = statistic(x);
      }
      errs[rep] = std::abs(tree_reduce(std::move(vals)) / static_cast<double>(B) - c.exact_value);
    });
    double mean = tree_reduce(errs) / repeats;
    c.points.push_back({B, mean});
    if (mean > 0) {
      lx.push_back(std::log(static_cast<double>(B)));
      ly.push_back(std::log(mean));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    c.slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  return c;
}

double support_recovery_score(const TwoLayerMlp& model, const ParityTask& task) {
  if (model.input_dim() != task.d()) throw ArgumentError("model and task dimensions differ");
  auto gaps = weight_gap(model, task);
  std::size_t hits = 0;
  for (const auto& g : gaps.neurons) hits += g.min_in > g.max_out;
  return static_cast<double>(hits) / static_cast<double>(model.width());
}

ScalingBounds scaling_factor_bounds(const CorrelationReport& report, int m_t) {
  if (report.s.size() == 0) throw ArgumentError("scaling factors need a paired teacher");
  ScalingBounds b;
  const auto rank = static_cast<std::size_t>(std::max(1, m_t / 8));
  for (int j : report.support) {
    std::vector<double> col;
    for (Eigen::Index i = 0; i < report.s.rows(); ++i) col.push_back(std::abs(report.s(i, j - 1)));
    std::sort(col.begin(), col.end(), std::greater<>());
    b.in_threshold.push_back(col[std::min(rank, col.size()) - 1]);
  }
  for (Eigen::Index j = 0; j < report.s.cols(); ++j) {
    if (std::find(report.support.begin(), report.support.end(), static_cast<int>(j) + 1) != report.support.end())
      continue;
    b.out_ceiling = std::max(b.out_ceiling, report.s.col(j).cwiseAbs().maxCoeff());
  }
  return b;
}

}  // namespace pdistill
