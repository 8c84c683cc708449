#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pdistill/boolean_fourier.hpp"
#include "pdistill/diagnostics.hpp"
#include "pdistill/errors.hpp"

using namespace pdistill;

namespace {

TrainConfig exact_cfg() {
  TrainConfig c;
  c.exact_mode = true;
  c.T2 = 2;
  c.B2 = 8;
  return c;
}

TwoLayerMlp rows_model(RowMat<double> W) {
  const auto m = W.rows();
  return TwoLayerMlp{std::move(W), Vec<double>::Zero(m), Vec<double>::Ones(m)};
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("weight_gap hand examples") {
  ParityTask task(4, {1, 2});
  RowMat<double> W(2, 4);
  W << 0.125, -0.125, 0.01, -0.02, 0.5, 0.25, 0.05, 0.0;
  auto r = weight_gap(rows_model(W), task);
  CHECK(r.neurons[0].ratio == doctest::Approx(6.25));
  CHECK(r.neurons[1].ratio == doctest::Approx(5.0));
  CHECK(r.min_in == 0.125);
  CHECK(r.max_out == 0.05);
  CHECK(r.ratio == doctest::Approx(2.5));
  CHECK(r.predicted_in == 0.25);
  RowMat<double> flat = RowMat<double>::Constant(3, 4, 0.3);
  CHECK(weight_gap(rows_model(flat), task).ratio == doctest::Approx(1.0));
  RowMat<double> e1 = RowMat<double>::Zero(1, 4);
  e1(0, 0) = 1.0;
  e1(0, 1) = 1.0;
  CHECK(std::isinf(weight_gap(rows_model(e1), task).ratio));
  std::ostringstream csv;
  r.write_csv(csv);
  CHECK(csv.str().rfind("neuron,min_in,mean_in,max_out,mean_out,ratio\n", 0) == 0);
}

TEST_CASE("weight_gap after exact teacher stage 1 at d=16") {
  ParityTask task = ParityTask::prefix(16, 4);
  Rng rng(1);
  auto t = train_teacher(task, 256, exact_cfg(), rng);
  auto r = weight_gap(t.after_stage1, task);
  CHECK(r.min_in == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(r.max_out == doctest::Approx(0.028846153846153848).epsilon(1e-10));
  CHECK(r.ratio == doctest::Approx(13.0 / 3.0).epsilon(1e-10));
  CHECK(r.max_out <= r.predicted_out + 1e-12);
}

TEST_CASE("support recovery examples") {
  ParityTask task(4, {1, 2});
  RowMat<double> W(4, 4);
  W << 1, 1, 0.5, 0.5,    // recovered
      1, -1, 1, 0,        // tie, strict rule rejects
      0.2, 0.3, 0.1, 0,   // recovered
      0, 1, 0.5, 0.5;     // not recovered
  CHECK(support_recovery_score(rows_model(W), task) == 0.5);
  CHECK_THROWS_AS(support_recovery_score(rows_model(W), ParityTask(5, {1})), ArgumentError);
}

TEST_CASE("expected majority against the tie probability") {
  for (int d = 2; d <= 16; ++d) {
    std::vector<double> w(static_cast<std::size_t>(d), 1.0);
    for (int j = 0; j < d; j += 3) w[static_cast<std::size_t>(j)] = -1.0;
    const double tie = d % 2 ? 0.0 : binom(d, d / 2) / std::ldexp(1.0, d);
    CHECK(expected_majority(w) == doctest::Approx(tie).epsilon(1e-15));
  }
  std::vector<double> ten(10, 1.0);
  CHECK(expected_majority(ten) == 0.24609375);
}

TEST_CASE("correlation report against loop oracle") {
  ParityTask task = ParityTask::prefix(6, 2);
  Rng rng(3);
  auto t = train_teacher(task, 8, exact_cfg(), rng);
  const TwoLayerMlp& T = t.after_stage1;
  Rng pr(4);
  auto A = sample_projection(8, 5, pr);
  auto r = correlation_report(T, A, task, EstimateMode::kExact);
  RowMat<double> C = RowMat<double>::Zero(5, 6);
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    double x[6];
    for (int j = 0; j < 6; ++j) x[j] = (mask >> j) & 1 ? 1.0 : -1.0;
    for (int l = 0; l < 5; ++l) {
      double g = 0;
      for (int i = 0; i < 8; ++i) {
        double p = T.b(i);
        for (int j = 0; j < 6; ++j) p += T.W(i, j) * x[j];
        g += A.matrix()(l, i) * std::max(0.0, p);
      }
      for (int j = 0; j < 6; ++j) C(l, j) += g * x[j] / 64.0;
    }
  }
  CHECK((r.C - C).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r.s - r.s_direct).cwiseAbs().maxCoeff() < 1e-14);
  std::size_t total = 0;
  for (const auto& b : r.histogram) total += b.count_in + b.count_out;
  CHECK(total == 30);

  auto neg = correlation_report(T, A.negated(), task, EstimateMode::kExact);
  CHECK((neg.C + r.C).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(neg.dispersion_ratio == doctest::Approx(r.dispersion_ratio).epsilon(1e-12));

  Rng srng(8);
  auto sampled = correlation_report(T, A, task, EstimateMode::kSampled, 200000, &srng);
  CHECK((sampled.C - r.C).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("gradient decomposition holds at odd d") {
  ParityTask task = ParityTask::prefix(9, 2);
  Rng rng(2);
  auto t = train_teacher(task, 64, exact_cfg(), rng);
  Rng pr(5), ir(6);
  auto A = sample_projection(64, 16, pr);
  auto s0 = symmetric_init(16, 9, 2, ir);
  auto r = gradient_decomposition(s0, t.after_stage1, A, task, EstimateMode::kExact);
  CHECK(r.max_residual < 1e-12);
  CHECK(r.max_residual_nonneg_bias < 1e-12);
}

TEST_CASE("concentration curve") {
  Rng rng(7);
  auto flat = concentration_curve([](std::span<const double>) { return 0.25; }, 4, {16, 64}, 5, rng);
  CHECK(flat.exact_value == 0.25);
  for (const auto& p : flat.points) CHECK(p.mean_abs_error == 0.0);
  CHECK(flat.slope == 0.0);
  auto lin = concentration_curve([](std::span<const double> x) { return x[0] + 0.5 * x[1] * x[2]; }, 6,
                                 {64, 256, 1024, 4096, 16384}, 40, rng);
  CHECK(lin.exact_value == 0.0);
  CHECK(lin.slope == doctest::Approx(-0.5).epsilon(0.2));
  CHECK_THROWS_AS(concentration_curve([](std::span<const double>) { return 0.0; }, 3, {4}, 0, rng), ArgumentError);
}

TEST_CASE("histogram and scaling bounds") {
  ParityTask task(3, {1});
  RowMat<double> V(2, 3);
  V << 1.0, 0.0, -0.5, -1.0, 0.25, 0.0;
  auto h = split_histogram(V, task);
  CHECK(h.size() == 41);
  CHECK(h.front().left == -1.0);
  CHECK(h.back().right == 1.0);
  std::size_t in = 0, out = 0;
  for (const auto& b : h) {
    in += b.count_in;
    out += b.count_out;
  }
  CHECK(in == 2);
  CHECK(out == 4);
  std::ostringstream csv;
  write_histogram_csv(h, csv);
  CHECK(csv.str().rfind("bin_left,bin_right,count_in_support,count_out_support\n", 0) == 0);

  CorrelationReport r;
  r.d = 3;
  r.support = {1};
  r.s = RowMat<double>(4, 3);
  r.s << 0.9, 0.1, 0.0, -0.8, 0.0, 0.2, 0.1, 0.0, 0.0, 0.05, -0.3, 0.0;
  auto b = scaling_factor_bounds(r, 16);
  CHECK(b.in_threshold == std::vector<double>{0.8});
  CHECK(b.out_ceiling == 0.3);
}

TEST_CASE("support recovery at random init is near 1/C(d,k)") {
  ParityTask task(20, {3, 11});
  Rng rng(12);
  const int m = 20000;
  RowMat<double> W(m, 20);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < 20; ++j) W(i, j) = rng.uniform01() - 0.5;
  const double score = support_recovery_score(rows_model(W), task);
  const double p = 1.0 / binom(20, 2);
  CHECK(std::abs(score - p) < 4.0 * std::sqrt(p * (1 - p) / m));
  RowMat<double> perfect = RowMat<double>::Constant(3, 20, 0.01);
  perfect.col(2).setConstant(1.0);
  perfect.col(10).setConstant(-1.0);
  CHECK(support_recovery_score(rows_model(perfect), task) == 1.0);
}
