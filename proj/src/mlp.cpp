#include "pdistill/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "pdistill/errors.hpp"
#include "pdistill/textio.hpp"

namespace pdistill {

namespace {

void check_input(const TwoLayerMlp& m, std::size_t n) {
  if (static_cast<int>(n) != m.input_dim())
    throw ArgumentError("input length " + std::to_string(n) + " != d=" + std::to_string(m.input_dim()));
}

void check_batch(const TwoLayerMlp& m, const Batch& batch) {
  if (batch.size() == 0) throw ArgumentError("empty batch");
  if (batch.x.cols() != m.input_dim()) throw ArgumentError("batch dimension mismatch");
  if (batch.y.size() != batch.x.rows()) throw ArgumentError("label count mismatch");
}

}  // namespace

TwoLayerMlp make_mlp(RowMat<double> W, Vec<double> b, Vec<double> a) {
  if (W.rows() != b.size() || W.rows() != a.size()) throw ArgumentError("inconsistent MLP shapes");
  if (!W.allFinite() || !b.allFinite() || !a.allFinite()) throw ArgumentError("non-finite MLP parameter");
  return {std::move(W), std::move(b), std::move(a)};
}

std::vector<double> bias_grid(int k) {
  if (k < 2) throw ArgumentError("bias grid needs k >= 2");
  std::vector<double> g;
  for (int j = 1; j <= 2 * k - 1; ++j) g.push_back(-1.0 + static_cast<double>(j) / k);
  return g;
}

TwoLayerMlp symmetric_init(int m, int d, int k, Rng& rng, MirrorConvention convention) {
  if (m < 2 || m % 2 != 0) throw ArgumentError("symmetric init needs an even width m >= 2");
  if (d < 1) throw ArgumentError("d must be positive");
  auto grid = bias_grid(k);
  TwoLayerMlp model{RowMat<double>(m, d), Vec<double>(m), Vec<double>(m)};
  const int h = m / 2;
  const double w_sign = convention == MirrorConvention::kMirrored ? 1.0 : -1.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < d; ++j) model.W(i, j) = rng.sign();
    model.b(i) = grid[rng.index(grid.size())];
    model.a(i) = rng.sign() / m;
    model.W.row(i + h) = w_sign * model.W.row(i);
    model.b(i + h) = model.b(i);
    model.a(i + h) = -model.a(i);
  }
  return model;
}

namespace {
bool paired(const TwoLayerMlp& m, double w_sign) {
  if (m.width() % 2 != 0) return false;
  const int h = m.width() / 2;
  for (int i = 0; i < h; ++i) {
    if (m.b(i + h) != m.b(i) || m.a(i + h) != -m.a(i)) return false;
    for (int j = 0; j < m.input_dim(); ++j)
      if (m.W(i + h, j) != w_sign * m.W(i, j)) return false;
  }
  return true;
}
}  // namespace

bool has_symmetric_pairing(const TwoLayerMlp& model) { return paired(model, -1.0); }
bool has_mirrored_pairing(const TwoLayerMlp& model) { return paired(model, 1.0); }

Eigen::VectorXd hidden(const TwoLayerMlp& model, std::span<const double> x) {
  check_input(model, x.size());
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return (model.W * xv + model.b).cwiseMax(0.0);
}

double forward(const TwoLayerMlp& model, std::span<const double> x) { return hidden(model, x).dot(model.a); }

double hinge_loss(const TwoLayerMlp& model, const LabeledSample& s) {
  return hinge(forward(model, s.x.values()), s.y);
}

RowMat<double> grad_inner_hinge(const TwoLayerMlp& model, const Batch& batch) {
  check_batch(model, batch);
  return hinge_gradient_sum(model, batch.x, batch.y).W / static_cast<double>(batch.size());
}

Vec<double> grad_outer_hinge(const TwoLayerMlp& model, const Batch& batch) {
  check_batch(model, batch);
  return hinge_gradient_sum(model, batch.x, batch.y, false).a / static_cast<double>(batch.size());
}

RowMat<double> grad_inner_distill(const TwoLayerMlp& student, const Batch& batch, const RowMat<double>& targets) {
  check_batch(student, batch);
  if (targets.rows() != batch.x.rows() || targets.cols() != student.width())
    throw ArgumentError("distillation targets must be batch x m_s");
  return distill_gradient_sum(student, batch.x, targets) / static_cast<double>(batch.size());
}

double mean_hinge_loss(const TwoLayerMlp& model, const Batch& batch) {
  check_batch(model, batch);
  Vec<double> f = forward_batch(model, batch.x);
  return (1.0 - (f.array() * batch.y.array())).max(0.0).mean();
}

double accuracy(const TwoLayerMlp& model, const Batch& batch) {
  check_batch(model, batch);
  Vec<double> f = forward_batch(model, batch.x);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i) hits += ((f(i) >= 0.0 ? 1.0 : -1.0) == batch.y(i));
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

void write_checkpoint(const TwoLayerMlp& model, std::ostream& out) {
  out << model.width() << ' ' << model.input_dim() << '\n';
  auto line = [&](auto&& v, Eigen::Index n) {
    for (Eigen::Index j = 0; j < n; ++j) out << (j ? " " : "") << format_g17(v(j));
    out << '\n';
  };
  for (int i = 0; i < model.width(); ++i) line(model.W.row(i), model.input_dim());
  line(model.b, model.width());
  line(model.a, model.width());
}

TwoLayerMlp read_checkpoint(std::istream& in) {
  int m = 0, d = 0;
  if (!(in >> m >> d) || m < 1 || d < 1) throw ArgumentError("bad checkpoint header");
  RowMat<double> W(m, d);
  Vec<double> b(m), a(m);
  auto read = [&](double& v) {
    if (!(in >> v)) throw ArgumentError("truncated checkpoint");
  };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) read(W(i, j));
  for (int i = 0; i < m; ++i) read(b(i));
  for (int i = 0; i < m; ++i) read(a(i));
  return make_mlp(std::move(W), std::move(b), std::move(a));
}

}  // namespace pdistill
