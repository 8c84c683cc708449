#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

#include "pdistill/parity_data.hpp"
#include "pdistill/rng.hpp"

namespace pdistill {

// f(x) = sum_i a_i relu(w_i . x + b_i); rows of W are the w_i.
template <class S>
struct BasicMlp {
  RowMat<S> W;
  Vec<S> b;
  Vec<S> a;

  int width() const { return static_cast<int>(W.rows()); }
  int input_dim() const { return static_cast<int>(W.cols()); }

  template <class T>
  BasicMlp<T> cast() const {
    return {W.template cast<T>(), b.template cast<T>(), a.template cast<T>()};
  }
};
using TwoLayerMlp = BasicMlp<double>;

// Validates shapes and finiteness.
TwoLayerMlp make_mlp(RowMat<double> W, Vec<double> b, Vec<double> a);

// How the second half of the hidden layer copies the first half at init.
// Both keep b_{i+m/2} = b_i and a_{i+m/2} = -a_i, so f is odd (f == 0 for kMirrored).
enum class MirrorConvention {
  kMirrored,  // w_{i+m/2} = w_i
  kNegated    // w_{i+m/2} = -w_i
};

// -1 + j/k for j = 1 .. 2k-1.
std::vector<double> bias_grid(int k);
TwoLayerMlp symmetric_init(int m, int d, int k, Rng& rng,
                           MirrorConvention convention = MirrorConvention::kMirrored);

// w_{i+m/2} = -w_i, b equal, a_{i+m/2} = -a_i; exact comparison.
bool has_symmetric_pairing(const TwoLayerMlp& model);
// w_{i+m/2} = w_i, b equal, a_{i+m/2} = -a_i; exact comparison.
bool has_mirrored_pairing(const TwoLayerMlp& model);

inline double relu(double t) { return t > 0.0 ? t : 0.0; }
inline double phi_b(double t, double b) { return relu(t + b) - relu(-t + b); }
inline double hinge(double f, double y) { return std::max(0.0, 1.0 - f * y); }
// ReLU derivative, taken as 1 at 0.
inline double relu_step(double t) { return t >= 0.0 ? 1.0 : 0.0; }

double forward(const TwoLayerMlp& model, std::span<const double> x);
Eigen::VectorXd hidden(const TwoLayerMlp& model, std::span<const double> x);
double hinge_loss(const TwoLayerMlp& model, const LabeledSample& s);

// ---- batched kernels; rows of X are inputs ----

template <class S>
RowMat<S> preactivations(const BasicMlp<S>& m, const RowMat<S>& X) {
  RowMat<S> P(X.rows(), m.W.rows());
  P.noalias() = X * m.W.transpose();
  P.rowwise() += m.b.transpose();
  return P;
}

template <class S>
RowMat<S> hidden_batch(const BasicMlp<S>& m, const RowMat<S>& X) {
  return preactivations(m, X).cwiseMax(S(0));
}

template <class S>
Vec<S> forward_batch(const BasicMlp<S>& m, const RowMat<S>& X) {
  return hidden_batch(m, X) * m.a;
}

template <class S>
struct Gradients {
  RowMat<S> W;
  Vec<S> a;
  Gradients& operator+=(const Gradients& o) {
    W += o.W;
    a += o.a;
    return *this;
  }
};

// Sums (not means) over the batch of the hinge gradient. With labels y and
// outputs f, dl/df = -y when y f < 1, else 0.
template <class S>
Gradients<S> hinge_gradient_sum(const BasicMlp<S>& m, const RowMat<S>& X, const Vec<S>& y, bool inner = true) {
  RowMat<S> P = preactivations(m, X);
  RowMat<S> H = P.cwiseMax(S(0));
  Vec<S> f = H * m.a;
  Vec<S> r = ((y.array() * f.array()) < S(1)).select(-y, Vec<S>::Zero(y.size()));
  Gradients<S> g;
  g.a.noalias() = H.transpose() * r;
  if (inner) {
    RowMat<S> D = (P.array() >= S(0)).select((r * m.a.transpose()).array(), S(0));
    g.W.noalias() = D.transpose() * X;
  }
  return g;
}

// Sums of the gradient of (f(x) - t(x))^2.
template <class S>
Gradients<S> logit_mse_gradient_sum(const BasicMlp<S>& m, const RowMat<S>& X, const Vec<S>& target,
                                    bool inner = true) {
  RowMat<S> P = preactivations(m, X);
  RowMat<S> H = P.cwiseMax(S(0));
  Vec<S> r = S(2) * (H * m.a - target);
  Gradients<S> g;
  g.a.noalias() = H.transpose() * r;
  if (inner) {
    RowMat<S> D = (P.array() >= S(0)).select((r * m.a.transpose()).array(), S(0));
    g.W.noalias() = D.transpose() * X;
  }
  return g;
}

// Sum over the batch of d/dW of -<relu(W x + b), G(x)>, G rows = projected targets.
template <class S>
RowMat<S> distill_gradient_sum(const BasicMlp<S>& student, const RowMat<S>& X, const RowMat<S>& G) {
  RowMat<S> P = preactivations(student, X);
  RowMat<S> D = (P.array() >= S(0)).select(-G.array(), S(0));
  RowMat<S> out(student.W.rows(), student.W.cols());
  out.noalias() = D.transpose() * X;
  return out;
}

// Sum over the batch of d/dW of ||relu(W x + b) - G(x)||^2.
template <class S>
RowMat<S> projected_mse_gradient_sum(const BasicMlp<S>& student, const RowMat<S>& X, const RowMat<S>& G) {
  RowMat<S> P = preactivations(student, X);
  RowMat<S> D = (P.array() >= S(0)).select(S(2) * (P.array() - G.array()), S(0));
  RowMat<S> out(student.W.rows(), student.W.cols());
  out.noalias() = D.transpose() * X;
  return out;
}

// Batch means at 64-bit precision.
RowMat<double> grad_inner_hinge(const TwoLayerMlp& model, const Batch& batch);
Vec<double> grad_outer_hinge(const TwoLayerMlp& model, const Batch& batch);
// targets: one row of projected teacher activations per batch row.
RowMat<double> grad_inner_distill(const TwoLayerMlp& student, const Batch& batch, const RowMat<double>& targets);

double mean_hinge_loss(const TwoLayerMlp& model, const Batch& batch);
// Fraction with sign(f) == y, sign(0) = +1.
double accuracy(const TwoLayerMlp& model, const Batch& batch);

// Text checkpoint: "m d", m rows of W, then b, then a; 17 significant digits.
void write_checkpoint(const TwoLayerMlp& model, std::ostream& out);
TwoLayerMlp read_checkpoint(std::istream& in);

}  // namespace pdistill
