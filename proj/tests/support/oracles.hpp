#pragma once

// Test-side reference implementations. Plain loops, no shared kernels.

#include <cmath>
#include <functional>
#include <random>

#include "pdistill/mlp.hpp"

namespace oracle {

using pdistill::Batch;
using pdistill::RowMat;
using pdistill::TwoLayerMlp;
using pdistill::Vec;

inline double pre(const TwoLayerMlp& m, int i, const RowMat<double>& X, Eigen::Index r) {
  double s = m.b(i);
  for (int j = 0; j < m.input_dim(); ++j) s += m.W(i, j) * X(r, j);
  return s;
}

inline double forward(const TwoLayerMlp& m, const RowMat<double>& X, Eigen::Index r) {
  double f = 0;
  for (int i = 0; i < m.width(); ++i) f += m.a(i) * std::max(0.0, pre(m, i, X, r));
  return f;
}

inline double hinge_loss(const TwoLayerMlp& m, const Batch& b) {
  double s = 0;
  for (Eigen::Index r = 0; r < b.x.rows(); ++r) s += std::max(0.0, 1.0 - forward(m, b.x, r) * b.y(r));
  return s / static_cast<double>(b.x.rows());
}

// -mean_x <relu(W x + b), G(x)>
inline double distill_loss(const TwoLayerMlp& m, const Batch& b, const RowMat<double>& G) {
  double s = 0;
  for (Eigen::Index r = 0; r < b.x.rows(); ++r)
    for (int i = 0; i < m.width(); ++i) s -= std::max(0.0, pre(m, i, b.x, r)) * G(r, i);
  return s / static_cast<double>(b.x.rows());
}

inline TwoLayerMlp gaussian_model(int m, int d, std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  TwoLayerMlp model{RowMat<double>(m, d), Vec<double>(m), Vec<double>(m)};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) model.W(i, j) = n(gen) / std::sqrt(static_cast<double>(d));
    model.b(i) = n(gen) * 0.5;
    model.a(i) = n(gen);
  }
  return model;
}

inline Batch random_batch(int B, int d, std::mt19937_64& gen) {
  Batch b{RowMat<double>(B, d), Vec<double>(B)};
  for (int r = 0; r < B; ++r) {
    for (int j = 0; j < d; ++j) b.x(r, j) = (gen() & 1) ? 1.0 : -1.0;
    b.y(r) = (gen() & 1) ? 1.0 : -1.0;
  }
  return b;
}

// Kinks farther than margin from every evaluation point.
inline bool differentiable(const TwoLayerMlp& m, const Batch& b, double margin) {
  for (Eigen::Index r = 0; r < b.x.rows(); ++r) {
    for (int i = 0; i < m.width(); ++i)
      if (std::abs(pre(m, i, b.x, r)) < margin) return false;
    if (std::abs(1.0 - forward(m, b.x, r) * b.y(r)) < margin) return false;
  }
  return true;
}

inline RowMat<double> fd_inner(const TwoLayerMlp& m, const std::function<double(const TwoLayerMlp&)>& loss,
                               double h) {
  RowMat<double> g(m.width(), m.input_dim());
  for (int i = 0; i < m.width(); ++i)
    for (int j = 0; j < m.input_dim(); ++j) {
      TwoLayerMlp p = m, q = m;
      p.W(i, j) += h;
      q.W(i, j) -= h;
      g(i, j) = (loss(p) - loss(q)) / (2 * h);
    }
  return g;
}

inline Vec<double> fd_outer(const TwoLayerMlp& m, const std::function<double(const TwoLayerMlp&)>& loss, double h) {
  Vec<double> g(m.width());
  for (int i = 0; i < m.width(); ++i) {
    TwoLayerMlp p = m, q = m;
    p.a(i) += h;
    q.a(i) -= h;
    g(i) = (loss(p) - loss(q)) / (2 * h);
  }
  return g;
}

// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
template <class A, class B>
double rel_error(const A& a, const B& b) {
  double den = std::max(a.norm(), b.norm());
  return den == 0.0 ? 0.0 : (a - b).norm() / den;
}

}  // namespace oracle
