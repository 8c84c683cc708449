#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "pdistill/boolean_fourier.hpp"
#include "pdistill/rng.hpp"

namespace pdistill {

template <class S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

class ParityTask {
 public:
  // Support is 1-based.
  ParityTask(int d, std::vector<int> support);
  // S = {1, ..., k}.
  static ParityTask prefix(int d, int k);

  int d() const { return d_; }
  int k() const { return static_cast<int>(support_.size()); }
  const std::vector<int>& support() const { return support_; }
  bool in_support(int j) const;
  Subset support_mask() const;

  double label(std::span<const double> x) const;

 private:
  int d_;
  std::vector<int> support_;
  std::vector<char> member_;
};

struct LabeledSample {
  BooleanPoint x;
  double y;
};

// Rows of x are points, y their labels.
template <class S>
struct BasicBatch {
  RowMat<S> x;
  Vec<S> y;
  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  LabeledSample sample(std::size_t i) const;
};
using Batch = BasicBatch<double>;

template <class S>
void fill_labels(const ParityTask& task, BasicBatch<S>& batch);

// B uniform points, d sign draws per row in row order.
template <class S>
BasicBatch<S> sample_batch_as(const ParityTask& task, std::size_t B, Rng& rng);
Batch sample_batch(const ParityTask& task, std::size_t B, Rng& rng);

// Cube points first, ..., first+count-1 in mask order.
template <class S>
RowMat<S> cube_chunk(int d, std::uint64_t first, std::size_t count);
template <class S>
BasicBatch<S> population_chunk(const ParityTask& task, std::uint64_t first, std::size_t count);

std::uint64_t cube_size(int d);

// All 2^d labeled points in ascending mask order; restartable.
class PopulationStream {
 public:
  explicit PopulationStream(const ParityTask& task);
  bool next(LabeledSample& out);
  void reset() { pos_ = 0; }
  std::uint64_t size() const { return n_; }

 private:
  ParityTask task_;
  std::uint64_t n_;
  std::uint64_t pos_ = 0;
};

PopulationStream enumerate_all(const ParityTask& task);

}  // namespace pdistill
