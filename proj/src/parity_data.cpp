#include "pdistill/parity_data.hpp"

#include <algorithm>
#include <string>

#include "pdistill/errors.hpp"

namespace pdistill {

ParityTask::ParityTask(int d, std::vector<int> support) : d_(d), support_(std::move(support)) {
  if (d < 2) throw ArgumentError("parity task needs d >= 2");
  std::sort(support_.begin(), support_.end());
  if (support_.empty()) throw ArgumentError("support must be nonempty");
  if (static_cast<int>(support_.size()) >= d) throw ArgumentError("need k < d");
  member_.assign(static_cast<std::size_t>(d) + 1, 0);
  for (int j : support_) {
    if (j < 1 || j > d) throw ArgumentError("support index " + std::to_string(j) + " out of range");
    if (member_[static_cast<std::size_t>(j)]) throw ArgumentError("duplicate support index " + std::to_string(j));
    member_[static_cast<std::size_t>(j)] = 1;
  }
}

ParityTask ParityTask::prefix(int d, int k) {
  std::vector<int> s(static_cast<std::size_t>(std::max(k, 0)));
  for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)] = i + 1;
  return ParityTask(d, std::move(s));
}

bool ParityTask::in_support(int j) const {
  return j >= 1 && j <= d_ && member_[static_cast<std::size_t>(j)];
}

Subset ParityTask::support_mask() const { return subset_mask(support_, d_); }

double ParityTask::label(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw ArgumentError("point dimension mismatch");
  double p = 1.0;
  for (int j : support_) p *= x[static_cast<std::size_t>(j - 1)];
  return p;
}

template <class S>
LabeledSample BasicBatch<S>::sample(std::size_t i) const {
  std::vector<double> c(static_cast<std::size_t>(x.cols()));
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = static_cast<double>(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return {BooleanPoint(std::move(c)), static_cast<double>(y(static_cast<Eigen::Index>(i)))};
}

template <class S>
void fill_labels(const ParityTask& task, BasicBatch<S>& batch) {
  batch.y.setOnes(batch.x.rows());
  for (int j : task.support()) batch.y.array() *= batch.x.col(j - 1).array();
}

template <class S>
BasicBatch<S> sample_batch_as(const ParityTask& task, std::size_t B, Rng& rng) {
  if (B < 1) throw ArgumentError("batch size must be >= 1");
  BasicBatch<S> batch;
  batch.x.resize(static_cast<Eigen::Index>(B), task.d());
  for (Eigen::Index r = 0; r < batch.x.rows(); ++r)
    for (Eigen::Index c = 0; c < batch.x.cols(); ++c) batch.x(r, c) = static_cast<S>(rng.sign());
  fill_labels(task, batch);
  return batch;
}

Batch sample_batch(const ParityTask& task, std::size_t B, Rng& rng) { return sample_batch_as<double>(task, B, rng); }

std::uint64_t cube_size(int d) {
  if (d < 1 || d > kMaxEnumerationDim)
    throw CapacityError("enumeration covers 1 <= d <= " + std::to_string(kMaxEnumerationDim));
  return std::uint64_t{1} << d;
}

template <class S>
RowMat<S> cube_chunk(int d, std::uint64_t first, std::size_t count) {
  RowMat<S> x(static_cast<Eigen::Index>(count), d);
  for (std::size_t r = 0; r < count; ++r) {
    std::uint64_t m = first + r;
    for (int c = 0; c < d; ++c) x(static_cast<Eigen::Index>(r), c) = ((m >> c) & 1) ? S(1) : S(-1);
  }
  return x;
}

template <class S>
BasicBatch<S> population_chunk(const ParityTask& task, std::uint64_t first, std::size_t count) {
  BasicBatch<S> batch{cube_chunk<S>(task.d(), first, count), {}};
  fill_labels(task, batch);
  return batch;
}

PopulationStream::PopulationStream(const ParityTask& task) : task_(task), n_(cube_size(task.d())) {}

bool PopulationStream::next(LabeledSample& out) {
  if (pos_ >= n_) return false;
  out.x = BooleanPoint::from_mask(pos_++, task_.d());
  out.y = task_.label(out.x.values());
  return true;
}

PopulationStream enumerate_all(const ParityTask& task) { return PopulationStream(task); }

template struct BasicBatch<double>;
template struct BasicBatch<float>;
template void fill_labels(const ParityTask&, BasicBatch<double>&);
template void fill_labels(const ParityTask&, BasicBatch<float>&);
template BasicBatch<double> sample_batch_as<double>(const ParityTask&, std::size_t, Rng&);
template BasicBatch<float> sample_batch_as<float>(const ParityTask&, std::size_t, Rng&);
template RowMat<double> cube_chunk<double>(int, std::uint64_t, std::size_t);
template RowMat<float> cube_chunk<float>(int, std::uint64_t, std::size_t);
template BasicBatch<double> population_chunk<double>(const ParityTask&, std::uint64_t, std::size_t);
template BasicBatch<float> population_chunk<float>(const ParityTask&, std::uint64_t, std::size_t);

}  // namespace pdistill
