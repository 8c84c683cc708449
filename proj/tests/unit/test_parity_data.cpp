#include <cmath>
#include <vector>

#include "doctest.h"
#include "pdistill/errors.hpp"
#include "pdistill/parity_data.hpp"

using namespace pdistill;

TEST_CASE("ParityTask validation") {
  CHECK_THROWS_AS(ParityTask(5, {}), ArgumentError);
  CHECK_THROWS_AS(ParityTask(3, {1, 2, 3}), ArgumentError);
  CHECK_THROWS_AS(ParityTask(5, {1, 1}), ArgumentError);
  CHECK_THROWS_AS(ParityTask(5, {0, 2}), ArgumentError);
  CHECK_THROWS_AS(ParityTask(5, {6}), ArgumentError);
  ParityTask t(10, {7, 2, 5});
  CHECK(t.support() == std::vector<int>{2, 5, 7});
  CHECK(t.k() == 3);
  CHECK(t.in_support(5));
  CHECK_FALSE(t.in_support(1));
  CHECK(t.support_mask() == 0b1010010);
  CHECK(ParityTask::prefix(8, 3).support() == std::vector<int>{1, 2, 3});
}

TEST_CASE("labels equal the parity over random tasks") {
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    int d = 2 + static_cast<int>(rng.index(30));
    int k = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(d - 1)));
    std::vector<int> S;
    std::vector<char> used(static_cast<std::size_t>(d) + 1, 0);
    while (static_cast<int>(S.size()) < k) {
      int j = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(d)));
      if (!used[static_cast<std::size_t>(j)]) {
        used[static_cast<std::size_t>(j)] = 1;
        S.push_back(j);
      }
    }
    ParityTask task(d, S);
    Batch b = sample_batch(task, 10, rng);
    for (std::size_t i = 0; i < b.size(); ++i) {
      LabeledSample s = b.sample(i);
      CHECK(s.y == parity(s.x, S));
    }
  }
}

TEST_CASE("sample_batch determinism and statistics") {
  ParityTask task = ParityTask::prefix(10, 2);
  Rng a(5), b(5);
  Batch x = sample_batch(task, 1, a), y = sample_batch(task, 1, b);
  CHECK(x.x == y.x);
  CHECK(x.y(0) == x.x(0, 0) * x.x(0, 1));

  Rng r(6);
  const std::size_t B = 10000;
  Batch big = sample_batch(task, B, r);
  CHECK(std::abs(big.y.mean()) < 3.0 / std::sqrt(static_cast<double>(B)));

  Rng base(9);
  Rng s1 = base.split(1), s2 = base.split(2);
  CHECK(sample_batch(task, 4, s1).x != sample_batch(task, 4, s2).x);
  CHECK_THROWS_AS(sample_batch(task, 0, r), ArgumentError);
}

TEST_CASE("float batches carry the same draws") {
  ParityTask task = ParityTask::prefix(12, 3);
  Rng a(77), b(77);
  auto d = sample_batch_as<double>(task, 50, a);
  auto f = sample_batch_as<float>(task, 50, b);
  CHECK(d.x == f.x.cast<double>());
  CHECK(d.y == f.y.cast<double>());
}

TEST_CASE("enumerate_all order and size") {
  ParityTask t2(2, {1});
  auto s = enumerate_all(t2);
  LabeledSample ls;
  std::vector<std::vector<double>> expected{{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  for (const auto& e : expected) {
    REQUIRE(s.next(ls));
    CHECK(std::vector<double>(ls.x.values().begin(), ls.x.values().end()) == e);
    CHECK(ls.y == e[0]);
  }
  CHECK_FALSE(s.next(ls));
  s.reset();
  CHECK(s.next(ls));

  auto s3 = enumerate_all(ParityTask(4, {1, 2, 3}));
  int positives = 0, n = 0;
  while (s3.next(ls)) {
    ++n;
    positives += ls.y > 0;
  }
  CHECK(n == 16);
  CHECK(positives == 8);

  CHECK(enumerate_all(ParityTask::prefix(16, 4)).size() == 65536);
  CHECK_THROWS_AS(enumerate_all(ParityTask::prefix(25, 3)), CapacityError);
}

TEST_CASE("population chunks match the stream") {
  ParityTask task(9, {2, 4, 9});
  auto chunk = population_chunk<double>(task, 100, 50);
  auto s = enumerate_all(task);
  LabeledSample ls;
  for (int i = 0; i < 100; ++i) s.next(ls);
  for (Eigen::Index r = 0; r < 50; ++r) {
    s.next(ls);
    for (int c = 0; c < 9; ++c) CHECK(chunk.x(r, c) == ls.x[c]);
    CHECK(chunk.y(r) == ls.y);
  }
}
