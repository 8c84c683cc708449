#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pdistill {

std::uint64_t splitmix64(std::uint64_t x);

// mt19937_64 with deterministic sub-stream derivation. Two generators built
// from different (seed, stream) pairs are treated as independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return engine_(); }
  // Uniform +-1, one engine bit per call.
  double sign();
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
  // Uniform on {0, ..., n-1}, unbiased (rejection).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
};

// Fixed stream ids used by the trainers and the harness.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kProjection = 2;
inline constexpr std::uint64_t kStage1 = 3;
inline constexpr std::uint64_t kStage2 = 4;
inline constexpr std::uint64_t kEval = 5;
inline constexpr std::uint64_t kTeacher = 6;
inline constexpr std::uint64_t kCurriculum = 7;
inline constexpr std::uint64_t kOneShot = 8;
inline constexpr std::uint64_t kCorpus = 9;
inline constexpr std::uint64_t kMasking = 10;
}  // namespace stream

}  // namespace pdistill
