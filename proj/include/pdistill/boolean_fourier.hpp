#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace pdistill {

inline constexpr int kMaxEnumerationDim = 24;
inline constexpr int kMaxFourierDim = 20;
inline constexpr int kMaxCombinatorialDim = 120;
inline constexpr std::size_t kChunk = 4096;

// Subset of [d] as a bitmask: bit i-1 holds coordinate i.
using Subset = std::uint64_t;

// Point of {-1,+1}^d. A cube mask maps bit i-1 set to coordinate i = +1.
class BooleanPoint {
 public:
  BooleanPoint() = default;
  explicit BooleanPoint(std::vector<double> coords);
  static BooleanPoint from_mask(std::uint64_t mask, int d);

  void assign_mask(std::uint64_t mask);
  int dim() const { return static_cast<int>(c_.size()); }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return c_; }
  BooleanPoint negated() const;

 private:
  std::vector<double> c_;
};

// Support given as 1-based coordinates. Empty support gives +1.
double parity(const BooleanPoint& x, std::span<const int> support);
// Same on cube masks.
double parity_bits(std::uint64_t point_mask, Subset s);

Subset subset_mask(std::span<const int> support, int d);
std::vector<int> subset_members(Subset s);

// sign(sum v) with sign(0) = +1.
double majority(std::span<const double> v);

// Mean of f over the cube, pairwise-summed in 4096-point chunks.
double exact_expectation(const std::function<double(const BooleanPoint&)>& f, int d);

enum class ZetaMode {
  kEnumerate,      // brute force, d <= 24
  kCombinatorial,  // exact binomial sums, d <= 120
  kAsymptotic      // i^{-1/3} / C(d,i), constant 1; approximate
};

// Degree-i Fourier coefficient of Maj on {-1,+1}^d.
double majority_zeta(int d, int i, ZetaMode mode = ZetaMode::kEnumerate);
// E[Maj(x) chi_S(x)] by enumeration for an explicit S.
double majority_coefficient(int d, Subset s);
// E_z[1{sum(z) + bias >= 0} chi_T(z)] for any |T| = t.
double threshold_coefficient(int d, int t, double bias);

struct FourierEntry {
  Subset subset;
  int degree;
  double coefficient;
};

class FourierCoefficientTable {
 public:
  FourierCoefficientTable(int d, int max_degree, std::vector<FourierEntry> entries);

  int dim() const { return d_; }
  int max_degree() const { return max_degree_; }
  const std::vector<FourierEntry>& entries() const { return entries_; }

  double coefficient(Subset s) const;
  double evaluate(const BooleanPoint& x) const;
  double sum_of_squares() const;
  // subset_bitmask,degree,coefficient
  void write_csv(std::ostream& out) const;

 private:
  int d_;
  int max_degree_;
  std::vector<FourierEntry> entries_;
};

FourierCoefficientTable fourier_table(const std::function<double(const BooleanPoint&)>& f, int d,
                                      int max_degree);

}  // namespace pdistill
