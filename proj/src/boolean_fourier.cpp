#include "pdistill/boolean_fourier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <string>

#include "pdistill/errors.hpp"
#include "pdistill/parallel.hpp"
#include "pdistill/textio.hpp"

namespace pdistill {

namespace {

using Int = __int128;

void check_enumerable(int d, int cap) {
  if (d < 1) throw ArgumentError("dimension must be positive");
  if (d > cap) throw CapacityError("d=" + std::to_string(d) + " exceeds enumeration cap " + std::to_string(cap));
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

std::vector<Int> binomial_row(int n) {
  std::vector<Int> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j - 1)];
  return row;
}

double ratio_pow2(Int num, int d) {
  bool neg = num < 0;
  Int mag = neg ? -num : num;
  long double v = std::ldexp(static_cast<long double>(mag), -d);
  return static_cast<double>(neg ? -v : v);
}

}  // namespace

BooleanPoint::BooleanPoint(std::vector<double> coords) : c_(std::move(coords)) {
  for (double v : c_)
    if (v != 1.0 && v != -1.0) throw ArgumentError("BooleanPoint coordinates must be +-1");
}

BooleanPoint BooleanPoint::from_mask(std::uint64_t mask, int d) {
  if (d < 1 || d > 64) throw ArgumentError("from_mask needs 1 <= d <= 64");
  BooleanPoint p;
  p.c_.resize(static_cast<std::size_t>(d));
  p.assign_mask(mask);
  return p;
}

void BooleanPoint::assign_mask(std::uint64_t mask) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] = ((mask >> i) & 1) ? 1.0 : -1.0;
}

BooleanPoint BooleanPoint::negated() const {
  BooleanPoint p = *this;
  for (double& v : p.c_) v = -v;
  return p;
}

double parity(const BooleanPoint& x, std::span<const int> support) {
  double p = 1.0;
  for (int j : support) {
    if (j < 1 || j > x.dim()) throw ArgumentError("support index " + std::to_string(j) + " out of range");
    p *= x[j - 1];
  }
  return p;
}

double parity_bits(std::uint64_t point_mask, Subset s) {
  return (std::popcount(s & ~point_mask) & 1) ? -1.0 : 1.0;
}

Subset subset_mask(std::span<const int> support, int d) {
  if (d > 64) throw CapacityError("subset masks cover d <= 64");
  Subset s = 0;
  for (int j : support) {
    if (j < 1 || j > d) throw ArgumentError("support index " + std::to_string(j) + " out of range");
    s |= Subset{1} << (j - 1);
  }
  return s;
}

std::vector<int> subset_members(Subset s) {
  std::vector<int> out;
  for (int i = 0; i < 64; ++i)
    if ((s >> i) & 1) out.push_back(i + 1);
  return out;
}

double majority(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s >= 0.0 ? 1.0 : -1.0;
}

double exact_expectation(const std::function<double(const BooleanPoint&)>& f, int d) {
  check_enumerable(d, kMaxEnumerationDim);
  std::uint64_t n = std::uint64_t{1} << d;
  std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  double total = map_reduce_chunks<double>(chunks, [&](std::size_t c) {
    std::uint64_t first = c * kChunk;
    std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n - first));
    std::vector<double> vals(count);
    BooleanPoint x = BooleanPoint::from_mask(0, d);
    for (std::size_t i = 0; i < count; ++i) {
      x.assign_mask(first + i);
      vals[i] = f(x);
    }
    return pairwise_sum(vals.data(), count);
  });
  return std::ldexp(total, -d);
}

double majority_coefficient(int d, Subset s) {
  check_enumerable(d, kMaxEnumerationDim);
  if (d < 64 && (s >> d) != 0) throw ArgumentError("subset outside [d]");
  std::uint64_t n = std::uint64_t{1} << d;
  std::int64_t acc = 0;
  for (std::uint64_t x = 0; x < n; ++x) {
    int maj = 2 * std::popcount(x) >= d ? 1 : -1;
    int chi = (std::popcount(s & ~x) & 1) ? -1 : 1;
    acc += maj * chi;
  }
  return std::ldexp(static_cast<double>(acc), -d);
}

double threshold_coefficient(int d, int t, double bias) {
  if (d < 1 || t < 0 || t > d) throw ArgumentError("threshold_coefficient needs 0 <= t <= d");
  if (d > kMaxCombinatorialDim) throw CapacityError("combinatorial mode covers d <= 120");
  auto bt = binomial_row(t);
  auto br = binomial_row(d - t);
  Int acc = 0;
  // a = number of -1 inside T, c = number of -1 outside; sum = d - 2(a+c).
  for (int a = 0; a <= t; ++a) {
    Int inner = 0;
    for (int c = 0; c <= d - t; ++c)
      if (static_cast<double>(d - 2 * a - 2 * c) + bias >= 0.0) inner += br[static_cast<std::size_t>(c)];
    Int term = bt[static_cast<std::size_t>(a)] * inner;
    acc += (a & 1) ? -term : term;
  }
  return ratio_pow2(acc, d);
}

double majority_zeta(int d, int i, ZetaMode mode) {
  if (d < 1 || i < 0 || i > d) throw ArgumentError("majority_zeta needs 0 <= i <= d");
  switch (mode) {
    case ZetaMode::kEnumerate:
      check_enumerable(d, kMaxEnumerationDim);
      return majority_coefficient(d, (Subset{1} << i) - 1);
    case ZetaMode::kCombinatorial:
      // Maj = 2 * 1{sum >= 0} - 1.
      return 2.0 * threshold_coefficient(d, i, 0.0) - (i == 0 ? 1.0 : 0.0);
    case ZetaMode::kAsymptotic: {
      if (i % 2 == 0) return 0.0;
      double log_binom = std::lgamma(d + 1.0) - std::lgamma(i + 1.0) - std::lgamma(d - i + 1.0);
      return std::pow(static_cast<double>(i), -1.0 / 3.0) * std::exp(-log_binom);
    }
  }
  return 0.0;
}

FourierCoefficientTable::FourierCoefficientTable(int d, int max_degree, std::vector<FourierEntry> entries)
    : d_(d), max_degree_(max_degree), entries_(std::move(entries)) {}

double FourierCoefficientTable::coefficient(Subset s) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                             [](const FourierEntry& e, Subset v) { return e.subset < v; });
  if (it != entries_.end() && it->subset == s) return it->coefficient;
  if (std::popcount(s) > max_degree_) throw ArgumentError("subset above the table's degree cap");
  return 0.0;
}

double FourierCoefficientTable::evaluate(const BooleanPoint& x) const {
  if (x.dim() != d_) throw ArgumentError("point dimension mismatch");
  std::uint64_t mask = 0;
  for (int i = 0; i < d_; ++i)
    if (x[i] > 0) mask |= std::uint64_t{1} << i;
  double s = 0.0;
  for (const auto& e : entries_) s += e.coefficient * parity_bits(mask, e.subset);
  return s;
}

double FourierCoefficientTable::sum_of_squares() const {
  std::vector<double> sq;
  sq.reserve(entries_.size());
  for (const auto& e : entries_) sq.push_back(e.coefficient * e.coefficient);
  return pairwise_sum(sq.data(), sq.size());
}

void FourierCoefficientTable::write_csv(std::ostream& out) const {
  out << "subset_bitmask,degree,coefficient\n";
  for (const auto& e : entries_) out << e.subset << ',' << e.degree << ',' << format_g17(e.coefficient) << '\n';
}

FourierCoefficientTable fourier_table(const std::function<double(const BooleanPoint&)>& f, int d,
                                      int max_degree) {
  check_enumerable(d, kMaxFourierDim);
  if (max_degree < 0 || max_degree > d) throw ArgumentError("max_degree must lie in [0, d]");
  std::size_t n = std::size_t{1} << d;
  std::vector<double> v(n);
  BooleanPoint x = BooleanPoint::from_mask(0, d);
  for (std::size_t m = 0; m < n; ++m) {
    x.assign_mask(m);
    v[m] = f(x);
  }
  // Walsh-Hadamard butterflies: v[S] = sum_x f(x) (-1)^{|S & x|}.
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t i = 0; i < n; i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        double u = v[j], w = v[j + h];
        v[j] = u + w;
        v[j + h] = u - w;
      }
  // chi_S uses x_i = +1 on set bits, so flip by (-1)^{|S|}.
  std::vector<FourierEntry> entries;
  for (std::size_t s = 0; s < n; ++s) {
    int deg = std::popcount(s);
    if (deg > max_degree) continue;
    double c = std::ldexp(v[s], -d);
    entries.push_back({s, deg, (deg & 1) ? -c : c});
  }
  return FourierCoefficientTable(d, max_degree, std::move(entries));
}

}  // namespace pdistill
