#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pdistill/boolean_fourier.hpp"
#include "pdistill/errors.hpp"
#include "pdistill/rng.hpp"

using namespace pdistill;

namespace {

// Brute-force oracle: all points as int vectors, independent of the library's bit tricks.
std::vector<std::vector<int>> cube(int d) {
  std::vector<std::vector<int>> pts;
  for (long m = 0; m < (1L << d); ++m) {
    std::vector<int> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = (m >> i) & 1 ? 1 : -1;
    pts.push_back(x);
  }
  return pts;
}

double brute_maj_coeff(int d, const std::vector<int>& S) {
  double acc = 0;
  for (const auto& x : cube(d)) {
    int sum = 0;
    for (int v : x) sum += v;
    int chi = 1;
    for (int j : S) chi *= x[static_cast<std::size_t>(j - 1)];
    acc += (sum >= 0 ? 1 : -1) * chi;
  }
  return acc / std::pow(2.0, d);
}

double lbinom(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// Closed form for odd n and odd |S| = k (O'Donnell, Analysis of Boolean Functions, 5.3).
double odd_majority_formula(int n, int k) {
  double sign = ((k - 1) / 2) % 2 ? -1.0 : 1.0;
  double logv = lbinom((n - 1) / 2, (k - 1) / 2) - lbinom(n - 1, k - 1) + std::log(2.0) - n * std::log(2.0) +
                lbinom(n - 1, (n - 1) / 2);
  return sign * std::exp(logv);
}

}  // namespace

TEST_CASE("parity examples") {
  BooleanPoint x({1, -1, 1});
  std::vector<int> s12{1, 2};
  CHECK(parity(x, s12) == -1.0);
  CHECK(parity(x, {}) == 1.0);
  BooleanPoint neg({-1, -1, -1, -1, -1});
  for (int k = 0; k <= 5; ++k) {
    std::vector<int> S;
    for (int j = 1; j <= k; ++j) S.push_back(j);
    CHECK(parity(neg, S) == (k % 2 ? -1.0 : 1.0));
  }
  std::vector<int> bad{4};
  CHECK_THROWS_AS(parity(x, bad), ArgumentError);
  CHECK_THROWS_AS(BooleanPoint({1, 0.5}), ArgumentError);
}

TEST_CASE("parity_bits agrees with coordinate parity") {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    int d = 1 + static_cast<int>(rng.index(20));
    std::uint64_t m = rng.next() & ((1ULL << d) - 1);
    Subset s = rng.next() & ((1ULL << d) - 1);
    auto members = subset_members(s);
    CHECK(parity_bits(m, s) == parity(BooleanPoint::from_mask(m, d), members));
  }
}

TEST_CASE("majority examples and tie rule") {
  CHECK(majority(std::vector<double>{1, 1, -1}) == 1.0);
  CHECK(majority(std::vector<double>{1, -1}) == 1.0);
  CHECK(majority(std::vector<double>{-1, -1, -1}) == -1.0);
  CHECK(majority(std::vector<double>{}) == 1.0);
}

TEST_CASE("exact_expectation") {
  CHECK(exact_expectation([](const BooleanPoint&) { return 1.0; }, 7) == 1.0);
  CHECK(exact_expectation([](const BooleanPoint& x) { return x[0]; }, 3) == 0.0);
  double v = exact_expectation([](const BooleanPoint& x) { return majority(x.values()) * x[0]; }, 3);
  CHECK(v == 0.5);
  CHECK_THROWS_AS(exact_expectation([](const BooleanPoint&) { return 1.0; }, 25), CapacityError);

  auto f = [](const BooleanPoint& x) { return std::sin(x[0] + 2 * x[3]) + x[1] * x[2]; };
  auto g = [](const BooleanPoint& x) { return majority(x.values()) + 0.25 * x[4]; };
  double a = 0.7, b = -1.3;
  double lhs = exact_expectation([&](const BooleanPoint& x) { return a * f(x) + b * g(x); }, 11);
  double rhs = a * exact_expectation(f, 11) + b * exact_expectation(g, 11);
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("majority_zeta pinned small values") {
  CHECK(majority_zeta(3, 1) == 0.5);
  CHECK(majority_zeta(5, 2) == 0.0);
  CHECK(majority_zeta(3, 3) == -0.5);
  CHECK(majority_zeta(3, 1) == brute_maj_coeff(3, {1}));
  CHECK(majority_zeta(9, 5) == brute_maj_coeff(9, {1, 2, 3, 4, 5}));
}

TEST_CASE("majority_zeta vanishes at even degree for odd d") {
  for (int d : {3, 5, 9, 11})
    for (int i = 0; i <= d; i += 2) {
      CHECK(majority_zeta(d, i) == 0.0);
      CHECK(majority_zeta(d, i, ZetaMode::kCombinatorial) == 0.0);
    }
}

TEST_CASE("even d: even-degree majority coefficients come from the sign(0) tie") {
  // Maj = odd part + 1{sum = 0}, so zeta_{2j} = zeta_{2j+1} at even d.
  for (int d : {4, 10, 12}) {
    CHECK(majority_zeta(d, 2) == doctest::Approx(brute_maj_coeff(d, {1, 2})).epsilon(1e-15));
    CHECK(majority_zeta(d, 2) != 0.0);
    CHECK(majority_zeta(d, 2) == majority_zeta(d, 3));
  }
  CHECK(majority_zeta(10, 0) == 252.0 / 1024.0);
}

TEST_CASE("majority_zeta does not depend on the chosen support") {
  Rng rng(11);
  const int d = 12;
  for (int i : {1, 3, 4, 7}) {
    double ref = majority_zeta(d, i);
    for (int rep = 0; rep < 10; ++rep) {
      Subset s = 0;
      while (std::popcount(s) < i) s |= Subset{1} << rng.index(d);
      CHECK(majority_coefficient(d, s) == ref);
    }
  }
}

TEST_CASE("combinatorial zeta matches enumeration and the odd-d closed form") {
  for (int d = 1; d <= 16; ++d)
    for (int i = 0; i <= d; ++i) CHECK(majority_zeta(d, i, ZetaMode::kCombinatorial) == majority_zeta(d, i));
  for (int n : {15, 51, 101})
    for (int k : {1, 3, 5, 7})
      CHECK(majority_zeta(n, k, ZetaMode::kCombinatorial) == doctest::Approx(odd_majority_formula(n, k)).epsilon(1e-11));
  // d = 100 values used by the desk-scale teacher.
  CHECK(majority_zeta(100, 5, ZetaMode::kCombinatorial) == doctest::Approx(2.4863866725e-5).epsilon(1e-9));
  CHECK_THROWS_AS(majority_zeta(30, 3), CapacityError);
  CHECK_THROWS_AS(majority_zeta(121, 3, ZetaMode::kCombinatorial), CapacityError);
}

TEST_CASE("asymptotic zeta mode") {
  CHECK(majority_zeta(100, 4, ZetaMode::kAsymptotic) == 0.0);
  double v = majority_zeta(40, 3, ZetaMode::kAsymptotic);
  CHECK(v == doctest::Approx(std::pow(3.0, -1.0 / 3) / 9880.0).epsilon(1e-12));
}

TEST_CASE("threshold_coefficient against brute force") {
  for (int d : {7, 8, 12})
    for (int t : {0, 1, 3, 4})
      for (double b : {-0.75, -0.5, 0.0, 0.25, 0.75}) {
        double acc = 0;
        for (const auto& z : cube(d)) {
          int sum = 0;
          for (int v : z) sum += v;
          int chi = 1;
          for (int j = 0; j < t; ++j) chi *= z[static_cast<std::size_t>(j)];
          acc += (sum + b >= 0 ? 1 : 0) * chi;
        }
        CHECK(threshold_coefficient(d, t, b) == acc / std::pow(2.0, d));
      }
}

TEST_CASE("fourier_table examples") {
  auto chi23 = [](const BooleanPoint& x) { return x[1] * x[2]; };
  auto t = fourier_table(chi23, 4, 4);
  for (const auto& e : t.entries()) CHECK(e.coefficient == (e.subset == 0b0110 ? 1.0 : 0.0));

  auto maj = fourier_table([](const BooleanPoint& x) { return majority(x.values()); }, 3, 3);
  CHECK(maj.coefficient(0b001) == 0.5);
  CHECK(maj.coefficient(0b010) == 0.5);
  CHECK(maj.coefficient(0b100) == 0.5);
  CHECK(maj.coefficient(0b111) == -0.5);
  CHECK(maj.coefficient(0b011) == 0.0);
  CHECK(maj.coefficient(0) == 0.0);

  auto capped = fourier_table([](const BooleanPoint& x) { return majority(x.values()); }, 3, 1);
  CHECK(capped.max_degree() == 1);
  CHECK(capped.entries().size() == 4);
  CHECK_THROWS_AS(capped.coefficient(0b111), ArgumentError);
  CHECK_THROWS_AS(fourier_table(chi23, 21, 2), CapacityError);
  CHECK_THROWS_AS(fourier_table(chi23, 4, 5), ArgumentError);
}

TEST_CASE("Parseval on a random Boolean-valued function") {
  Rng rng(5);
  const int d = 10;
  std::vector<double> vals(1 << d);
  for (double& v : vals) v = rng.sign();
  auto f = [&](const BooleanPoint& x) {
    std::size_t m = 0;
    for (int i = 0; i < d; ++i)
      if (x[i] > 0) m |= std::size_t{1} << i;
    return vals[m];
  };
  auto t = fourier_table(f, d, d);
  CHECK(std::abs(t.sum_of_squares() - 1.0) < 1e-10);
  double direct = exact_expectation([&](const BooleanPoint& x) { return f(x) * f(x); }, d);
  CHECK(std::abs(t.sum_of_squares() - direct) < 1e-10);
}

TEST_CASE("reconstruction from the full table") {
  Rng rng(8);
  for (int d : {1, 5, 9, 12}) {
    std::vector<double> vals(std::size_t{1} << d);
    for (double& v : vals) v = rng.uniform01() * 4 - 2;
    auto f = [&](const BooleanPoint& x) {
      std::size_t m = 0;
      for (int i = 0; i < d; ++i)
        if (x[i] > 0) m |= std::size_t{1} << i;
      return vals[m];
    };
    auto t = fourier_table(f, d, d);
    double worst = 0;
    for (std::size_t m = 0; m < vals.size(); ++m)
      worst = std::max(worst, std::abs(t.evaluate(BooleanPoint::from_mask(m, d)) - vals[m]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("fourier table CSV") {
  auto t = fourier_table([](const BooleanPoint& x) { return majority(x.values()); }, 3, 3);
  std::ostringstream ss;
  t.write_csv(ss);
  std::string s = ss.str();
  CHECK(s.rfind("subset_bitmask,degree,coefficient\n0,0,0\n1,1,0.5\n", 0) == 0);
  CHECK(s.find("7,3,-0.5\n") != std::string::npos);
  CHECK(s.find('\r') == std::string::npos);
}
