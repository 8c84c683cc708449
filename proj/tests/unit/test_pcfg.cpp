#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pdistill/errors.hpp"
#include "pdistill/pcfg.hpp"

using namespace pdistill;

namespace {

std::vector<std::vector<Symbol>> bodies(const Grammar& g, Symbol head) {
  std::vector<std::vector<Symbol>> out;
  for (std::size_t r : g.rules_for(head)) out.push_back(g.rules()[r].body);
  return out;
}

}  // namespace

TEST_CASE("cfg3b structure") {
  Grammar g = cfg3b();
  CHECK(g.rules().size() == 32);
  CHECK(g.start() == 22);
  CHECK(g.terminals() == std::vector<Symbol>{1, 2, 3});
  CHECK(bodies(g, 22) == std::vector<std::vector<Symbol>>{{21, 20}, {20, 19}});
  CHECK(bodies(g, 9) == std::vector<std::vector<Symbol>>{{3, 2, 1}, {2, 1}});
  for (Symbol n : g.nonterminals()) {
    double sum = 0.0;
    for (std::size_t r : g.rules_for(n)) sum += g.rules()[r].probability;
    CHECK(sum == 1.0);
  }
}

TEST_CASE("grammar validation") {
  CHECK_THROWS_AS(Grammar("x", {10}, {1}, 10, {{10, {1}, 0.6}}), ArgumentError);
  CHECK_THROWS_AS(Grammar("x", {10}, {10}, 10, {{10, {10}, 1.0}}), ArgumentError);
  CHECK_THROWS_AS(Grammar("x", {10}, {1}, 10, {{10, {4}, 1.0}}), ArgumentError);
  CHECK_THROWS_AS(Grammar("x", {10, 11}, {1}, 10, {{10, {1}, 1.0}}), ArgumentError);
  CHECK_THROWS_AS(Grammar("x", {10}, {1}, 1, {{10, {1}, 1.0}}), ArgumentError);
  CHECK_NOTHROW(Grammar("x", {10}, {1, 2}, 10, {{10, {1}, 0.3}, {10, {2}, 0.7 + 1e-13}}));
}

TEST_CASE("cfg3b samples: alphabet, depth, re-derivation") {
  Grammar g = cfg3b();
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    Derivation d = sample_sentence(g, rng);
    for (Symbol s : d.tokens) REQUIRE((s >= 1 && s <= 3));
    // Six rule applications on every root-to-leaf path: 22, 19-21, 16-18,
    // 13-15, 10-12, 7-9, then terminals.
    REQUIRE(d.depth == 6);
    for (const auto& n : d.tree)
      if (n.children.empty()) REQUIRE(n.depth == 6);
    if (i < 200) {
      CHECK(d.yield() == d.tokens);
      CHECK(d.tree_log_prob(g) == doctest::Approx(d.log_prob).epsilon(1e-12));
      std::size_t rules = 0;
      for (const auto& n : d.tree) rules += n.rule >= 0;
      CHECK(d.log_prob == doctest::Approx(static_cast<double>(rules) * std::log(0.5)).epsilon(1e-12));
    }
  }
}

TEST_CASE("single-rule and recursive grammars") {
  Grammar one("one", {5}, {1}, 5, {{5, {1}, 1.0}});
  Rng rng(1);
  Derivation d = sample_sentence(one, rng);
  CHECK(d.tokens == std::vector<Symbol>{1});
  CHECK(d.log_prob == 0.0);
  Grammar loop("loop", {5}, {1}, 5, {{5, {5, 1}, 1.0}});
  CHECK_THROWS_AS(sample_sentence(loop, rng, 50), GenerationError);
}

TEST_CASE("length percentiles") {
  Grammar fixed("fixed", {5, 6}, {1}, 5, {{5, {6, 6, 1}, 1.0}, {6, {1, 1}, 1.0}});
  Rng rng(2);
  auto p = length_percentiles(fixed, 100, rng);
  CHECK(p.p25 == 5.0);
  CHECK(p.p95 == 5.0);
  CHECK_THROWS_AS(length_percentiles(fixed, 99, rng), ArgumentError);
  Rng a(9), b(9);
  auto pa = length_percentiles(cfg3b(), 500, a);
  auto pb = length_percentiles(cfg3b(), 500, b);
  CHECK(pa.p50 == pb.p50);
  CHECK(pa.p95 == pb.p95);
  CHECK(percentile({1, 2, 3, 4}, 25) == doctest::Approx(1.75));
  CHECK(percentile({10, 0}, 50) == doctest::Approx(5.0));
}

TEST_CASE("mask_sequence contract") {
  Rng rng(3);
  std::vector<Symbol> vocab{1, 2, 3};
  CHECK_THROWS_AS(mask_sequence({}, vocab, rng), ArgumentError);
  CHECK_THROWS_AS(mask_sequence({1}, vocab, rng, 0.0), ArgumentError);
  CHECK_THROWS_AS(mask_sequence({1}, vocab, rng, 1.0), ArgumentError);
  std::vector<Symbol> seq(200);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = 1 + static_cast<Symbol>(i % 3);
  for (int rep = 0; rep < 200; ++rep) {
    MaskedSample m = mask_sequence(seq, vocab, rng);
    std::set<std::size_t> M(m.positions.begin(), m.positions.end());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (!M.count(i)) REQUIRE(m.corrupted[i] == seq[i]);
    }
    for (std::size_t t = 0; t < m.positions.size(); ++t) {
      std::size_t i = m.positions[t];
      if (m.kinds[t] == Corruption::kUnchanged) REQUIRE(m.corrupted[i] == seq[i]);
      if (m.kinds[t] == Corruption::kMaskToken) REQUIRE(m.corrupted[i] == kMaskSymbol);
      if (m.kinds[t] == Corruption::kRandomToken) REQUIRE((m.corrupted[i] >= 1 && m.corrupted[i] <= 3));
    }
  }
  // P(any selection in 10 positions at p=1e-9) is about 1e-8.
  for (int rep = 0; rep < 100; ++rep) CHECK(mask_sequence(std::vector<Symbol>(10, 1), vocab, rng, 1e-9).positions.empty());
}

TEST_CASE("masking selections are uncorrelated across positions") {
  Rng rng(4);
  std::vector<Symbol> seq(2, 1);
  const int n = 1000000;
  double s0 = 0, s1 = 0, s01 = 0;
  for (int rep = 0; rep < n; ++rep) {
    MaskedSample m = mask_sequence(seq, {1, 2, 3}, rng);
    double x0 = 0, x1 = 0;
    for (std::size_t p : m.positions) (p == 0 ? x0 : x1) = 1;
    s0 += x0;
    s1 += x1;
    s01 += x0 * x1;
  }
  double m0 = s0 / n, m1 = s1 / n;
  double rho = (s01 / n - m0 * m1) / std::sqrt(m0 * (1 - m0) * m1 * (1 - m1));
  CHECK(std::abs(rho) < 0.01);
}

TEST_CASE("corpus and masked dataset formats") {
  std::ostringstream c;
  write_corpus({{1, 2, 3}, {3}}, c);
  CHECK(c.str() == "1 2 3\n3\n");
  MaskedSample m{{1, 2, 3}, {kMaskSymbol, 1, 3}, {0, 1, 2}, {Corruption::kMaskToken, Corruption::kRandomToken, Corruption::kUnchanged}};
  std::ostringstream o;
  write_masked_dataset({m}, o);
  CHECK(o.str() == "1 2 3\t[mask] 1 3\t0:mask,1:random,2:keep\n");
}
