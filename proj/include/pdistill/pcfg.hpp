#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pdistill/rng.hpp"

namespace pdistill {

using Symbol = int;

struct Rule {
  Symbol head;
  std::vector<Symbol> body;
  double probability;
};

class Grammar {
 public:
  // Validates: disjoint symbol sets, bodies over known symbols, per-head
  // probabilities summing to 1 within 1e-12, start symbol a nonterminal.
  Grammar(std::string name, std::vector<Symbol> nonterminals, std::vector<Symbol> terminals, Symbol start,
          std::vector<Rule> rules);

  const std::string& name() const { return name_; }
  const std::vector<Symbol>& nonterminals() const { return nonterminals_; }
  const std::vector<Symbol>& terminals() const { return terminals_; }
  Symbol start() const { return start_; }
  const std::vector<Rule>& rules() const { return rules_; }
  bool is_terminal(Symbol s) const;
  // Indices into rules() for a head, in declaration order.
  const std::vector<std::size_t>& rules_for(Symbol head) const;

 private:
  std::string name_;
  std::vector<Symbol> nonterminals_;
  std::vector<Symbol> terminals_;
  Symbol start_;
  std::vector<Rule> rules_;
  std::map<Symbol, std::vector<std::size_t>> by_head_;
};

// The 32-rule grammar over terminals {1,2,3} with start symbol 22; each
// nonterminal has two productions, chosen with probability 1/2.
Grammar cfg3b();

struct DerivationNode {
  Symbol symbol;
  int rule = -1;  // index into Grammar::rules(), -1 for terminals
  int depth = 0;  // root has depth 0
  std::vector<int> children;
};

struct Derivation {
  std::vector<Symbol> tokens;
  double log_prob = 0.0;
  int depth = 0;  // deepest terminal's depth (rule applications on that path)
  std::vector<DerivationNode> tree;  // tree[0] is the root

  // Terminal yield of the recorded tree, left to right.
  std::vector<Symbol> yield() const;
  // log-probability recomputed from the recorded rules.
  double tree_log_prob(const Grammar& g) const;
};

// Leftmost expansion from the start symbol.
Derivation sample_sentence(const Grammar& g, Rng& rng, int max_depth_guard = 64);

struct LengthPercentiles {
  double p25, p50, p75, p95;
};

// Linear-interpolation percentiles (numpy default) of sentence lengths.
LengthPercentiles length_percentiles(const Grammar& g, std::size_t n_samples, Rng& rng);
LengthPercentiles length_percentiles(const std::vector<double>& lengths);
double percentile(std::vector<double> values, double q);

// n sentences; sentence i is drawn in shard i / 1024 from rng.split(shard), so
// the corpus does not depend on the worker count.
std::vector<std::vector<Symbol>> sample_corpus(const Grammar& g, std::size_t n, const Rng& rng);

enum class Corruption { kMaskToken, kRandomToken, kUnchanged };

inline constexpr Symbol kMaskSymbol = 0;

struct MaskedSample {
  std::vector<Symbol> original;
  std::vector<Symbol> corrupted;  // kMaskSymbol marks [mask]
  std::vector<std::size_t> positions;
  std::vector<Corruption> kinds;
};

// Each position selected with probability mask_fraction; selected positions
// become [mask] (80%), a uniform terminal (10%) or stay (10%).
MaskedSample mask_sequence(const std::vector<Symbol>& seq, const std::vector<Symbol>& vocabulary, Rng& rng,
                           double mask_fraction = 0.30);

// One sentence per line, whitespace-separated integers.
void write_corpus(const std::vector<std::vector<Symbol>>& sentences, std::ostream& out);
// original TAB corrupted TAB position:kind,... with kind in {mask,random,keep}.
void write_masked_dataset(const std::vector<MaskedSample>& samples, std::ostream& out);

}  // namespace pdistill
