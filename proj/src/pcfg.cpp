#include "pdistill/pcfg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "pdistill/errors.hpp"
#include "pdistill/parallel.hpp"

namespace pdistill {

Grammar::Grammar(std::string name, std::vector<Symbol> nonterminals, std::vector<Symbol> terminals, Symbol start,
                 std::vector<Rule> rules)
    : name_(std::move(name)),
      nonterminals_(std::move(nonterminals)),
      terminals_(std::move(terminals)),
      start_(start),
      rules_(std::move(rules)) {
  std::set<Symbol> N(nonterminals_.begin(), nonterminals_.end()), T(terminals_.begin(), terminals_.end());
  if (N.size() != nonterminals_.size() || T.size() != terminals_.size()) throw ArgumentError("duplicate symbols");
  for (Symbol s : T)
    if (N.count(s)) throw ArgumentError("symbol " + std::to_string(s) + " is both terminal and nonterminal");
  if (T.count(kMaskSymbol)) throw ArgumentError("symbol 0 is reserved for [mask]");
  if (!N.count(start_)) throw ArgumentError("start symbol must be a nonterminal");
  for (std::size_t r = 0; r < rules_.size(); ++r) {
    const Rule& rule = rules_[r];
    if (!N.count(rule.head)) throw ArgumentError("rule head " + std::to_string(rule.head) + " is not a nonterminal");
    if (rule.body.empty()) throw ArgumentError("empty rule body");
    for (Symbol s : rule.body)
      if (!N.count(s) && !T.count(s)) throw ArgumentError("unknown symbol " + std::to_string(s));
    if (!(rule.probability >= 0.0 && rule.probability <= 1.0)) throw ArgumentError("rule probability outside [0,1]");
    by_head_[rule.head].push_back(r);
  }
  for (Symbol n : N) {
    auto it = by_head_.find(n);
    if (it == by_head_.end()) throw ArgumentError("nonterminal " + std::to_string(n) + " has no rules");
    double sum = 0.0;
    for (std::size_t r : it->second) sum += rules_[r].probability;
    if (std::abs(sum - 1.0) > 1e-12)
      throw ArgumentError("probabilities for head " + std::to_string(n) + " do not sum to 1");
  }
}

bool Grammar::is_terminal(Symbol s) const {
  return std::find(terminals_.begin(), terminals_.end(), s) != terminals_.end();
}

const std::vector<std::size_t>& Grammar::rules_for(Symbol head) const {
  auto it = by_head_.find(head);
  if (it == by_head_.end()) throw ArgumentError("no rules for symbol " + std::to_string(head));
  return it->second;
}

Grammar cfg3b() {
  const std::vector<std::pair<Symbol, std::vector<std::vector<Symbol>>>> table{
      {22, {{21, 20}, {20, 19}}},
      {19, {{16, 17, 18}, {17, 18, 16}}},
      {20, {{17, 16, 18}, {16, 17}}},
      {21, {{18, 16}, {16, 18, 17}}},
      {16, {{15, 13}, {13, 15, 14}}},
      {17, {{14, 13, 15}, {15, 13, 14}}},
      {18, {{15, 14, 13}, {14, 13}}},
      {13, {{11, 12}, {12, 11}}},
      {14, {{11, 10, 12}, {10, 11, 12}}},
      {15, {{12, 11, 10}, {11, 12, 10}}},
      {10, {{7, 9, 8}, {9, 8, 7}}},
      {11, {{8, 7, 9}, {7, 8, 9}}},
      {12, {{8, 9, 7}, {9, 7, 8}}},
      {7, {{3, 1}, {1, 2, 3}}},
      {8, {{3, 2}, {3, 1, 2}}},
      {9, {{3, 2, 1}, {2, 1}}},
  };
  std::vector<Rule> rules;
  std::vector<Symbol> N;
  for (const auto& [head, bodies] : table) {
    N.push_back(head);
    for (const auto& b : bodies) rules.push_back({head, b, 0.5});
  }
  return Grammar("cfg3b", N, {1, 2, 3}, 22, rules);
}

std::vector<Symbol> Derivation::yield() const {
  std::vector<Symbol> out;
  if (tree.empty()) return out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const DerivationNode& n = tree[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (n.children.empty()) {
      out.push_back(n.symbol);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

double Derivation::tree_log_prob(const Grammar& g) const {
  double lp = 0.0;
  for (const auto& n : tree)
    if (n.rule >= 0) lp += std::log(g.rules()[static_cast<std::size_t>(n.rule)].probability);
  return lp;
}

Derivation sample_sentence(const Grammar& g, Rng& rng, int max_depth_guard) {
  Derivation d;
  d.tree.push_back({g.start(), -1, 0, {}});
  // Stack of unexpanded node ids; the top is the leftmost open symbol.
  std::vector<int> open{0};
  while (!open.empty()) {
    int id = open.back();
    open.pop_back();
    DerivationNode node = d.tree[static_cast<std::size_t>(id)];
    if (g.is_terminal(node.symbol)) {
      d.tokens.push_back(node.symbol);
      d.depth = std::max(d.depth, node.depth);
      continue;
    }
    if (node.depth >= max_depth_guard) throw GenerationError("derivation exceeded the depth guard");
    const auto& choices = g.rules_for(node.symbol);
    double u = rng.uniform01(), acc = 0.0;
    std::size_t pick = choices.back();
    for (std::size_t r : choices) {
      acc += g.rules()[r].probability;
      if (u < acc) {
        pick = r;
        break;
      }
    }
    const Rule& rule = g.rules()[pick];
    d.log_prob += std::log(rule.probability);
    std::vector<int> kids;
    for (Symbol s : rule.body) {
      kids.push_back(static_cast<int>(d.tree.size()));
      d.tree.push_back({s, -1, node.depth + 1, {}});
    }
    d.tree[static_cast<std::size_t>(id)].rule = static_cast<int>(pick);
    d.tree[static_cast<std::size_t>(id)].children = kids;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) open.push_back(*it);
  }
  return d;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LengthPercentiles length_percentiles(const Grammar& g, std::size_t n_samples, Rng& rng) {
  if (n_samples < 100) throw ArgumentError("length_percentiles needs at least 100 samples");
  std::vector<double> len;
  len.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) len.push_back(static_cast<double>(sample_sentence(g, rng).tokens.size()));
  return length_percentiles(len);
}

LengthPercentiles length_percentiles(const std::vector<double>& lengths) {
  if (lengths.size() < 100) throw ArgumentError("length_percentiles needs at least 100 samples");
  return {percentile(lengths, 25), percentile(lengths, 50), percentile(lengths, 75), percentile(lengths, 95)};
}

std::vector<std::vector<Symbol>> sample_corpus(const Grammar& g, std::size_t n, const Rng& rng) {
  constexpr std::size_t kShard = 1024;
  std::vector<std::vector<Symbol>> out(n);
  parallel_for((n + kShard - 1) / kShard, [&](std::size_t s) {
    Rng r = rng.split(s);
    for (std::size_t i = s * kShard; i < std::min(n, (s + 1) * kShard); ++i) out[i] = sample_sentence(g, r).tokens;
  });
  return out;
}

MaskedSample mask_sequence(const std::vector<Symbol>& seq, const std::vector<Symbol>& vocabulary, Rng& rng,
                           double mask_fraction) {
  if (seq.empty()) throw ArgumentError("cannot mask an empty sequence");
  if (!(mask_fraction > 0.0 && mask_fraction < 1.0)) throw ArgumentError("mask_fraction must lie in (0, 1)");
  if (vocabulary.empty()) throw ArgumentError("empty vocabulary");
  MaskedSample m{seq, seq, {}, {}};
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!rng.bernoulli(mask_fraction)) continue;
    double u = rng.uniform01();
    Corruption kind = u < 0.8 ? Corruption::kMaskToken : (u < 0.9 ? Corruption::kRandomToken : Corruption::kUnchanged);
    if (kind == Corruption::kMaskToken) m.corrupted[i] = kMaskSymbol;
    if (kind == Corruption::kRandomToken) m.corrupted[i] = vocabulary[rng.index(vocabulary.size())];
    m.positions.push_back(i);
    m.kinds.push_back(kind);
  }
  return m;
}

void write_corpus(const std::vector<std::vector<Symbol>>& sentences, std::ostream& out) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

void write_masked_dataset(const std::vector<MaskedSample>& samples, std::ostream& out) {
  auto seq = [&](const std::vector<Symbol>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      if (s[i] == kMaskSymbol)
        out << "[mask]";
      else
        out << s[i];
    }
  };
  for (const auto& m : samples) {
    seq(m.original);
    out << '\t';
    seq(m.corrupted);
    out << '\t';
    for (std::size_t i = 0; i < m.positions.size(); ++i) {
      static const char* names[] = {"mask", "random", "keep"};
      out << (i ? "," : "") << m.positions[i] << ':' << names[static_cast<int>(m.kinds[i])];
    }
    out << '\n';
  }
}

}  // namespace pdistill
