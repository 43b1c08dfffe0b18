#pragma once

// Random PCFG construction and corpus sampling.
//
// Terminals are token IDs in [1, num_terminals]; ID 0 is the sentence
// separator and never appears inside a sentence. Nonterminals live in their
// own ID space [0, num_nonterminals), with nonterminal 0 as the start symbol.
// Every sampling routine is a pure function of (grammar, seed).

#include <cstdint>
#include <span>
#include <vector>

#include "gsc/rng.hpp"

namespace gsc {

struct GrammarSpec {
  std::uint32_t num_nonterminals = 0;
  std::uint32_t num_terminals = 0;
  std::uint32_t max_rhs_options = 0;  // per-nonterminal production count upper bound
  std::uint32_t max_rhs_len = 0;      // symbols per right-hand side upper bound
  std::uint32_t context_length = 0;   // tokens per packed document
  std::uint64_t seed = 0;

  bool operator==(const GrammarSpec&) const = default;
};

// Throws ValidationError on zero counts, context_length < 2, or a vocabulary
// (terminals plus separator) that does not fit 16-bit token IDs.
void validate_spec(const GrammarSpec& spec);

struct Symbol {
  enum class Kind : std::uint8_t { Terminal, Nonterminal };

  Kind kind = Kind::Terminal;
  std::uint32_t id = 0;

  static constexpr Symbol terminal(std::uint32_t id) { return {Kind::Terminal, id}; }
  static constexpr Symbol nonterminal(std::uint32_t id) { return {Kind::Nonterminal, id}; }
  constexpr bool is_terminal() const { return kind == Kind::Terminal; }

  bool operator==(const Symbol&) const = default;
};

struct Production {
  std::uint32_t lhs = 0;
  std::vector<Symbol> rhs;  // 1..max_rhs_len symbols
  double prob = 0.0;        // exactly 1/k where k = production count of lhs
};

struct Pcfg {
  GrammarSpec spec;
  std::uint32_t start = 0;
  std::vector<std::vector<Production>> productions;  // indexed by nonterminal ID
};

// Structural checks: production counts within bounds, RHS lengths and symbol
// IDs in range, probabilities uniform per nonterminal and summing to 1.
void validate_pcfg(const Pcfg& pcfg);

// Deterministic construction: one generator seeded with spec.seed drives every
// choice in a fixed order (production counts, RHS lengths, symbols, then
// termination repair), so equal specs give equal grammars everywhere.
Pcfg build_grammar(const GrammarSpec& spec);

// Per-nonterminal indices of productions whose RHS is all terminals.
// Build once per grammar when sampling many sentences.
class PcfgIndex {
 public:
  explicit PcfgIndex(const Pcfg& pcfg);

  const Pcfg& pcfg() const { return *pcfg_; }
  const std::vector<std::uint32_t>& terminal_only(std::uint32_t nt) const {
    return terminal_only_[nt];
  }

 private:
  const Pcfg* pcfg_;
  std::vector<std::vector<std::uint32_t>> terminal_only_;
};

inline constexpr std::uint32_t kDefaultMaxDepth = 64;

struct SentenceSample {
  std::vector<std::uint16_t> tokens;
  double logprob = 0.0;  // natural log of the derivation probability
  // Production index chosen at each expansion, in leftmost derivation order.
  std::vector<std::uint32_t> choices;
};

// Leftmost stack expansion from the start symbol. At depth >= max_depth only
// all-terminal productions may be chosen, with probability renormalized
// uniformly among them (and logprob accounting for the renormalized choice).
SentenceSample sample_sentence(const PcfgIndex& index, Xoshiro256StarStar& rng,
                               std::uint32_t max_depth = kDefaultMaxDepth);
SentenceSample sample_sentence(const Pcfg& pcfg, Xoshiro256StarStar& rng,
                               std::uint32_t max_depth = kDefaultMaxDepth);

using TokenDoc = std::vector<std::uint16_t>;

// Concatenates freshly sampled sentences joined by separator tokens until
// exactly context_length tokens are emitted; the last sentence is truncated
// mid-derivation once the budget is reached.
TokenDoc pack_document(const PcfgIndex& index, Xoshiro256StarStar& rng,
                       std::uint32_t max_depth = kDefaultMaxDepth);
TokenDoc pack_document(const Pcfg& pcfg, Xoshiro256StarStar& rng,
                       std::uint32_t max_depth = kDefaultMaxDepth);

struct Corpus {
  std::uint32_t context_length = 0;
  std::uint32_t vocab_size = 0;  // num_terminals + 1 for the separator
  std::uint64_t num_docs = 0;
  std::vector<std::uint16_t> tokens;  // num_docs * context_length, row-major

  std::span<const std::uint16_t> doc(std::uint64_t i) const {
    return {tokens.data() + i * context_length, context_length};
  }
};

// Document i is drawn from an independent stream seeded with
// mix(base_seed, i), so any document can be regenerated without the others.
Corpus sample_corpus(const Pcfg& pcfg, std::uint64_t num_docs, std::uint64_t base_seed);

// Monte Carlo bits-per-token of the derivation process: total derivation
// information (in bits) over `num_samples` sentences divided by total tokens.
// Requires num_samples >= 100.
double derivation_entropy(const Pcfg& pcfg, std::uint64_t num_samples, std::uint64_t seed);

}  // namespace gsc
