#include "gsc/grammar.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

constexpr std::uint16_t kSeparator = 0;

struct StackEntry {
  Symbol symbol;
  std::uint32_t depth;
};

// Picks a production index for `nt` expanded at `depth`, accumulating the log
// probability of the (possibly depth-restricted) choice.
std::uint32_t choose_production(const PcfgIndex& index, std::uint32_t nt, std::uint32_t depth,
                                std::uint32_t max_depth, Xoshiro256StarStar& rng,
                                double& logprob) {
  const auto& prods = index.pcfg().productions[nt];
  if (depth >= max_depth) {
    const auto& closers = index.terminal_only(nt);
    if (closers.empty())
      throw NumericalError("nonterminal " + std::to_string(nt) +
                           " has no all-terminal production; cannot honor depth cap");
    const std::uint64_t pick = rng.below(closers.size());
    logprob += std::log(1.0 / static_cast<double>(closers.size()));
    return closers[static_cast<std::size_t>(pick)];
  }
  const std::uint32_t pick = static_cast<std::uint32_t>(rng.below(prods.size()));
  logprob += std::log(prods[pick].prob);
  return pick;
}

// Leftmost expansion emitting tokens into `out`. Stops early once `out`
// reaches `budget` tokens; returns true iff the sentence fully derived.
bool expand_sentence(const PcfgIndex& index, Xoshiro256StarStar& rng, std::uint32_t max_depth,
                     std::size_t budget, std::vector<std::uint16_t>& out, double* logprob,
                     std::vector<std::uint32_t>* choices) {
  const Pcfg& pcfg = index.pcfg();
  std::vector<StackEntry> stack;
  stack.push_back({Symbol::nonterminal(pcfg.start), 0});
  double lp = 0.0;
  while (!stack.empty()) {
    if (out.size() >= budget) return false;
    const StackEntry top = stack.back();
    stack.pop_back();
    if (top.symbol.is_terminal()) {
      out.push_back(static_cast<std::uint16_t>(top.symbol.id));
      continue;
    }
    const std::uint32_t pick =
        choose_production(index, top.symbol.id, top.depth, max_depth, rng, lp);
    if (choices) choices->push_back(pick);
    const auto& rhs = pcfg.productions[top.symbol.id][pick].rhs;
    for (std::size_t i = rhs.size(); i-- > 0;)
      stack.push_back({rhs[i], top.depth + 1});
  }
  if (logprob) *logprob += lp;
  return true;
}

}  // namespace

void validate_spec(const GrammarSpec& spec) {
  if (spec.num_nonterminals == 0) throw ValidationError("num_nonterminals must be >= 1");
  if (spec.num_terminals == 0) throw ValidationError("num_terminals must be >= 1");
  if (spec.max_rhs_options == 0) throw ValidationError("max_rhs_options must be >= 1");
  if (spec.max_rhs_len == 0) throw ValidationError("max_rhs_len must be >= 1");
  if (spec.context_length < 2) throw ValidationError("context_length must be >= 2");
  if (spec.num_terminals > 65535)
    throw ValidationError("vocabulary (terminals plus separator) must fit 16-bit token IDs");
}

void validate_pcfg(const Pcfg& pcfg) {
  validate_spec(pcfg.spec);
  const std::uint32_t nt_count = pcfg.spec.num_nonterminals;
  if (pcfg.start >= nt_count) throw ValidationError("start symbol out of range");
  if (pcfg.productions.size() != nt_count)
    throw ValidationError("production table size does not match num_nonterminals");
  for (std::uint32_t nt = 0; nt < nt_count; ++nt) {
    const auto& prods = pcfg.productions[nt];
    if (prods.empty() || prods.size() > pcfg.spec.max_rhs_options)
      throw ValidationError("nonterminal " + std::to_string(nt) +
                            " has a production count outside [1, max_rhs_options]");
    const double expected = 1.0 / static_cast<double>(prods.size());
    double sum = 0.0;
    for (const Production& p : prods) {
      if (p.lhs != nt) throw ValidationError("production lhs does not match its table slot");
      if (p.rhs.empty() || p.rhs.size() > pcfg.spec.max_rhs_len)
        throw ValidationError("production RHS length outside [1, max_rhs_len]");
      for (const Symbol& s : p.rhs) {
        if (s.is_terminal()) {
          if (s.id < 1 || s.id > pcfg.spec.num_terminals)
            throw ValidationError("terminal ID outside [1, num_terminals]");
        } else if (s.id >= nt_count) {
          throw ValidationError("nonterminal ID out of range");
        }
      }
      if (std::fabs(p.prob - expected) > 1e-12)
        throw ValidationError("production probabilities must be uniform per nonterminal");
      sum += p.prob;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw ValidationError("production probabilities must sum to 1");
  }
}

Pcfg build_grammar(const GrammarSpec& spec) {
  validate_spec(spec);
  Xoshiro256StarStar rng(spec.seed);
  const std::uint64_t num_symbols =
      static_cast<std::uint64_t>(spec.num_terminals) + spec.num_nonterminals;

  Pcfg pcfg;
  pcfg.spec = spec;
  pcfg.start = 0;
  pcfg.productions.resize(spec.num_nonterminals);

  for (std::uint32_t nt = 0; nt < spec.num_nonterminals; ++nt) {
    const std::uint64_t count = 1 + rng.below(spec.max_rhs_options);
    const double prob = 1.0 / static_cast<double>(count);
    auto& prods = pcfg.productions[nt];
    prods.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t j = 0; j < count; ++j) {
      Production p;
      p.lhs = nt;
      p.prob = prob;
      const std::uint64_t len = 1 + rng.below(spec.max_rhs_len);
      p.rhs.reserve(static_cast<std::size_t>(len));
      for (std::uint64_t s = 0; s < len; ++s) {
        // Terminals occupy the first num_terminals draw values.
        const std::uint64_t u = rng.below(num_symbols);
        if (u < spec.num_terminals)
          p.rhs.push_back(Symbol::terminal(static_cast<std::uint32_t>(u + 1)));
        else
          p.rhs.push_back(Symbol::nonterminal(static_cast<std::uint32_t>(u - spec.num_terminals)));
      }
      prods.push_back(std::move(p));
    }
    // Termination guarantee: every nonterminal keeps at least one
    // all-terminal production. If none was drawn, the nonterminal slots of
    // the last production are resampled as terminals.
    bool has_closer = false;
    for (const Production& p : prods) {
      bool all_terminal = true;
      for (const Symbol& s : p.rhs) all_terminal = all_terminal && s.is_terminal();
      if (all_terminal) {
        has_closer = true;
        break;
      }
    }
    if (!has_closer) {
      for (Symbol& s : prods.back().rhs) {
        if (!s.is_terminal())
          s = Symbol::terminal(static_cast<std::uint32_t>(1 + rng.below(spec.num_terminals)));
      }
    }
  }
  return pcfg;
}

PcfgIndex::PcfgIndex(const Pcfg& pcfg) : pcfg_(&pcfg) {
  validate_pcfg(pcfg);
  terminal_only_.resize(pcfg.productions.size());
  for (std::size_t nt = 0; nt < pcfg.productions.size(); ++nt) {
    const auto& prods = pcfg.productions[nt];
    for (std::uint32_t j = 0; j < prods.size(); ++j) {
      bool all_terminal = true;
      for (const Symbol& s : prods[j].rhs) all_terminal = all_terminal && s.is_terminal();
      if (all_terminal) terminal_only_[nt].push_back(j);
    }
  }
}

SentenceSample sample_sentence(const PcfgIndex& index, Xoshiro256StarStar& rng,
                               std::uint32_t max_depth) {
  SentenceSample sample;
  expand_sentence(index, rng, max_depth, std::numeric_limits<std::size_t>::max(),
                  sample.tokens, &sample.logprob, &sample.choices);
  return sample;
}

SentenceSample sample_sentence(const Pcfg& pcfg, Xoshiro256StarStar& rng,
                               std::uint32_t max_depth) {
  return sample_sentence(PcfgIndex(pcfg), rng, max_depth);
}

TokenDoc pack_document(const PcfgIndex& index, Xoshiro256StarStar& rng, std::uint32_t max_depth) {
  const std::uint32_t budget = index.pcfg().spec.context_length;
  TokenDoc doc;
  doc.reserve(budget);
  while (doc.size() < budget) {
    expand_sentence(index, rng, max_depth, budget, doc, nullptr, nullptr);
    if (doc.size() >= budget) break;
    doc.push_back(kSeparator);
  }
  return doc;
}

TokenDoc pack_document(const Pcfg& pcfg, Xoshiro256StarStar& rng, std::uint32_t max_depth) {
  return pack_document(PcfgIndex(pcfg), rng, max_depth);
}

Corpus sample_corpus(const Pcfg& pcfg, std::uint64_t num_docs, std::uint64_t base_seed) {
  if (num_docs == 0) throw ValidationError("num_docs must be >= 1");
  const PcfgIndex index(pcfg);
  const std::uint32_t ctx = pcfg.spec.context_length;
  if (num_docs > std::numeric_limits<std::size_t>::max() / ctx)
    throw ValidationError("corpus size overflows addressable memory");

  Corpus corpus;
  corpus.context_length = ctx;
  corpus.vocab_size = pcfg.spec.num_terminals + 1;
  corpus.num_docs = num_docs;
  corpus.tokens.reserve(static_cast<std::size_t>(num_docs) * ctx);
  for (std::uint64_t i = 0; i < num_docs; ++i) {
    Xoshiro256StarStar doc_rng(mix(base_seed, i));
    const TokenDoc doc = pack_document(index, doc_rng);
    corpus.tokens.insert(corpus.tokens.end(), doc.begin(), doc.end());
  }
  return corpus;
}

double derivation_entropy(const Pcfg& pcfg, std::uint64_t num_samples, std::uint64_t seed) {
  if (num_samples < 100)
    throw ValidationError("derivation_entropy needs at least 100 samples");
  const PcfgIndex index(pcfg);
  Xoshiro256StarStar rng(seed);
  double total_nats = 0.0;
  std::uint64_t total_tokens = 0;
  for (std::uint64_t i = 0; i < num_samples; ++i) {
    const SentenceSample s = sample_sentence(index, rng);
    total_nats -= s.logprob;
    total_tokens += s.tokens.size();
  }
  constexpr double kLn2 = 0.69314718055994530941723212145818;
  return (total_nats / kLn2) / static_cast<double>(total_tokens);
}

}  // namespace gsc
