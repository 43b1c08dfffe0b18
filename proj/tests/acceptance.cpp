// Acceptance gate. Eight end-to-end checks, each printed as one
// [PASS]/[FAIL] line with its runtime; the process exits nonzero if any
// check fails. Reference values and tolerances are pinned here and must not
// be loosened to make a run green: a red line is a finding, not a nuisance.
//
// Known-red lines on this implementation, with the measured evidence behind
// them, are documented in the README ("Acceptance status").

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gsc/complexity.hpp"
#include "gsc/datadep.hpp"
#include "gsc/errors.hpp"
#include "gsc/grammar.hpp"
#include "gsc/lawfit.hpp"
#include "gsc/runstore.hpp"
#include "gsc/stats.hpp"

#include "reference_data.hpp"

namespace {

using namespace gsc;

// --- pinned tolerances -------------------------------------------------

// 1. parameter-line regression vs the reference lines
constexpr double kLineTolAlphaBeta = 0.02;  // slope and intercept
constexpr double kLineTolAB = 0.3;
constexpr double kLineTolE = 0.1;
constexpr double kSignificance05 = 0.05;
constexpr double kSignificance01 = 0.01;

// 2. alpha/beta crossover
constexpr double kCrossoverLo = 0.255;
constexpr double kCrossoverHi = 0.275;

// 3. fit recovery
constexpr double kNoiselessRelTol = 0.01;   // a, b, alpha, beta relative
constexpr double kNoiselessETol = 0.05;     // e absolute
constexpr double kNoisyRelTol = 0.05;
constexpr double kNoisyETol = 0.25;         // e tolerance scaled like the rest
constexpr double kNoisySigma = 0.01;
constexpr std::uint64_t kNoisySeed = 1;

// 4. grammar suites
constexpr double kLadderTol = 0.08;         // per-row window around expected h
constexpr double kBandLo = 0.30;            // iso-band suite limits
constexpr double kBandHi = 0.42;
constexpr std::uint64_t kCorpusSeed = 1;    // sampling seed for every suite

// 5. frontier identities
constexpr int kNumRandomLaws = 1000;
constexpr double kIdentityRelTol = 1e-9;
constexpr double kSlopeTol = 1e-9;
constexpr double kFrontierRhoMax = -0.8;    // Spearman(bn, h) upper bound

// 6. blend endpoints
constexpr int kNumBlendTriples = 100;

// 7. determinism
constexpr double kPinnedDocRatio = 0.26708984375;  // frozen; see payload below

// 8. entropy link
constexpr double kEntropyRhoMin = 0.9;
constexpr std::uint64_t kEntropySamples = 2000;
constexpr std::uint64_t kEntropySeed = 1;

// per-criterion runtime ceilings, seconds
constexpr double kRuntimeLimit[8] = {1, 1, 120, 300, 10, 1, 60, 300};

// --- reporting ---------------------------------------------------------

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(std::string note) {
    pass = false;
    notes.push_back(std::move(note));
  }
};

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

// Suite measurements shared between checks 4 and 8.
struct SuiteData {
  std::vector<Pcfg> ladder_grammars;
  std::vector<double> ladder_means;
  bool ready = false;
};

std::filesystem::path presets_dir() {
  if (const char* env = std::getenv("GSC_PRESETS_DIR")) return env;
  return GSC_PRESETS_DIR;
}

std::vector<HLawPoint> reference_points() {
  std::vector<HLawPoint> points;
  for (const auto& row : refdata::kLawSuite) points.push_back({row.h, row.law});
  return points;
}

ParamRegressions reference_regressions() {
  ExclusionPolicy policy;
  policy.excluded[LawParam::E] = {refdata::kInterceptOutlierIndex};
  const auto points = reference_points();
  return regress_params(points, policy);
}

// --- criteria ----------------------------------------------------------

void check_line(Outcome& out, const char* name, const LinearFit& fit,
                const refdata::LineRef& ref, double tol) {
  if (std::abs(fit.slope - ref.slope) > tol)
    out.fail(format("%s slope %.4f vs %.4f (tol %.3g)", name, fit.slope, ref.slope, tol));
  if (std::abs(fit.intercept - ref.intercept) > tol)
    out.fail(format("%s intercept %.4f vs %.4f (tol %.3g)", name, fit.intercept,
                    ref.intercept, tol));
}

Outcome criterion_regression_lines() {
  Outcome out;
  const ParamRegressions regs = reference_regressions();
  check_line(out, "e", regs.e, refdata::kLineE, kLineTolE);
  check_line(out, "a", regs.a, refdata::kLineA, kLineTolAB);
  check_line(out, "b", regs.b, refdata::kLineB, kLineTolAB);
  check_line(out, "alpha", regs.alpha, refdata::kLineAlpha, kLineTolAlphaBeta);
  check_line(out, "beta", regs.beta, refdata::kLineBeta, kLineTolAlphaBeta);

  // Significance pattern: a and alpha at 5%, b and beta at 1%, e not
  // significant.
  if (!(regs.a.p_value < kSignificance05))
    out.fail(format("a p-value %.4f not < %.2f", regs.a.p_value, kSignificance05));
  if (!(regs.alpha.p_value < kSignificance05))
    out.fail(format("alpha p-value %.4f not < %.2f", regs.alpha.p_value, kSignificance05));
  if (!(regs.b.p_value < kSignificance01))
    out.fail(format("b p-value %.4f not < %.2f", regs.b.p_value, kSignificance01));
  if (!(regs.beta.p_value < kSignificance01))
    out.fail(format("beta p-value %.4f not < %.2f", regs.beta.p_value, kSignificance01));
  if (!(regs.e.p_value >= kSignificance05))
    out.fail(format("e p-value %.4f unexpectedly significant", regs.e.p_value));
  if (regs.e.excluded != std::vector<std::uint64_t>{refdata::kInterceptOutlierIndex})
    out.fail("e regression did not exclude the outlier point");
  return out;
}

Outcome criterion_crossover() {
  Outcome out;
  const ParamRegressions regs = reference_regressions();
  const auto h = crossover_h(regs, LawParam::Alpha, LawParam::Beta);
  if (!h) {
    out.fail("alpha and beta lines are parallel");
  } else if (!(*h >= kCrossoverLo && *h <= kCrossoverHi)) {
    out.fail(format("crossover h %.4f outside [%.3f, %.3f]", *h, kCrossoverLo, kCrossoverHi));
  }
  return out;
}

void check_recovery(Outcome& out, const char* label, int row, const ScalingLaw& truth,
                    const ScalingLaw& got, double rel_tol, double e_tol) {
  const auto rel = [](double got_v, double want) {
    return std::abs(got_v - want) / std::abs(want);
  };
  if (rel(got.a, truth.a) > rel_tol)
    out.fail(format("%s row %d: a %.4g vs %.4g (rel %.2g)", label, row, got.a, truth.a,
                    rel(got.a, truth.a)));
  if (rel(got.b, truth.b) > rel_tol)
    out.fail(format("%s row %d: b %.4g vs %.4g (rel %.2g)", label, row, got.b, truth.b,
                    rel(got.b, truth.b)));
  if (rel(got.alpha, truth.alpha) > rel_tol)
    out.fail(format("%s row %d: alpha %.4g vs %.4g (rel %.2g)", label, row, got.alpha,
                    truth.alpha, rel(got.alpha, truth.alpha)));
  if (rel(got.beta, truth.beta) > rel_tol)
    out.fail(format("%s row %d: beta %.4g vs %.4g (rel %.2g)", label, row, got.beta,
                    truth.beta, rel(got.beta, truth.beta)));
  if (std::abs(got.e - truth.e) > e_tol)
    out.fail(format("%s row %d: e %.4g vs %.4g (abs %.2g)", label, row, got.e, truth.e,
                    std::abs(got.e - truth.e)));
}

Outcome criterion_fit_recovery() {
  Outcome out;
  for (int row = 0; row < 5; ++row) {
    const ScalingLaw& truth = refdata::kLawSuite[row].law;
    const auto clean = synth_runs(truth, refdata::kNGrid, refdata::kDGrid, 0.0, 0);
    check_recovery(out, "noiseless", row, truth, fit_law(clean).law, kNoiselessRelTol,
                   kNoiselessETol);
    const auto noisy = synth_runs(truth, refdata::kNGrid, refdata::kDGrid, kNoisySigma,
                                  kNoisySeed);
    check_recovery(out, "noisy", row, truth, fit_law(noisy).law, kNoisyRelTol, kNoisyETol);
  }
  return out;
}

double suite_mean(const Pcfg& pcfg) {
  const Corpus corpus = sample_corpus(pcfg, refdata::kSuiteNumDocs, kCorpusSeed);
  return corpus_compressibility(corpus, SerializationMode::TokensU16Le).mean;
}

// Presets must agree with the fixture rows they claim to realize; the seed
// is the preset's own tuning choice.
void check_preset_matches(Outcome& out, const GrammarSpec& spec, const refdata::SuiteRow& row,
                          const char* name) {
  if (spec.num_nonterminals != row.num_nonterminals ||
      spec.num_terminals != row.num_terminals ||
      spec.max_rhs_options != row.max_rhs_options || spec.max_rhs_len != row.max_rhs_len ||
      spec.context_length != refdata::kSuiteContextLength)
    out.fail(format("%s does not match its suite row", name));
}

Outcome criterion_suites(SuiteData& shared) {
  Outcome out;
  const auto dir = presets_dir();

  std::vector<double> means;
  for (int i = 0; i < 6; ++i) {
    const std::string name = "ladder_" + std::to_string(i + 1) + ".json";
    const GrammarSpec spec = load_spec(dir / name);
    check_preset_matches(out, spec, refdata::kGrammarSuite[i], name.c_str());
    Pcfg pcfg = build_grammar(spec);
    means.push_back(suite_mean(pcfg));
    shared.ladder_grammars.push_back(std::move(pcfg));
  }
  shared.ladder_means = means;
  shared.ready = true;

  for (int i = 1; i < 6; ++i)
    if (!(means[i] > means[i - 1]))
      out.fail(format("ladder means not strictly increasing at row %d (%.4f vs %.4f)", i + 1,
                      means[i], means[i - 1]));
  for (int i = 0; i < 6; ++i) {
    const double want = refdata::kGrammarSuite[i].h;
    if (std::abs(means[i] - want) > kLadderTol)
      out.fail(format("ladder row %d mean h %.4f outside %.2f +/- %.2f", i + 1, means[i],
                      want, kLadderTol));
  }

  for (int i = 0; i < 3; ++i) {
    const std::string name = "iso_band_" + std::to_string(i + 1) + ".json";
    const GrammarSpec spec = load_spec(dir / name);
    check_preset_matches(out, spec, refdata::kIsoGzipSuite[i], name.c_str());
    const double mean = suite_mean(build_grammar(spec));
    if (!(mean >= kBandLo && mean <= kBandHi))
      out.fail(format("iso-band row %d mean h %.4f outside [%.2f, %.2f]", i + 1, mean,
                      kBandLo, kBandHi));
  }
  return out;
}

Outcome criterion_frontier() {
  Outcome out;
  std::mt19937_64 rng(123456789);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const FlopsModel flops;

  int identity_bad = 0;
  int slope_bad = 0;
  for (int i = 0; i < kNumRandomLaws; ++i) {
    ScalingLaw law;
    law.e = -2.0 + 4.0 * u01(rng);
    law.a = std::exp(u01(rng) * std::log(1000.0));
    law.b = std::exp(u01(rng) * std::log(1000.0));
    law.alpha = 0.2 + 1.3 * u01(rng);
    law.beta = 0.2 + 1.3 * u01(rng);
    const double budget = std::exp(std::log(1e15) + u01(rng) * std::log(1e9));

    const double n = n_opt(law, budget, flops);
    const double d = d_opt(law, budget, flops);
    if (std::abs(flops.coeff * n * d - budget) > kIdentityRelTol * budget) ++identity_bad;

    // n_opt is a pure power of the budget, so one log-log secant gives the
    // exponent.
    const double slope = (std::log(n_opt(law, 10.0 * budget, flops)) - std::log(n)) /
                         std::log(10.0);
    if (std::abs(slope - law.beta / (law.alpha + law.beta)) > kSlopeTol) ++slope_bad;
  }
  if (identity_bad > 0)
    out.fail(format("coeff*n_opt*d_opt != budget beyond %.0e relative in %d/%d laws",
                    kIdentityRelTol, identity_bad, kNumRandomLaws));
  if (slope_bad > 0)
    out.fail(format("n_opt log-log slope off beta/(alpha+beta) in %d/%d laws", slope_bad,
                    kNumRandomLaws));

  std::vector<double> bn, hs;
  for (const auto& row : refdata::kLawSuite) {
    bn.push_back(frontier_exponent(row.law).bn);
    hs.push_back(row.h);
  }
  const double rho = stats::spearman_rho(bn, hs);
  if (!(rho <= kFrontierRhoMax))
    out.fail(format("Spearman(bn, h) %.3f not <= %.2f", rho, kFrontierRhoMax));
  return out;
}

Outcome criterion_blend_endpoints() {
  Outcome out;
  std::mt19937_64 rng(987654321);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (int i = 0; i < kNumBlendTriples; ++i) {
    const double h = 0.05 + 0.6 * u01(rng);

    // Random lines kept positive at h for the four positive parameters.
    ParamRegressions regs;
    for (LawParam param : kAllLawParams) {
      LinearFit& fit = regs.fit(param);
      fit.slope = -2.0 + 4.0 * u01(rng);
      const double at_h = param == LawParam::E ? -3.0 + 6.0 * u01(rng)
                                               : 0.1 + 2.9 * u01(rng);
      fit.intercept = at_h - fit.slope * h;
      fit.points_used = 5;
    }

    ChinchillaConstants primes;
    primes.e = -2.0 + 4.0 * u01(rng);
    primes.a = 1.0 + 499.0 * u01(rng);
    primes.b = 1.0 + 499.0 * u01(rng);
    primes.alpha = 0.1 + 1.4 * u01(rng);
    primes.beta = 0.1 + 1.4 * u01(rng);

    const ScalingLaw at_zero = blended_law(h, {.epsilon = 0.0}, primes, regs);
    if (at_zero.e != primes.e || at_zero.a != primes.a || at_zero.b != primes.b ||
        at_zero.alpha != primes.alpha || at_zero.beta != primes.beta) {
      out.fail(format("triple %d: epsilon 0 is not exactly the reference constants", i));
      break;
    }
    const ScalingLaw line = law_at(h, regs);
    const ScalingLaw at_one = blended_law(h, {.epsilon = 1.0}, primes, regs);
    if (at_one.e != line.e || at_one.a != line.a || at_one.b != line.b ||
        at_one.alpha != line.alpha || at_one.beta != line.beta) {
      out.fail(format("triple %d: epsilon 1 is not exactly the regression law", i));
      break;
    }
  }
  return out;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_determinism() {
  Outcome out;

  // Pinned payload: 2048 token IDs below 701, fixed multiplicative walk.
  std::vector<std::uint16_t> doc(2048);
  for (std::uint32_t i = 0; i < doc.size(); ++i)
    doc[i] = static_cast<std::uint16_t>((i * 2654435761ULL) % 701ULL);
  const double ratio = doc_ratio(serialize_doc(doc, SerializationMode::TokensU16Le));
  if (ratio != kPinnedDocRatio)
    out.fail(format("pinned doc_ratio %.17g != frozen %.17g (compressor %s)", ratio,
                    kPinnedDocRatio, compressor_id().c_str()));

  const char* bin = std::getenv("GSC_BIN");
  if (!bin) {
    out.fail("GSC_BIN not set; cannot exercise the gen command");
    return out;
  }
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("gsc_acceptance_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(tmp);
  const auto spec = presets_dir() / "ladder_2.json";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + bin + "\" gen --spec \"" + spec.string() +
                            "\" --docs 64 --seed 9 --out \"" + (tmp / run).string() +
                            ".gsc\" --manifest \"" + (tmp / run).string() +
                            ".manifest.json\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) out.fail(format("gen run %s failed", run));
  }
  if (out.pass) {
    const auto a = slurp(tmp / "a.gsc");
    const auto b = slurp(tmp / "b.gsc");
    if (a.empty() || a != b) out.fail("repeated gen runs differ byte-for-byte");
  }
  std::filesystem::remove_all(tmp);
  return out;
}

Outcome criterion_entropy_link(SuiteData& shared) {
  Outcome out;
  if (!shared.ready) {
    // Standalone fallback: rebuild what the suite check would have shared.
    const auto dir = presets_dir();
    for (int i = 0; i < 6; ++i) {
      const GrammarSpec spec = load_spec(dir / ("ladder_" + std::to_string(i + 1) + ".json"));
      Pcfg pcfg = build_grammar(spec);
      shared.ladder_means.push_back(suite_mean(pcfg));
      shared.ladder_grammars.push_back(std::move(pcfg));
    }
    shared.ready = true;
  }

  std::vector<double> entropies;
  for (const Pcfg& pcfg : shared.ladder_grammars)
    entropies.push_back(derivation_entropy(pcfg, kEntropySamples, kEntropySeed));

  const double rho = stats::spearman_rho(entropies, shared.ladder_means);
  if (!(rho >= kEntropyRhoMin)) {
    out.fail(format("Spearman(entropy, mean h) %.3f not >= %.2f", rho, kEntropyRhoMin));
    for (std::size_t i = 0; i < entropies.size(); ++i)
      out.notes.push_back(format("  row %zu: entropy %.3f bits/token, mean h %.4f", i + 1,
                                 entropies[i], shared.ladder_means[i]));
  }
  return out;
}

}  // namespace

int main() {
  SuiteData shared;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[8] = {
      {"law-parameter regression matches the reference lines",
       criterion_regression_lines},
      {"alpha/beta regression crossover lands near 0.27", criterion_crossover},
      {"law fit recovers synthetic ground truth", criterion_fit_recovery},
      {"grammar suites hit their compressibility targets",
       [&] { return criterion_suites(shared); }},
      {"compute-optimal frontier identities hold", criterion_frontier},
      {"blend endpoints are exact", criterion_blend_endpoints},
      {"generation and compression are deterministic", criterion_determinism},
      {"derivation entropy tracks compressibility",
       [&] { return criterion_entropy_link(shared); }},
  };

  int failures = 0;
  for (int i = 0; i < 8; ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out.fail(format("exception: %s", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count();
    if (secs >= kRuntimeLimit[i])
      out.fail(format("runtime %.1f s exceeds %.0f s limit", secs, kRuntimeLimit[i]));

    std::printf("[%s] %d. %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, secs);
    for (const auto& note : out.notes) std::printf("       %s\n", note.c_str());
    if (!out.pass) ++failures;
  }

  if (failures > 0) std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
