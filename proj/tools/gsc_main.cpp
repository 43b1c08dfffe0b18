// Command-line surface over the gsc library. Each subcommand is a thin
// adapter: it validates flags, calls into the library, and prints exactly one
// machine-readable payload (JSON or CSV) on stdout. Everything else, seeds
// included, goes to stderr. Exit codes: 0 ok, 1 validation/input error,
// 2 numerical or domain error.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gsc/complexity.hpp"
#include "gsc/datadep.hpp"
#include "gsc/errors.hpp"
#include "gsc/grammar.hpp"
#include "gsc/lawfit.hpp"
#include "gsc/runstore.hpp"
#include "gsc/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    double value = 0.0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || item.empty())
      throw gsc::ValidationError(what + ": cannot parse '" + item + "' as a number");
    out.push_back(value);
    pos = comma + 1;
  }
  if (out.empty()) throw gsc::ValidationError(what + ": empty list");
  return out;
}

// Omitted seeds are generated, not fixed, so repeated unseeded runs differ;
// the chosen value is printed so any run can be reproduced exactly.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  std::random_device rd;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cerr << "generated seed " << seed << " (pass --seed " << seed << " to reproduce)\n";
  return seed;
}

void emit_json(const json& payload) { std::cout << gsc::canonical_json(payload); }

std::string relative_to(const fs::path& target, const fs::path& base_dir) {
  std::error_code ec;
  const fs::path rel = fs::relative(fs::absolute(target), fs::absolute(base_dir), ec);
  if (ec || rel.empty()) return target.string();
  return rel.generic_string();
}

json read_json_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw gsc::ValidationError(what + ": cannot open '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw gsc::ValidationError(what + ": '" + path.string() + "' is not valid JSON");
  return j;
}

// --- gen ---

struct GenOptions {
  std::string spec_path;
  std::uint64_t docs = 1000;
  std::optional<std::uint64_t> seed;
  std::string dataset_id;
  std::string out;
  std::string manifest;
  std::string emit_grammar;
  std::string bundle;
};

int cmd_gen(const GenOptions& opts) {
  gsc::GrammarSpec spec = gsc::load_spec(opts.spec_path);
  const std::uint64_t sampling_seed = resolve_seed(opts.seed);

  std::string dataset_id = opts.dataset_id;
  if (dataset_id.empty()) dataset_id = fs::path(opts.spec_path).stem().string();

  fs::path corpus_path = opts.out;
  fs::path manifest_path = opts.manifest;
  if (!opts.bundle.empty()) {
    const gsc::Bundle bundle = gsc::ensure_bundle(opts.bundle);
    if (corpus_path.empty()) corpus_path = bundle.corpora() / (dataset_id + ".gsc");
    if (manifest_path.empty()) manifest_path = bundle.manifests() / (dataset_id + ".json");
  } else {
    if (corpus_path.empty()) corpus_path = dataset_id + ".gsc";
    if (manifest_path.empty())
      manifest_path = corpus_path.parent_path() / (dataset_id + ".manifest.json");
  }

  const gsc::Pcfg pcfg = gsc::build_grammar(spec);
  const gsc::Corpus corpus = gsc::sample_corpus(pcfg, opts.docs, sampling_seed);
  gsc::write_corpus(corpus, corpus_path);
  std::cerr << "wrote " << corpus_path.string() << " (" << corpus.num_docs << " docs x "
            << corpus.context_length << " tokens, vocab " << corpus.vocab_size << ")\n";

  if (!opts.emit_grammar.empty())
    gsc::write_text_atomic(opts.emit_grammar, gsc::canonical_json(gsc::pcfg_to_json(pcfg)));

  gsc::DatasetManifest manifest;
  manifest.dataset_id = dataset_id;
  manifest.grammar = spec;
  manifest.corpus_path = relative_to(corpus_path, manifest_path.parent_path());
  manifest.created_at = gsc::utc_timestamp_now();
  manifest.tool_version = gsc::kToolVersion;
  manifest.rng_id = gsc::kRngId;
  manifest.extra = json{{"num_docs", opts.docs}, {"sampling_seed", sampling_seed}};
  gsc::save_manifest(manifest, manifest_path);
  std::cerr << "wrote " << manifest_path.string() << "\n";

  emit_json(gsc::manifest_to_json(manifest));
  return 0;
}

// --- measure ---

struct MeasureOptions {
  std::string target;
  std::string mode = "tokens_u16le";
  std::uint64_t sample = gsc::kDefaultMeasureSample;
  std::optional<std::uint64_t> seed;
  int level = gsc::kDefaultCompressionLevel;
  std::string out;
};

json measure_one(const fs::path& corpus_path, gsc::SerializationMode mode,
                 const gsc::MeasureOptions& options) {
  const gsc::Corpus corpus = gsc::read_corpus(corpus_path);
  const gsc::CompressibilityReport report = gsc::corpus_compressibility(corpus, mode, options);
  std::cerr << corpus_path.string() << ": mean " << report.mean << ", median " << report.median
            << " over " << report.sample_size << " docs\n";
  return gsc::report_to_json(report);
}

int cmd_measure(const MeasureOptions& opts) {
  const gsc::SerializationMode mode = gsc::serialization_mode_from_string(opts.mode);
  gsc::MeasureOptions options;
  options.max_sample = opts.sample;
  options.seed = resolve_seed(opts.seed);
  options.level = opts.level;

  const fs::path target = opts.target;
  if (fs::is_directory(target)) {
    std::vector<fs::path> corpora;
    for (const auto& entry : fs::directory_iterator(target))
      if (entry.is_regular_file() && entry.path().extension() == ".gsc")
        corpora.push_back(entry.path());
    std::sort(corpora.begin(), corpora.end());
    if (corpora.empty())
      throw gsc::ValidationError("no .gsc corpus files in '" + target.string() + "'");
    json reports = json::object();
    for (const fs::path& corpus_path : corpora) {
      const json report = measure_one(corpus_path, mode, options);
      reports[corpus_path.filename().string()] = report;
      if (!opts.out.empty())
        gsc::write_text_atomic(fs::path(opts.out) / (corpus_path.stem().string() + ".json"),
                               gsc::canonical_json(report));
    }
    emit_json(json{{"reports", reports}});
    return 0;
  }

  const json report = measure_one(target, mode, options);
  if (!opts.out.empty()) gsc::write_text_atomic(opts.out, gsc::canonical_json(report));
  emit_json(report);
  return 0;
}

// --- fit ---

struct FitOptions {
  std::string runs_path;
  std::string space = "linear";
  double delta = 0.0;
  std::uint64_t max_iters = 10000;
  double tolerance = 1e-8;
  std::string out;
  std::string bundle;
};

int cmd_fit(const FitOptions& opts) {
  const std::vector<gsc::RunRecord> runs =
      gsc::ingest_runs(opts.runs_path, gsc::run_format_from_path(opts.runs_path));

  gsc::FitConfig config;
  config.residual_space = gsc::residual_space_from_string(opts.space);
  config.huber_delta = opts.delta;
  config.max_iters = opts.max_iters;
  config.tolerance = opts.tolerance;
  const gsc::FitResult result = gsc::fit_law(runs, config);
  std::cerr << "fit " << runs.size() << " runs: objective " << result.objective << ", init "
            << result.chosen_init << (result.converged ? "" : " (not converged)") << "\n";

  fs::path out = opts.out;
  if (out.empty() && !opts.bundle.empty())
    out = gsc::ensure_bundle(opts.bundle).fits() /
          (fs::path(opts.runs_path).stem().string() + ".json");

  // The stored runs path is relative to the artifact so bundles stay
  // relocatable; without an artifact it is echoed as given.
  const std::string stored_runs = out.empty()
                                      ? std::string(opts.runs_path)
                                      : relative_to(opts.runs_path, out.parent_path());
  const json payload = gsc::fit_result_to_json(result, config, stored_runs);
  if (!out.empty()) {
    gsc::write_text_atomic(out, gsc::canonical_json(payload));
    std::cerr << "wrote " << out.string() << "\n";
  }
  emit_json(payload);
  return 0;
}

// --- frontier ---

struct FrontierOptions {
  std::string law_path;
  std::string budgets;
  double coeff = 6.0;
};

int cmd_frontier(const FrontierOptions& opts) {
  const gsc::ScalingLaw law = gsc::load_law(opts.law_path);
  const std::vector<double> budgets = parse_double_list(opts.budgets, "--budgets");
  const gsc::FlopsModel flops{opts.coeff};
  std::string csv = "compute_c,n_opt,d_opt,predicted_loss\n";
  for (double c : budgets) {
    const double n = gsc::n_opt(law, c, flops);
    const double d = gsc::d_opt(law, c, flops);
    csv += fmt_double(c) + "," + fmt_double(n) + "," + fmt_double(d) + "," +
           fmt_double(gsc::evaluate_loss(law, n, d)) + "\n";
  }
  std::cout << csv;
  return 0;
}

// --- regress ---

struct RegressOptions {
  std::string pairs_path;
  std::vector<std::string> exclude;
  std::string out;
  std::string bundle;
};

gsc::ExclusionPolicy parse_exclusions(const std::vector<std::string>& items) {
  gsc::ExclusionPolicy policy;
  for (const std::string& entry : items) {
    std::size_t pos = 0;
    while (pos <= entry.size()) {
      std::size_t comma = entry.find(',', pos);
      if (comma == std::string::npos) comma = entry.size();
      const std::string item = entry.substr(pos, comma - pos);
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw gsc::ValidationError("--exclude: expected param:index, got '" + item + "'");
      const gsc::LawParam param = gsc::law_param_from_string(item.substr(0, colon));
      const std::string index_text = item.substr(colon + 1);
      std::uint64_t index = 0;
      const char* begin = index_text.data();
      const char* end = begin + index_text.size();
      auto [ptr, ec] = std::from_chars(begin, end, index);
      if (ec != std::errc{} || ptr != end || index_text.empty())
        throw gsc::ValidationError("--exclude: bad index in '" + item + "'");
      policy.excluded[param].push_back(index);
      pos = comma + 1;
    }
  }
  return policy;
}

int cmd_regress(const RegressOptions& opts) {
  const json pairs = read_json_file(opts.pairs_path, "pairs file");
  if (!pairs.is_array() || pairs.empty())
    throw gsc::ValidationError("pairs file: expected a non-empty JSON array");

  const fs::path base_dir = fs::path(opts.pairs_path).parent_path();
  std::vector<gsc::HLawPoint> points;
  std::vector<std::string> sources;
  for (const json& entry : pairs) {
    if (!entry.is_object() || !entry.contains("h"))
      throw gsc::ValidationError("pairs file: each entry needs an 'h' field");
    gsc::HLawPoint point;
    point.h = entry.at("h").get<double>();
    if (entry.contains("law")) {
      point.law = gsc::law_from_json(entry.at("law"));
      sources.push_back("");
    } else if (entry.contains("fit")) {
      const std::string ref = entry.at("fit").get<std::string>();
      fs::path fit_path = ref;
      if (fit_path.is_relative()) fit_path = base_dir / fit_path;
      point.law = gsc::load_law(fit_path);
      sources.push_back(ref);
    } else {
      throw gsc::ValidationError("pairs file: each entry needs a 'law' or 'fit' field");
    }
    points.push_back(point);
  }
  const bool any_source = std::any_of(sources.begin(), sources.end(),
                                      [](const std::string& s) { return !s.empty(); });
  if (!any_source) sources.clear();

  const gsc::ParamRegressions regressions =
      gsc::regress_params(points, parse_exclusions(opts.exclude));
  const json payload = gsc::regressions_to_json(regressions, points, sources);

  fs::path out = opts.out;
  if (out.empty() && !opts.bundle.empty())
    out = gsc::ensure_bundle(opts.bundle).regressions() /
          (fs::path(opts.pairs_path).stem().string() + ".json");
  if (!out.empty()) {
    gsc::write_text_atomic(out, gsc::canonical_json(payload));
    std::cerr << "wrote " << out.string() << "\n";
  }
  emit_json(payload);
  return 0;
}

// --- predict ---

struct PredictOptions {
  std::string regressions_path;
  double h = 0.0;
  double epsilon = 1.0;
  std::string primes_path;
};

int cmd_predict(const PredictOptions& opts) {
  const gsc::ParamRegressions regressions =
      gsc::regressions_from_json(read_json_file(opts.regressions_path, "regressions file"));
  gsc::ChinchillaConstants primes;
  if (!opts.primes_path.empty()) primes = gsc::load_chinchilla(opts.primes_path);

  const gsc::ScalingLaw law =
      gsc::blended_law(opts.h, gsc::BlendConfig{opts.epsilon}, primes, regressions);
  const gsc::FrontierExponents exponents = gsc::frontier_exponent(law);
  emit_json(json{{"epsilon", opts.epsilon},
                 {"frontier", json{{"bd", exponents.bd}, {"bn", exponents.bn}}},
                 {"h", opts.h},
                 {"law", gsc::law_to_json(law)}});
  return 0;
}

// --- synth ---

struct SynthOptions {
  std::string law_path;
  std::string n_grid;
  std::string d_grid;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string out;
};

int cmd_synth(const SynthOptions& opts) {
  const gsc::ScalingLaw law = gsc::load_law(opts.law_path);
  const std::vector<double> ns = parse_double_list(opts.n_grid, "--n-grid");
  const std::vector<double> ds = parse_double_list(opts.d_grid, "--d-grid");
  // Noiseless output consumes no randomness, so no seed is drawn for it.
  const std::uint64_t seed = opts.noise > 0.0 ? resolve_seed(opts.seed) : 0;
  const std::vector<gsc::RunRecord> runs = gsc::synth_runs(law, ns, ds, opts.noise, seed);

  std::string text;
  if (opts.format == "csv")
    text = gsc::runs_to_csv(runs);
  else if (opts.format == "jsonl")
    text = gsc::runs_to_jsonl(runs);
  else
    throw gsc::ValidationError("--format must be csv or jsonl, got '" + opts.format + "'");
  if (!opts.out.empty()) gsc::write_text_atomic(opts.out, text);
  std::cout << text;
  return 0;
}

// --- validate ---

struct ValidateOptions {
  std::string root;
  std::string bundle;
};

int cmd_validate(const ValidateOptions& opts) {
  const std::string root = !opts.root.empty() ? opts.root : opts.bundle;
  if (root.empty())
    throw gsc::ValidationError("no bundle directory: pass one or set GSC_BUNDLE_DIR");
  gsc::validate_bundle(gsc::Bundle{root});
  emit_json(json{{"root", root}, {"valid", true}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grammar-derived scaling-law pipeline"};
  app.set_version_flag("--version", std::string(gsc::kToolName) + " " + gsc::kToolVersion);
  app.require_subcommand(1);

  std::string bundle;
  app.add_option("--bundle", bundle, "bundle directory for default artifact locations")
      ->envname("GSC_BUNDLE_DIR");

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "build a grammar and sample a corpus");
  gen_cmd->add_option("--spec", gen.spec_path, "grammar spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--docs", gen.docs, "documents to sample");
  gen_cmd->add_option("--seed", gen.seed, "corpus sampling seed");
  gen_cmd->add_option("--dataset-id", gen.dataset_id, "dataset identifier (default: spec stem)");
  gen_cmd->add_option("--out", gen.out, "corpus output path");
  gen_cmd->add_option("--manifest", gen.manifest, "manifest output path");
  gen_cmd->add_option("--emit-grammar", gen.emit_grammar, "also write the built grammar");

  MeasureOptions measure;
  CLI::App* measure_cmd =
      app.add_subcommand("measure", "compressibility report for a corpus or directory");
  measure_cmd->add_option("target", measure.target, "corpus file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  measure_cmd->add_option("--mode", measure.mode, "serialization: tokens_u16le or decimal_text");
  measure_cmd->add_option("--sample", measure.sample, "max documents to measure");
  measure_cmd->add_option("--seed", measure.seed, "document sampling seed");
  measure_cmd->add_option("--level", measure.level, "compression level 1-9");
  measure_cmd->add_option("--out", measure.out, "report output path (directory input: a directory)");

  FitOptions fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a scaling law to run records");
  fit_cmd->add_option("runs", fit.runs_path, "run records (.csv or .jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--space", fit.space, "residual space: linear or log");
  fit_cmd->add_option("--delta", fit.delta, "Huber threshold (0 = per-space default)");
  fit_cmd->add_option("--max-iters", fit.max_iters, "function evaluation budget per start");
  fit_cmd->add_option("--tolerance", fit.tolerance, "scaled gradient threshold");
  fit_cmd->add_option("--out", fit.out, "fit artifact output path");

  FrontierOptions frontier;
  CLI::App* frontier_cmd =
      app.add_subcommand("frontier", "compute-optimal (N, D) per compute budget, as CSV");
  frontier_cmd->add_option("law", frontier.law_path, "law or fit artifact JSON")
      ->required()
      ->check(CLI::ExistingFile);
  frontier_cmd->add_option("--budgets", frontier.budgets, "comma-separated FLOP budgets")
      ->required();
  frontier_cmd->add_option("--coeff", frontier.coeff, "FLOPs per parameter-token");

  RegressOptions regress;
  CLI::App* regress_cmd =
      app.add_subcommand("regress", "linear models of law parameters vs compressibility");
  regress_cmd->add_option("pairs", regress.pairs_path, "JSON array of {h, fit|law} entries")
      ->required()
      ->check(CLI::ExistingFile);
  regress_cmd->add_option("--exclude", regress.exclude,
                          "drop point index from one parameter, as param:index");
  regress_cmd->add_option("--out", regress.out, "regressions artifact output path");

  PredictOptions predict;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "data-dependent law at a compressibility value");
  // --h would collide with the default -h help short flag.
  predict_cmd->set_help_flag("--help", "print this help message and exit");
  predict_cmd->add_option("regressions", predict.regressions_path, "regressions artifact JSON")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--h", predict.h, "compressibility")->required();
  predict_cmd->add_option("--epsilon", predict.epsilon, "blend weight in [0, 1]");
  predict_cmd->add_option("--primes", predict.primes_path, "reference constants JSON")
      ->check(CLI::ExistingFile);

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "synthetic run records from a law");
  synth_cmd->add_option("law", synth.law_path, "law or fit artifact JSON")
      ->required()
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--n-grid", synth.n_grid, "comma-separated parameter counts")->required();
  synth_cmd->add_option("--d-grid", synth.d_grid, "comma-separated token counts")->required();
  synth_cmd->add_option("--noise", synth.noise, "log-normal noise sigma");
  synth_cmd->add_option("--seed", synth.seed, "noise seed");
  synth_cmd->add_option("--format", synth.format, "csv or jsonl");
  synth_cmd->add_option("--out", synth.out, "also write the records here");

  ValidateOptions validate;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "referential integrity check of a bundle");
  validate_cmd->add_option("root", validate.root, "bundle directory (default: --bundle)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  gen.bundle = bundle;
  fit.bundle = bundle;
  regress.bundle = bundle;
  validate.bundle = bundle;

  try {
    if (app.got_subcommand(gen_cmd)) return cmd_gen(gen);
    if (app.got_subcommand(measure_cmd)) return cmd_measure(measure);
    if (app.got_subcommand(fit_cmd)) return cmd_fit(fit);
    if (app.got_subcommand(frontier_cmd)) return cmd_frontier(frontier);
    if (app.got_subcommand(regress_cmd)) return cmd_regress(regress);
    if (app.got_subcommand(predict_cmd)) return cmd_predict(predict);
    if (app.got_subcommand(synth_cmd)) return cmd_synth(synth);
    if (app.got_subcommand(validate_cmd)) return cmd_validate(validate);
  } catch (const gsc::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gsc::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gsc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
