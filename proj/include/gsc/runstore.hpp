#pragma once

// Persistence: canonical JSON artifacts (manifests, grammars, fit and
// regression results), the GSC1 binary corpus format, and CSV/JSONL run
// ingestion. All writes are atomic (temp file + rename) and all JSON is
// emitted with sorted keys and shortest round-trip floats, so re-encoding an
// unchanged artifact is byte-identical.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsc/complexity.hpp"
#include "gsc/datadep.hpp"
#include "gsc/grammar.hpp"
#include "gsc/lawfit.hpp"

namespace gsc {

// RFC 3339 UTC timestamp, second resolution.
std::string utc_timestamp_now();

void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// Canonical dump: sorted keys, two-space indent, trailing newline.
std::string canonical_json(const nlohmann::json& j);

// --- grammar specs and grammars ---

nlohmann::json spec_to_json(const GrammarSpec& spec);
GrammarSpec spec_from_json(const nlohmann::json& j);
GrammarSpec load_spec(const std::filesystem::path& path);

// Production probabilities are stored as exact "1/k" strings.
nlohmann::json pcfg_to_json(const Pcfg& pcfg);
Pcfg pcfg_from_json(const nlohmann::json& j);

// --- dataset manifests ---

struct DatasetManifest {
  std::string dataset_id;
  // Grammar-generated datasets carry their spec; external ones do not.
  std::optional<GrammarSpec> grammar;
  std::string corpus_path;            // relative to the manifest's directory
  std::string compressibility_path;   // empty = not yet measured
  std::string created_at;
  std::string tool_version;
  std::string rng_id;
  // Fields this version does not understand, preserved verbatim on rewrite.
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);
// load + existence check of the referenced corpus file.
DatasetManifest load_manifest_checked(const std::filesystem::path& path);

// --- GSC1 corpus files ---
// Layout: "GSC1" magic, then context_length, num_docs, vocab_size as
// little-endian uint32, then num_docs*context_length little-endian uint16
// token IDs.

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path);

// --- compressibility reports ---

nlohmann::json report_to_json(const CompressibilityReport& report);
CompressibilityReport report_from_json(const nlohmann::json& j);

// --- run records ---

enum class RunFormat { Csv, Jsonl };

RunFormat run_format_from_path(const std::filesystem::path& path);

// All-or-nothing: every malformed line is reported with its line number in
// one ValidationError and nothing is returned.
std::vector<RunRecord> ingest_runs(const std::filesystem::path& path, RunFormat format);
std::vector<RunRecord> parse_runs_csv(const std::string& text);
std::vector<RunRecord> parse_runs_jsonl(const std::string& text);
std::string runs_to_csv(std::span<const RunRecord> runs);
std::string runs_to_jsonl(std::span<const RunRecord> runs);

// --- laws, fit results, regressions ---

nlohmann::json law_to_json(const ScalingLaw& law);
// Accepts either a bare law object or any artifact with a "law" field.
ScalingLaw law_from_json(const nlohmann::json& j);
ScalingLaw load_law(const std::filesystem::path& path);

nlohmann::json fit_result_to_json(const FitResult& result, const FitConfig& config,
                                  const std::string& runs_path);
FitResult fit_result_from_json(const nlohmann::json& j);

nlohmann::json linear_fit_to_json(const LinearFit& fit);
LinearFit linear_fit_from_json(const nlohmann::json& j);

// sources: one entry per input point, e.g. the fit file it came from.
nlohmann::json regressions_to_json(const ParamRegressions& regressions,
                                   std::span<const HLawPoint> points,
                                   std::span<const std::string> sources);
ParamRegressions regressions_from_json(const nlohmann::json& j);

nlohmann::json chinchilla_to_json(const ChinchillaConstants& constants);
ChinchillaConstants chinchilla_from_json(const nlohmann::json& j);
ChinchillaConstants load_chinchilla(const std::filesystem::path& path);

// --- experiment bundles ---
// Directory layout: manifests/, corpora/, runs/, fits/, regressions/.

struct Bundle {
  std::filesystem::path root;

  std::filesystem::path manifests() const { return root / "manifests"; }
  std::filesystem::path corpora() const { return root / "corpora"; }
  std::filesystem::path runs() const { return root / "runs"; }
  std::filesystem::path fits() const { return root / "fits"; }
  std::filesystem::path regressions() const { return root / "regressions"; }
};

// Creates the directory layout (idempotent).
Bundle ensure_bundle(const std::filesystem::path& root);

// Referential integrity: manifests point at existing corpora, fit results at
// existing run files, regressions at existing fit files. Throws
// ValidationError listing every dangling reference.
void validate_bundle(const Bundle& bundle);

}  // namespace gsc
