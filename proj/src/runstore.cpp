#include "gsc/runstore.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include "gsc/errors.hpp"
#include "gsc/version.hpp"

namespace gsc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string double_to_string(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) throw ValidationError("failed reading '" + path.string() + "'");
  return std::move(buffer).str();
}

json parse_json_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(what + ": malformed JSON");
  return j;
}

const json& require_field(const json& j, const char* key, const std::string& what) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(what + ": missing field '" + key + "'");
  return *it;
}

double get_double(const json& j, const char* key, const std::string& what) {
  const json& v = require_field(j, key, what);
  if (!v.is_number()) throw ValidationError(what + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_u64(const json& j, const char* key, const std::string& what) {
  const json& v = require_field(j, key, what);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ValidationError(what + ": field '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint32_t get_u32(const json& j, const char* key, const std::string& what) {
  const std::uint64_t v = get_u64(j, key, what);
  if (v > UINT32_MAX)
    throw ValidationError(what + ": field '" + key + "' exceeds 32-bit range");
  return static_cast<std::uint32_t>(v);
}

std::string get_string(const json& j, const char* key, const std::string& what) {
  const json& v = require_field(j, key, what);
  if (!v.is_string()) throw ValidationError(what + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const char* key, const std::string& what) {
  const json& v = require_field(j, key, what);
  if (!v.is_boolean()) throw ValidationError(what + ": field '" + key + "' must be a boolean");
  return v.get<bool>();
}

void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8)
    out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

std::uint32_t take_u32le(const std::string& data, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b)
    v = (v << 8) | static_cast<std::uint8_t>(data[offset + b]);
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_full_double(std::string_view s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && !s.empty();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

// Shared field checks for one run record; appends problems to errors.
void check_run_fields(const RunRecord& r, std::size_t line, std::vector<std::string>& errors) {
  const std::string at = "line " + std::to_string(line) + ": ";
  if (r.dataset_id.empty()) errors.push_back(at + "dataset_id must be non-empty");
  if (!(r.params_n > 0.0) || !std::isfinite(r.params_n))
    errors.push_back(at + "params_n must be positive and finite");
  if (!(r.tokens_d > 0.0) || !std::isfinite(r.tokens_d))
    errors.push_back(at + "tokens_d must be positive and finite");
  if (!(r.final_loss > 0.0) || !std::isfinite(r.final_loss))
    errors.push_back(at + "final_loss must be positive and finite");
}

[[noreturn]] void throw_ingest_errors(const std::vector<std::string>& errors) {
  std::string message = "run ingestion failed:";
  for (const std::string& e : errors) message += "\n  " + e;
  throw ValidationError(message);
}

Symbol symbol_from_string(std::string_view s, const std::string& what) {
  if (s.size() < 2 || (s[0] != 't' && s[0] != 'n'))
    throw ValidationError(what + ": bad symbol '" + std::string(s) + "'");
  std::uint32_t id = 0;
  const char* begin = s.data() + 1;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, id);
  if (res.ec != std::errc() || res.ptr != end)
    throw ValidationError(what + ": bad symbol '" + std::string(s) + "'");
  return s[0] == 't' ? Symbol::terminal(id) : Symbol::nonterminal(id);
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out.good()) throw ValidationError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

json spec_to_json(const GrammarSpec& spec) {
  return json{{"context_length", spec.context_length},
              {"max_rhs_len", spec.max_rhs_len},
              {"max_rhs_options", spec.max_rhs_options},
              {"num_nonterminals", spec.num_nonterminals},
              {"num_terminals", spec.num_terminals},
              {"seed", spec.seed}};
}

GrammarSpec spec_from_json(const json& j) {
  const std::string what = "grammar spec";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  GrammarSpec spec;
  spec.num_nonterminals = get_u32(j, "num_nonterminals", what);
  spec.num_terminals = get_u32(j, "num_terminals", what);
  spec.max_rhs_options = get_u32(j, "max_rhs_options", what);
  spec.max_rhs_len = get_u32(j, "max_rhs_len", what);
  spec.context_length = get_u32(j, "context_length", what);
  spec.seed = j.contains("seed") ? get_u64(j, "seed", what) : 0;
  validate_spec(spec);
  return spec;
}

GrammarSpec load_spec(const fs::path& path) {
  return spec_from_json(parse_json_text(read_file(path), "grammar spec '" + path.string() + "'"));
}

json pcfg_to_json(const Pcfg& pcfg) {
  validate_pcfg(pcfg);
  json productions = json::array();
  for (const auto& prods : pcfg.productions) {
    json row = json::array();
    const std::string prob = "1/" + std::to_string(prods.size());
    for (const Production& p : prods) {
      json rhs = json::array();
      for (const Symbol& s : p.rhs)
        rhs.push_back((s.is_terminal() ? "t" : "n") + std::to_string(s.id));
      row.push_back(json{{"prob", prob}, {"rhs", rhs}});
    }
    productions.push_back(row);
  }
  return json{{"productions", productions},
              {"spec", spec_to_json(pcfg.spec)},
              {"start", pcfg.start}};
}

Pcfg pcfg_from_json(const json& j) {
  const std::string what = "grammar";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  Pcfg pcfg;
  pcfg.spec = spec_from_json(require_field(j, "spec", what));
  pcfg.start = get_u32(j, "start", what);
  const json& productions = require_field(j, "productions", what);
  if (!productions.is_array()) throw ValidationError(what + ": 'productions' must be an array");
  for (std::size_t nt = 0; nt < productions.size(); ++nt) {
    const json& row = productions[nt];
    if (!row.is_array() || row.empty())
      throw ValidationError(what + ": productions of nonterminal " + std::to_string(nt) +
                            " must be a non-empty array");
    const std::string expected_prob = "1/" + std::to_string(row.size());
    std::vector<Production> prods;
    for (const json& pj : row) {
      const std::string prob = get_string(pj, "prob", what);
      if (prob != expected_prob)
        throw ValidationError(what + ": probability '" + prob + "' does not match '" +
                              expected_prob + "'");
      Production p;
      p.lhs = static_cast<std::uint32_t>(nt);
      p.prob = 1.0 / static_cast<double>(row.size());
      const json& rhs = require_field(pj, "rhs", what);
      if (!rhs.is_array()) throw ValidationError(what + ": 'rhs' must be an array");
      for (const json& sym : rhs) {
        if (!sym.is_string()) throw ValidationError(what + ": RHS symbols must be strings");
        p.rhs.push_back(symbol_from_string(sym.get<std::string>(), what));
      }
      prods.push_back(std::move(p));
    }
    pcfg.productions.push_back(std::move(prods));
  }
  validate_pcfg(pcfg);
  return pcfg;
}

json manifest_to_json(const DatasetManifest& manifest) {
  json j = manifest.extra.is_object() ? manifest.extra : json::object();
  j["dataset_id"] = manifest.dataset_id;
  j["corpus_path"] = manifest.corpus_path;
  if (manifest.grammar)
    j["provenance"] = json{{"spec", spec_to_json(*manifest.grammar)}, {"type", "grammar"}};
  else
    j["provenance"] = json{{"type", "external"}};
  if (!manifest.compressibility_path.empty())
    j["compressibility_path"] = manifest.compressibility_path;
  j["created_at"] = manifest.created_at;
  j["tool_version"] = manifest.tool_version;
  j["rng_id"] = manifest.rng_id;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  const std::string what = "manifest";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  DatasetManifest m;
  m.dataset_id = get_string(j, "dataset_id", what);
  if (m.dataset_id.empty()) throw ValidationError(what + ": dataset_id must be non-empty");
  m.corpus_path = get_string(j, "corpus_path", what);
  if (m.corpus_path.empty()) throw ValidationError(what + ": corpus_path must be non-empty");
  const json& provenance = require_field(j, "provenance", what);
  const std::string type = get_string(provenance, "type", what + " provenance");
  if (type == "grammar")
    m.grammar = spec_from_json(require_field(provenance, "spec", what + " provenance"));
  else if (type != "external")
    throw ValidationError(what + ": provenance type must be 'grammar' or 'external'");
  if (j.contains("compressibility_path"))
    m.compressibility_path = get_string(j, "compressibility_path", what);
  m.created_at = get_string(j, "created_at", what);
  m.tool_version = get_string(j, "tool_version", what);
  m.rng_id = j.contains("rng_id") ? get_string(j, "rng_id", what) : "";
  m.extra = json::object();
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset_id" || key == "corpus_path" || key == "provenance" ||
        key == "compressibility_path" || key == "created_at" || key == "tool_version" ||
        key == "rng_id")
      continue;
    m.extra[key] = value;
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_text_atomic(path, canonical_json(manifest_to_json(manifest)));
}

DatasetManifest load_manifest(const fs::path& path) {
  return manifest_from_json(parse_json_text(read_file(path), "manifest '" + path.string() + "'"));
}

DatasetManifest load_manifest_checked(const fs::path& path) {
  DatasetManifest m = load_manifest(path);
  fs::path corpus = m.corpus_path;
  if (corpus.is_relative()) corpus = path.parent_path() / corpus;
  if (!fs::exists(corpus))
    throw ValidationError("manifest '" + path.string() + "' references missing corpus '" +
                          corpus.string() + "'");
  return m;
}

void write_corpus(const Corpus& corpus, const fs::path& path) {
  if (corpus.num_docs == 0) throw ValidationError("refusing to write an empty corpus");
  if (corpus.num_docs > UINT32_MAX)
    throw ValidationError("corpus exceeds the format's 32-bit document count");
  if (corpus.tokens.size() !=
      static_cast<std::size_t>(corpus.num_docs) * corpus.context_length)
    throw ValidationError("corpus token buffer does not match num_docs * context_length");
  for (std::uint16_t t : corpus.tokens)
    if (t >= corpus.vocab_size)
      throw ValidationError("corpus contains token IDs outside the vocabulary");

  std::string out;
  out.reserve(16 + corpus.tokens.size() * 2);
  out += "GSC1";
  put_u32le(out, corpus.context_length);
  put_u32le(out, static_cast<std::uint32_t>(corpus.num_docs));
  put_u32le(out, corpus.vocab_size);
  for (std::uint16_t t : corpus.tokens) put_u16le(out, t);
  write_text_atomic(path, out);
}

Corpus read_corpus(const fs::path& path) {
  const std::string data = read_file(path);
  const std::string what = "corpus '" + path.string() + "'";
  if (data.size() < 16 || data.compare(0, 4, "GSC1") != 0)
    throw ValidationError(what + ": not a GSC1 file");
  Corpus corpus;
  corpus.context_length = take_u32le(data, 4);
  corpus.num_docs = take_u32le(data, 8);
  corpus.vocab_size = take_u32le(data, 12);
  if (corpus.context_length == 0 || corpus.num_docs == 0 || corpus.vocab_size == 0)
    throw ValidationError(what + ": header fields must be positive");
  const std::uint64_t count =
      static_cast<std::uint64_t>(corpus.num_docs) * corpus.context_length;
  if (data.size() != 16 + count * 2)
    throw ValidationError(what + ": size does not match header");
  corpus.tokens.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t off = 16 + i * 2;
    const std::uint16_t t = static_cast<std::uint16_t>(
        static_cast<std::uint8_t>(data[off]) |
        (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data[off + 1])) << 8));
    if (t >= corpus.vocab_size)
      throw ValidationError(what + ": token ID outside the vocabulary");
    corpus.tokens.push_back(t);
  }
  return corpus;
}

json report_to_json(const CompressibilityReport& report) {
  return json{{"compressor", report.compressor},
              {"doc_indices", report.doc_indices},
              {"mean", report.mean},
              {"median", report.median},
              {"mode", to_string(report.mode)},
              {"ratios", report.ratios},
              {"sample_size", report.sample_size},
              {"stddev", report.stddev}};
}

CompressibilityReport report_from_json(const json& j) {
  const std::string what = "compressibility report";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  CompressibilityReport r;
  r.compressor = get_string(j, "compressor", what);
  r.mean = get_double(j, "mean", what);
  r.median = get_double(j, "median", what);
  r.stddev = get_double(j, "stddev", what);
  r.sample_size = get_u64(j, "sample_size", what);
  r.mode = serialization_mode_from_string(get_string(j, "mode", what));
  const json& ratios = require_field(j, "ratios", what);
  const json& indices = require_field(j, "doc_indices", what);
  if (!ratios.is_array() || !indices.is_array() || ratios.size() != indices.size() ||
      ratios.size() != r.sample_size)
    throw ValidationError(what + ": ratios/doc_indices must be arrays of sample_size entries");
  for (const json& v : ratios) r.ratios.push_back(v.get<double>());
  for (const json& v : indices) r.doc_indices.push_back(v.get<std::uint64_t>());
  return r;
}

RunFormat run_format_from_path(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return RunFormat::Csv;
  if (ext == ".jsonl") return RunFormat::Jsonl;
  throw ValidationError("cannot infer run format from extension '" + ext +
                        "' (expected .csv or .jsonl)");
}

std::vector<RunRecord> parse_runs_csv(const std::string& text) {
  const std::vector<std::string_view> lines = split(text, '\n');
  std::vector<std::string> errors;
  std::vector<RunRecord> runs;

  if (lines.empty() || trim(lines[0]).empty()) {
    errors.push_back("line 1: missing header");
    throw_ingest_errors(errors);
  }
  {
    const std::vector<std::string_view> head = split(trim(lines[0]), ',');
    const char* expected[] = {"dataset_id", "params_n", "tokens_d", "final_loss"};
    bool ok = head.size() == 4;
    for (std::size_t i = 0; ok && i < 4; ++i) ok = trim(head[i]) == expected[i];
    if (!ok) {
      errors.push_back("line 1: header must be 'dataset_id,params_n,tokens_d,final_loss'");
      throw_ingest_errors(errors);
    }
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    const std::size_t line_no = li + 1;
    const std::vector<std::string_view> fields = split(line, ',');
    if (fields.size() != 4) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(fields.size()));
      continue;
    }
    RunRecord r;
    r.dataset_id = std::string(trim(fields[0]));
    const char* names[] = {"params_n", "tokens_d", "final_loss"};
    double* slots[] = {&r.params_n, &r.tokens_d, &r.final_loss};
    bool numbers_ok = true;
    for (int k = 0; k < 3; ++k) {
      if (!parse_full_double(trim(fields[k + 1]), *slots[k])) {
        errors.push_back("line " + std::to_string(line_no) + ": " + names[k] +
                         " is not a number");
        numbers_ok = false;
      }
    }
    if (!numbers_ok) continue;
    const std::size_t before = errors.size();
    check_run_fields(r, line_no, errors);
    if (errors.size() == before) runs.push_back(std::move(r));
  }
  if (!errors.empty()) throw_ingest_errors(errors);
  if (runs.empty()) throw ValidationError("run ingestion failed:\n  no data rows found");
  return runs;
}

std::vector<RunRecord> parse_runs_jsonl(const std::string& text) {
  const std::vector<std::string_view> lines = split(text, '\n');
  std::vector<std::string> errors;
  std::vector<RunRecord> runs;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    const std::size_t line_no = li + 1;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      errors.push_back(at + "not a JSON object");
      continue;
    }
    RunRecord r;
    try {
      r.dataset_id = get_string(j, "dataset_id", "run");
      r.params_n = get_double(j, "params_n", "run");
      r.tokens_d = get_double(j, "tokens_d", "run");
      r.final_loss = get_double(j, "final_loss", "run");
    } catch (const ValidationError& e) {
      errors.push_back(at + e.what());
      continue;
    }
    const std::size_t before = errors.size();
    check_run_fields(r, line_no, errors);
    if (errors.size() == before) runs.push_back(std::move(r));
  }
  if (!errors.empty()) throw_ingest_errors(errors);
  if (runs.empty()) throw ValidationError("run ingestion failed:\n  no data rows found");
  return runs;
}

std::vector<RunRecord> ingest_runs(const fs::path& path, RunFormat format) {
  const std::string text = read_file(path);
  return format == RunFormat::Csv ? parse_runs_csv(text) : parse_runs_jsonl(text);
}

std::string runs_to_csv(std::span<const RunRecord> runs) {
  std::string out = "dataset_id,params_n,tokens_d,final_loss\n";
  for (const RunRecord& r : runs) {
    if (r.dataset_id.find_first_of(",\n\r") != std::string::npos)
      throw ValidationError("dataset_id must not contain commas or newlines");
    out += r.dataset_id + ',' + double_to_string(r.params_n) + ',' +
           double_to_string(r.tokens_d) + ',' + double_to_string(r.final_loss) + '\n';
  }
  return out;
}

std::string runs_to_jsonl(std::span<const RunRecord> runs) {
  std::string out;
  for (const RunRecord& r : runs) {
    const json j{{"dataset_id", r.dataset_id},
                 {"final_loss", r.final_loss},
                 {"params_n", r.params_n},
                 {"tokens_d", r.tokens_d}};
    out += j.dump() + '\n';
  }
  return out;
}

json law_to_json(const ScalingLaw& law) {
  return json{{"a", law.a}, {"alpha", law.alpha}, {"b", law.b}, {"beta", law.beta},
              {"e", law.e}};
}

ScalingLaw law_from_json(const json& j) {
  const std::string what = "law";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  if (j.contains("law")) return law_from_json(j.at("law"));
  ScalingLaw law;
  law.e = get_double(j, "e", what);
  law.a = get_double(j, "a", what);
  law.b = get_double(j, "b", what);
  law.alpha = get_double(j, "alpha", what);
  law.beta = get_double(j, "beta", what);
  validate_law(law);
  return law;
}

ScalingLaw load_law(const fs::path& path) {
  return law_from_json(parse_json_text(read_file(path), "law '" + path.string() + "'"));
}

json fit_result_to_json(const FitResult& result, const FitConfig& config,
                        const std::string& runs_path) {
  const double delta = config.huber_delta > 0.0
                           ? config.huber_delta
                           : (config.residual_space == ResidualSpace::Linear
                                  ? kDefaultHuberDeltaLinear
                                  : kDefaultHuberDeltaLog);
  json grid;
  if (config.init_grid.empty()) {
    grid = "default";
  } else {
    grid = json::array();
    for (const ScalingLaw& init : config.init_grid) grid.push_back(law_to_json(init));
  }
  return json{{"chosen_init", result.chosen_init},
              {"config", json{{"huber_delta", delta},
                              {"init_grid", grid},
                              {"max_iters", config.max_iters},
                              {"residual_space", to_string(config.residual_space)},
                              {"tolerance", config.tolerance}}},
              {"converged", result.converged},
              {"created_at", utc_timestamp_now()},
              {"law", law_to_json(result.law)},
              {"num_runs_used", result.num_runs_used},
              {"objective", result.objective},
              {"runs_path", runs_path},
              {"tool_version", kToolVersion}};
}

FitResult fit_result_from_json(const json& j) {
  const std::string what = "fit result";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  FitResult r;
  r.law = law_from_json(require_field(j, "law", what));
  r.objective = get_double(j, "objective", what);
  r.chosen_init = get_u32(j, "chosen_init", what);
  r.converged = get_bool(j, "converged", what);
  r.num_runs_used = get_u64(j, "num_runs_used", what);
  return r;
}

json linear_fit_to_json(const LinearFit& fit) {
  return json{{"excluded", fit.excluded}, {"intercept", fit.intercept},
              {"p_value", fit.p_value},   {"points_used", fit.points_used},
              {"r2", fit.r2},             {"slope", fit.slope}};
}

LinearFit linear_fit_from_json(const json& j) {
  const std::string what = "linear fit";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  LinearFit fit;
  fit.slope = get_double(j, "slope", what);
  fit.intercept = get_double(j, "intercept", what);
  fit.p_value = get_double(j, "p_value", what);
  fit.r2 = get_double(j, "r2", what);
  fit.points_used = get_u64(j, "points_used", what);
  if (j.contains("excluded"))
    for (const json& v : j.at("excluded")) fit.excluded.push_back(v.get<std::uint64_t>());
  return fit;
}

json regressions_to_json(const ParamRegressions& regressions, std::span<const HLawPoint> points,
                         std::span<const std::string> sources) {
  if (!sources.empty() && sources.size() != points.size())
    throw ValidationError("sources must be empty or match the number of points");
  json pts = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    json p{{"h", points[i].h}, {"law", law_to_json(points[i].law)}};
    if (!sources.empty()) p["source"] = sources[i];
    pts.push_back(p);
  }
  json params;
  for (LawParam param : kAllLawParams)
    params[to_string(param)] = linear_fit_to_json(regressions.fit(param));
  return json{{"created_at", utc_timestamp_now()},
              {"params", params},
              {"points", pts},
              {"tool_version", kToolVersion}};
}

ParamRegressions regressions_from_json(const json& j) {
  const std::string what = "regressions";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  const json& params = require_field(j, "params", what);
  ParamRegressions out;
  for (LawParam param : kAllLawParams)
    out.fit(param) = linear_fit_from_json(require_field(params, to_string(param), what));
  return out;
}

json chinchilla_to_json(const ChinchillaConstants& constants) {
  return json{{"a", constants.a}, {"alpha", constants.alpha}, {"b", constants.b},
              {"beta", constants.beta}, {"e", constants.e}};
}

ChinchillaConstants chinchilla_from_json(const json& j) {
  const std::string what = "reference constants";
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  ChinchillaConstants c;
  c.e = get_double(j, "e", what);
  c.a = get_double(j, "a", what);
  c.b = get_double(j, "b", what);
  c.alpha = get_double(j, "alpha", what);
  c.beta = get_double(j, "beta", what);
  return c;
}

ChinchillaConstants load_chinchilla(const fs::path& path) {
  return chinchilla_from_json(
      parse_json_text(read_file(path), "reference constants '" + path.string() + "'"));
}

Bundle ensure_bundle(const fs::path& root) {
  Bundle bundle{root};
  for (const fs::path& dir : {bundle.manifests(), bundle.corpora(), bundle.runs(),
                              bundle.fits(), bundle.regressions()})
    fs::create_directories(dir);
  return bundle;
}

void validate_bundle(const Bundle& bundle) {
  std::vector<std::string> problems;
  const auto resolve = [](const fs::path& base, const std::string& ref) {
    fs::path p = ref;
    return p.is_relative() ? base / p : p;
  };

  for (const fs::path& file : sorted_json_files(bundle.manifests())) {
    try {
      const DatasetManifest m = load_manifest(file);
      if (!fs::exists(resolve(file.parent_path(), m.corpus_path)))
        problems.push_back(file.filename().string() + ": missing corpus '" + m.corpus_path +
                           "'");
      if (!m.compressibility_path.empty() &&
          !fs::exists(resolve(file.parent_path(), m.compressibility_path)))
        problems.push_back(file.filename().string() + ": missing compressibility report '" +
                           m.compressibility_path + "'");
    } catch (const Error& e) {
      problems.push_back(file.filename().string() + ": " + e.what());
    }
  }
  for (const fs::path& file : sorted_json_files(bundle.fits())) {
    try {
      const json j = parse_json_text(read_file(file), file.string());
      const std::string runs_path = get_string(j, "runs_path", "fit result");
      if (!fs::exists(resolve(file.parent_path(), runs_path)))
        problems.push_back(file.filename().string() + ": missing runs file '" + runs_path + "'");
    } catch (const Error& e) {
      problems.push_back(file.filename().string() + ": " + e.what());
    }
  }
  for (const fs::path& file : sorted_json_files(bundle.regressions())) {
    try {
      const json j = parse_json_text(read_file(file), file.string());
      if (j.contains("points")) {
        for (const json& p : j.at("points")) {
          if (!p.contains("source")) continue;
          const std::string source = p.at("source").get<std::string>();
          if (!fs::exists(resolve(file.parent_path(), source)))
            problems.push_back(file.filename().string() + ": missing fit source '" + source +
                               "'");
        }
      }
    } catch (const Error& e) {
      problems.push_back(file.filename().string() + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string message = "bundle validation failed:";
    for (const std::string& p : problems) message += "\n  " + p;
    throw ValidationError(message);
  }
}

}  // namespace gsc
