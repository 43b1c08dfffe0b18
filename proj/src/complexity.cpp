#include "gsc/complexity.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <string>

#include "gsc/errors.hpp"
#include "gsc/rng.hpp"
#include "gsc/stats.hpp"

namespace gsc {

namespace {

// First `count` elements of a seeded shuffle of [0, n): partial Fisher-Yates,
// identical on every platform.
std::vector<std::uint64_t> sample_indices(std::uint64_t n, std::uint64_t count,
                                          std::uint64_t seed) {
  std::vector<std::uint64_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::uint64_t{0});
  Xoshiro256StarStar rng(seed);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

CompressibilityReport finalize_report(std::vector<double> ratios,
                                      std::vector<std::uint64_t> indices,
                                      SerializationMode mode, int level) {
  CompressibilityReport report;
  report.mean = stats::mean(ratios);
  report.median = stats::median(ratios);
  report.stddev = stats::sample_stddev(ratios);
  report.sample_size = ratios.size();
  report.mode = mode;
  report.compressor = compressor_id(level);
  report.ratios = std::move(ratios);
  report.doc_indices = std::move(indices);
  return report;
}

void validate_options(const MeasureOptions& options) {
  if (options.max_sample == 0) throw ValidationError("max_sample must be >= 1");
  if (options.level < 1 || options.level > 9)
    throw ValidationError("compression level must lie in [1, 9]");
}

}  // namespace

const char* to_string(SerializationMode mode) {
  switch (mode) {
    case SerializationMode::TokensU16Le: return "tokens_u16le";
    case SerializationMode::DecimalText: return "decimal_text";
    case SerializationMode::RawBytes: return "raw_bytes";
  }
  throw ValidationError("unknown serialization mode");
}

SerializationMode serialization_mode_from_string(std::string_view name) {
  if (name == "tokens_u16le") return SerializationMode::TokensU16Le;
  if (name == "decimal_text") return SerializationMode::DecimalText;
  if (name == "raw_bytes") return SerializationMode::RawBytes;
  throw ValidationError("unknown serialization mode '" + std::string(name) + "'");
}

std::string compressor_id(int level) {
  return std::string("zlib-") + ZLIB_VERSION + "/deflate/gzip/level" + std::to_string(level);
}

std::vector<std::uint8_t> serialize_doc(std::span<const std::uint16_t> doc,
                                        SerializationMode mode) {
  if (doc.empty()) throw ValidationError("cannot serialize an empty document");
  std::vector<std::uint8_t> out;
  switch (mode) {
    case SerializationMode::TokensU16Le:
      out.reserve(doc.size() * 2);
      for (std::uint16_t t : doc) {
        out.push_back(static_cast<std::uint8_t>(t & 0xFF));
        out.push_back(static_cast<std::uint8_t>(t >> 8));
      }
      return out;
    case SerializationMode::DecimalText: {
      std::string text;
      text.reserve(doc.size() * 4);
      for (std::size_t i = 0; i < doc.size(); ++i) {
        if (i > 0) text.push_back(' ');
        text += std::to_string(doc[i]);
      }
      text.push_back('\n');
      out.assign(text.begin(), text.end());
      return out;
    }
    case SerializationMode::RawBytes:
      throw ValidationError("raw_bytes mode applies to byte payloads, not token documents");
  }
  throw ValidationError("unknown serialization mode");
}

std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> payload, int level) {
  if (payload.empty()) throw ValidationError("cannot compress an empty payload");
  if (level < 1 || level > 9) throw ValidationError("compression level must lie in [1, 9]");

  z_stream stream;
  std::memset(&stream, 0, sizeof(stream));
  // windowBits 15+16 selects the gzip container.
  if (deflateInit2(&stream, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw NumericalError("deflateInit2 failed");

  gz_header header;
  std::memset(&header, 0, sizeof(header));
  header.time = 0;
  header.os = 3;  // unix, fixed for byte-stable output
  if (deflateSetHeader(&stream, &header) != Z_OK) {
    deflateEnd(&stream);
    throw NumericalError("deflateSetHeader failed");
  }

  std::vector<std::uint8_t> out(deflateBound(&stream, static_cast<uLong>(payload.size())));
  stream.next_in = const_cast<Bytef*>(payload.data());
  stream.avail_in = static_cast<uInt>(payload.size());
  stream.next_out = out.data();
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&stream, Z_FINISH);
  if (rc != Z_STREAM_END) {
    deflateEnd(&stream);
    throw NumericalError("deflate failed with code " + std::to_string(rc));
  }
  out.resize(stream.total_out);
  deflateEnd(&stream);
  return out;
}

double doc_ratio(std::span<const std::uint8_t> payload, int level) {
  const std::vector<std::uint8_t> compressed = gzip_compress(payload, level);
  return static_cast<double>(compressed.size()) / static_cast<double>(payload.size());
}

CompressibilityReport corpus_compressibility(const Corpus& corpus, SerializationMode mode,
                                             const MeasureOptions& options) {
  validate_options(options);
  if (corpus.num_docs == 0) throw ValidationError("corpus has no documents");
  if (mode == SerializationMode::RawBytes)
    throw ValidationError("raw_bytes mode requires byte payloads; use payload_compressibility");

  const std::uint64_t count = std::min(options.max_sample, corpus.num_docs);
  std::vector<std::uint64_t> indices = sample_indices(corpus.num_docs, count, options.seed);
  std::vector<double> ratios;
  ratios.reserve(indices.size());
  for (std::uint64_t i : indices)
    ratios.push_back(doc_ratio(serialize_doc(corpus.doc(i), mode), options.level));
  return finalize_report(std::move(ratios), std::move(indices), mode, options.level);
}

CompressibilityReport payload_compressibility(std::span<const std::vector<std::uint8_t>> docs,
                                              const MeasureOptions& options) {
  validate_options(options);
  if (docs.empty()) throw ValidationError("no documents to measure");

  const std::uint64_t count = std::min<std::uint64_t>(options.max_sample, docs.size());
  std::vector<std::uint64_t> indices = sample_indices(docs.size(), count, options.seed);
  std::vector<double> ratios;
  ratios.reserve(indices.size());
  for (std::uint64_t i : indices)
    ratios.push_back(doc_ratio(docs[static_cast<std::size_t>(i)], options.level));
  return finalize_report(std::move(ratios), std::move(indices), SerializationMode::RawBytes,
                         options.level);
}

}  // namespace gsc
