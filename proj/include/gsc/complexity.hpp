#pragma once

// DEFLATE-compressibility measurement over token corpora.
//
// A document is serialized to bytes, gzip-compressed with fixed header
// fields, and scored as compressed_size / original_size. Smaller means more
// compressible. Ratios above 1 are possible for incompressible payloads and
// are reported as-is. The headline corpus statistic is the mean ratio over a
// seeded without-replacement sample of documents.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsc/grammar.hpp"

namespace gsc {

enum class SerializationMode {
  TokensU16Le,  // token IDs as little-endian 16-bit integers (default)
  DecimalText,  // space-separated decimal IDs, newline-terminated
  RawBytes,     // payload already is bytes; only valid for byte documents
};

const char* to_string(SerializationMode mode);
SerializationMode serialization_mode_from_string(std::string_view name);

inline constexpr int kDefaultCompressionLevel = 6;
inline constexpr std::uint64_t kDefaultMeasureSample = 1000;

// Pins the compressor behaviour behind reported ratios; includes the linked
// zlib version because compressed sizes may shift between releases.
std::string compressor_id(int level = kDefaultCompressionLevel);

// Serializes one token document. RawBytes is rejected here: token documents
// have no canonical raw-byte form.
std::vector<std::uint8_t> serialize_doc(std::span<const std::uint16_t> doc,
                                        SerializationMode mode);

// gzip container with fixed mtime 0 and OS byte 3, so output bytes depend
// only on payload, level, and zlib version.
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> payload,
                                        int level = kDefaultCompressionLevel);

// compressed_size / original_size for one payload; payload must be non-empty.
double doc_ratio(std::span<const std::uint8_t> payload, int level = kDefaultCompressionLevel);

struct MeasureOptions {
  std::uint64_t max_sample = kDefaultMeasureSample;  // documents to measure
  std::uint64_t seed = 0;                            // sampling seed
  int level = kDefaultCompressionLevel;
};

struct CompressibilityReport {
  std::vector<double> ratios;             // aligned with doc_indices
  std::vector<std::uint64_t> doc_indices;  // ascending original indices
  double mean = 0.0;    // headline statistic
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::uint64_t sample_size = 0;
  SerializationMode mode = SerializationMode::TokensU16Le;
  std::string compressor;
};

// Measures min(max_sample, num_docs) documents chosen without replacement by
// a seeded shuffle; ratios are listed in ascending document order.
CompressibilityReport corpus_compressibility(const Corpus& corpus, SerializationMode mode,
                                             const MeasureOptions& options = {});

// Same measurement over pre-serialized byte documents (RawBytes path).
CompressibilityReport payload_compressibility(std::span<const std::vector<std::uint8_t>> docs,
                                              const MeasureOptions& options = {});

}  // namespace gsc
