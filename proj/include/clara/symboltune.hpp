#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clara/embedding.hpp"
#include "clara/jsonl.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

inline constexpr double kDefaultCompressionAlpha = 0.05;

struct CompressionResult {
  std::string original;
  std::string compressed;
  double compactness = 0.0;  // alpha * token count
  double divergence = 0.0;   // 1 - cosine
  double objective = 0.0;
  std::size_t word_count = 0;
};

/// Whitespace token count.
std::size_t token_count(std::string_view s);

/// Throws EmptyText when either text is blank.
CompressionResult compression_objective(std::string_view candidate, std::string_view original,
                                        const EmbeddingProvider& embedder, double alpha);

/// Minimum-objective candidate; ties go to the earliest. Throws
/// InvalidArgument for an empty pool.
CompressionResult best_candidate(std::span<const std::string> candidates,
                                 std::string_view original, const EmbeddingProvider& embedder,
                                 double alpha);

/// All order-preserving n-word subsequences, in lexicographic index order.
std::vector<std::string> word_subsequences(std::string_view original, std::size_t n);

/// Throws TooShort when `original` has fewer than n words.
CompressionResult compress_label(std::string_view original, const EmbeddingProvider& embedder,
                                 std::size_t n, double alpha = kDefaultCompressionAlpha);

enum class SourceMode { kLocalTitle, kEnglishCategory, kAuto };
std::string_view to_string(SourceMode mode);
SourceMode parse_source_mode(std::string_view name);

/// kAuto picks the local title for English intents and the category pair
/// otherwise. The category pair is the two leaf-most distinct names of the
/// path (padding duplicates collapse), joined root first.
std::string cross_lingual_source(const Intent& intent, SourceMode mode);

enum class CompressionMode { kNone, kNWord, kSymbols, kLongTarget };
std::string_view to_string(CompressionMode mode);
CompressionMode parse_compression_mode(std::string_view name);

struct CompressAllOptions {
  std::size_t n_start = 2;
  double alpha = kDefaultCompressionAlpha;
  SourceMode source = SourceMode::kAuto;
  CompressionMode mode = CompressionMode::kNWord;
  std::size_t workers = 1;
};

struct CompressionEntry {
  std::string intent_id;
  std::string source;
  std::string label;
  std::size_t n = 0;
  bool suffixed = false;
};

struct CompressionReport {
  std::vector<CompressionEntry> entries;  // taxonomy order
  /// Labels that collided at some point, with the ids involved.
  std::vector<std::pair<std::string, std::vector<std::string>>> collisions;
};

struct CompressAllResult {
  Taxonomy taxonomy;
  CompressionReport report;
};

/// Compresses every intent. Colliding labels (compared case-insensitively)
/// stay with the smallest id; the rest are recompressed one word longer until
/// unique, and "#k" is appended once their words run out.
CompressAllResult compress_all(const Taxonomy& taxonomy, const EmbeddingProvider& embedder,
                               const CompressAllOptions& options = {});

Json report_to_json(const CompressionReport& report);

}  // namespace clara
