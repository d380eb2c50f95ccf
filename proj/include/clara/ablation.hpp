#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "clara/corpus.hpp"
#include "clara/embedding.hpp"
#include "clara/labeling.hpp"
#include "clara/llm.hpp"
#include "clara/metrics.hpp"
#include "clara/symboltune.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

struct AblationVariant {
  std::string name;
  TemplateKind template_kind = TemplateKind::kBase;
  bool self_consistency = true;
  CompressionMode compression = CompressionMode::kNWord;
};

/// Builds the labeler for a variant's (compressed) taxonomy.
using BackendFactory =
    std::function<std::unique_ptr<LlmBackend>(const Taxonomy& taxonomy,
                                              std::span<const Session> sessions)>;

struct AblationConfig {
  Taxonomy taxonomy;
  std::vector<LabeledExample> examples;  // retrieval corpus
  std::vector<Session> sessions;         // gold required
  std::vector<AblationVariant> variants;
  std::size_t k = kDefaultDemonstrations;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  CompressAllOptions compression;        // mode is taken from each variant
  BackendFactory backend;                // gold oracle when unset
  OracleConfig oracle;
};

struct AblationRow {
  std::string variant;
  TemplateKind template_kind = TemplateKind::kBase;
  bool self_consistency = true;
  CompressionMode compression = CompressionMode::kNWord;
  std::size_t sessions = 0;
  std::size_t labeled = 0;   // labels kept for training
  std::size_t correct = 0;   // kept labels matching gold
  std::size_t resolved_correct = 0;  // sessions whose unfiltered label matches gold
  double accuracy = 0.0;     // resolved_correct / sessions
  double precision = 0.0;    // correct / labeled
  double retention = 0.0;    // labeled / sessions
  double hallucination_rate = 0.0;
  ZTest vs_first;            // precision against the first row
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::string markdown() const;
  std::string csv() const;
  Json to_json() const;
};

/// Runs every variant (independently, in order). Errors name the variant.
AblationReport run_ablation(const AblationConfig& config, const EmbeddingProvider& embedder);

/// Reads {"taxonomy", "examples", "sessions", "variants", "k", "seed", "oracle"}
/// with file paths relative to `base_dir`.
AblationConfig ablation_config_from_json(const Json& j, const std::filesystem::path& base_dir);

}  // namespace clara
