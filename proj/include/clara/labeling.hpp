#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clara/corpus.hpp"
#include "clara/embedding.hpp"
#include "clara/llm.hpp"
#include "clara/prompt.hpp"
#include "clara/retrieval.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

enum class ResolutionKind { kExact, kFuzzy, kMapped };
std::string_view to_string(ResolutionKind kind);

struct Resolution {
  std::string intent_id;
  ResolutionKind kind = ResolutionKind::kExact;
  double score = 1.0;  // gestalt ratio for fuzzy matches
};

/// Strips surrounding whitespace, a repeated answer prefix, a trailing
/// period and enclosing quotes.
std::string clean_generation(std::string_view generated);

/// Maps a generation to an intent: label_map first, then case-insensitive
/// exact match (compressed labels, titles, representative queries), then the
/// best gestalt match over compressed labels (titles where unset).
/// Throws EmptyGeneration when nothing is left after cleaning.
Resolution resolve_label(std::string_view generated, const Taxonomy& taxonomy,
                         const std::map<std::string, std::string>* label_map = nullptr);

struct LabelRun {
  OrderingKind ordering = OrderingKind::kAscending;
  std::string raw;
  std::optional<Resolution> resolved;
};

struct ConsistencyVerdict {
  std::string session_id;
  std::array<LabelRun, 3> runs;  // ascending, descending, random
  bool consistent = false;
  std::optional<std::string> final_label;

  /// Label an unfiltered pipeline would keep: the descending run.
  std::optional<std::string> unfiltered_label() const;
};

struct PseudoLabel {
  Session session;
  std::string intent_id;
  TemplateKind template_kind = TemplateKind::kBase;
  std::size_t k = 0;
  ConsistencyVerdict provenance;
};

struct LabelingConfig {
  TemplateKind template_kind = TemplateKind::kBase;
  std::size_t k = kDefaultDemonstrations;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  int max_tokens = kDefaultMaxTokens;
};

/// Retrieves once, renders ascending, descending and random(seed, session id)
/// prompts and resolves each completion. Errors are rethrown with the session
/// id and run index in the message.
ConsistencyVerdict pseudo_label_session(const Session& session, const Taxonomy& taxonomy,
                                        const RetrievalIndex& index,
                                        const EmbeddingProvider& embedder,
                                        const LlmBackend& backend, const LabelingConfig& config);

struct FilterStats {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t discarded = 0;  // inconsistent or errored
  std::size_t errored = 0;
  double retention_rate = 0.0;
  double hallucination_rate = 0.0;  // fuzzy runs / completed runs
};

struct SessionFailure {
  std::string session_id;
  std::string message;
};

struct LabelingResult {
  std::vector<ConsistencyVerdict> verdicts;  // input order; errored sessions omitted
  std::vector<PseudoLabel> labels;           // consistent sessions, input order
  std::vector<SessionFailure> failures;
  FilterStats stats;
};

/// Labels every session. Per-session errors are recorded and the session is
/// discarded; more than half erroring raises TooManyFailures.
LabelingResult pseudo_label_corpus(std::span<const Session> sessions, const Taxonomy& taxonomy,
                                   const RetrievalIndex& index, const EmbeddingProvider& embedder,
                                   const LlmBackend& backend, const LabelingConfig& config);

Json verdict_to_json(const ConsistencyVerdict& verdict, const Session& session,
                     TemplateKind template_kind, std::size_t k);
Json stats_to_json(const FilterStats& stats);

/// Writes one JSON line per labeled session (consistent or not).
void save_labeling(const std::filesystem::path& path, std::span<const Session> sessions,
                   const LabelingResult& result, TemplateKind template_kind, std::size_t k);

struct LabelRecord {
  Session session;
  ConsistencyVerdict verdict;
  TemplateKind template_kind = TemplateKind::kBase;
  std::size_t k = 0;
};

/// Reads pseudo-label output back.
std::vector<LabelRecord> load_labeling(const std::filesystem::path& path);

/// The consistent records.
std::vector<PseudoLabel> to_pseudo_labels(std::span<const LabelRecord> records);

/// Recomputes FilterStats from persisted records; `errored` counts sessions
/// missing from the file.
FilterStats filter_stats(std::span<const ConsistencyVerdict> verdicts, std::size_t errored = 0);

}  // namespace clara
