#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clara/corpus.hpp"
#include "clara/embedding.hpp"

namespace clara {

inline constexpr std::size_t kDefaultDemonstrations = 8;

/// A retrieved single-turn example with its cosine score against the session.
struct Demonstration {
  LabeledExample example;
  double score = 0.0;
  std::size_t entry = 0;  // position in the index, the tie-break key
};

/// Exact (full-scan) cosine index over the single-turn corpus. Immutable
/// after build; concurrent searches are safe.
class RetrievalIndex {
 public:
  static RetrievalIndex build(std::vector<LabeledExample> examples,
                              const EmbeddingProvider& embedder, std::size_t workers = 1);

  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
  const Embedding& embedding(std::size_t entry) const { return embeddings_.at(entry); }

  /// The k highest-cosine entries, score descending, ties by entry order.
  std::vector<Demonstration> search(std::span<const double> query, std::size_t k) const;

 private:
  std::vector<LabeledExample> examples_;
  std::vector<Embedding> embeddings_;
  std::size_t dimension_ = 0;
};

/// Mean of embed(last turn) and embed(all turns joined by a space),
/// re-normalized.
Embedding session_representation(const Session& session, const EmbeddingProvider& embedder);

std::vector<Demonstration> retrieve(const RetrievalIndex& index, const Session& session,
                                    std::size_t k, const EmbeddingProvider& embedder);

}  // namespace clara
