#include "clara/retrieval.hpp"

#include <algorithm>

#include "clara/error.hpp"
#include "clara/parallel.hpp"
#include "clara/text.hpp"

namespace clara {

RetrievalIndex RetrievalIndex::build(std::vector<LabeledExample> examples,
                                     const EmbeddingProvider& embedder, std::size_t workers) {
  RetrievalIndex index;
  index.dimension_ = embedder.dimension();
  index.embeddings_.resize(examples.size());
  parallel_for(examples.size(), workers, [&](std::size_t i) {
    auto v = embedder.embed(examples[i].query);
    if (v.size() != index.dimension_) {
      throw Error(ErrorCode::kDimensionMismatch, "provider returned a vector of the wrong size");
    }
    index.embeddings_[i] = std::move(v);
  });
  index.examples_ = std::move(examples);
  return index;
}

std::vector<Demonstration> RetrievalIndex::search(std::span<const double> query,
                                                  std::size_t k) const {
  if (examples_.empty()) throw Error(ErrorCode::kEmptyIndex, "retrieval index is empty");
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (query.size() != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                   " vs index " + std::to_string(dimension_));
  }
  std::vector<std::pair<double, std::size_t>> scored(examples_.size());
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    scored[i] = {cosine(query, embeddings_[i]), i};
  }
  const std::size_t take = std::min(k, scored.size());
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  std::vector<Demonstration> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({examples_[scored[i].second], scored[i].first, scored[i].second});
  }
  return out;
}

Embedding session_representation(const Session& session, const EmbeddingProvider& embedder) {
  if (session.turns.empty()) {
    throw Error(ErrorCode::kEmptySession, "session '" + session.id + "' has no turns");
  }
  Embedding last = embedder.embed(session.last_turn());
  const Embedding whole = embedder.embed(text::join(session.turns, " "));
  for (std::size_t i = 0; i < last.size(); ++i) last[i] = 0.5 * (last[i] + whole[i]);
  normalize(last);
  return last;
}

std::vector<Demonstration> retrieve(const RetrievalIndex& index, const Session& session,
                                    std::size_t k, const EmbeddingProvider& embedder) {
  if (index.empty()) throw Error(ErrorCode::kEmptyIndex, "retrieval index is empty");
  return index.search(session_representation(session, embedder), k);
}

}  // namespace clara
