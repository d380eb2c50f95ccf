#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clara/jsonl.hpp"

namespace clara {

using Embedding = std::vector<double>;

/// Text encoder contract. Implementations must be deterministic and safe to
/// call concurrently from several threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dimension() const = 0;
  /// Throws EmptyText for empty or whitespace-only input.
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) const;
  /// Configuration that recreates this provider via make_embedder().
  virtual Json describe() const = 0;
};

/// Hashed character-trigram counts, L2-normalized. Text is ASCII-lowercased,
/// whitespace runs collapse to one space, and the text is padded with a space
/// on each side before trigrams over code points are hashed (FNV-1a) into
/// `dimension` buckets.
class TrigramEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 64;

  explicit TrigramEmbedder(std::size_t dimension = kDefaultDimension);

  std::size_t dimension() const override { return dimension_; }
  Embedding embed(std::string_view text) const override;
  Json describe() const override;

 private:
  std::size_t dimension_;
};

struct RemoteEmbedderConfig {
  std::string endpoint;  // base URL; requests go to {endpoint}/embeddings
  std::string api_key;
  std::string model;
  std::size_t dimension = 0;
  std::chrono::milliseconds timeout{60'000};

  /// Reads CLARA_EMBED_ENDPOINT, CLARA_EMBED_API_KEY, CLARA_EMBED_MODEL and
  /// CLARA_EMBED_DIM, keeping `base` values for unset variables.
  static RemoteEmbedderConfig from_env();
  static RemoteEmbedderConfig from_env(RemoteEmbedderConfig base);
};

/// HTTP embedding service: POST {"texts": [...]} -> {"embeddings": [[...]]}.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::size_t dimension() const override { return config_.dimension; }
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;
  Json describe() const override;

 private:
  RemoteEmbedderConfig config_;
};

/// {"provider": "trigram", "dim": 64} or {"provider": "remote", ...}.
std::unique_ptr<EmbeddingProvider> make_embedder(const Json& config);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);
/// Throws DimensionMismatch or ZeroVector.
double cosine(std::span<const double> u, std::span<const double> v);
/// In-place L2 normalization; throws ZeroVector.
void normalize(Embedding& v);

}  // namespace clara
