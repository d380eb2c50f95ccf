#include "clara/embedding.hpp"

#include <cmath>
#include <cstdlib>

#include "clara/error.hpp"
#include "clara/http.hpp"
#include "clara/rng.hpp"
#include "clara/text.hpp"

namespace clara {

std::vector<Embedding> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

// ---- vector math -----------------------------------------------------------

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const double> u, std::span<const double> v) {
  const double d = dot(u, v);
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  const double c = d / (nu * nv);
  return std::max(-1.0, std::min(1.0, c));
}

void normalize(Embedding& v) {
  const double n = norm(v);
  if (n == 0.0) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  for (double& x : v) x /= n;
}

// ---- trigram provider ------------------------------------------------------

TrigramEmbedder::TrigramEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be > 0");
}

namespace {

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

Embedding TrigramEmbedder::embed(std::string_view input) const {
  const auto words = text::split_words(input);
  if (words.empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  const std::u32string cps = text::utf8_decode(" " + text::to_lower(text::join(words, " ")) + " ");

  Embedding v(dimension_, 0.0);
  std::string gram;
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    gram.clear();
    for (std::size_t k = 0; k < 3; ++k) append_utf8(gram, cps[i + k]);
    v[fnv1a64(gram) % dimension_] += 1.0;
  }
  normalize(v);
  return v;
}

Json TrigramEmbedder::describe() const { return {{"provider", "trigram"}, {"dim", dimension_}}; }

// ---- remote provider -------------------------------------------------------

RemoteEmbedderConfig RemoteEmbedderConfig::from_env() { return from_env(RemoteEmbedderConfig{}); }

RemoteEmbedderConfig RemoteEmbedderConfig::from_env(RemoteEmbedderConfig base) {
  if (const char* v = std::getenv("CLARA_EMBED_ENDPOINT")) base.endpoint = v;
  if (const char* v = std::getenv("CLARA_EMBED_API_KEY")) base.api_key = v;
  if (const char* v = std::getenv("CLARA_EMBED_MODEL")) base.model = v;
  if (const char* v = std::getenv("CLARA_EMBED_DIM")) base.dimension = std::strtoul(v, nullptr, 10);
  return base;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kProviderUnavailable, "no embedding endpoint configured");
  }
  if (config_.dimension == 0) {
    throw Error(ErrorCode::kInvalidArgument, "remote embedder needs a declared dimension");
  }
}

Embedding RemoteEmbedder::embed(std::string_view text) const {
  std::vector<std::string> one{std::string(text)};
  return embed_batch(one).front();
}

std::vector<Embedding> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  for (const auto& t : texts) {
    if (text::trim(t).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  }
  if (texts.empty()) return {};
  Json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  if (!config_.model.empty()) body["model"] = config_.model;
  http::Headers headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  const auto res = http::post_json(http::parse_url(config_.endpoint), "/embeddings", body.dump(),
                                   headers, config_.timeout);
  if (res.status != 200) {
    throw Error(ErrorCode::kProviderUnavailable,
                res.status < 0 ? "transport error: " + res.error
                               : "HTTP status " + std::to_string(res.status));
  }
  std::vector<Embedding> out;
  try {
    const Json reply = Json::parse(res.body);
    out = reply.at("embeddings").get<std::vector<Embedding>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable, std::string("malformed reply: ") + e.what());
  }
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::kProviderUnavailable, "reply has wrong number of embeddings");
  }
  for (const auto& v : out) {
    if (v.size() != config_.dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "provider returned dimension " + std::to_string(v.size()));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kProviderUnavailable, "non-finite embedding");
    }
  }
  return out;
}

Json RemoteEmbedder::describe() const {
  return {{"provider", "remote"},
          {"endpoint", config_.endpoint},
          {"model", config_.model},
          {"dim", config_.dimension}};
}

std::unique_ptr<EmbeddingProvider> make_embedder(const Json& config) {
  const std::string provider = config.value("provider", "trigram");
  if (provider == "trigram") {
    return std::make_unique<TrigramEmbedder>(
        config.value("dim", TrigramEmbedder::kDefaultDimension));
  }
  if (provider == "remote") {
    RemoteEmbedderConfig c;
    c.endpoint = config.value("endpoint", "");
    c.model = config.value("model", "");
    c.api_key = config.value("api_key", "");
    c.dimension = config.value("dim", std::size_t{0});
    if (config.contains("timeout_ms")) {
      c.timeout = std::chrono::milliseconds(config.at("timeout_ms").get<long>());
    }
    return std::make_unique<RemoteEmbedder>(RemoteEmbedderConfig::from_env(c));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown embedding provider '" + provider + "'");
}

}  // namespace clara
