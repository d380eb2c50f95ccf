#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "clara/corpus.hpp"
#include "clara/jsonl.hpp"
#include "clara/prompt.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

inline constexpr int kDefaultMaxTokens = 16;

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  int max_tokens = kDefaultMaxTokens;
  double temperature = 0.0;  // 0 = greedy
};

/// Throws InvalidArgument for unknown roles, empty message lists,
/// non-positive max_tokens or negative temperature.
void validate_request(const CompletionRequest& request);

/// Chat-completion backend. Implementations must be safe to share across
/// threads.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// Returns only the generated continuation.
  virtual std::string complete(const CompletionRequest& request) const = 0;
};

/// Validates the request and forwards it to the backend.
std::string complete(const CompletionRequest& request, const LlmBackend& backend);

// ---- scripted mock ---------------------------------------------------------

struct MockRule {
  std::function<bool(const CompletionRequest&)> matches;
  std::string response;
};

/// Rule matching when any message contains `needle`.
MockRule contains_rule(std::string needle, std::string response);

struct MockScript {
  std::vector<MockRule> rules;
  std::optional<std::string> default_response;  // unset: unmatched prompts fail
};

class MockBackend final : public LlmBackend {
 public:
  explicit MockBackend(MockScript script);
  std::string complete(const CompletionRequest& request) const override;

 private:
  MockScript script_;
};

// ---- OpenAI-compatible HTTP backend ----------------------------------------

struct LiveBackendConfig {
  std::string endpoint;  // requests go to {endpoint}/chat/completions
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{60'000};
  int retries = 2;
  std::chrono::milliseconds backoff{500};  // doubled on every retry
  std::optional<std::size_t> max_requests;

  /// Overrides fields from CLARA_LLM_ENDPOINT, CLARA_LLM_API_KEY and
  /// CLARA_LLM_MODEL when they are set.
  static LiveBackendConfig from_env();
  static LiveBackendConfig from_env(LiveBackendConfig base);
  static LiveBackendConfig from_json(const Json& j);
};

class OpenAiCompatibleBackend final : public LlmBackend {
 public:
  explicit OpenAiCompatibleBackend(LiveBackendConfig config);
  std::string complete(const CompletionRequest& request) const override;
  std::size_t requests_issued() const noexcept { return issued_.load(); }

 private:
  LiveBackendConfig config_;
  mutable std::atomic<std::size_t> issued_{0};
};

// ---- gold oracle -----------------------------------------------------------

struct OracleConfig {
  double noise_rate = 0.0;            // consistent wrong answers
  double ordering_sensitivity = 0.0;  // answers flip with demonstration order
  double typo_rate = 0.0;             // one-character corruption of the answer
  std::uint64_t seed = 0;
};

/// Deterministic stand-in for an LLM labeler. It recognizes the session in
/// the prompt and answers with the session's gold label, except:
///  - ordering-sensitive sessions answer gold only when the sequence of
///    demonstration queries sorts at or before its reversal, and a fixed
///    wrong label otherwise, so ascending and descending prompts disagree
///    unless the sequence is a palindrome;
///  - noisy sessions answer the same wrong label under every ordering.
/// Every draw is keyed by (seed, session id).
class GoldOracleBackend final : public LlmBackend {
 public:
  GoldOracleBackend(const Taxonomy& taxonomy, std::span<const Session> sessions,
                    OracleConfig config);

  struct Plan {
    bool sensitive = false;
    bool noisy = false;
    bool typo = false;
    std::string gold_intent;
    std::string wrong_intent;
  };
  /// Planted behaviour for a session; throws UnknownIntent for unknown ids.
  Plan plan(const std::string& session_id) const;

  std::string complete(const CompletionRequest& request) const override;

 private:
  const Taxonomy* taxonomy_;
  OracleConfig config_;
  std::unordered_map<std::string, std::string> session_by_turns_;
  std::unordered_map<std::string, Plan> plans_;
};

/// Applies one seeded character edit (deletion, substitution or adjacent
/// swap); strings shorter than two characters get a character appended.
std::string corrupt_label(const std::string& label, std::uint64_t seed);

std::unique_ptr<LlmBackend> make_gold_oracle(const Taxonomy& taxonomy,
                                             std::span<const Session> sessions,
                                             OracleConfig config);

}  // namespace clara
