#include "clara/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <thread>

#include "clara/error.hpp"
#include "clara/http.hpp"
#include "clara/rng.hpp"
#include "clara/text.hpp"

namespace clara {

void validate_request(const CompletionRequest& request) {
  if (request.messages.empty()) throw Error(ErrorCode::kInvalidArgument, "request has no messages");
  for (const auto& m : request.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw Error(ErrorCode::kInvalidArgument, "unknown role '" + m.role + "'");
    }
  }
  if (request.max_tokens <= 0) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be > 0");
  if (!(request.temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
}

std::string complete(const CompletionRequest& request, const LlmBackend& backend) {
  validate_request(request);
  return backend.complete(request);
}

// ---- mock ------------------------------------------------------------------

MockRule contains_rule(std::string needle, std::string response) {
  return {[needle = std::move(needle)](const CompletionRequest& r) {
            for (const auto& m : r.messages) {
              if (m.content.find(needle) != std::string::npos) return true;
            }
            return false;
          },
          std::move(response)};
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {}

std::string MockBackend::complete(const CompletionRequest& request) const {
  for (const auto& rule : script_.rules) {
    if (rule.matches(request)) return rule.response;
  }
  if (script_.default_response) return *script_.default_response;
  throw Error(ErrorCode::kBackendUnavailable, "no mock rule matched the prompt");
}

// ---- live ------------------------------------------------------------------

LiveBackendConfig LiveBackendConfig::from_env() { return from_env(LiveBackendConfig{}); }

LiveBackendConfig LiveBackendConfig::from_env(LiveBackendConfig base) {
  if (const char* v = std::getenv("CLARA_LLM_ENDPOINT")) base.endpoint = v;
  if (const char* v = std::getenv("CLARA_LLM_API_KEY")) base.api_key = v;
  if (const char* v = std::getenv("CLARA_LLM_MODEL")) base.model = v;
  return base;
}

LiveBackendConfig LiveBackendConfig::from_json(const Json& j) {
  LiveBackendConfig c;
  c.endpoint = j.value("endpoint", "");
  c.api_key = j.value("api_key", "");
  c.model = j.value("model", "");
  if (j.contains("timeout_ms")) c.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long>());
  c.retries = j.value("retries", c.retries);
  if (j.contains("backoff_ms")) c.backoff = std::chrono::milliseconds(j.at("backoff_ms").get<long>());
  if (j.contains("max_requests")) c.max_requests = j.at("max_requests").get<std::size_t>();
  return c;
}

OpenAiCompatibleBackend::OpenAiCompatibleBackend(LiveBackendConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kBackendUnavailable,
                "no LLM endpoint configured (set CLARA_LLM_ENDPOINT or the config file)");
  }
  http::parse_url(config_.endpoint);
}

std::string OpenAiCompatibleBackend::complete(const CompletionRequest& request) const {
  validate_request(request);
  if (config_.max_requests) {
    const std::size_t n = issued_.fetch_add(1);
    if (n >= *config_.max_requests) {
      throw Error(ErrorCode::kBudgetExceeded,
                  "request cap of " + std::to_string(*config_.max_requests) + " reached");
    }
  } else {
    issued_.fetch_add(1);
  }

  Json messages = Json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const Json body = {{"model", config_.model},
                     {"messages", messages},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens}};
  http::Headers headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  const auto url = http::parse_url(config_.endpoint);

  http::Response res;
  auto delay = config_.backoff;
  for (int attempt = 0;; ++attempt) {
    res = http::post_json(url, "/chat/completions", body.dump(), headers, config_.timeout);
    const bool retryable = res.status < 0 || res.status == 429 || res.status >= 500;
    if (res.status == 200 || !retryable || attempt >= config_.retries) break;
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
  if (res.status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                res.status < 0 ? "transport error: " + res.error
                               : "HTTP status " + std::to_string(res.status));
  }

  std::string content;
  try {
    const Json reply = Json::parse(res.body);
    content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, e.what());
  }
  // Some servers echo an open assistant prefix back; strip it.
  const auto& last = request.messages.back();
  if (last.role == "assistant" && !last.content.empty() &&
      content.compare(0, last.content.size(), last.content) == 0) {
    content.erase(0, last.content.size());
  }
  return content;
}

// ---- gold oracle -----------------------------------------------------------

namespace {

std::string turns_key(std::span<const std::string> turns) {
  std::string key;
  for (const auto& t : turns) {
    std::string line(text::trim(t));
    for (char& c : line) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    key += line;
    key += '\x1f';
  }
  return key;
}

}  // namespace

std::string corrupt_label(const std::string& label, std::uint64_t seed) {
  Rng rng(seed);
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string out = label;
  if (out.size() < 2) {
    out.push_back(kAlphabet[rng.index(kAlphabet.size())]);
    return out;
  }
  const std::size_t pos = rng.index(out.size());
  switch (rng.index(3)) {
    case 0:
      out.erase(pos, 1);
      break;
    case 1: {
      char c = out[pos];
      while (c == out[pos]) c = kAlphabet[rng.index(kAlphabet.size())];
      out[pos] = c;
      break;
    }
    default: {
      const std::size_t p = pos + 1 < out.size() ? pos : pos - 1;
      if (out[p] == out[p + 1]) {
        out.erase(p, 1);
      } else {
        std::swap(out[p], out[p + 1]);
      }
      break;
    }
  }
  return out;
}

GoldOracleBackend::GoldOracleBackend(const Taxonomy& taxonomy, std::span<const Session> sessions,
                                     OracleConfig config)
    : taxonomy_(&taxonomy), config_(config) {
  for (double p : {config.noise_rate, config.ordering_sensitivity, config.typo_rate}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "oracle rates must lie in [0, 1]");
    }
  }
  const auto& intents = taxonomy.intents();
  for (const auto& s : sessions) {
    if (!s.gold_intent) continue;
    taxonomy.at(*s.gold_intent);
    Plan p;
    p.gold_intent = *s.gold_intent;
    Rng rng(derive_seed(config.seed, s.id));
    p.sensitive = rng.uniform() < config.ordering_sensitivity;
    p.noisy = !p.sensitive && rng.uniform() < config.noise_rate;
    p.typo = rng.uniform() < config.typo_rate;
    if (intents.size() > 1) {
      const std::size_t gold = *taxonomy.index_of(p.gold_intent);
      std::size_t w = rng.index(intents.size() - 1);
      if (w >= gold) ++w;
      p.wrong_intent = intents[w].id;
    } else {
      p.wrong_intent = p.gold_intent;
    }
    session_by_turns_.emplace(turns_key(s.turns), s.id);
    plans_.emplace(s.id, std::move(p));
  }
}

GoldOracleBackend::Plan GoldOracleBackend::plan(const std::string& session_id) const {
  auto it = plans_.find(session_id);
  if (it == plans_.end()) {
    throw Error(ErrorCode::kUnknownIntent, "oracle has no gold for session '" + session_id + "'");
  }
  return it->second;
}

std::string GoldOracleBackend::complete(const CompletionRequest& request) const {
  const PromptView view = inspect_prompt(request.messages);
  auto it = session_by_turns_.find(turns_key(view.session_turns));
  if (it == session_by_turns_.end()) {
    throw Error(ErrorCode::kBackendUnavailable, "oracle does not recognize the session");
  }
  const Plan& p = plans_.at(it->second);
  std::string intent = p.gold_intent;
  if (p.noisy) {
    intent = p.wrong_intent;
  } else if (p.sensitive) {
    // Gold only when the demonstration sequence sorts at or before its
    // reversal; reversed orderings therefore disagree unless palindromic.
    const auto& q = view.demo_queries;
    if (std::lexicographical_compare(q.rbegin(), q.rend(), q.begin(), q.end())) {
      intent = p.wrong_intent;
    }
  }
  std::string answer = Taxonomy::surface_label(taxonomy_->at(intent));
  if (p.typo) answer = corrupt_label(answer, derive_seed(config_.seed ^ 0x7970ULL, it->second));
  return answer + ".";
}

std::unique_ptr<LlmBackend> make_gold_oracle(const Taxonomy& taxonomy,
                                             std::span<const Session> sessions,
                                             OracleConfig config) {
  return std::make_unique<GoldOracleBackend>(taxonomy, sessions, config);
}

}  // namespace clara
