#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clara/error.hpp"
#include "clara/jsonl.hpp"
#include "clara/rng.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

/// A single-turn (query, intent) pair.
struct LabeledExample {
  std::string query;
  std::string intent_id;
  std::string language;

  bool operator==(const LabeledExample&) const = default;
};

/// Ordered user queries of one chatbot session; only the last query carries
/// a gold intent.
struct Session {
  std::string id;
  std::vector<std::string> turns;
  std::optional<std::vector<std::string>> history_intents;
  std::optional<std::string> gold_intent;

  const std::string& last_turn() const { return turns.back(); }
  bool operator==(const Session&) const = default;
};

struct ChatLog {
  std::string session_id;
  std::vector<std::string> intent_sequence;
};

/// First-order Markov model of intent transitions within a session.
struct TransitionModel {
  std::vector<std::string> states;
  std::vector<double> start_dist;
  std::vector<std::vector<double>> trans;  // trans[i][j] = P(next=j | current=i)
  std::vector<double> length_dist;         // length_dist[n] = P(session length n)

  std::size_t state_index(std::string_view id) const;  // throws UnknownIntent
  int max_length() const noexcept { return static_cast<int>(length_dist.size()) - 1; }
};

inline constexpr int kDefaultMaxSessionLength = 6;

// ---- validation / IO -------------------------------------------------------

void validate_session(const Session& session);
void validate_transition_model(const TransitionModel& tm, double tolerance = 1e-9);

LabeledExample example_from_json(const Json& record, std::size_t line);
Json example_to_json(const LabeledExample& example);
Session session_from_json(const Json& record, std::size_t line);
Json session_to_json(const Session& session);
Json transition_model_to_json(const TransitionModel& tm);
TransitionModel transition_model_from_json(const Json& j);

/// When `taxonomy` is given every intent id must exist in it.
std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          const Taxonomy* taxonomy = nullptr);
void save_examples(const std::filesystem::path& path, std::span<const LabeledExample> examples);
std::vector<Session> load_sessions(const std::filesystem::path& path);
void save_sessions(const std::filesystem::path& path, std::span<const Session> sessions);
std::vector<ChatLog> load_chat_logs(const std::filesystem::path& path);
void save_chat_logs(const std::filesystem::path& path, std::span<const ChatLog> logs);

// ---- operations ------------------------------------------------------------

/// Add-constant estimate of intent transitions. Rows without outgoing mass
/// (and zero smoothing) become uniform. Session lengths above `max_length`
/// are counted at `max_length`.
TransitionModel estimate_transitions(std::span<const std::vector<std::string>> chat_logs,
                                     std::span<const std::string> states, double smoothing,
                                     int max_length = kDefaultMaxSessionLength);
TransitionModel estimate_transitions(std::span<const ChatLog> chat_logs, const Taxonomy& taxonomy,
                                     double smoothing,
                                     int max_length = kDefaultMaxSessionLength);

/// Builds sessions by walking `tm` and drawing each turn's text uniformly
/// from the walked intent's examples. Session i uses its own random stream,
/// so output is identical for any worker count.
std::vector<Session> synthesize_sessions(std::span<const LabeledExample> corpus,
                                         const TransitionModel& tm, std::size_t n,
                                         std::uint64_t seed, std::size_t workers = 1,
                                         const std::string& id_prefix = "syn");

struct CorpusStatsRow {
  std::string language;
  std::size_t intents = 0;
  std::size_t train = 0;
  std::size_t test = 0;

  bool operator==(const CorpusStatsRow&) const = default;
};

/// Per-language counts. Sessions are attributed to their gold intent's
/// language; sessions without a gold intent are not test samples.
std::vector<CorpusStatsRow> corpus_stats(std::span<const LabeledExample> examples,
                                         std::span<const Session> sessions,
                                         const Taxonomy& taxonomy);

/// Seeded disjoint split; both halves keep their original relative order.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_validation(const std::vector<T>& items,
                                                           std::size_t k, std::uint64_t seed) {
  if (k > items.size()) {
    throw Error(ErrorCode::kInsufficientData, "validation size " + std::to_string(k) +
                                                  " exceeds " + std::to_string(items.size()) +
                                                  " items");
  }
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, std::string_view("split_validation")));
  rng.shuffle(order);
  std::vector<bool> in_validation(items.size(), false);
  for (std::size_t i = 0; i < k; ++i) in_validation[order[i]] = true;
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(items.size() - k);
  out.second.reserve(k);
  for (std::size_t i = 0; i < items.size(); ++i) {
    (in_validation[i] ? out.second : out.first).push_back(items[i]);
  }
  return out;
}

}  // namespace clara
