#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clara/corpus.hpp"
#include "clara/retrieval.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

enum class TemplateKind { kBase, kSymbolic, kPrepend, kFormatted };
enum class OrderingKind { kAscending, kDescending, kRandom };

std::string_view to_string(TemplateKind kind);
std::string_view to_string(OrderingKind kind);
TemplateKind parse_template_kind(std::string_view name);  // throws InvalidArgument
OrderingKind parse_ordering_kind(std::string_view name);

struct Ordering {
  OrderingKind kind = OrderingKind::kDescending;
  std::uint64_t seed = 0;  // used by kRandom only
};

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

inline constexpr std::string_view kSystemPreamble =
    "A chat between a curious user and an artificial intelligence assistant. The assistant "
    "provides helpful, detailed, and polite responses to the user's questions.";
inline constexpr std::string_view kAnswerPrefix = "The intent title is ";

struct RenderedPrompt {
  std::vector<ChatMessage> messages;  // last message is the open assistant prefix
  std::string text;                   // "ROLE: content" lines; ends with kAnswerPrefix
  std::map<std::string, std::string> label_map;  // surface label -> intent id
};

/// ascending/descending sort by score with ties kept in input order; random
/// is a seeded shuffle.
std::vector<Demonstration> order_demos(std::span<const Demonstration> demos, Ordering ordering);

/// Symbolic tokens (L1, L2, ...) are assigned to distinct demonstration
/// intents in input order, so every ordering of the same demos shares one
/// label map. The session's gold intent is never read.
RenderedPrompt render(TemplateKind kind, std::span<const Demonstration> demos,
                      const Session& session, Ordering ordering, const Taxonomy& taxonomy);

/// Demonstration queries and session turns recovered from rendered messages.
/// Used by test doubles that answer based on prompt content.
struct PromptView {
  std::vector<std::string> demo_queries;
  std::vector<std::string> session_turns;
};
PromptView inspect_prompt(std::span<const ChatMessage> messages);

}  // namespace clara
