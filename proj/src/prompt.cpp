#include "clara/prompt.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "clara/error.hpp"
#include "clara/rng.hpp"
#include "clara/text.hpp"

namespace clara {

std::string_view to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::kBase: return "base";
    case TemplateKind::kSymbolic: return "symbolic";
    case TemplateKind::kPrepend: return "prepend";
    case TemplateKind::kFormatted: return "formatted";
  }
  return "base";
}

std::string_view to_string(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::kAscending: return "ascending";
    case OrderingKind::kDescending: return "descending";
    case OrderingKind::kRandom: return "random";
  }
  return "descending";
}

TemplateKind parse_template_kind(std::string_view name) {
  for (auto k : {TemplateKind::kBase, TemplateKind::kSymbolic, TemplateKind::kPrepend,
                 TemplateKind::kFormatted}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown template '" + std::string(name) + "'");
}

OrderingKind parse_ordering_kind(std::string_view name) {
  for (auto k : {OrderingKind::kAscending, OrderingKind::kDescending, OrderingKind::kRandom}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown ordering '" + std::string(name) + "'");
}

std::vector<Demonstration> order_demos(std::span<const Demonstration> demos, Ordering ordering) {
  std::vector<std::size_t> idx(demos.size());
  std::iota(idx.begin(), idx.end(), 0);
  switch (ordering.kind) {
    case OrderingKind::kAscending:
      std::stable_sort(idx.begin(), idx.end(),
                       [&](auto a, auto b) { return demos[a].score < demos[b].score; });
      break;
    case OrderingKind::kDescending:
      std::stable_sort(idx.begin(), idx.end(),
                       [&](auto a, auto b) { return demos[a].score > demos[b].score; });
      break;
    case OrderingKind::kRandom: {
      Rng rng(ordering.seed);
      rng.shuffle(idx);
      break;
    }
  }
  std::vector<Demonstration> out;
  out.reserve(demos.size());
  for (auto i : idx) out.push_back(demos[i]);
  return out;
}

namespace {

constexpr std::string_view kExamplesHeader = "### Examples";
constexpr std::string_view kCandidatesHeader = "### Candidate labels";
constexpr std::string_view kConversationHeader = "### Conversation";
constexpr std::string_view kInstruction =
    "Classify the intent of the last user query in the conversation, using the labeled "
    "examples as reference. Answer with exactly one label from the candidate list.";

std::string one_line(std::string_view s) {
  std::string out(text::trim(s));
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

std::string role_tag(const std::string& role) {
  std::string tag = role;
  for (char& c : tag) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return tag;
}

}  // namespace

RenderedPrompt render(TemplateKind kind, std::span<const Demonstration> demos,
                      const Session& session, Ordering ordering, const Taxonomy& taxonomy) {
  if (demos.empty()) throw Error(ErrorCode::kNoDemonstrations, "no demonstrations to render");
  if (session.turns.empty()) {
    throw Error(ErrorCode::kEmptySession, "session '" + session.id + "' has no turns");
  }

  // Token assignment follows input order so that all orderings agree.
  std::map<std::string, std::string> token_of;  // intent id -> L{n}
  std::vector<std::string> label_order;          // distinct intents, input order
  for (const auto& d : demos) {
    const Intent& intent = taxonomy.at(d.example.intent_id);
    if (!token_of.count(intent.id)) {
      token_of[intent.id] = "L" + std::to_string(token_of.size() + 1);
      label_order.push_back(intent.id);
    }
  }

  RenderedPrompt out;
  auto surface = [&](const std::string& intent_id) -> std::string {
    const std::string& label = Taxonomy::surface_label(taxonomy.at(intent_id));
    switch (kind) {
      case TemplateKind::kSymbolic: return token_of[intent_id];
      case TemplateKind::kPrepend: return token_of[intent_id] + ": " + label;
      default: return label;
    }
  };
  for (const auto& id : label_order) {
    out.label_map[surface(id)] = id;
    if (kind == TemplateKind::kPrepend) {
      out.label_map[token_of[id]] = id;
      out.label_map[Taxonomy::surface_label(taxonomy.at(id))] = id;
    }
  }

  const auto ordered = order_demos(demos, ordering);
  out.messages.push_back({"system", std::string(kSystemPreamble)});

  if (kind == TemplateKind::kFormatted) {
    std::ostringstream body;
    body << kInstruction << "\n\n" << kExamplesHeader << "\n";
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      body << (i + 1) << ". Query: " << one_line(ordered[i].example.query) << "\n"
           << "   Intent: " << one_line(surface(ordered[i].example.intent_id)) << "\n";
    }
    body << "\n" << kCandidatesHeader << "\n";
    for (const auto& id : label_order) body << "- " << one_line(surface(id)) << "\n";
    body << "\n" << kConversationHeader << "\n";
    for (std::size_t i = 0; i < session.turns.size(); ++i) {
      body << (i + 1) << ". " << one_line(session.turns[i]);
      if (i + 1 < session.turns.size()) body << "\n";
    }
    out.messages.push_back({"user", body.str()});
  } else {
    for (const auto& d : ordered) {
      out.messages.push_back({"user", d.example.query});
      out.messages.push_back(
          {"assistant", std::string(kAnswerPrefix) + surface(d.example.intent_id) + "."});
    }
    for (const auto& turn : session.turns) out.messages.push_back({"user", turn});
  }
  out.messages.push_back({"assistant", std::string(kAnswerPrefix)});

  for (std::size_t i = 0; i < out.messages.size(); ++i) {
    if (i > 0) out.text += "\n";
    out.text += role_tag(out.messages[i].role) + ": " + out.messages[i].content;
  }
  return out;
}

PromptView inspect_prompt(std::span<const ChatMessage> messages) {
  PromptView view;
  auto starts_with = [](std::string_view s, std::string_view p) {
    return s.substr(0, p.size()) == p;
  };
  for (const auto& m : messages) {
    if (m.role != "user" || m.content.find(kExamplesHeader) == std::string::npos) continue;
    // Formatted template: parse the delimited blocks.
    std::istringstream in(m.content);
    std::string line;
    std::string_view section;
    while (std::getline(in, line)) {
      if (starts_with(line, "### ")) {
        if (line == kExamplesHeader) section = kExamplesHeader;
        else if (line == kCandidatesHeader) section = kCandidatesHeader;
        else if (line == kConversationHeader) section = kConversationHeader;
        continue;
      }
      const auto dot = line.find(". ");
      const bool numbered = dot != std::string::npos && dot > 0 &&
                            std::all_of(line.begin(), line.begin() + static_cast<long>(dot),
                                        [](char c) { return c >= '0' && c <= '9'; });
      if (!numbered) continue;
      std::string rest = line.substr(dot + 2);
      if (section == kExamplesHeader && starts_with(rest, "Query: ")) {
        view.demo_queries.push_back(rest.substr(7));
      } else if (section == kConversationHeader) {
        view.session_turns.push_back(rest);
      }
    }
    return view;
  }

  // Chat templates: demo pairs are (user, complete assistant answer); the
  // session is the run of user messages before the open assistant prefix.
  std::size_t end = messages.size();
  if (end > 0 && messages[end - 1].role == "assistant") --end;
  std::size_t begin = end;
  while (begin > 0 && messages[begin - 1].role == "user") --begin;
  for (std::size_t i = begin; i < end; ++i) view.session_turns.push_back(messages[i].content);
  for (std::size_t i = 0; i + 1 < begin; ++i) {
    if (messages[i].role == "user" && messages[i + 1].role == "assistant") {
      view.demo_queries.push_back(messages[i].content);
    }
  }
  return view;
}

}  // namespace clara
