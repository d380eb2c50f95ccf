#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "clara/prompt.hpp"
#include "clara/rng.hpp"
#include "support.hpp"

using namespace clara;
using testing::error_code_of;

namespace {

Demonstration demo(std::string query, std::string intent, double score, std::size_t entry = 0) {
  return {{std::move(query), std::move(intent), "en"}, score, entry};
}

std::vector<std::size_t> entries(const std::vector<Demonstration>& demos) {
  std::vector<std::size_t> out;
  for (const auto& d : demos) out.push_back(d.entry);
  return out;
}

const std::vector<TemplateKind> kTemplates = {TemplateKind::kBase, TemplateKind::kSymbolic,
                                              TemplateKind::kPrepend, TemplateKind::kFormatted};

}  // namespace

TEST_CASE("order_demos") {
  const std::vector<Demonstration> demos = {demo("a", "I1", 0.9, 0), demo("b", "I2", 0.1, 1),
                                            demo("c", "I3", 0.5, 2)};
  CHECK(entries(order_demos(demos, {OrderingKind::kAscending})) ==
        std::vector<std::size_t>{1, 2, 0});
  CHECK(entries(order_demos(demos, {OrderingKind::kDescending})) ==
        std::vector<std::size_t>{0, 2, 1});

  SUBCASE("ties keep input order") {
    const std::vector<Demonstration> tied = {demo("a", "I1", 0.5, 0), demo("b", "I1", 0.5, 1),
                                             demo("c", "I1", 0.2, 2)};
    CHECK(entries(order_demos(tied, {OrderingKind::kAscending})) ==
          std::vector<std::size_t>{2, 0, 1});
    CHECK(entries(order_demos(tied, {OrderingKind::kDescending})) ==
          std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("single demo") {
    const std::vector<Demonstration> one = {demo("a", "I1", 0.3, 7)};
    for (auto kind : {OrderingKind::kAscending, OrderingKind::kDescending, OrderingKind::kRandom}) {
      CHECK(entries(order_demos(one, {kind, 5})) == std::vector<std::size_t>{7});
    }
  }
  SUBCASE("random is a seeded permutation") {
    std::vector<Demonstration> many;
    for (std::size_t i = 0; i < 12; ++i) many.push_back(demo("q", "I1", 0.1 * i, i));
    const auto a = entries(order_demos(many, {OrderingKind::kRandom, 42}));
    CHECK(a == entries(order_demos(many, {OrderingKind::kRandom, 42})));
    CHECK(a != entries(order_demos(many, {OrderingKind::kRandom, 43})));
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == entries(many));
  }
}

TEST_CASE("render: base template") {
  const auto t = testing::small_taxonomy();
  const std::vector<Demonstration> demos = {demo("cancel order", "I1", 0.8)};
  const Session s{"s", {"i want to cancel"}, std::nullopt, std::nullopt};
  const auto p = render(TemplateKind::kBase, demos, s, {}, t);
  REQUIRE(p.messages.size() == 5);
  CHECK(p.messages[0] == ChatMessage{"system", std::string(kSystemPreamble)});
  CHECK(p.messages[1] == ChatMessage{"user", "cancel order"});
  CHECK(p.messages[2] == ChatMessage{"assistant", "The intent title is Cancel Order."});
  CHECK(p.messages[3] == ChatMessage{"user", "i want to cancel"});
  CHECK(p.messages[4] == ChatMessage{"assistant", "The intent title is "});
  const std::string suffix = "The intent title is ";
  REQUIRE(p.text.size() > suffix.size());
  CHECK(p.text.compare(p.text.size() - suffix.size(), suffix.size(), suffix) == 0);
  CHECK(p.text.rfind("SYSTEM: A chat between a curious user", 0) == 0);
  CHECK(p.label_map == std::map<std::string, std::string>{{"Cancel Order", "I1"}});
}

TEST_CASE("render: symbolic and prepend label maps") {
  const auto t = testing::small_taxonomy();
  const std::vector<Demonstration> demos = {demo("where is it", "I2", 0.9),
                                            demo("cancel it", "I1", 0.5),
                                            demo("track please", "I2", 0.4),
                                            demo("refund?", "I3", 0.3)};
  const Session s{"s", {"hello"}, std::nullopt, std::nullopt};

  const auto sym = render(TemplateKind::kSymbolic, demos, s, {}, t);
  CHECK(sym.label_map ==
        std::map<std::string, std::string>{{"L1", "I2"}, {"L2", "I1"}, {"L3", "I3"}});
  CHECK(sym.text.find("Track Package") == std::string::npos);
  CHECK(sym.text.find("The intent title is L1.") != std::string::npos);

  const auto pre = render(TemplateKind::kPrepend, demos, s, {}, t);
  CHECK(pre.label_map.at("L2: Cancel Order") == "I1");
  CHECK(pre.label_map.at("L2") == "I1");
  CHECK(pre.label_map.at("Cancel Order") == "I1");
  CHECK(pre.text.find("The intent title is L1: Track Package.") != std::string::npos);

  // Tokens do not depend on the ordering.
  const auto asc = render(TemplateKind::kSymbolic, demos, s, {OrderingKind::kAscending}, t);
  CHECK(asc.label_map == sym.label_map);
}

TEST_CASE("render: formatted template") {
  const auto t = testing::small_taxonomy();
  const std::vector<Demonstration> demos = {demo("cancel it", "I1", 0.5),
                                            demo("where is it", "I2", 0.9)};
  const Session s{"s", {"first\nline", "second"}, std::nullopt, std::nullopt};
  const auto p = render(TemplateKind::kFormatted, demos, s, {}, t);
  REQUIRE(p.messages.size() == 3);
  const auto& body = p.messages[1].content;
  CHECK(body.find("### Examples\n1. Query: where is it\n   Intent: Track Package\n") !=
        std::string::npos);
  CHECK(body.find("### Candidate labels\n- Cancel Order\n- Track Package\n") != std::string::npos);
  CHECK(body.find("### Conversation\n1. first line\n2. second") != std::string::npos);
  CHECK(p.messages[2].content == "The intent title is ");
}

TEST_CASE("render: orderings only permute the demo block") {
  const auto t = testing::small_taxonomy();
  const std::vector<Demonstration> demos = {demo("cancel it", "I1", 0.7),
                                            demo("where is it", "I2", 0.9),
                                            demo("refund?", "I3", 0.2)};
  const Session s{"s", {"one", "two"}, std::nullopt, std::nullopt};
  const auto asc = render(TemplateKind::kBase, demos, s, {OrderingKind::kAscending}, t);
  const auto desc = render(TemplateKind::kBase, demos, s, {OrderingKind::kDescending}, t);
  CHECK(asc.text != desc.text);
  REQUIRE(asc.messages.size() == desc.messages.size());
  // Segments: system, demo pairs, session turns, prefix.
  const std::size_t n = asc.messages.size();
  CHECK(asc.messages[0] == desc.messages[0]);
  for (std::size_t i = n - 3; i < n; ++i) CHECK(asc.messages[i] == desc.messages[i]);
  std::vector<std::pair<std::string, std::string>> pa, pd;
  for (std::size_t i = 1; i + 3 < n; i += 2) {
    pa.emplace_back(asc.messages[i].content, asc.messages[i + 1].content);
    pd.emplace_back(desc.messages[i].content, desc.messages[i + 1].content);
  }
  CHECK(pa != pd);
  std::reverse(pd.begin(), pd.end());
  CHECK(pa == pd);
}

TEST_CASE("render: k = 1 is identical under every ordering") {
  const auto t = testing::small_taxonomy();
  const std::vector<Demonstration> demos = {demo("cancel it", "I1", 0.7)};
  const Session s{"s", {"one"}, std::nullopt, std::nullopt};
  for (auto kind : kTemplates) {
    const auto a = render(kind, demos, s, {OrderingKind::kAscending}, t);
    CHECK(a.text == render(kind, demos, s, {OrderingKind::kDescending}, t).text);
    CHECK(a.text == render(kind, demos, s, {OrderingKind::kRandom, 9}, t).text);
  }
}

TEST_CASE("render: errors") {
  const auto t = testing::small_taxonomy();
  const Session s{"s", {"one"}, std::nullopt, std::nullopt};
  CHECK(error_code_of([&] { render(TemplateKind::kBase, {}, s, {}, t); }) ==
        ErrorCode::kNoDemonstrations);
  const std::vector<Demonstration> demos = {demo("cancel it", "I1", 0.7)};
  const Session empty{"s", {}, std::nullopt, std::nullopt};
  CHECK(error_code_of([&] { render(TemplateKind::kBase, demos, empty, {}, t); }) ==
        ErrorCode::kEmptySession);
  CHECK(error_code_of([] { parse_template_kind("fancy"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("property: no gold leakage, label maps point at demo intents, prompts parse back") {
  const auto t = testing::small_taxonomy();
  Rng rng(8);
  const std::vector<std::string> queries = {"cancel it", "where is it", "refund?", "send back",
                                            "late order", "money back"};
  for (int trial = 0; trial < 300; ++trial) {
    // Demos never include I4; the session's gold is I4.
    std::vector<Demonstration> demos;
    const std::size_t k = 1 + rng.index(8);
    for (std::size_t i = 0; i < k; ++i) {
      demos.push_back(demo(queries[rng.index(queries.size())], "I" + std::to_string(1 + rng.index(3)),
                           rng.uniform(), i));
    }
    Session s{"s" + std::to_string(trial), {}, std::nullopt, "I4"};
    const std::size_t turns = 1 + rng.index(3);
    for (std::size_t i = 0; i < turns; ++i) s.turns.push_back(queries[rng.index(queries.size())]);
    const auto kind = kTemplates[rng.index(kTemplates.size())];
    const Ordering ordering{static_cast<OrderingKind>(rng.index(3)), rng.next()};

    const auto p = render(kind, demos, s, ordering, t);
    CHECK(p.text.find("Return Item") == std::string::npos);
    CHECK(p.text.find("I4") == std::string::npos);

    std::set<std::string> demo_intents;
    for (const auto& d : demos) demo_intents.insert(d.example.intent_id);
    for (const auto& [label, id] : p.label_map) CHECK(demo_intents.count(id) == 1);

    const auto view = inspect_prompt(p.messages);
    std::vector<std::string> expected;
    for (const auto& d : order_demos(demos, ordering)) expected.push_back(d.example.query);
    CHECK(view.demo_queries == expected);
    CHECK(view.session_turns == s.turns);
  }
}
