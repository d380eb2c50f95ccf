#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "clara/gestalt.hpp"
#include "clara/labeling.hpp"
#include "clara/metrics.hpp"
#include "clara/rng.hpp"
#include "clara/text.hpp"
#include "support.hpp"

using namespace clara;
using testing::error_code_of;
using testing::make_intent;

namespace {

// Brute-force Ratcliff-Obershelp: scan every (i, j) start for the longest
// run, keep the first maximum (earliest in a, then earliest in b), recurse.
std::size_t matched(const std::u32string& a, std::size_t alo, std::size_t ahi,
                    const std::u32string& b, std::size_t blo, std::size_t bhi) {
  std::size_t best = 0, bi = alo, bj = blo;
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best) {
        best = k;
        bi = i;
        bj = j;
      }
    }
  }
  if (best == 0) return 0;
  return best + matched(a, alo, bi, b, blo, bj) + matched(a, bi + best, ahi, b, bj + best, bhi);
}

double reference_ratio(std::string_view sa, std::string_view sb) {
  const auto a = text::utf8_decode(sa), b = text::utf8_decode(sb);
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(matched(a, 0, a.size(), b, 0, b.size())) /
         static_cast<double>(total);
}

std::string random_string(Rng& rng, std::string_view alphabet, std::size_t max_len) {
  std::string s;
  const std::size_t n = rng.index(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.index(alphabet.size())];
  return s;
}

// Four leaves, five distinct single-turn texts each.
struct Fixture {
  Taxonomy taxonomy = testing::small_taxonomy();
  TrigramEmbedder embedder;
  std::vector<LabeledExample> examples;
  RetrievalIndex index;
  std::vector<Session> sessions;

  explicit Fixture(std::size_t n_sessions) {
    const std::map<std::string, std::string> stem = {{"I1", "cancel my order"},
                                                     {"I2", "where is my package"},
                                                     {"I3", "refund status"},
                                                     {"I4", "return the item"}};
    for (const auto& [id, s] : stem) {
      for (int r = 0; r < 5; ++r) examples.push_back({s + " v" + std::to_string(r), id, "en"});
    }
    index = RetrievalIndex::build(examples, embedder);
    Rng rng(77);
    for (std::size_t i = 0; i < n_sessions; ++i) {
      const auto& gold = examples[rng.index(examples.size())];
      Session s{"sess-" + std::to_string(i), {}, std::nullopt, gold.intent_id};
      s.turns.push_back("hello " + std::to_string(i));
      s.turns.push_back(gold.query + " now");
      sessions.push_back(std::move(s));
    }
  }
};

// Answers with the label of the first demonstration in the prompt.
class FirstDemoBackend final : public LlmBackend {
 public:
  FirstDemoBackend(const Taxonomy& t, const std::vector<LabeledExample>& ex) : t_(t) {
    for (const auto& e : ex) intent_of_[e.query] = e.intent_id;
  }
  std::string complete(const CompletionRequest& request) const override {
    const auto view = inspect_prompt(request.messages);
    return Taxonomy::surface_label(t_.at(intent_of_.at(view.demo_queries.front())));
  }

 private:
  const Taxonomy& t_;
  std::map<std::string, std::string> intent_of_;
};

class FailingBackend final : public LlmBackend {
 public:
  explicit FailingBackend(std::size_t every) : every_(every) {}
  std::string complete(const CompletionRequest& request) const override {
    const auto view = inspect_prompt(request.messages);
    const std::string& turn = view.session_turns.front();
    const std::size_t i = std::stoul(turn.substr(turn.find(' ') + 1));
    if (i % every_ == 0) throw Error(ErrorCode::kBackendUnavailable, "down");
    return "Cancel Order";
  }

 private:
  std::size_t every_;
};

}  // namespace

TEST_CASE("gestalt_similarity examples") {
  CHECK(gestalt_similarity("Cancel Order", "Cancel Order") == 1.0);
  CHECK(gestalt_similarity("x", "") == 0.0);
  CHECK(gestalt_similarity("", "") == 1.0);
  // Frozen from Python difflib.SequenceMatcher(autojunk=False).ratio().
  CHECK(gestalt_similarity("Cancel Order", "Order Cancel") == 0.5);
  CHECK(gestalt_similarity("Order Cancel", "Cancel Order") == 0.5);
  // Anchoring makes the ratio order dependent in general (difflib agrees).
  CHECK(gestalt_similarity("baaaabbbabbaabaabab", "bbaaabbababbaaaab") == 0.3333333333333333);
  CHECK(gestalt_similarity("bbaaabbababbaaaab", "baaaabbbabbaabaabab") == 0.8333333333333334);
  CHECK(gestalt_similarity("Cancl Order", "Cancel Order") == 0.9565217391304348);
  CHECK(gestalt_similarity("Cancl Order", "Track Package") == 0.3333333333333333);
  CHECK(gestalt_similarity("abcabcabc", "cbacbacba") == 0.4444444444444444);
  CHECK(gestalt_similarity("pembatalan pesanan", "pesanan dibatalkan") == 0.3888888888888889);
  CHECK(gestalt_similarity("取消订单", "订单取消") == 0.5);
}

TEST_CASE("property: gestalt matches the brute-force reference") {
  Rng rng(1000);
  for (int i = 0; i < 600; ++i) {
    const std::string alphabet = i % 3 == 0 ? "ab" : (i % 3 == 1 ? "abcde " : "Cancel Order");
    const auto a = random_string(rng, alphabet, 24);
    const auto b = random_string(rng, alphabet, 24);
    const double got = gestalt_similarity(a, b);
    CHECK(got == reference_ratio(a, b));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
    if (!a.empty() || !b.empty()) CHECK((got == 1.0) == (a == b));
  }
}

TEST_CASE("resolve_label") {
  const auto t = testing::taxonomy_of(
      {make_intent("I1", "Request to Cancel Order", {"Logistics", "Order", "Cancellation"},
                   "cancel my order"),
       make_intent("I2", "Track Package", {"Logistics", "Order", "Tracking"}),
       make_intent("I7", "Refund Status", {"Finance", "Refund", "Status"})});
  const std::vector<std::optional<std::string>> labels = {"Cancel Order", std::nullopt,
                                                          std::nullopt};
  const auto tc = t.with_compressed_labels(labels);

  auto r = resolve_label("Cancel Order", tc);
  CHECK(r.intent_id == "I1");
  CHECK(r.kind == ResolutionKind::kExact);

  r = resolve_label("  The intent title is cancel order.\nextra", tc);
  CHECK(r.intent_id == "I1");
  CHECK(r.kind == ResolutionKind::kExact);

  r = resolve_label("Request to cancel order", tc);  // title fallback
  CHECK(r.kind == ResolutionKind::kExact);
  r = resolve_label("cancel my order", tc);          // rep_query fallback
  CHECK(r.intent_id == "I1");

  const std::map<std::string, std::string> map = {{"L2", "I7"}};
  r = resolve_label("L2", tc, &map);
  CHECK(r.intent_id == "I7");
  CHECK(r.kind == ResolutionKind::kMapped);

  r = resolve_label("Cancl Order", tc);
  CHECK(r.intent_id == "I1");
  CHECK(r.kind == ResolutionKind::kFuzzy);
  CHECK(r.score == 0.9565217391304348);

  CHECK(error_code_of([&] { resolve_label("  . ", tc); }) == ErrorCode::kEmptyGeneration);
  CHECK(error_code_of([] { resolve_label("x", Taxonomy{}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("resolve_label: fuzzy ties go to the smaller candidate") {
  const auto t = testing::taxonomy_of({make_intent("I2", "ab", {"A", "B", "C"}),
                                       make_intent("I1", "aa", {"A", "B", "D"})});
  // "a" scores 2/3 against both labels.
  const auto r = resolve_label("a", t);
  CHECK(r.intent_id == "I1");
  CHECK(r.score == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("pseudo_label_session") {
  Fixture f(30);
  const LabelingConfig config{TemplateKind::kBase, 4, 11, 1};

  SUBCASE("noise-free oracle agrees with gold") {
    const GoldOracleBackend oracle(f.taxonomy, f.sessions, {});
    for (const auto& s : f.sessions) {
      const auto v = pseudo_label_session(s, f.taxonomy, f.index, f.embedder, oracle, config);
      CHECK(v.consistent);
      CHECK(v.final_label == s.gold_intent);
      CHECK(v.runs[0].ordering == OrderingKind::kAscending);
      CHECK(v.runs[1].ordering == OrderingKind::kDescending);
      CHECK(v.runs[2].ordering == OrderingKind::kRandom);
    }
  }
  SUBCASE("order-dependent answers are inconsistent") {
    const FirstDemoBackend first(f.taxonomy, f.examples);
    LabelingConfig all = config;
    all.k = f.examples.size();
    // Two turns about different intents pull in demos with different labels.
    const Session s{"mixed", {"refund status v0", "cancel my order v1"}, std::nullopt, "I1"};
    const auto v = pseudo_label_session(s, f.taxonomy, f.index, f.embedder, first, all);
    CHECK(v.runs[0].raw != v.runs[1].raw);
    CHECK_FALSE(v.consistent);
    CHECK_FALSE(v.final_label.has_value());
  }
  SUBCASE("k = 1 is always consistent") {
    const FirstDemoBackend first(f.taxonomy, f.examples);
    LabelingConfig one = config;
    one.k = 1;
    for (const auto& s : f.sessions) {
      CHECK(pseudo_label_session(s, f.taxonomy, f.index, f.embedder, first, one).consistent);
    }
  }
  SUBCASE("errors name the session and run") {
    MockScript script;
    const MockBackend silent(script);
    try {
      pseudo_label_session(f.sessions[0], f.taxonomy, f.index, f.embedder, silent, config);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBackendUnavailable);
      CHECK(std::string(e.what()).find("session 'sess-0' run 0") != std::string::npos);
    }
  }
  SUBCASE("empty generation leaves the run unresolved") {
    MockScript script;
    script.default_response = " ";
    const MockBackend blank(script);
    const auto v = pseudo_label_session(f.sessions[0], f.taxonomy, f.index, f.embedder, blank,
                                        config);
    CHECK_FALSE(v.runs[0].resolved.has_value());
    CHECK_FALSE(v.consistent);
  }
}

TEST_CASE("property: verdict invariants") {
  Fixture f(200);
  const GoldOracleBackend oracle(f.taxonomy, f.sessions, {0.2, 0.3, 0.2, 5});
  const auto result = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, oracle,
                                          {TemplateKind::kBase, 6, 3, 2});
  for (const auto& v : result.verdicts) {
    const bool all = std::all_of(v.runs.begin(), v.runs.end(), [&](const LabelRun& r) {
      return r.resolved && v.runs[0].resolved && r.resolved->intent_id == v.runs[0].resolved->intent_id;
    });
    CHECK(v.consistent == all);
    CHECK(v.final_label.has_value() == v.consistent);
  }
  for (const auto& p : result.labels) {
    CHECK(p.provenance.consistent);
    CHECK(p.intent_id == *p.provenance.final_label);
  }
}

TEST_CASE("pseudo_label_corpus") {
  Fixture f(2000);

  SUBCASE("consistent-wrong labels survive") {
    const GoldOracleBackend oracle(f.taxonomy, f.sessions, {0.1, 0.0, 0.0, 13});
    const auto r = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, oracle,
                                       {TemplateKind::kBase, 8, 13, 2});
    CHECK(r.stats.retention_rate == 1.0);
    std::size_t wrong = 0;
    for (const auto& p : r.labels) wrong += p.intent_id != *p.session.gold_intent ? 1 : 0;
    CHECK(std::abs(static_cast<double>(wrong) / 2000.0 - 0.1) <= 0.015);
  }
  SUBCASE("all sensitive keeps nothing") {
    const GoldOracleBackend oracle(f.taxonomy, f.sessions, {0.0, 1.0, 0.0, 13});
    const auto r = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, oracle,
                                       {TemplateKind::kBase, 8, 13, 2});
    // Tied retrieval scores keep a tie group's order under both sorts, so a
    // rare session sees two prompts that both sort before their reversal.
    CHECK(r.stats.kept <= 10);
    CHECK(r.stats.discarded + r.stats.kept == 2000);
  }
  SUBCASE("filtering raises precision") {
    const GoldOracleBackend oracle(f.taxonomy, f.sessions, {0.05, 0.2, 0.0, 13});
    const auto r = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, oracle,
                                       {TemplateKind::kBase, 8, 13, 2});
    std::map<std::string, std::string> golds;
    for (const auto& s : f.sessions) golds[s.id] = *s.gold_intent;
    const auto cp = consistency_precision(r.verdicts, golds);
    CHECK(cp.precision_kept > cp.accuracy_all);
  }
}

TEST_CASE("pseudo_label_corpus: failures") {
  Fixture f(40);
  SUBCASE("a quarter failing is tolerated") {
    const FailingBackend backend(4);
    const auto r = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, backend,
                                       {TemplateKind::kBase, 3, 1, 2});
    CHECK(r.failures.size() == 10);
    CHECK(r.stats.errored == 10);
    CHECK(r.stats.total == 40);
    CHECK(r.stats.kept == 30);
    CHECK(r.stats.retention_rate == doctest::Approx(0.75));
  }
  SUBCASE("a majority failing aborts") {
    const FailingBackend backend(1);
    CHECK(error_code_of([&] {
            pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, backend,
                                {TemplateKind::kBase, 3, 1, 2});
          }) == ErrorCode::kTooManyFailures);
  }
}

TEST_CASE("labeling is schedule independent and persists exactly") {
  Fixture f(300);
  const GoldOracleBackend oracle(f.taxonomy, f.sessions, {0.1, 0.12, 0.1, 21});
  testing::TempDir dir("clara");
  for (auto kind : {TemplateKind::kBase, TemplateKind::kSymbolic, TemplateKind::kPrepend,
                    TemplateKind::kFormatted}) {
    const auto one = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, oracle,
                                         {kind, 5, 21, 1});
    const auto four = pseudo_label_corpus(f.sessions, f.taxonomy, f.index, f.embedder, oracle,
                                          {kind, 5, 21, 4});
    save_labeling(dir / "a.jsonl", f.sessions, one, kind, 5);
    save_labeling(dir / "b.jsonl", f.sessions, four, kind, 5);
    CHECK(testing::read_file(dir / "a.jsonl") == testing::read_file(dir / "b.jsonl"));

    const auto records = load_labeling(dir / "a.jsonl");
    REQUIRE(records.size() == 300);
    std::vector<ConsistencyVerdict> verdicts;
    for (const auto& rec : records) verdicts.push_back(rec.verdict);
    const auto stats = filter_stats(verdicts);
    CHECK(stats.kept == one.stats.kept);
    CHECK(stats.hallucination_rate == one.stats.hallucination_rate);
    CHECK(to_pseudo_labels(records).size() == one.labels.size());
    CHECK(stats_to_json(stats) == stats_to_json(one.stats));
  }
}
