#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "clara/benchmark.hpp"
#include "clara/corpus.hpp"
#include "support.hpp"

using namespace clara;
using testing::error_code_of;

namespace {

using Seqs = std::vector<std::vector<std::string>>;
const std::vector<std::string> kABC = {"A", "B", "C"};

// Fixed 4-state generator chain.
const std::vector<std::string> kStates = {"S0", "S1", "S2", "S3"};
const std::vector<std::vector<double>> kChain = {
    {0.1, 0.6, 0.2, 0.1},
    {0.3, 0.1, 0.5, 0.1},
    {0.25, 0.25, 0.25, 0.25},
    {0.7, 0.0, 0.1, 0.2},
};
const std::vector<double> kStart = {0.4, 0.3, 0.2, 0.1};

std::vector<LabeledExample> chain_examples() {
  std::vector<LabeledExample> out;
  for (const auto& s : kStates) {
    for (int r = 0; r < 3; ++r) out.push_back({s + " text " + std::to_string(r), s, "en"});
  }
  return out;
}

TransitionModel chain_model(std::size_t fixed_length) {
  TransitionModel tm;
  tm.states = kStates;
  tm.start_dist = kStart;
  tm.trans = kChain;
  tm.length_dist.assign(fixed_length + 1, 0.0);
  tm.length_dist[fixed_length] = 1.0;
  return tm;
}

}  // namespace

TEST_CASE("estimate_transitions: count ratios") {
  const Seqs logs = {{"A", "B"}, {"A", "B"}, {"A", "C"}};
  const auto tm = estimate_transitions(logs, kABC, 0.0);
  CHECK(tm.trans[0][1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(tm.trans[0][2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(tm.trans[0][0] == 0.0);
  // B and C never transition: uniform fallback.
  for (double p : tm.trans[1]) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(tm.start_dist[0] == 1.0);
  CHECK(tm.length_dist[2] == 1.0);
}

TEST_CASE("estimate_transitions: single sequence is uniform") {
  const Seqs logs = {{"A"}};
  const auto tm = estimate_transitions(logs, kABC, 0.0);
  for (double p : tm.trans[0]) CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("estimate_transitions: smoothing") {
  const Seqs logs = {{"A", "B"}};
  const auto tm = estimate_transitions(logs, kABC, 1.0);
  CHECK(tm.trans[0][1] == doctest::Approx(2.0 / 4.0));
  CHECK(tm.trans[0][0] == doctest::Approx(1.0 / 4.0));
  CHECK(tm.trans[1][2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("estimate_transitions: errors") {
  CHECK(error_code_of([] { estimate_transitions(Seqs{}, kABC, 0.0); }) == ErrorCode::kEmptyLog);
  CHECK(error_code_of([] { estimate_transitions(Seqs{{}}, kABC, 0.0); }) == ErrorCode::kEmptyLog);
  CHECK(error_code_of([] { estimate_transitions(Seqs{{"A", "Z"}}, kABC, 0.0); }) ==
        ErrorCode::kUnknownIntent);
}

TEST_CASE("estimate_transitions recovers a known chain") {
  Rng rng(2024);
  Seqs walks;
  for (int w = 0; w < 200; ++w) {
    std::vector<std::string> seq;
    std::size_t s = rng.categorical(kStart);
    seq.push_back(kStates[s]);
    for (int step = 0; step < 3; ++step) {
      s = rng.categorical(kChain[s]);
      seq.push_back(kStates[s]);
    }
    walks.push_back(seq);
  }
  const auto tm = estimate_transitions(walks, kStates, 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(tm.trans[i][j] - kChain[i][j]));
  }
  CHECK(worst <= 0.15);
}

TEST_CASE("property: estimated rows are stochastic") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_states = 1 + rng.index(8);
    std::vector<std::string> states;
    for (std::size_t i = 0; i < n_states; ++i) states.push_back("X" + std::to_string(i));
    Seqs logs(1 + rng.index(30));
    for (auto& seq : logs) {
      const std::size_t len = 1 + rng.index(9);
      for (std::size_t t = 0; t < len; ++t) seq.push_back(states[rng.index(n_states)]);
    }
    const double smoothing = rng.index(2) == 0 ? 0.0 : rng.uniform() * 2.0;
    const auto tm = estimate_transitions(logs, states, smoothing);
    for (const auto& row : tm.trans) {
      double sum = 0.0;
      for (double p : row) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
    double start = 0.0;
    for (double p : tm.start_dist) start += p;
    CHECK(std::abs(start - 1.0) <= 1e-9);
    CHECK_NOTHROW(validate_transition_model(tm));
  }
}

TEST_CASE("synthesize_sessions") {
  const auto examples = chain_examples();

  SUBCASE("n = 0") { CHECK(synthesize_sessions(examples, chain_model(2), 0, 1).empty()); }

  SUBCASE("forced path") {
    TransitionModel tm;
    tm.states = {"A", "B"};
    tm.start_dist = {1.0, 0.0};
    tm.trans = {{0.0, 1.0}, {0.0, 1.0}};
    tm.length_dist = {0.0, 0.0, 1.0};
    const std::vector<LabeledExample> ex = {
        {"a one", "A", "en"}, {"a two", "A", "en"}, {"b one", "B", "en"}};
    const auto sessions = synthesize_sessions(ex, tm, 50, 3);
    for (const auto& s : sessions) {
      CHECK(s.gold_intent == "B");
      REQUIRE(s.turns.size() == 2);
      CHECK(s.turns[0].rfind("a ", 0) == 0);
      CHECK(*s.history_intents == std::vector<std::string>{"A"});
    }
  }

  SUBCASE("uncovered state") {
    std::vector<LabeledExample> partial(examples.begin(), examples.begin() + 3);
    CHECK(error_code_of([&] { synthesize_sessions(partial, chain_model(2), 5, 1); }) ==
          ErrorCode::kUncoveredIntent);
  }

  SUBCASE("gold marginal matches the two-step chain marginal") {
    // Length 3: gold = state after two transitions, start * P^2.
    std::vector<double> one(4, 0.0), two(4, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) one[j] += kStart[i] * kChain[i][j];
    }
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) two[j] += one[i] * kChain[i][j];
    }
    const auto sessions = synthesize_sessions(examples, chain_model(3), 10000, 99, 2);
    std::map<std::string, double> freq;
    for (const auto& s : sessions) freq[*s.gold_intent] += 1.0 / 10000.0;
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(freq[kStates[j]] - two[j]) <= 0.03);
  }

  SUBCASE("determinism and worker independence") {
    const auto a = synthesize_sessions(examples, chain_model(4), 300, 17, 1);
    const auto b = synthesize_sessions(examples, chain_model(4), 300, 17, 4);
    CHECK(a == b);
    const auto c = synthesize_sessions(examples, chain_model(4), 300, 18, 1);
    std::multiset<std::vector<std::string>> ma, mc;
    for (const auto& s : a) ma.insert(s.turns);
    for (const auto& s : c) mc.insert(s.turns);
    CHECK(ma != mc);
  }

  SUBCASE("history matches the path prefix") {
    TransitionModel tm = chain_model(5);
    tm.length_dist = {0.0, 0.2, 0.2, 0.2, 0.2, 0.2};
    for (const auto& s : synthesize_sessions(examples, tm, 500, 4)) {
      REQUIRE(s.history_intents.has_value());
      CHECK(s.history_intents->size() + 1 == s.turns.size());
      for (std::size_t t = 0; t + 1 < s.turns.size(); ++t) {
        // Each turn text is drawn from its intent's examples ("S1 text 2").
        CHECK(s.turns[t].rfind((*s.history_intents)[t] + " ", 0) == 0);
      }
      CHECK(s.turns.back().rfind(*s.gold_intent + " ", 0) == 0);
    }
  }
}

TEST_CASE("session validation and IO") {
  Session s{"x", {"a", "b"}, std::vector<std::string>{"I1", "I2"}, "I1"};
  CHECK(error_code_of([&] { validate_session(s); }) == ErrorCode::kInvalidArgument);
  s.turns.clear();
  s.history_intents.reset();
  CHECK(error_code_of([&] { validate_session(s); }) == ErrorCode::kEmptySession);

  testing::TempDir dir("corpus");
  const std::vector<Session> sessions = {
      {"s1", {"hi", "cancel"}, std::vector<std::string>{"I2"}, "I1"},
      {"s2", {"track"}, std::nullopt, std::nullopt}};
  save_sessions(dir / "s.jsonl", sessions);
  CHECK(load_sessions(dir / "s.jsonl") == sessions);

  testing::write_file(dir / "bad.jsonl", R"({"id":"s","turns":["a","b"],"history_intents":[]})");
  CHECK(error_code_of([&] { load_sessions(dir / "bad.jsonl"); }) == ErrorCode::kParseError);

  const auto t = testing::small_taxonomy();
  testing::write_file(dir / "ex.jsonl", R"({"query":"q","intent_id":"I9","lang":"en"})");
  CHECK(error_code_of([&] { load_examples(dir / "ex.jsonl", &t); }) ==
        ErrorCode::kUnknownIntent);
}

TEST_CASE("corpus_stats") {
  SUBCASE("SG-shaped corpus") {
    const auto c = make_market_corpus(market_profile("SG"), 3);
    const auto rows = corpus_stats(c.examples, c.sessions, c.taxonomy);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == CorpusStatsRow{"en", 360, 76000, 737});
  }
  SUBCASE("empty") {
    const Taxonomy empty;
    CHECK(corpus_stats({}, {}, empty).empty());
  }
  SUBCASE("two languages") {
    const auto t = testing::small_taxonomy();
    const std::vector<LabeledExample> ex = {
        {"a", "I1", "en"}, {"b", "I2", "id"}, {"c", "I3", "id"}};
    const auto rows = corpus_stats(ex, {}, t);
    std::size_t train = 0, with_train = 0;
    for (const auto& r : rows) {
      train += r.train;
      if (r.train > 0) ++with_train;
    }
    CHECK(with_train == 2);
    CHECK(train == 3);
  }
}

TEST_CASE("split_validation") {
  std::vector<int> items(70000);
  for (int i = 0; i < 70000; ++i) items[i] = i;
  const auto [train, val] = split_validation(items, 1500, 7);
  CHECK(train.size() == 68500);
  CHECK(val.size() == 1500);
  std::set<int> all(train.begin(), train.end());
  all.insert(val.begin(), val.end());
  CHECK(all.size() == 70000);
  CHECK(split_validation(items, 1500, 7).second == val);

  const std::vector<int> small = {1, 2, 3};
  CHECK(split_validation(small, 3, 1).first.empty());
  CHECK(error_code_of([&] { split_validation(small, 4, 1); }) == ErrorCode::kInsufficientData);
}
