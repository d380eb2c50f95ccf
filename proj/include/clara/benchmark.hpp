#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clara/corpus.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

/// Shape of one market's data: language, intent count, single-turn training
/// examples and multi-turn test sessions.
struct MarketProfile {
  std::string market;
  std::string language;
  std::size_t intents = 0;
  std::size_t train = 0;
  std::size_t test = 0;
};

/// The eight markets of the reference dataset description. Markets listed
/// with two languages use the local one.
const std::vector<MarketProfile>& market_profiles();
const MarketProfile& market_profile(const std::string& market);  // throws InvalidArgument

struct MarketCorpus {
  Taxonomy taxonomy;
  std::vector<LabeledExample> examples;
  std::vector<Session> sessions;  // gold set on the last turn
};

/// Placeholder-text corpus with the profile's exact counts. Every intent
/// gets at least one example; session lengths are 2..4.
MarketCorpus make_market_corpus(const MarketProfile& profile, std::uint64_t seed);

/// Multi-turn benchmark over 24 leaf intents (2 x 3 x 4). Turns are either a
/// specific request or a vague follow-up that names at most the middle-layer
/// topic, so the final query alone is often ambiguous while earlier turns of
/// the same session usually carry the answer.
struct Benchmark {
  Taxonomy taxonomy;
  std::vector<LabeledExample> train;  // single-turn
  std::vector<ChatLog> chat_logs;     // intent sequences for transition estimates
  std::vector<Session> pool;          // unlabeled sessions to pseudo-label (gold kept for scoring)
  std::vector<Session> test;
};

struct BenchmarkConfig {
  std::uint64_t seed = 7;
  std::size_t train_examples = 2000;
  std::size_t chat_logs = 1000;
  std::size_t pool_sessions = 2000;
  std::size_t test_sessions = 800;
  double single_turn_vague = 0.15;
  double session_vague = 0.5;
  double stay = 0.8;     // next turn keeps the intent
  double sibling = 0.15; // next turn moves to a sibling leaf
};

Benchmark make_benchmark(const BenchmarkConfig& config = {});

}  // namespace clara
