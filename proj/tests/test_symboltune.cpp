#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "clara/embedding.hpp"
#include "clara/rng.hpp"
#include "clara/symboltune.hpp"
#include "clara/text.hpp"
#include "support.hpp"

using namespace clara;
using testing::error_code_of;
using testing::make_intent;

namespace {

// Independent enumeration: bitmasks over word positions with popcount n,
// visited in lexicographic order of the chosen index tuples.
std::vector<std::string> subsets(const std::vector<std::string>& words, std::size_t n) {
  std::vector<std::vector<std::size_t>> tuples;
  const std::size_t w = words.size();
  for (unsigned mask = 0; mask < (1u << w); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != n) continue;
    std::vector<std::size_t> t;
    for (std::size_t i = 0; i < w; ++i) {
      if (mask & (1u << i)) t.push_back(i);
    }
    tuples.push_back(t);
  }
  std::sort(tuples.begin(), tuples.end());
  std::vector<std::string> out;
  for (const auto& t : tuples) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + words[t[i]];
    out.push_back(s);
  }
  return out;
}

double objective(const std::string& cand, const std::string& orig, const EmbeddingProvider& e,
                 double alpha) {
  return alpha * static_cast<double>(text::split_words(cand).size()) +
         (1.0 - cosine(e.embed(cand), e.embed(orig)));
}

std::string random_label(Rng& rng) {
  static const std::vector<std::string> vocab = {
      "Request", "to", "Cancel", "Order", "Track", "Package", "Refund", "Status", "Check",
      "Wallet", "Balance", "Change", "Delivery", "Address", "Payment", "Failed", "My", "the"};
  std::string s;
  const std::size_t n = 2 + rng.index(6);
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng.index(vocab.size())];
  return s;
}

}  // namespace

TEST_CASE("compression_objective") {
  const TrigramEmbedder e;
  const std::string orig = "Request to Cancel Order";
  const auto self = compression_objective(orig, orig, e, 0.05);
  CHECK(std::abs(self.divergence) <= 1e-12);
  CHECK(self.compactness == doctest::Approx(0.05 * 4));
  CHECK(self.objective == self.compactness + self.divergence);
  CHECK(self.word_count == 4);

  const auto good = compression_objective("Cancel Order", orig, e, 0.05);
  const auto bad = compression_objective("Track Package", orig, e, 0.05);
  CHECK(good.divergence < bad.divergence);
  CHECK(bad.divergence >= 0.0);
  CHECK(bad.divergence <= 2.0);

  const auto zero = compression_objective("Cancel Order", orig, e, 0.0);
  CHECK(zero.objective == zero.divergence);
  CHECK(error_code_of([&] { compression_objective("", orig, e, 0.05); }) == ErrorCode::kEmptyText);
}

TEST_CASE("compress_label") {
  const TrigramEmbedder e;
  const auto r = compress_label("Request to Cancel Order", e, 2);
  CHECK(r.compressed == "Cancel Order");
  CHECK(r.word_count == 2);

  // Brute force over the C(4,2) = 6 subsequences.
  const std::vector<std::string> words = {"Request", "to", "Cancel", "Order"};
  const auto cands = subsets(words, 2);
  CHECK(cands.size() == 6);
  CHECK(word_subsequences("Request to Cancel Order", 2) == cands);
  std::string best;
  double best_obj = 1e300;
  for (const auto& c : cands) {
    const double o = objective(c, "Request to Cancel Order", e, kDefaultCompressionAlpha);
    if (o < best_obj) {
      best_obj = o;
      best = c;
    }
  }
  CHECK(best == "Cancel Order");
  CHECK(r.objective == doctest::Approx(best_obj).epsilon(1e-12));

  CHECK(compress_label("Track Package", e, 2).compressed == "Track Package");
  CHECK(error_code_of([&] { compress_label("Refund", e, 2); }) == ErrorCode::kTooShort);
  CHECK(error_code_of([&] { compress_label("Refund", e, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("property: compress_label is optimal over the enumeration") {
  const TrigramEmbedder e;
  Rng rng(6);
  for (int trial = 0; trial < 60; ++trial) {
    const auto label = random_label(rng);
    const auto words = text::split_words(label);
    const std::size_t n = 1 + rng.index(words.size());
    const double alpha = rng.uniform() * 0.2;
    const auto r = compress_label(label, e, n, alpha);
    CHECK(text::split_words(r.compressed).size() == n);
    for (const auto& c : subsets(words, n)) {
      CHECK(r.objective <= objective(c, label, e, alpha) + 1e-12);
    }
  }
}

TEST_CASE("property: larger alpha never picks a longer candidate") {
  const TrigramEmbedder e;
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const auto label = random_label(rng);
    const auto words = text::split_words(label);
    std::vector<std::string> pool;
    for (std::size_t n = 1; n <= words.size(); ++n) {
      for (const auto& c : subsets(words, n)) pool.push_back(c);
    }
    std::size_t prev = words.size() + 1;
    for (double alpha : {0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      const auto r = best_candidate(pool, label, e, alpha);
      CHECK(r.word_count <= prev);
      prev = r.word_count;
    }
  }
  CHECK(error_code_of([&] { best_candidate({}, "x", e, 0.1); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("cross_lingual_source") {
  const auto id_intent = make_intent("I1", "Cara membatalkan pesanan",
                                     {"Logistics", "Order", "Cancellation"}, "", "id");
  CHECK(cross_lingual_source(id_intent, SourceMode::kEnglishCategory) == "Order Cancellation");
  CHECK(cross_lingual_source(id_intent, SourceMode::kAuto) == "Order Cancellation");
  CHECK(cross_lingual_source(id_intent, SourceMode::kLocalTitle) == "Cara membatalkan pesanan");

  const auto en = make_intent("I2", "Request to Cancel Order", {"A", "B", "C"});
  CHECK(cross_lingual_source(en, SourceMode::kLocalTitle) == "Request to Cancel Order");
  CHECK(cross_lingual_source(en, SourceMode::kAuto) == "Request to Cancel Order");

  const auto padded = make_intent("I3", "x", {"Logistics", "Refund", "Refund"});
  CHECK(cross_lingual_source(padded, SourceMode::kEnglishCategory) == "Logistics Refund");
  const auto flat = make_intent("I4", "x", {"Refund", "Refund", "Refund"});
  CHECK(cross_lingual_source(flat, SourceMode::kEnglishCategory) == "Refund");
}

TEST_CASE("compress_all") {
  const TrigramEmbedder e;

  SUBCASE("collision grows the later intent") {
    const auto t = testing::taxonomy_of(
        {make_intent("I1", "Request to Cancel Order", {"L", "O", "A"}),
         make_intent("I2", "Cancel the Order", {"L", "O", "B"})});
    const auto r = compress_all(t, e);
    CHECK(r.taxonomy.at("I1").compressed_label == "Cancel Order");
    CHECK(r.report.entries[0].n == 2);
    CHECK(r.report.entries[1].n == 3);
    CHECK(text::split_words(*r.taxonomy.at("I2").compressed_label).size() == 3);
    REQUIRE(r.report.collisions.size() == 1);
    CHECK(r.report.collisions[0].first == "Cancel Order");
    CHECK(r.report.collisions[0].second == std::vector<std::string>{"I1", "I2"});
  }
  SUBCASE("collision-free KB") {
    const auto r = compress_all(testing::small_taxonomy(), e);
    for (const auto& entry : r.report.entries) CHECK(entry.n == 2);
    CHECK(r.report.collisions.empty());
  }
  SUBCASE("exhausted words get a suffix") {
    const auto t = testing::taxonomy_of({make_intent("I1", "Refund", {"A", "B", "C"}),
                                         make_intent("I2", "refund", {"A", "B", "D"}),
                                         make_intent("I3", "Refund", {"A", "B", "E"})});
    const auto r = compress_all(t, e);
    CHECK(r.taxonomy.at("I1").compressed_label == "Refund");
    CHECK(r.taxonomy.at("I2").compressed_label == "refund #2");
    CHECK(r.taxonomy.at("I3").compressed_label == "Refund #3");
    CHECK(r.report.entries[2].suffixed);
  }
  SUBCASE("modes") {
    const auto t = testing::small_taxonomy();
    CompressAllOptions o;
    o.mode = CompressionMode::kSymbols;
    CHECK(compress_all(t, e, o).taxonomy.at("I3").compressed_label == "S3");
    o.mode = CompressionMode::kNone;
    CHECK_FALSE(compress_all(t, e, o).taxonomy.at("I3").compressed_label.has_value());
    o.mode = CompressionMode::kLongTarget;
    CHECK(compress_all(t, e, o).taxonomy.at("I3").compressed_label ==
          "Return Refund: Refund Status");
    CHECK(parse_compression_mode("symbols-only") == CompressionMode::kSymbols);
    CHECK(error_code_of([] { parse_compression_mode("bogus"); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("compress_all on a 50-intent KB") {
  const TrigramEmbedder e;
  Rng rng(50);
  std::vector<Intent> intents;
  for (int i = 0; i < 50; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "K%02d", i);
    intents.push_back(make_intent(id, random_label(rng), {"G" + std::to_string(i % 3), "M" + std::to_string(i % 7), "L" + std::to_string(i)}));
  }
  const auto t = testing::taxonomy_of(intents);
  const auto r = compress_all(t, e, {2, kDefaultCompressionAlpha, SourceMode::kLocalTitle,
                                     CompressionMode::kNWord, 2});
  std::set<std::string> seen;
  double tokens = 0.0;
  for (const auto& intent : r.taxonomy.intents()) {
    REQUIRE(intent.compressed_label.has_value());
    CHECK(seen.insert(text::to_lower(*intent.compressed_label)).second);
    tokens += static_cast<double>(token_count(*intent.compressed_label));
  }
  CHECK(tokens / 50.0 <= 4.0);

  // Idempotent: recompressing the output changes nothing.
  const auto again = compress_all(r.taxonomy, e, {2, kDefaultCompressionAlpha,
                                                  SourceMode::kLocalTitle, CompressionMode::kNWord, 1});
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(again.taxonomy.intents()[i].compressed_label == r.taxonomy.intents()[i].compressed_label);
  }
}

TEST_CASE("property: compress_all labels are unique on fuzzed KBs") {
  const TrigramEmbedder e(32);
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Intent> intents;
    const std::size_t m = 2 + rng.index(30);
    for (std::size_t i = 0; i < m; ++i) {
      // Tiny vocabulary forces many collisions.
      static const std::vector<std::string> vocab = {"Cancel", "Order", "Refund", "cancel"};
      std::string title;
      const std::size_t n = 1 + rng.index(3);
      for (std::size_t w = 0; w < n; ++w) title += (w ? " " : "") + vocab[rng.index(vocab.size())];
      intents.push_back(make_intent("F" + std::to_string(i), title, {"A", "B", "L" + std::to_string(i)}));
    }
    const auto r = compress_all(testing::taxonomy_of(intents), e);
    std::set<std::string> seen;
    for (const auto& intent : r.taxonomy.intents()) {
      CHECK(seen.insert(text::to_lower(*intent.compressed_label)).second);
    }
  }
}
