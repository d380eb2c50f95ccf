#include "clara/benchmark.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "clara/error.hpp"
#include "clara/rng.hpp"

namespace clara {

const std::vector<MarketProfile>& market_profiles() {
  static const std::vector<MarketProfile> kProfiles = {
      {"BR", "pt", 316, 66000, 372},    {"ID", "id", 481, 161000, 1145},
      {"MY", "ms", 473, 74000, 1417},   {"PH", "fil", 237, 33000, 189},
      {"SG", "en", 360, 76000, 737},    {"TH", "th", 359, 60000, 502},
      {"TW", "zh-TW", 373, 31000, 353}, {"VN", "vi", 389, 178000, 525},
  };
  return kProfiles;
}

const MarketProfile& market_profile(const std::string& market) {
  for (const auto& p : market_profiles()) {
    if (p.market == market) return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown market '" + market + "'");
}

namespace {

std::string numbered(const char* prefix, std::size_t i, int width = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

MarketCorpus make_market_corpus(const MarketProfile& profile, std::uint64_t seed) {
  if (profile.intents == 0) throw Error(ErrorCode::kInvalidArgument, "profile has no intents");
  if (profile.train < profile.intents) {
    throw Error(ErrorCode::kInsufficientData, "fewer training examples than intents");
  }
  MarketCorpus out;
  std::vector<Intent> intents;
  const std::size_t top = 8, mid = 4;  // categories per layer-1 node / per layer-2 node
  for (std::size_t i = 0; i < profile.intents; ++i) {
    Intent in;
    in.id = profile.market + "-" + numbered("", i + 1);
    in.title = profile.market + " intent " + std::to_string(i + 1);
    in.category_path = {numbered("Topic ", i % top, 2), numbered("Area ", (i / top) % mid, 2),
                        numbered("Case ", i, 4)};
    in.rep_query = "question about case " + std::to_string(i);
    in.language = profile.language;
    intents.push_back(std::move(in));
  }
  CategoryTree tree;
  for (const auto& in : intents) tree.add_path(in.category_path);
  out.taxonomy = Taxonomy::build(intents, tree);

  Rng rng(derive_seed(seed, profile.market));
  out.examples.reserve(profile.train);
  for (std::size_t e = 0; e < profile.train; ++e) {
    const std::size_t i = e < profile.intents ? e : rng.index(profile.intents);
    out.examples.push_back({"question about case " + std::to_string(i) + " variant " +
                                std::to_string(rng.index(1000)),
                            intents[i].id, profile.language});
  }
  out.sessions.reserve(profile.test);
  for (std::size_t s = 0; s < profile.test; ++s) {
    Session sess;
    sess.id = profile.market + "-" + numbered("s", s, 6);
    const std::size_t len = 2 + rng.index(3);
    std::size_t cur = rng.index(profile.intents);
    for (std::size_t t = 0; t < len; ++t) {
      if (t > 0 && rng.uniform() < 0.4) cur = rng.index(profile.intents);
      sess.turns.push_back("follow up on case " + std::to_string(cur));
    }
    sess.gold_intent = intents[cur].id;
    out.sessions.push_back(std::move(sess));
  }
  return out;
}

// ---- multi-turn benchmark --------------------------------------------------

namespace {

struct LeafSpec {
  const char* top;
  const char* mid;
  const char* leaf;
  const char* title;
  std::array<const char*, 3> phrases;
};

constexpr std::array<LeafSpec, 24> kLeaves = {{
    {"Logistics", "Order", "Cancellation", "Request to Cancel Order",
     {"cancel my order", "i want to cancel the order", "stop my order before it ships"}},
    {"Logistics", "Order", "Modification", "Change Order Details",
     {"change the size in my order", "edit the items in my order", "modify my order quantity"}},
    {"Logistics", "Order", "Status", "Check Order Status",
     {"what is my order status", "has my order been processed", "is my order confirmed yet"}},
    {"Logistics", "Order", "Confirmation", "Missing Order Confirmation Email",
     {"no confirmation email for my order", "did not get the order receipt",
      "order confirmation never arrived"}},
    {"Logistics", "Delivery", "Tracking", "Track Package",
     {"where is my package", "track my parcel", "tracking number shows nothing"}},
    {"Logistics", "Delivery", "Delay", "Late Delivery Complaint",
     {"my delivery is late", "parcel delayed for a week", "why is shipping taking so long"}},
    {"Logistics", "Delivery", "Address Change", "Change Delivery Address",
     {"change my shipping address", "deliver to a different address", "wrong address on delivery"}},
    {"Logistics", "Delivery", "Failed Delivery", "Delivery Attempt Failed",
     {"courier says delivery failed", "nobody came to deliver", "delivery attempt unsuccessful"}},
    {"Logistics", "Return", "Return Request", "Request to Return Item",
     {"i want to return this item", "how do i send the product back", "start a return"}},
    {"Logistics", "Return", "Return Status", "Check Return Status",
     {"status of my return", "was my returned item received", "return still pending"}},
    {"Logistics", "Return", "Exchange", "Exchange for Another Size",
     {"exchange for a bigger size", "swap this for another colour", "can i exchange the item"}},
    {"Logistics", "Return", "Return Label", "Print Return Shipping Label",
     {"need a return shipping label", "print the return label", "return label not working"}},
    {"Finance", "Payment", "Payment Failed", "Payment Was Declined",
     {"my payment failed", "card got declined at checkout", "transaction error when paying"}},
    {"Finance", "Payment", "Payment Methods", "Available Payment Methods",
     {"which payment methods do you accept", "can i pay with paypal", "pay by bank transfer"}},
    {"Finance", "Payment", "Installments", "Pay in Installments",
     {"can i pay in installments", "monthly installment plan", "split the payment into months"}},
    {"Finance", "Payment", "Double Charge", "Charged Twice for Order",
     {"i was charged twice", "double charge on my card", "payment deducted two times"}},
    {"Finance", "Refund", "Refund Status", "Check Refund Status",
     {"when will i get my refund", "refund not received yet", "status of my refund"}},
    {"Finance", "Refund", "Refund Request", "Request a Refund",
     {"i want a refund", "please refund me", "how do i ask for my money back"}},
    {"Finance", "Refund", "Refund Amount", "Refund Amount Incorrect",
     {"refund amount is wrong", "only got a partial refund", "refunded less than i paid"}},
    {"Finance", "Refund", "Refund Method", "Refund to Original Payment Method",
     {"refund to my credit card", "can the refund go to my bank", "refund to original payment"}},
    {"Finance", "Wallet", "Top Up", "Top Up Wallet Balance",
     {"top up my wallet", "add money to my e-wallet", "wallet reload failed"}},
    {"Finance", "Wallet", "Balance", "Check Wallet Balance",
     {"what is my wallet balance", "wallet balance looks wrong", "see my coins balance"}},
    {"Finance", "Wallet", "Withdrawal", "Withdraw Wallet Funds",
     {"withdraw money from my wallet", "cash out wallet to bank", "wallet withdrawal pending"}},
    {"Finance", "Wallet", "Wallet Activation", "Activate Wallet Account",
     {"activate my wallet", "wallet verification failed", "how to set up the wallet"}},
}};

struct GroupSpec {
  const char* mid;
  std::array<const char*, 3> phrases;
};

constexpr std::array<GroupSpec, 6> kGroups = {{
    {"Order", {"it is about my order", "question about the order i placed", "my order again"}},
    {"Delivery", {"about the delivery", "the courier thing", "my package"}},
    {"Return", {"about the return", "the item i sent back", "return question"}},
    {"Payment", {"about my payment", "the payment issue", "problem paying"}},
    {"Refund", {"about my refund", "the refund thing", "money back question"}},
    {"Wallet", {"about my wallet", "the wallet issue", "my e-wallet"}},
}};

constexpr std::array<const char*, 8> kGeneric = {
    "any update?", "please help", "hello?", "what should i do now",
    "still waiting", "can you check again", "ok and then?", "is anyone there"};

constexpr std::array<const char*, 5> kPrefixes = {"", "hi, ", "hello ", "please ", "excuse me, "};
constexpr std::array<const char*, 5> kSuffixes = {"", " please", " asap", " thanks", "?"};

std::size_t group_of(std::size_t leaf) { return leaf / 4; }

std::string make_text(std::size_t leaf, double vague, Rng& rng) {
  if (rng.uniform() < vague) {
    if (rng.uniform() < 0.5) return kGeneric[rng.index(kGeneric.size())];
    const auto& g = kGroups[group_of(leaf)];
    return g.phrases[rng.index(g.phrases.size())];
  }
  const auto& spec = kLeaves[leaf];
  std::string s = kPrefixes[rng.index(kPrefixes.size())];
  s += spec.phrases[rng.index(spec.phrases.size())];
  s += kSuffixes[rng.index(kSuffixes.size())];
  return s;
}

std::size_t next_leaf(std::size_t cur, const BenchmarkConfig& c, Rng& rng) {
  const double u = rng.uniform();
  if (u < c.stay) return cur;
  const std::size_t g = group_of(cur);
  if (u < c.stay + c.sibling) {
    std::size_t s = g * 4 + rng.index(3);
    if (s >= cur) ++s;
    return s;
  }
  std::size_t o = rng.index(kLeaves.size() - 4);
  if (o >= g * 4) o += 4;
  return o;
}

std::vector<std::size_t> walk(const BenchmarkConfig& c, Rng& rng) {
  const std::size_t len = 2 + rng.index(3);
  std::vector<std::size_t> seq{rng.index(kLeaves.size())};
  while (seq.size() < len) seq.push_back(next_leaf(seq.back(), c, rng));
  return seq;
}

std::string leaf_id(std::size_t leaf) { return numbered("I", leaf + 1, 2); }

std::vector<Session> make_sessions(const BenchmarkConfig& c, std::size_t n, const char* tag) {
  std::vector<Session> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(c.seed, std::string(tag) + "/" + std::to_string(i)));
    const auto seq = walk(c, rng);
    Session& s = out[i];
    s.id = numbered((std::string(tag) + "-").c_str(), i, 5);
    for (auto leaf : seq) s.turns.push_back(make_text(leaf, c.session_vague, rng));
    s.gold_intent = leaf_id(seq.back());
  }
  return out;
}

}  // namespace

Benchmark make_benchmark(const BenchmarkConfig& c) {
  Benchmark b;
  std::vector<Intent> intents;
  CategoryTree tree;
  for (std::size_t i = 0; i < kLeaves.size(); ++i) {
    const auto& spec = kLeaves[i];
    Intent in;
    in.id = leaf_id(i);
    in.title = spec.title;
    in.category_path = {spec.top, spec.mid, spec.leaf};
    in.rep_query = spec.phrases[0];
    in.language = "en";
    tree.add_path(in.category_path);
    intents.push_back(std::move(in));
  }
  b.taxonomy = Taxonomy::build(std::move(intents), std::move(tree));

  Rng rng(derive_seed(c.seed, std::string_view("train")));
  b.train.reserve(c.train_examples);
  for (std::size_t e = 0; e < c.train_examples; ++e) {
    // Cover every intent before sampling uniformly.
    const std::size_t leaf = e < kLeaves.size() ? e : rng.index(kLeaves.size());
    b.train.push_back({make_text(leaf, c.single_turn_vague, rng), leaf_id(leaf), "en"});
  }
  Rng log_rng(derive_seed(c.seed, std::string_view("logs")));
  for (std::size_t i = 0; i < c.chat_logs; ++i) {
    ChatLog log{numbered("log-", i, 5), {}};
    for (auto leaf : walk(c, log_rng)) log.intent_sequence.push_back(leaf_id(leaf));
    b.chat_logs.push_back(std::move(log));
  }
  b.pool = make_sessions(c, c.pool_sessions, "pool");
  b.test = make_sessions(c, c.test_sessions, "test");
  return b;
}

}  // namespace clara
