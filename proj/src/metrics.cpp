#include "clara/metrics.hpp"

#include <cmath>

#include "clara/error.hpp"

namespace clara {

double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds) {
  if (predictions.size() != golds.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(predictions.size()) +
                                                " predictions vs " + std::to_string(golds.size()) +
                                                " golds");
  }
  if (golds.empty()) throw Error(ErrorCode::kEmpty, "nothing to score");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) hit += predictions[i] == golds[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(golds.size());
}

double scsat(std::size_t good, std::size_t bad) {
  if (good + bad == 0) throw Error(ErrorCode::kNoRatings, "no rated sessions");
  return static_cast<double>(good) / static_cast<double>(good + bad);
}

double resolution_rate(std::span<const RatedSession> sessions) {
  if (sessions.empty()) throw Error(ErrorCode::kEmpty, "no sessions");
  std::size_t resolved = 0;
  for (const auto& s : sessions) {
    if (s.completed_flow && !s.transferred && !s.bad_rating) ++resolved;
  }
  return static_cast<double>(resolved) / static_cast<double>(sessions.size());
}

std::vector<RatedSession> load_rated_sessions(const std::filesystem::path& path) {
  std::vector<RatedSession> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    RatedSession s;
    try {
      s.completed_flow = j.at("completed_flow").get<bool>();
      s.transferred = j.at("transferred").get<bool>();
      s.bad_rating = j.at("bad_rating").get<bool>();
    } catch (const Json::exception& e) {
      throw ParseError(line, e.what());
    }
    out.push_back(s);
  });
  return out;
}

ConsistencyPrecision consistency_precision(std::span<const ConsistencyVerdict> verdicts,
                                           const std::map<std::string, std::string>& golds) {
  if (verdicts.empty()) throw Error(ErrorCode::kEmpty, "no verdicts");
  ConsistencyPrecision r;
  r.total = verdicts.size();
  std::size_t kept_correct = 0, all_correct = 0;
  for (const auto& v : verdicts) {
    auto it = golds.find(v.session_id);
    if (it == golds.end()) {
      throw Error(ErrorCode::kMissingGold, "no gold label for session '" + v.session_id + "'");
    }
    const auto label = v.unfiltered_label();
    if (label && *label == it->second) ++all_correct;
    if (v.consistent) {
      ++r.kept;
      if (*v.final_label == it->second) ++kept_correct;
    }
  }
  const double total = static_cast<double>(r.total);
  r.precision_kept = r.kept ? static_cast<double>(kept_correct) / static_cast<double>(r.kept) : 0.0;
  r.accuracy_all = static_cast<double>(all_correct) / total;
  r.removed_fraction = static_cast<double>(r.total - r.kept) / total;
  return r;
}

ZTest two_proportion_z_test(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw Error(ErrorCode::kEmpty, "z-test needs two non-empty samples");
  if (x1 > n1 || x2 > n2) throw Error(ErrorCode::kInvalidArgument, "successes exceed trials");
  const double p1 = static_cast<double>(x1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(x2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(x1 + x2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  ZTest t;
  if (se == 0.0) return t;
  t.z = (p1 - p2) / se;
  t.p_value = std::erfc(std::fabs(t.z) / std::sqrt(2.0));
  return t;
}

double MetricsReport::weighted_accuracy() const {
  std::size_t n = 0, c = 0;
  for (const auto& m : markets) {
    n += m.samples;
    c += m.correct;
  }
  return n ? static_cast<double>(c) / static_cast<double>(n) : 0.0;
}

Json report_to_json(const MetricsReport& r) {
  Json markets = Json::array();
  for (const auto& m : r.markets) {
    markets.push_back({{"market", m.market},
                       {"samples", m.samples},
                       {"correct", m.correct},
                       {"accuracy", m.accuracy}});
  }
  Json j = {{"accuracy", r.accuracy},
            {"hallucination_rate", r.hallucination_rate},
            {"retention_rate", r.retention_rate},
            {"consistency_precision", r.consistency_precision},
            {"rr", r.rr ? Json(*r.rr) : Json(nullptr)},
            {"scsat", r.scsat ? Json(*r.scsat) : Json(nullptr)},
            {"markets", markets}};
  if (!r.markets.empty()) j["weighted_accuracy"] = r.weighted_accuracy();
  return j;
}

}  // namespace clara
