#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clara/jsonl.hpp"
#include "clara/labeling.hpp"

namespace clara {

/// Exact-match fraction. Throws LengthMismatch or Empty.
double accuracy(std::span<const std::string> predictions, std::span<const std::string> golds);

/// good / (good + bad). Throws NoRatings when both are zero.
double scsat(std::size_t good, std::size_t bad);

struct RatedSession {
  bool completed_flow = false;
  bool transferred = false;
  bool bad_rating = false;
};

/// Share of sessions that completed the flow without transfer or a bad
/// rating. Throws Empty.
double resolution_rate(std::span<const RatedSession> sessions);
std::vector<RatedSession> load_rated_sessions(const std::filesystem::path& path);

struct ConsistencyPrecision {
  double precision_kept = 0.0;   // over consistent verdicts (0 when none kept)
  double accuracy_all = 0.0;     // unfiltered label over every verdict
  double removed_fraction = 0.0;
  std::size_t kept = 0;
  std::size_t total = 0;
};

/// Throws MissingGold when a verdict's session has no gold label, Empty for
/// no verdicts.
ConsistencyPrecision consistency_precision(std::span<const ConsistencyVerdict> verdicts,
                                           const std::map<std::string, std::string>& golds);

struct ZTest {
  double z = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Pooled two-proportion z-test of x1/n1 against x2/n2.
ZTest two_proportion_z_test(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2);

struct MarketRow {
  std::string market;
  std::size_t samples = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double hallucination_rate = 0.0;
  double retention_rate = 0.0;
  double consistency_precision = 0.0;
  std::optional<double> rr;
  std::optional<double> scsat;
  std::vector<MarketRow> markets;
  /// Sample-weighted accuracy over the market rows.
  double weighted_accuracy() const;
};

Json report_to_json(const MetricsReport& report);

}  // namespace clara
