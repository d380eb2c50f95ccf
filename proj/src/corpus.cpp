#include "clara/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "clara/parallel.hpp"
#include "clara/text.hpp"

namespace clara {

std::size_t TransitionModel::state_index(std::string_view id) const {
  auto it = std::find(states.begin(), states.end(), id);
  if (it == states.end()) {
    throw Error(ErrorCode::kUnknownIntent, "'" + std::string(id) + "' is not a model state");
  }
  return static_cast<std::size_t>(it - states.begin());
}

void validate_session(const Session& session) {
  if (session.turns.empty()) {
    throw Error(ErrorCode::kEmptySession, "session '" + session.id + "' has no turns");
  }
  if (session.history_intents && session.history_intents->size() + 1 != session.turns.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "session '" + session.id + "' history_intents must have n-1 entries");
  }
}

void validate_transition_model(const TransitionModel& tm, double tolerance) {
  const std::size_t n = tm.states.size();
  auto check_dist = [&](const std::vector<double>& dist, const std::string& what) {
    double sum = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::kInvalidArgument, what + " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::kInvalidArgument, what + " does not sum to 1");
    }
  };
  if (tm.start_dist.size() != n || tm.trans.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "transition model shapes disagree with state count");
  }
  check_dist(tm.start_dist, "start_dist");
  for (std::size_t i = 0; i < n; ++i) {
    if (tm.trans[i].size() != n) {
      throw Error(ErrorCode::kShapeMismatch, "transition row " + std::to_string(i) + " length");
    }
    check_dist(tm.trans[i], "transition row '" + tm.states[i] + "'");
  }
  if (tm.length_dist.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "length_dist must cover at least length 1");
  }
  if (tm.length_dist[0] != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "sessions cannot have length 0");
  }
  check_dist(tm.length_dist, "length_dist");
}

// ---- JSON ------------------------------------------------------------------

LabeledExample example_from_json(const Json& record, std::size_t line) {
  LabeledExample ex;
  ex.query = require_string(record, "query", line);
  if (text::trim(ex.query).empty()) throw ParseError(line, "empty query");
  ex.intent_id = require_string(record, "intent_id", line);
  ex.language = record.contains("lang") ? require_string(record, "lang", line) : "und";
  return ex;
}

Json example_to_json(const LabeledExample& example) {
  return {{"query", example.query}, {"intent_id", example.intent_id}, {"lang", example.language}};
}

Session session_from_json(const Json& record, std::size_t line) {
  Session s;
  s.id = require_string(record, "id", line);
  s.turns = require_string_array(record, "turns", line);
  if (s.turns.empty()) throw ParseError(line, "session has no turns");
  if (auto it = record.find("history_intents"); it != record.end() && !it->is_null()) {
    s.history_intents = require_string_array(record, "history_intents", line);
    if (s.history_intents->size() + 1 != s.turns.size()) {
      throw ParseError(line, "history_intents must have one entry per earlier turn");
    }
  }
  if (auto it = record.find("gold_intent"); it != record.end() && !it->is_null()) {
    s.gold_intent = require_string(record, "gold_intent", line);
  }
  return s;
}

Json session_to_json(const Session& session) {
  Json j = {{"id", session.id}, {"turns", session.turns}};
  if (session.history_intents) j["history_intents"] = *session.history_intents;
  if (session.gold_intent) j["gold_intent"] = *session.gold_intent;
  return j;
}

Json transition_model_to_json(const TransitionModel& tm) {
  return {{"states", tm.states},
          {"start_dist", tm.start_dist},
          {"trans", tm.trans},
          {"length_dist", tm.length_dist}};
}

TransitionModel transition_model_from_json(const Json& j) {
  TransitionModel tm;
  try {
    tm.states = j.at("states").get<std::vector<std::string>>();
    tm.start_dist = j.at("start_dist").get<std::vector<double>>();
    tm.trans = j.at("trans").get<std::vector<std::vector<double>>>();
    tm.length_dist = j.at("length_dist").get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ParseError(0, std::string("transition model: ") + e.what());
  }
  validate_transition_model(tm, 1e-6);
  return tm;
}

std::vector<LabeledExample> load_examples(const std::filesystem::path& path,
                                          const Taxonomy* taxonomy) {
  std::vector<LabeledExample> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t line) {
    auto ex = example_from_json(r, line);
    if (taxonomy != nullptr && taxonomy->find(ex.intent_id) == nullptr) {
      throw Error(ErrorCode::kUnknownIntent, "line " + std::to_string(line) + ": intent '" +
                                                 ex.intent_id + "' not in taxonomy");
    }
    out.push_back(std::move(ex));
  });
  return out;
}

void save_examples(const std::filesystem::path& path, std::span<const LabeledExample> examples) {
  std::vector<Json> records;
  records.reserve(examples.size());
  for (const auto& e : examples) records.push_back(example_to_json(e));
  write_jsonl(path, records);
}

std::vector<Session> load_sessions(const std::filesystem::path& path) {
  std::vector<Session> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t line) {
    out.push_back(session_from_json(r, line));
  });
  return out;
}

void save_sessions(const std::filesystem::path& path, std::span<const Session> sessions) {
  std::vector<Json> records;
  records.reserve(sessions.size());
  for (const auto& s : sessions) records.push_back(session_to_json(s));
  write_jsonl(path, records);
}

std::vector<ChatLog> load_chat_logs(const std::filesystem::path& path) {
  std::vector<ChatLog> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t line) {
    ChatLog log;
    log.session_id = require_string(r, "session_id", line);
    log.intent_sequence = require_string_array(r, "intent_sequence", line);
    out.push_back(std::move(log));
  });
  return out;
}

void save_chat_logs(const std::filesystem::path& path, std::span<const ChatLog> logs) {
  std::vector<Json> records;
  records.reserve(logs.size());
  for (const auto& l : logs) {
    records.push_back({{"session_id", l.session_id}, {"intent_sequence", l.intent_sequence}});
  }
  write_jsonl(path, records);
}

// ---- transitions -----------------------------------------------------------

TransitionModel estimate_transitions(std::span<const std::vector<std::string>> chat_logs,
                                     std::span<const std::string> states, double smoothing,
                                     int max_length) {
  if (chat_logs.empty()) throw Error(ErrorCode::kEmptyLog, "no chat logs");
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must be a non-negative real");
  }
  if (max_length < 1) throw Error(ErrorCode::kInvalidArgument, "max_length must be positive");
  if (states.empty()) throw Error(ErrorCode::kInvalidArgument, "no states");

  const std::size_t n = states.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(states[i], i);

  std::vector<double> start(n, 0.0);
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  std::vector<double> lengths(static_cast<std::size_t>(max_length) + 1, 0.0);

  for (const auto& seq : chat_logs) {
    if (seq.empty()) throw Error(ErrorCode::kEmptyLog, "chat log with no intents");
    std::size_t prev = 0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      auto it = index.find(seq[t]);
      if (it == index.end()) {
        throw Error(ErrorCode::kUnknownIntent, "chat log intent '" + seq[t] + "' is unknown");
      }
      if (t == 0) {
        start[it->second] += 1.0;
      } else {
        counts[prev][it->second] += 1.0;
      }
      prev = it->second;
    }
    lengths[std::min<std::size_t>(seq.size(), static_cast<std::size_t>(max_length))] += 1.0;
  }

  TransitionModel tm;
  tm.states.assign(states.begin(), states.end());
  const double total_starts = static_cast<double>(chat_logs.size());
  tm.start_dist.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tm.start_dist[i] = (start[i] + smoothing) / (total_starts + smoothing * static_cast<double>(n));
  }
  tm.trans.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (double c : counts[i]) row += c;
    const double denom = row + smoothing * static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      tm.trans[i][j] = denom > 0.0 ? (counts[i][j] + smoothing) / denom
                                   : 1.0 / static_cast<double>(n);
    }
  }
  tm.length_dist.resize(lengths.size());
  for (std::size_t l = 0; l < lengths.size(); ++l) tm.length_dist[l] = lengths[l] / total_starts;
  return tm;
}

TransitionModel estimate_transitions(std::span<const ChatLog> chat_logs, const Taxonomy& taxonomy,
                                     double smoothing, int max_length) {
  std::vector<std::string> states;
  for (const auto& intent : taxonomy.intents()) states.push_back(intent.id);
  std::sort(states.begin(), states.end());
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(chat_logs.size());
  for (const auto& log : chat_logs) seqs.push_back(log.intent_sequence);
  return estimate_transitions(seqs, states, smoothing, max_length);
}

// ---- synthesis -------------------------------------------------------------

std::vector<Session> synthesize_sessions(std::span<const LabeledExample> corpus,
                                         const TransitionModel& tm, std::size_t n,
                                         std::uint64_t seed, std::size_t workers,
                                         const std::string& id_prefix) {
  if (n == 0) return {};
  validate_transition_model(tm, 1e-6);
  std::vector<std::vector<const LabeledExample*>> by_state(tm.states.size());
  {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < tm.states.size(); ++i) index.emplace(tm.states[i], i);
    for (const auto& ex : corpus) {
      if (auto it = index.find(ex.intent_id); it != index.end()) {
        by_state[it->second].push_back(&ex);
      }
    }
  }
  for (std::size_t i = 0; i < tm.states.size(); ++i) {
    if (by_state[i].empty()) {
      throw Error(ErrorCode::kUncoveredIntent,
                  "state '" + tm.states[i] + "' has no single-turn examples");
    }
  }

  std::vector<Session> sessions(n);
  parallel_for(n, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const std::size_t length = rng.categorical(tm.length_dist);
    std::vector<std::size_t> path;
    path.push_back(rng.categorical(tm.start_dist));
    while (path.size() < length) path.push_back(rng.categorical(tm.trans[path.back()]));

    Session s;
    char id[64];
    std::snprintf(id, sizeof id, "%s-%06zu", id_prefix.c_str(), i);
    s.id = id;
    std::vector<std::string> history;
    for (std::size_t t = 0; t < path.size(); ++t) {
      const auto& pool = by_state[path[t]];
      s.turns.push_back(pool[rng.index(pool.size())]->query);
      if (t + 1 < path.size()) history.push_back(tm.states[path[t]]);
    }
    s.history_intents = std::move(history);
    s.gold_intent = tm.states[path.back()];
    sessions[i] = std::move(s);
  });
  return sessions;
}

// ---- stats -----------------------------------------------------------------

std::vector<CorpusStatsRow> corpus_stats(std::span<const LabeledExample> examples,
                                         std::span<const Session> sessions,
                                         const Taxonomy& taxonomy) {
  std::map<std::string, CorpusStatsRow> rows;
  auto row = [&](const std::string& lang) -> CorpusStatsRow& {
    auto& r = rows[lang];
    r.language = lang;
    return r;
  };
  for (const auto& intent : taxonomy.intents()) ++row(intent.language).intents;
  for (const auto& ex : examples) ++row(ex.language).train;
  for (const auto& s : sessions) {
    if (!s.gold_intent) continue;
    const Intent* intent = taxonomy.find(*s.gold_intent);
    ++row(intent != nullptr ? intent->language : "und").test;
  }
  std::vector<CorpusStatsRow> out;
  out.reserve(rows.size());
  for (auto& [_, r] : rows) out.push_back(std::move(r));
  return out;
}

}  // namespace clara
