#include "clara/labeling.hpp"

#include <algorithm>
#include <mutex>

#include "clara/error.hpp"
#include "clara/gestalt.hpp"
#include "clara/parallel.hpp"
#include "clara/rng.hpp"
#include "clara/text.hpp"

namespace clara {

std::string_view to_string(ResolutionKind kind) {
  switch (kind) {
    case ResolutionKind::kExact: return "exact";
    case ResolutionKind::kFuzzy: return "fuzzy";
    case ResolutionKind::kMapped: return "mapped";
  }
  return "exact";
}

namespace {

ResolutionKind parse_resolution_kind(std::string_view name) {
  for (auto k : {ResolutionKind::kExact, ResolutionKind::kFuzzy, ResolutionKind::kMapped}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kParseError, "unknown resolution kind '" + std::string(name) + "'");
}

bool strip_prefix_ci(std::string_view& s, std::string_view prefix) {
  if (s.size() < prefix.size() || !text::iequals(s.substr(0, prefix.size()), prefix)) return false;
  s.remove_prefix(prefix.size());
  return true;
}

}  // namespace

std::string clean_generation(std::string_view generated) {
  std::string_view s = text::trim(generated);
  // Only the first line counts; models sometimes keep talking.
  if (auto nl = s.find('\n'); nl != std::string_view::npos) s = text::trim(s.substr(0, nl));
  if (strip_prefix_ci(s, text::trim(kAnswerPrefix))) s = text::trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.remove_suffix(1);
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                           (s.front() == '\'' && s.back() == '\'') ||
                           (s.front() == '`' && s.back() == '`'))) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  return std::string(s);
}

Resolution resolve_label(std::string_view generated, const Taxonomy& taxonomy,
                         const std::map<std::string, std::string>* label_map) {
  if (taxonomy.empty()) throw Error(ErrorCode::kInvalidArgument, "taxonomy is empty");
  const std::string g = clean_generation(generated);
  if (g.empty()) throw Error(ErrorCode::kEmptyGeneration, "generation is empty");

  if (label_map) {
    if (auto it = label_map->find(g); it != label_map->end()) {
      return {it->second, ResolutionKind::kMapped, 1.0};
    }
    for (const auto& [key, id] : *label_map) {
      if (text::iequals(key, g)) return {id, ResolutionKind::kMapped, 1.0};
    }
  }

  const auto& intents = taxonomy.intents();
  for (const auto& in : intents) {
    if (in.compressed_label && text::iequals(*in.compressed_label, g)) {
      return {in.id, ResolutionKind::kExact, 1.0};
    }
  }
  for (const auto& in : intents) {
    if (text::iequals(in.title, g)) return {in.id, ResolutionKind::kExact, 1.0};
  }
  for (const auto& in : intents) {
    if (text::iequals(in.rep_query, g)) return {in.id, ResolutionKind::kExact, 1.0};
  }

  const std::string folded = text::to_lower(g);
  const Intent* best = nullptr;
  double best_score = -1.0;
  for (const auto& in : intents) {
    const std::string& cand = Taxonomy::surface_label(in);
    const double score = gestalt_similarity(folded, text::to_lower(cand));
    const bool better =
        best == nullptr || score > best_score ||
        (score == best_score && (cand < Taxonomy::surface_label(*best) ||
                                 (cand == Taxonomy::surface_label(*best) && in.id < best->id)));
    if (better) {
      best = &in;
      best_score = score;
    }
  }
  return {best->id, ResolutionKind::kFuzzy, best_score};
}

std::optional<std::string> ConsistencyVerdict::unfiltered_label() const {
  const auto& r = runs[1];
  if (r.resolved) return r.resolved->intent_id;
  return std::nullopt;
}

ConsistencyVerdict pseudo_label_session(const Session& session, const Taxonomy& taxonomy,
                                        const RetrievalIndex& index,
                                        const EmbeddingProvider& embedder,
                                        const LlmBackend& backend, const LabelingConfig& config) {
  if (config.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  ConsistencyVerdict v;
  v.session_id = session.id;
  std::vector<Demonstration> demos;
  try {
    demos = retrieve(index, session, config.k, embedder);
  } catch (const Error& e) {
    throw Error(e.code(), "session '" + session.id + "' retrieval: " + e.what());
  }

  const std::array<Ordering, 3> orderings = {
      Ordering{OrderingKind::kAscending, 0}, Ordering{OrderingKind::kDescending, 0},
      Ordering{OrderingKind::kRandom, derive_seed(config.seed, session.id)}};
  const bool use_map = config.template_kind == TemplateKind::kSymbolic ||
                       config.template_kind == TemplateKind::kPrepend;
  for (std::size_t r = 0; r < orderings.size(); ++r) {
    LabelRun& run = v.runs[r];
    run.ordering = orderings[r].kind;
    try {
      const RenderedPrompt prompt =
          render(config.template_kind, demos, session, orderings[r], taxonomy);
      CompletionRequest req{prompt.messages, config.max_tokens, 0.0};
      run.raw = complete(req, backend);
      try {
        run.resolved = resolve_label(run.raw, taxonomy, use_map ? &prompt.label_map : nullptr);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyGeneration) throw;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "session '" + session.id + "' run " + std::to_string(r) + ": " +
                                e.what());
    }
  }

  const auto& first = v.runs[0].resolved;
  v.consistent = std::all_of(v.runs.begin(), v.runs.end(), [&](const LabelRun& run) {
    return run.resolved && first && run.resolved->intent_id == first->intent_id;
  });
  if (v.consistent) v.final_label = first->intent_id;
  return v;
}

FilterStats filter_stats(std::span<const ConsistencyVerdict> verdicts, std::size_t errored) {
  FilterStats s;
  s.total = verdicts.size() + errored;
  s.errored = errored;
  std::size_t runs = 0, fuzzy = 0;
  for (const auto& v : verdicts) {
    if (v.consistent) ++s.kept;
    for (const auto& r : v.runs) {
      ++runs;
      if (r.resolved && r.resolved->kind == ResolutionKind::kFuzzy) ++fuzzy;
    }
  }
  s.discarded = s.total - s.kept;
  s.retention_rate = s.total ? static_cast<double>(s.kept) / static_cast<double>(s.total) : 0.0;
  s.hallucination_rate = runs ? static_cast<double>(fuzzy) / static_cast<double>(runs) : 0.0;
  return s;
}

LabelingResult pseudo_label_corpus(std::span<const Session> sessions, const Taxonomy& taxonomy,
                                   const RetrievalIndex& index, const EmbeddingProvider& embedder,
                                   const LlmBackend& backend, const LabelingConfig& config) {
  std::vector<std::optional<ConsistencyVerdict>> slots(sessions.size());
  std::vector<std::optional<std::string>> errors(sessions.size());
  parallel_for(sessions.size(), config.workers, [&](std::size_t i) {
    try {
      slots[i] = pseudo_label_session(sessions[i], taxonomy, index, embedder, backend, config);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  LabelingResult out;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (errors[i]) {
      out.failures.push_back({sessions[i].id, *errors[i]});
      continue;
    }
    auto& v = *slots[i];
    if (v.consistent) {
      out.labels.push_back({sessions[i], *v.final_label, config.template_kind, config.k, v});
    }
    out.verdicts.push_back(std::move(v));
  }
  if (2 * out.failures.size() > sessions.size()) {
    throw Error(ErrorCode::kTooManyFailures,
                std::to_string(out.failures.size()) + " of " + std::to_string(sessions.size()) +
                    " sessions failed; first: " + out.failures.front().message);
  }
  out.stats = filter_stats(out.verdicts, out.failures.size());
  return out;
}

Json verdict_to_json(const ConsistencyVerdict& verdict, const Session& session,
                     TemplateKind template_kind, std::size_t k) {
  Json runs = Json::array();
  for (const auto& r : verdict.runs) {
    Json jr = {{"ordering", to_string(r.ordering)}, {"raw", r.raw}};
    if (r.resolved) {
      jr["resolved"] = r.resolved->intent_id;
      jr["kind"] = to_string(r.resolved->kind);
      jr["score"] = r.resolved->score;
    } else {
      jr["resolved"] = nullptr;
    }
    runs.push_back(std::move(jr));
  }
  Json j = {{"session", session_to_json(session)},
            {"intent_id", verdict.final_label ? Json(*verdict.final_label) : Json(nullptr)},
            {"template", to_string(template_kind)},
            {"k", k},
            {"runs", std::move(runs)},
            {"consistent", verdict.consistent}};
  return j;
}

Json stats_to_json(const FilterStats& s) {
  return {{"total", s.total},
          {"kept", s.kept},
          {"discarded", s.discarded},
          {"errored", s.errored},
          {"retention_rate", s.retention_rate},
          {"hallucination_rate", s.hallucination_rate}};
}

void save_labeling(const std::filesystem::path& path, std::span<const Session> sessions,
                   const LabelingResult& result, TemplateKind template_kind, std::size_t k) {
  std::unordered_map<std::string, const Session*> by_id;
  for (const auto& s : sessions) by_id.emplace(s.id, &s);
  std::vector<Json> lines;
  lines.reserve(result.verdicts.size());
  for (const auto& v : result.verdicts) {
    lines.push_back(verdict_to_json(v, *by_id.at(v.session_id), template_kind, k));
  }
  write_jsonl(path, lines);
}

std::vector<LabelRecord> load_labeling(const std::filesystem::path& path) {
  std::vector<LabelRecord> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    LabelRecord rec;
    if (!j.contains("session") || !j.at("session").is_object()) {
      throw ParseError(line, "missing 'session' object");
    }
    rec.session = session_from_json(j.at("session"), line);
    rec.template_kind = parse_template_kind(require_string(j, "template", line));
    rec.k = j.value("k", std::size_t{0});
    rec.verdict.session_id = rec.session.id;
    const Json& runs = j.at("runs");
    if (!runs.is_array() || runs.size() != 3) throw ParseError(line, "'runs' must hold 3 entries");
    for (std::size_t r = 0; r < 3; ++r) {
      const Json& jr = runs[r];
      LabelRun& run = rec.verdict.runs[r];
      run.ordering = parse_ordering_kind(require_string(jr, "ordering", line));
      run.raw = jr.value("raw", "");
      if (jr.contains("resolved") && jr.at("resolved").is_string()) {
        run.resolved = Resolution{jr.at("resolved").get<std::string>(),
                                  parse_resolution_kind(jr.value("kind", "exact")),
                                  jr.value("score", 1.0)};
      }
    }
    rec.verdict.consistent = j.value("consistent", false);
    if (j.contains("intent_id") && j.at("intent_id").is_string()) {
      rec.verdict.final_label = j.at("intent_id").get<std::string>();
    }
    if (rec.verdict.consistent != rec.verdict.final_label.has_value()) {
      throw ParseError(line, "'consistent' disagrees with 'intent_id'");
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<PseudoLabel> to_pseudo_labels(std::span<const LabelRecord> records) {
  std::vector<PseudoLabel> out;
  for (const auto& r : records) {
    if (!r.verdict.consistent) continue;
    out.push_back({r.session, *r.verdict.final_label, r.template_kind, r.k, r.verdict});
  }
  return out;
}

}  // namespace clara
