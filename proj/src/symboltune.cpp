#include "clara/symboltune.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "clara/error.hpp"
#include "clara/parallel.hpp"
#include "clara/text.hpp"

namespace clara {

std::size_t token_count(std::string_view s) { return text::split_words(s).size(); }

CompressionResult compression_objective(std::string_view candidate, std::string_view original,
                                        const EmbeddingProvider& embedder, double alpha) {
  if (text::trim(candidate).empty() || text::trim(original).empty()) {
    throw Error(ErrorCode::kEmptyText, "compression texts must be non-empty");
  }
  CompressionResult r;
  r.original = std::string(original);
  r.compressed = std::string(candidate);
  r.word_count = token_count(candidate);
  r.compactness = alpha * static_cast<double>(r.word_count);
  r.divergence = 1.0 - cosine(embedder.embed(candidate), embedder.embed(original));
  r.objective = r.compactness + r.divergence;
  return r;
}

CompressionResult best_candidate(std::span<const std::string> candidates,
                                 std::string_view original, const EmbeddingProvider& embedder,
                                 double alpha) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates");
  std::optional<CompressionResult> best;
  for (const auto& c : candidates) {
    auto r = compression_objective(c, original, embedder, alpha);
    if (!best || r.objective < best->objective) best = std::move(r);
  }
  return *best;
}

std::vector<std::string> word_subsequences(std::string_view original, std::size_t n) {
  const auto words = text::split_words(original);
  std::vector<std::string> out;
  if (n == 0 || n > words.size()) return out;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (;;) {
    std::string s = words[idx[0]];
    for (std::size_t i = 1; i < n; ++i) s += " " + words[idx[i]];
    out.push_back(std::move(s));
    std::size_t i = n;
    while (i > 0 && idx[i - 1] == words.size() - n + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

CompressionResult compress_label(std::string_view original, const EmbeddingProvider& embedder,
                                 std::size_t n, double alpha) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1");
  const std::size_t words = token_count(original);
  if (words < n) {
    throw Error(ErrorCode::kTooShort, "'" + std::string(original) + "' has " +
                                          std::to_string(words) + " words, need " +
                                          std::to_string(n));
  }
  const auto candidates = word_subsequences(original, n);
  return best_candidate(candidates, original, embedder, alpha);
}

std::string_view to_string(SourceMode mode) {
  switch (mode) {
    case SourceMode::kLocalTitle: return "local_title";
    case SourceMode::kEnglishCategory: return "english_category";
    case SourceMode::kAuto: return "auto";
  }
  return "auto";
}

SourceMode parse_source_mode(std::string_view name) {
  for (auto m : {SourceMode::kLocalTitle, SourceMode::kEnglishCategory, SourceMode::kAuto}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown source mode '" + std::string(name) + "'");
}

std::string_view to_string(CompressionMode mode) {
  switch (mode) {
    case CompressionMode::kNone: return "none";
    case CompressionMode::kNWord: return "n-word";
    case CompressionMode::kSymbols: return "symbols-only";
    case CompressionMode::kLongTarget: return "long-target";
  }
  return "n-word";
}

CompressionMode parse_compression_mode(std::string_view name) {
  for (auto m : {CompressionMode::kNone, CompressionMode::kNWord, CompressionMode::kSymbols,
                 CompressionMode::kLongTarget}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown compression mode '" + std::string(name) + "'");
}

std::string cross_lingual_source(const Intent& intent, SourceMode mode) {
  if (mode == SourceMode::kAuto) {
    mode = intent.language.rfind("en", 0) == 0 ? SourceMode::kLocalTitle
                                               : SourceMode::kEnglishCategory;
  }
  if (mode == SourceMode::kLocalTitle) return intent.title;
  std::vector<std::string> picked;  // leaf first
  for (auto it = intent.category_path.rbegin(); it != intent.category_path.rend(); ++it) {
    if (!picked.empty() && picked.back() == *it) continue;
    picked.push_back(*it);
    if (picked.size() == 2) break;
  }
  std::reverse(picked.begin(), picked.end());
  return text::join(picked, " ");
}

namespace {

// Makes labels unique by appending " #k" (k from 2) to later duplicates.
void suffix_duplicates(const std::vector<Intent>& intents, std::vector<std::string>& labels,
                       std::vector<CompressionEntry>& entries) {
  std::vector<std::size_t> order(intents.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return intents[a].id < intents[b].id; });
  std::set<std::string> taken;
  for (auto i : order) {
    std::string key = text::to_lower(labels[i]);
    if (taken.insert(key).second) continue;
    for (std::size_t k = 2;; ++k) {
      std::string cand = labels[i] + " #" + std::to_string(k);
      if (taken.insert(text::to_lower(cand)).second) {
        labels[i] = cand;
        entries[i].suffixed = true;
        break;
      }
    }
  }
}

}  // namespace

CompressAllResult compress_all(const Taxonomy& taxonomy, const EmbeddingProvider& embedder,
                               const CompressAllOptions& options) {
  if (options.n_start == 0) throw Error(ErrorCode::kInvalidArgument, "n_start must be >= 1");
  const auto& intents = taxonomy.intents();
  const std::size_t m = intents.size();
  CompressAllResult out;
  auto& entries = out.report.entries;
  entries.resize(m);
  std::vector<std::string> labels(m);
  std::vector<std::size_t> words(m);
  for (std::size_t i = 0; i < m; ++i) {
    entries[i].intent_id = intents[i].id;
    entries[i].source = cross_lingual_source(intents[i], options.source);
    words[i] = token_count(entries[i].source);
    if (words[i] == 0) {
      throw Error(ErrorCode::kEmptyText, "intent '" + intents[i].id + "' has no source text");
    }
  }

  std::vector<std::optional<std::string>> compressed(m);
  switch (options.mode) {
    case CompressionMode::kNone:
      break;
    case CompressionMode::kSymbols:
      for (std::size_t i = 0; i < m; ++i) {
        compressed[i] = "S" + std::to_string(i + 1);
        entries[i].label = *compressed[i];
        entries[i].n = 1;
      }
      break;
    case CompressionMode::kLongTarget: {
      for (std::size_t i = 0; i < m; ++i) {
        const std::string summary = cross_lingual_source(intents[i], SourceMode::kEnglishCategory);
        labels[i] = summary + ": " + entries[i].source;
      }
      suffix_duplicates(intents, labels, entries);
      for (std::size_t i = 0; i < m; ++i) {
        compressed[i] = labels[i];
        entries[i].label = labels[i];
        entries[i].n = token_count(labels[i]);
      }
      break;
    }
    case CompressionMode::kNWord: {
      parallel_for(m, options.workers, [&](std::size_t i) {
        entries[i].n = std::min(options.n_start, words[i]);
        labels[i] = compress_label(entries[i].source, embedder, entries[i].n, options.alpha)
                        .compressed;
      });
      std::map<std::string, std::vector<std::string>> collided;
      for (;;) {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < m; ++i) groups[text::to_lower(labels[i])].push_back(i);
        bool changed = false;
        for (auto& [key, members] : groups) {
          if (members.size() < 2) continue;
          std::sort(members.begin(), members.end(),
                    [&](auto a, auto b) { return intents[a].id < intents[b].id; });
          auto& ids = collided[labels[members.front()]];
          for (auto i : members) {
            if (std::find(ids.begin(), ids.end(), intents[i].id) == ids.end()) {
              ids.push_back(intents[i].id);
            }
          }
          for (std::size_t g = 1; g < members.size(); ++g) {
            const std::size_t i = members[g];
            if (entries[i].n >= words[i]) continue;  // exhausted; suffixed below
            ++entries[i].n;
            labels[i] = compress_label(entries[i].source, embedder, entries[i].n, options.alpha)
                            .compressed;
            changed = true;
          }
        }
        if (!changed) break;
      }
      suffix_duplicates(intents, labels, entries);
      for (auto& [label, ids] : collided) {
        std::sort(ids.begin(), ids.end());
        out.report.collisions.emplace_back(label, ids);
      }
      for (std::size_t i = 0; i < m; ++i) {
        compressed[i] = labels[i];
        entries[i].label = labels[i];
      }
      break;
    }
  }
  out.taxonomy = taxonomy.with_compressed_labels(compressed);
  return out;
}

Json report_to_json(const CompressionReport& report) {
  Json entries = Json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"id", e.intent_id},
                       {"source", e.source},
                       {"label", e.label},
                       {"n", e.n},
                       {"suffixed", e.suffixed}});
  }
  Json collisions = Json::array();
  for (const auto& [label, ids] : report.collisions) {
    collisions.push_back({{"label", label}, {"ids", ids}});
  }
  return {{"entries", entries}, {"collisions", collisions}};
}

}  // namespace clara
