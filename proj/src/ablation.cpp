#include "clara/ablation.hpp"

#include <cstdio>
#include <sstream>

#include "clara/error.hpp"
#include "clara/retrieval.hpp"

namespace clara {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

AblationRow run_variant(const AblationConfig& config, const AblationVariant& variant,
                        const EmbeddingProvider& embedder, const RetrievalIndex& index) {
  CompressAllOptions opts = config.compression;
  opts.mode = variant.compression;
  opts.workers = config.workers;
  const Taxonomy taxonomy = compress_all(config.taxonomy, embedder, opts).taxonomy;

  std::unique_ptr<LlmBackend> backend =
      config.backend ? config.backend(taxonomy, config.sessions)
                     : make_gold_oracle(taxonomy, config.sessions, config.oracle);

  LabelingConfig lc;
  lc.template_kind = variant.template_kind;
  lc.k = config.k;
  lc.seed = config.seed;
  lc.workers = config.workers;
  const LabelingResult res =
      pseudo_label_corpus(config.sessions, taxonomy, index, embedder, *backend, lc);

  std::map<std::string, std::string> golds;
  for (const auto& s : config.sessions) {
    if (!s.gold_intent) {
      throw Error(ErrorCode::kMissingGold, "session '" + s.id + "' has no gold label");
    }
    golds[s.id] = *s.gold_intent;
  }

  AblationRow row;
  row.variant = variant.name;
  row.template_kind = variant.template_kind;
  row.self_consistency = variant.self_consistency;
  row.compression = variant.compression;
  row.sessions = config.sessions.size();
  row.hallucination_rate = res.stats.hallucination_rate;
  for (const auto& v : res.verdicts) {
    const std::string& gold = golds.at(v.session_id);
    const auto unfiltered = v.unfiltered_label();
    if (unfiltered && *unfiltered == gold) ++row.resolved_correct;
    if (variant.self_consistency) {
      if (v.consistent) {
        ++row.labeled;
        if (*v.final_label == gold) ++row.correct;
      }
    } else if (unfiltered) {
      ++row.labeled;
      if (*unfiltered == gold) ++row.correct;
    }
  }
  const double n = static_cast<double>(row.sessions);
  row.accuracy = n > 0 ? static_cast<double>(row.resolved_correct) / n : 0.0;
  row.retention = n > 0 ? static_cast<double>(row.labeled) / n : 0.0;
  row.precision =
      row.labeled ? static_cast<double>(row.correct) / static_cast<double>(row.labeled) : 0.0;
  return row;
}

}  // namespace

AblationReport run_ablation(const AblationConfig& config, const EmbeddingProvider& embedder) {
  if (config.variants.empty()) throw Error(ErrorCode::kInvalidArgument, "no ablation variants");
  if (config.sessions.empty()) throw Error(ErrorCode::kEmpty, "no sessions to label");
  const RetrievalIndex index = RetrievalIndex::build(config.examples, embedder, config.workers);
  AblationReport report;
  for (const auto& v : config.variants) {
    try {
      report.rows.push_back(run_variant(config, v, embedder, index));
    } catch (const Error& e) {
      throw Error(e.code(), "variant '" + v.name + "': " + e.what());
    }
  }
  const AblationRow& first = report.rows.front();
  for (auto& r : report.rows) {
    if (r.labeled > 0 && first.labeled > 0) {
      r.vs_first = two_proportion_z_test(r.correct, r.labeled, first.correct, first.labeled);
    }
  }
  return report;
}

std::string AblationReport::markdown() const {
  std::ostringstream out;
  out << "| variant | template | self-consistency | compression | sessions | labeled | "
         "accuracy | precision | retention | hallucination | z | p |\n"
      << "|---|---|---|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.variant << " | " << to_string(r.template_kind) << " | "
        << (r.self_consistency ? "on" : "off") << " | " << to_string(r.compression) << " | "
        << r.sessions << " | " << r.labeled << " | " << fixed(r.accuracy) << " | "
        << fixed(r.precision) << " | " << fixed(r.retention) << " | "
        << fixed(r.hallucination_rate) << " | " << fixed(r.vs_first.z, 3) << " | "
        << fixed(r.vs_first.p_value) << " |\n";
  }
  return out.str();
}

std::string AblationReport::csv() const {
  std::ostringstream out;
  out << "variant,template,self_consistency,compression,sessions,labeled,correct,"
         "resolved_correct,accuracy,precision,retention,hallucination_rate,z,p_value\n";
  for (const auto& r : rows) {
    out << r.variant << ',' << to_string(r.template_kind) << ','
        << (r.self_consistency ? "on" : "off") << ',' << to_string(r.compression) << ','
        << r.sessions << ',' << r.labeled << ',' << r.correct << ',' << r.resolved_correct << ','
        << fixed(r.accuracy, 6) << ',' << fixed(r.precision, 6) << ',' << fixed(r.retention, 6)
        << ',' << fixed(r.hallucination_rate, 6) << ',' << fixed(r.vs_first.z, 6) << ','
        << fixed(r.vs_first.p_value, 6) << '\n';
  }
  return out.str();
}

Json AblationReport::to_json() const {
  Json rows_json = Json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"variant", r.variant},
                         {"template", to_string(r.template_kind)},
                         {"self_consistency", r.self_consistency},
                         {"compression", to_string(r.compression)},
                         {"sessions", r.sessions},
                         {"labeled", r.labeled},
                         {"correct", r.correct},
                         {"resolved_correct", r.resolved_correct},
                         {"accuracy", r.accuracy},
                         {"precision", r.precision},
                         {"retention", r.retention},
                         {"hallucination_rate", r.hallucination_rate},
                         {"z", r.vs_first.z},
                         {"p_value", r.vs_first.p_value}});
  }
  return {{"rows", rows_json}};
}

AblationConfig ablation_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  auto path_of = [&](const char* key) {
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  try {
    AblationConfig c;
    c.taxonomy = load_taxonomy(path_of("taxonomy"));
    c.examples = load_examples(path_of("examples"), &c.taxonomy);
    c.sessions = load_sessions(path_of("sessions"));
    c.k = j.value("k", c.k);
    c.seed = j.value("seed", c.seed);
    if (j.contains("alpha")) c.compression.alpha = j.at("alpha").get<double>();
    if (j.contains("source")) c.compression.source = parse_source_mode(j.at("source").get<std::string>());
    if (j.contains("oracle")) {
      const Json& o = j.at("oracle");
      c.oracle.noise_rate = o.value("noise_rate", 0.0);
      c.oracle.ordering_sensitivity = o.value("ordering_sensitivity", 0.0);
      c.oracle.typo_rate = o.value("typo_rate", 0.0);
      c.oracle.seed = o.value("seed", c.seed);
    }
    for (const auto& v : j.at("variants")) {
      AblationVariant av;
      av.name = v.at("name").get<std::string>();
      av.template_kind = parse_template_kind(v.value("template", "base"));
      av.self_consistency = v.value("self_consistency", true);
      av.compression = parse_compression_mode(v.value("compression", "n-word"));
      c.variants.push_back(std::move(av));
    }
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad ablation config: ") + e.what());
  }
}

}  // namespace clara
