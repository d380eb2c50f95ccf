// clara: command-line entry point for the pseudo-labeling and HTC pipeline.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clara/ablation.hpp"
#include "clara/benchmark.hpp"
#include "clara/corpus.hpp"
#include "clara/embedding.hpp"
#include "clara/error.hpp"
#include "clara/htc.hpp"
#include "clara/labeling.hpp"
#include "clara/llm.hpp"
#include "clara/metrics.hpp"
#include "clara/parallel.hpp"
#include "clara/retrieval.hpp"
#include "clara/symboltune.hpp"
#include "clara/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace clara;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  Json config = Json::object();
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::unique_ptr<EmbeddingProvider> embedder_from(const Globals& g) {
  if (g.config.contains("embedder")) return make_embedder(g.config.at("embedder"));
  return std::make_unique<TrigramEmbedder>();
}

// ---- taxonomy ----------------------------------------------------------------

struct TaxonomyOpts {
  std::string kb;
  std::string out;
  std::string report;
  std::size_t n = 2;
  double alpha = kDefaultCompressionAlpha;
  std::string source = "auto";
  std::string mode = "n-word";
};

void cmd_taxonomy_validate(const TaxonomyOpts& o) {
  const Taxonomy t = load_taxonomy(o.kb);
  const auto sizes = t.layer_sizes();
  print_json({{"intents", t.intents().size()}, {"layer_sizes", {sizes[0], sizes[1], sizes[2]}}});
}

void cmd_taxonomy_compress(const Globals& g, const TaxonomyOpts& o) {
  const Taxonomy t = load_taxonomy(o.kb);
  const auto embedder = embedder_from(g);
  CompressAllOptions opts;
  opts.n_start = o.n;
  opts.alpha = o.alpha;
  opts.source = parse_source_mode(o.source);
  opts.mode = parse_compression_mode(o.mode);
  opts.workers = g.workers;
  const auto result = compress_all(t, *embedder, opts);
  save_taxonomy(o.out, result.taxonomy);
  const Json report = report_to_json(result.report);
  if (!o.report.empty()) write_json(o.report, report);
  std::cout << "compressed " << result.taxonomy.intents().size() << " intents, "
            << result.report.collisions.size() << " collisions resolved\n";
}

// ---- corpus ------------------------------------------------------------------

struct CorpusOpts {
  std::string taxonomy, examples, sessions, logs, transitions, out, out_dir, market;
  std::size_t n = 100;
  double smoothing = 0.0;
  int max_length = kDefaultMaxSessionLength;
  std::string id_prefix = "syn";
};

void cmd_corpus_stats(const CorpusOpts& o) {
  const Taxonomy t = load_taxonomy(o.taxonomy);
  const auto examples = load_examples(o.examples, &t);
  std::vector<Session> sessions;
  if (!o.sessions.empty()) sessions = load_sessions(o.sessions);
  Json rows = Json::array();
  for (const auto& r : corpus_stats(examples, sessions, t)) {
    rows.push_back({{"language", r.language}, {"intents", r.intents}, {"train", r.train},
                    {"test", r.test}});
  }
  print_json(rows);
}

void cmd_corpus_transitions(const CorpusOpts& o) {
  const Taxonomy t = load_taxonomy(o.taxonomy);
  const auto logs = load_chat_logs(o.logs);
  const TransitionModel tm = estimate_transitions(logs, t, o.smoothing, o.max_length);
  write_json(o.out, transition_model_to_json(tm));
  std::cout << "estimated " << tm.states.size() << " states from " << logs.size() << " logs\n";
}

void cmd_corpus_synth(const Globals& g, const CorpusOpts& o) {
  const auto examples = load_examples(o.examples);
  const TransitionModel tm = transition_model_from_json(read_json(o.transitions));
  const auto sessions = synthesize_sessions(examples, tm, o.n, g.seed, g.workers, o.id_prefix);
  save_sessions(o.out, sessions);
  std::cout << "wrote " << sessions.size() << " sessions\n";
}

void cmd_corpus_benchmark(const Globals& g, const CorpusOpts& o) {
  fs::create_directories(o.out_dir);
  const fs::path dir = o.out_dir;
  if (!o.market.empty()) {
    const auto c = make_market_corpus(market_profile(o.market), g.seed);
    save_taxonomy(dir / "taxonomy.jsonl", c.taxonomy);
    save_examples(dir / "train.jsonl", c.examples);
    save_sessions(dir / "test.jsonl", c.sessions);
  } else {
    BenchmarkConfig bc;
    bc.seed = g.seed;
    const Benchmark b = make_benchmark(bc);
    save_taxonomy(dir / "taxonomy.jsonl", b.taxonomy);
    save_examples(dir / "train.jsonl", b.train);
    save_chat_logs(dir / "chatlogs.jsonl", b.chat_logs);
    save_sessions(dir / "pool.jsonl", b.pool);
    save_sessions(dir / "test.jsonl", b.test);
  }
  std::cout << "wrote benchmark files to " << dir.string() << "\n";
}

// ---- pseudo-label ------------------------------------------------------------

struct BackendOpts {
  std::string kind = "oracle";
  std::string mock_script;
  double noise = 0.0;
  double sensitivity = 0.0;
  double typo = 0.0;
};

std::unique_ptr<LlmBackend> make_backend(const Globals& g, const BackendOpts& b,
                                         const Taxonomy& taxonomy,
                                         const std::vector<Session>& sessions) {
  if (b.kind == "oracle") {
    OracleConfig oc{b.noise, b.sensitivity, b.typo, g.seed};
    return make_gold_oracle(taxonomy, sessions, oc);
  }
  if (b.kind == "live") {
    LiveBackendConfig lc = g.config.contains("llm") ? LiveBackendConfig::from_json(g.config.at("llm"))
                                                    : LiveBackendConfig{};
    return std::make_unique<OpenAiCompatibleBackend>(LiveBackendConfig::from_env(lc));
  }
  if (b.kind == "mock") {
    if (b.mock_script.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--mock-script is required for the mock backend");
    }
    const Json j = read_json(b.mock_script);
    MockScript script;
    try {
      for (const auto& r : j.value("rules", Json::array())) {
        script.rules.push_back(
            contains_rule(r.at("contains").get<std::string>(), r.at("response").get<std::string>()));
      }
      if (j.contains("default")) script.default_response = j.at("default").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad mock script: ") + e.what());
    }
    return std::make_unique<MockBackend>(std::move(script));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown backend '" + b.kind + "'");
}

struct LabelOpts {
  std::string taxonomy, examples, sessions, out, stats;
  std::string template_name = "base";
  std::size_t k = kDefaultDemonstrations;
  BackendOpts backend;
};

void cmd_pseudo_label(const Globals& g, const LabelOpts& o) {
  const Taxonomy t = load_taxonomy(o.taxonomy);
  const auto examples = load_examples(o.examples, &t);
  const auto sessions = load_sessions(o.sessions);
  const auto embedder = embedder_from(g);
  const auto index = RetrievalIndex::build(examples, *embedder, g.workers);
  const auto backend = make_backend(g, o.backend, t, sessions);
  LabelingConfig lc;
  lc.template_kind = parse_template_kind(o.template_name);
  lc.k = o.k;
  lc.seed = g.seed;
  lc.workers = g.workers;
  const LabelingResult res = pseudo_label_corpus(sessions, t, index, *embedder, *backend, lc);
  save_labeling(o.out, sessions, res, lc.template_kind, lc.k);
  Json stats = stats_to_json(res.stats);
  Json failures = Json::array();
  for (const auto& f : res.failures) failures.push_back({{"session", f.session_id}, {"error", f.message}});
  stats["failures"] = failures;
  if (!o.stats.empty()) write_json(o.stats, stats);
  std::cout << "kept " << res.stats.kept << " of " << res.stats.total << " sessions (retention "
            << res.stats.retention_rate << ")\n";
}

// ---- train / predict ---------------------------------------------------------

struct TrainOpts {
  std::string taxonomy, examples, pseudo, out, history;
  std::size_t d = 0;  // 0: embedder dimension
  std::size_t epochs = 60;
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t patience = 5;
  std::size_t val_size = 0;
  bool no_val = false;
};

void cmd_train(const Globals& g, const TrainOpts& o) {
  const Taxonomy t = load_taxonomy(o.taxonomy);
  const auto embedder = embedder_from(g);
  std::vector<LabeledExample> train_ex = load_examples(o.examples, &t);
  std::vector<LabeledExample> val_ex;
  if (!o.pseudo.empty()) {
    const auto records = load_labeling(o.pseudo);
    auto labels = to_pseudo_labels(records);
    std::vector<PseudoLabel> val_labels;
    if (!o.no_val) {
      const std::size_t k = o.val_size ? o.val_size : labels.size() / 10;
      std::tie(labels, val_labels) = split_validation(labels, k, g.seed);
    }
    const auto pl = session_examples(labels, t);
    train_ex.insert(train_ex.end(), pl.begin(), pl.end());
    val_ex = session_examples(val_labels, t);
  } else if (!o.no_val) {
    const std::size_t k = o.val_size ? o.val_size : train_ex.size() / 10;
    std::tie(train_ex, val_ex) = split_validation(train_ex, k, g.seed);
  }
  const HtcTree tree = HtcTree::from_taxonomy(t);
  const auto train_set = make_samples(train_ex, t, *embedder, g.workers);
  const auto val_set = make_samples(val_ex, t, *embedder, g.workers);

  TrainConfig tc;
  tc.d = o.d ? o.d : embedder->dimension();
  if (tc.d != embedder->dimension()) {
    throw Error(ErrorCode::kShapeMismatch, "--d must equal the embedder dimension " +
                                               std::to_string(embedder->dimension()));
  }
  tc.epochs = o.epochs;
  tc.lr = o.lr;
  tc.batch_size = o.batch;
  tc.patience = o.patience;
  tc.seed = g.seed;
  tc.workers = g.workers;
  const TrainResult r = train(train_set, val_set, tree, tc);

  HtcModel model;
  model.params = r.params;
  for (int l = 1; l <= 3; ++l) model.classes[l - 1] = t.classes(l);
  model.embedder = embedder->describe();
  save_model(o.out, model);
  if (!o.history.empty()) {
    Json h = Json::array();
    for (const auto& e : r.history) {
      h.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"train_accuracy", e.train_accuracy},
                   {"val_loss", e.val_loss},
                   {"val_accuracy", e.val_accuracy}});
    }
    write_json(o.history, {{"best_epoch", r.best_epoch}, {"epochs", h}});
  }
  std::cout << "trained on " << train_set.size() << " samples, best epoch " << r.best_epoch
            << " of " << r.history.size() << "\n";
}

struct PredictOpts {
  std::string model, taxonomy, sessions, out;
  std::string strategy = "single_turn";
};

void cmd_predict(const Globals& g, const PredictOpts& o) {
  const Taxonomy t = load_taxonomy(o.taxonomy);
  const HtcModel model = load_model(o.model);
  check_model_matches(model, t);
  const auto embedder = make_embedder(model.embedder);
  const HtcTree tree = HtcTree::from_taxonomy(t);
  const auto sessions = load_sessions(o.sessions);
  const auto strategy = parse_predict_strategy(o.strategy);
  std::vector<Json> lines(sessions.size());
  parallel_for(sessions.size(), g.workers, [&](std::size_t i) {
    const Prediction p = predict(sessions[i], strategy, model.params, tree, t, *embedder);
    lines[i] = {{"session", p.session_id},
                {"intent_id", p.intent_id},
                {"classes", {p.classes[0], p.classes[1], p.classes[2]}},
                {"strategy", to_string(strategy)},
                {"input", p.input}};
  });
  write_jsonl(o.out, lines);
  std::cout << "wrote " << lines.size() << " predictions\n";
}

// ---- eval / ablate -----------------------------------------------------------

struct EvalOpts {
  std::string predictions, sessions, labels, ratings, taxonomy, out;
  std::optional<std::size_t> good, bad;
};

void cmd_eval(const EvalOpts& o) {
  MetricsReport report;
  std::map<std::string, std::string> golds;
  std::map<std::string, std::string> gold_language;
  std::optional<Taxonomy> taxonomy;
  if (!o.taxonomy.empty()) taxonomy = load_taxonomy(o.taxonomy);
  if (!o.sessions.empty()) {
    for (const auto& s : load_sessions(o.sessions)) {
      if (s.gold_intent) golds[s.id] = *s.gold_intent;
    }
  }
  if (!o.predictions.empty()) {
    std::vector<std::string> pred, gold;
    std::map<std::string, MarketRow> rows;
    for_each_jsonl(o.predictions, [&](const Json& j, std::size_t line) {
      const std::string id = require_string(j, "session", line);
      auto it = golds.find(id);
      if (it == golds.end()) {
        throw Error(ErrorCode::kMissingGold, "no gold label for session '" + id + "'");
      }
      pred.push_back(require_string(j, "intent_id", line));
      gold.push_back(it->second);
      if (taxonomy) {
        auto& row = rows[taxonomy->at(it->second).language];
        ++row.samples;
        row.correct += pred.back() == gold.back() ? 1 : 0;
      }
    });
    report.accuracy = accuracy(pred, gold);
    for (auto& [lang, row] : rows) {
      row.market = lang;
      row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.samples);
      report.markets.push_back(row);
    }
  }
  if (!o.labels.empty()) {
    const auto records = load_labeling(o.labels);
    std::vector<ConsistencyVerdict> verdicts;
    for (const auto& r : records) {
      verdicts.push_back(r.verdict);
      if (r.session.gold_intent && !golds.count(r.session.id)) {
        golds[r.session.id] = *r.session.gold_intent;
      }
    }
    const FilterStats fs = filter_stats(verdicts);
    report.hallucination_rate = fs.hallucination_rate;
    report.retention_rate = fs.retention_rate;
    report.consistency_precision = consistency_precision(verdicts, golds).precision_kept;
  }
  if (!o.ratings.empty()) report.rr = resolution_rate(load_rated_sessions(o.ratings));
  if (o.good || o.bad) report.scsat = scsat(o.good.value_or(0), o.bad.value_or(0));
  const Json j = report_to_json(report);
  if (!o.out.empty()) write_json(o.out, j);
  print_json(j);
}

struct AblateOpts {
  std::string config, markdown, csv, json;
};

void cmd_ablate(const Globals& g, const AblateOpts& o) {
  const Json j = read_json(o.config);
  AblationConfig c = ablation_config_from_json(j, fs::path(o.config).parent_path());
  c.workers = g.workers;
  if (!j.contains("seed")) c.seed = g.seed;
  if (!j.contains("oracle") || !j.at("oracle").contains("seed")) c.oracle.seed = c.seed;
  std::unique_ptr<EmbeddingProvider> embedder =
      j.contains("embedder") ? make_embedder(j.at("embedder")) : embedder_from(g);
  const AblationReport report = run_ablation(c, *embedder);
  if (!o.markdown.empty()) write_text(o.markdown, report.markdown());
  if (!o.csv.empty()) write_text(o.csv, report.csv());
  if (!o.json.empty()) write_json(o.json, report.to_json());
  std::cout << report.markdown();
}

int exit_code_for(const Error& e) { return is_validation_error(e.code()) ? 2 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clara: multi-turn intent pseudo-labeling and hierarchical classification"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config (llm, embedder sections)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);

  // taxonomy
  TaxonomyOpts tax;
  auto* tax_cmd = app.add_subcommand("taxonomy", "Knowledge-base tools");
  tax_cmd->require_subcommand(1);
  tax_cmd->fallthrough();
  auto* tax_validate = tax_cmd->add_subcommand("validate", "Load and validate a knowledge base");
  tax_validate->add_option("kb", tax.kb, "Knowledge-base JSON-lines file")->required();
  auto* tax_compress = tax_cmd->add_subcommand("compress", "Compress intent labels");
  tax_compress->add_option("kb", tax.kb, "Knowledge-base JSON-lines file")->required();
  tax_compress->add_option("-o,--out", tax.out, "Output knowledge base")->required();
  tax_compress->add_option("--report", tax.report, "Write the compression report here");
  tax_compress->add_option("--n", tax.n, "Starting word count");
  tax_compress->add_option("--alpha", tax.alpha, "Weight of the token count");
  tax_compress->add_option("--source", tax.source, "auto | local_title | english_category");
  tax_compress->add_option("--mode", tax.mode, "none | n-word | symbols-only | long-target");

  // corpus
  CorpusOpts cor;
  auto* cor_cmd = app.add_subcommand("corpus", "Corpus tools");
  cor_cmd->require_subcommand(1);
  cor_cmd->fallthrough();
  auto* cor_stats = cor_cmd->add_subcommand("stats", "Per-language corpus counts");
  cor_stats->add_option("--taxonomy", cor.taxonomy)->required();
  cor_stats->add_option("--examples", cor.examples)->required();
  cor_stats->add_option("--sessions", cor.sessions);
  auto* cor_trans = cor_cmd->add_subcommand("transitions", "Estimate an intent transition model");
  cor_trans->add_option("--taxonomy", cor.taxonomy)->required();
  cor_trans->add_option("--logs", cor.logs, "Chat logs JSON-lines")->required();
  cor_trans->add_option("--smoothing", cor.smoothing);
  cor_trans->add_option("--max-length", cor.max_length);
  cor_trans->add_option("-o,--out", cor.out)->required();
  auto* cor_synth = cor_cmd->add_subcommand("synth", "Synthesize multi-turn sessions");
  cor_synth->add_option("--examples", cor.examples)->required();
  cor_synth->add_option("--transitions", cor.transitions)->required();
  cor_synth->add_option("--n", cor.n);
  cor_synth->add_option("--id-prefix", cor.id_prefix);
  cor_synth->add_option("-o,--out", cor.out)->required();
  auto* cor_bench = cor_cmd->add_subcommand("benchmark", "Write the synthetic benchmark files");
  cor_bench->add_option("--out-dir", cor.out_dir)->required();
  cor_bench->add_option("--market", cor.market, "Market-shaped corpus instead (BR, ID, ..., VN)");

  // pseudo-label
  LabelOpts lab;
  auto* lab_cmd = app.add_subcommand("pseudo-label", "Label multi-turn sessions with C-LARA");
  lab_cmd->add_option("--taxonomy", lab.taxonomy)->required();
  lab_cmd->add_option("--examples", lab.examples, "Single-turn retrieval corpus")->required();
  lab_cmd->add_option("--sessions", lab.sessions)->required();
  lab_cmd->add_option("-o,--out", lab.out)->required();
  lab_cmd->add_option("--stats", lab.stats, "Write filter statistics here");
  lab_cmd->add_option("--template", lab.template_name, "base | symbolic | prepend | formatted");
  lab_cmd->add_option("--k", lab.k, "Demonstrations per prompt");
  lab_cmd->add_option("--backend", lab.backend.kind, "oracle | live | mock");
  lab_cmd->add_option("--mock-script", lab.backend.mock_script);
  lab_cmd->add_option("--oracle-noise", lab.backend.noise);
  lab_cmd->add_option("--oracle-sensitivity", lab.backend.sensitivity);
  lab_cmd->add_option("--oracle-typo", lab.backend.typo);

  // train
  TrainOpts tr;
  auto* tr_cmd = app.add_subcommand("train", "Train the hierarchical classifier");
  tr_cmd->add_option("--taxonomy", tr.taxonomy)->required();
  tr_cmd->add_option("--examples", tr.examples, "Single-turn training examples")->required();
  tr_cmd->add_option("--pseudo", tr.pseudo, "pseudo-label output to add");
  tr_cmd->add_option("-o,--out", tr.out)->required();
  tr_cmd->add_option("--history", tr.history);
  tr_cmd->add_option("--d", tr.d);
  tr_cmd->add_option("--epochs", tr.epochs);
  tr_cmd->add_option("--lr", tr.lr);
  tr_cmd->add_option("--batch", tr.batch);
  tr_cmd->add_option("--patience", tr.patience);
  tr_cmd->add_option("--val-size", tr.val_size, "Validation examples (default 10%)");
  tr_cmd->add_flag("--no-val", tr.no_val, "Train without validation or early stopping");

  // predict
  PredictOpts pr;
  auto* pr_cmd = app.add_subcommand("predict", "Classify sessions");
  pr_cmd->add_option("--model", pr.model)->required();
  pr_cmd->add_option("--taxonomy", pr.taxonomy)->required();
  pr_cmd->add_option("--sessions", pr.sessions)->required();
  pr_cmd->add_option("--strategy", pr.strategy, "single_turn | naive_concat | selective_concat");
  pr_cmd->add_option("-o,--out", pr.out)->required();

  // eval
  EvalOpts ev;
  auto* ev_cmd = app.add_subcommand("eval", "Compute metrics");
  ev_cmd->add_option("--predictions", ev.predictions);
  ev_cmd->add_option("--sessions", ev.sessions, "Sessions with gold labels");
  ev_cmd->add_option("--labels", ev.labels, "pseudo-label output");
  ev_cmd->add_option("--ratings", ev.ratings, "Replay log with completed_flow/transferred/bad_rating");
  ev_cmd->add_option("--taxonomy", ev.taxonomy, "Enables the per-language breakdown");
  ev_cmd->add_option("--good", ev.good);
  ev_cmd->add_option("--bad", ev.bad);
  ev_cmd->add_option("-o,--out", ev.out);

  // ablate
  AblateOpts ab;
  auto* ab_cmd = app.add_subcommand("ablate", "Run an ablation grid");
  ab_cmd->add_option("ablation_config", ab.config)->required();
  ab_cmd->add_option("--markdown", ab.markdown);
  ab_cmd->add_option("--csv", ab.csv);
  ab_cmd->add_option("--json", ab.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!g.config_path.empty()) g.config = read_json(g.config_path);
    if (tax_validate->parsed()) cmd_taxonomy_validate(tax);
    else if (tax_compress->parsed()) cmd_taxonomy_compress(g, tax);
    else if (cor_stats->parsed()) cmd_corpus_stats(cor);
    else if (cor_trans->parsed()) cmd_corpus_transitions(cor);
    else if (cor_synth->parsed()) cmd_corpus_synth(g, cor);
    else if (cor_bench->parsed()) cmd_corpus_benchmark(g, cor);
    else if (lab_cmd->parsed()) cmd_pseudo_label(g, lab);
    else if (tr_cmd->parsed()) cmd_train(g, tr);
    else if (pr_cmd->parsed()) cmd_predict(g, pr);
    else if (ev_cmd->parsed()) cmd_eval(ev);
    else if (ab_cmd->parsed()) cmd_ablate(g, ab);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
