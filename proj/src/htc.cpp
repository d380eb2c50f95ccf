#include "clara/htc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "clara/error.hpp"
#include "clara/parallel.hpp"
#include "clara/rng.hpp"
#include "clara/text.hpp"

namespace clara {

// ---- tree ------------------------------------------------------------------

HtcTree HtcTree::from_taxonomy(const Taxonomy& taxonomy) {
  const auto& tree = taxonomy.tree();
  HtcTree t;
  for (int l = 1; l <= 3; ++l) t.sizes[l - 1] = taxonomy.layer_nodes(l).size();
  for (int l = 1; l <= 3; ++l) {
    for (std::size_t node : taxonomy.layer_nodes(l)) {
      if (tree.depth(node) != l) {
        throw Error(ErrorCode::kUnsimplifiedTaxonomy, "layer node at wrong depth");
      }
      if (l == 3 && !tree.is_leaf(node)) {
        throw Error(ErrorCode::kUnsimplifiedTaxonomy, "taxonomy is deeper than 3 layers");
      }
      if (l < 3 && tree.is_leaf(node)) {
        throw Error(ErrorCode::kUnsimplifiedTaxonomy,
                    "category '" + tree.name(node) + "' is a leaf above layer 3");
      }
    }
  }
  for (int l = 1; l <= 2; ++l) {
    auto& ch = t.children[l - 1];
    ch.resize(t.sizes[l - 1]);
    for (std::size_t node : taxonomy.layer_nodes(l)) {
      auto& list = ch[taxonomy.class_of_node(node)];
      for (std::size_t c : tree.children(node)) list.push_back(taxonomy.class_of_node(c));
      std::sort(list.begin(), list.end());
    }
  }
  return t;
}

// ---- params ----------------------------------------------------------------

HtcParams::HtcParams(std::size_t d, std::array<std::size_t, 3> sizes) : d_(d), sizes_(sizes) {
  if (d == 0) throw Error(ErrorCode::kShapeMismatch, "hidden dimension must be positive");
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    specs_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  for (int l = 1; l <= 3; ++l) {
    const std::string s = std::to_string(l);
    add("W1_" + s, l == 1 ? d : 2 * d, d);
    add("b1_" + s, d, 1);
    add("W2_" + s, d, sizes[l - 1]);
    add("b2_" + s, sizes[l - 1], 1);
  }
  for (int l = 1; l <= 2; ++l) {
    const std::string s = std::to_string(l);
    add("A_" + s, d, d);
    add("c_" + s, d, 1);
  }
  add("Wg", 3 * d, node_count());
  add("bg", node_count(), 1);
  data_.assign(offset, 0.0);
}

const TensorSpec& HtcParams::spec(std::string_view name) const {
  for (const auto& s : specs_) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kShapeMismatch, "no tensor named '" + std::string(name) + "'");
}

std::size_t HtcParams::index(int kind, int l) const {
  if (kind < 4) return static_cast<std::size_t>((l - 1) * 4 + kind);
  if (kind < 6) return static_cast<std::size_t>(12 + (l - 1) * 2 + (kind - 4));
  return static_cast<std::size_t>(16 + (kind - 6));
}

MatMap HtcParams::map(int kind, int l) {
  const auto& s = specs_[index(kind, l)];
  return MatMap(data_.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                static_cast<Eigen::Index>(s.cols));
}

ConstMatMap HtcParams::cmap(int kind, int l) const {
  const auto& s = specs_[index(kind, l)];
  return ConstMatMap(data_.data() + s.offset, static_cast<Eigen::Index>(s.rows),
                     static_cast<Eigen::Index>(s.cols));
}

HtcParams HtcParams::glorot(std::size_t d, std::array<std::size_t, 3> sizes, std::uint64_t seed) {
  HtcParams p(d, sizes);
  Rng rng(derive_seed(seed, std::string_view("htc-init")));
  for (const auto& s : p.specs_) {
    if (s.cols == 1) continue;  // biases stay zero
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    for (std::size_t i = 0; i < s.rows * s.cols; ++i) {
      p.data_[s.offset + i] = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return p;
}

// ---- forward ---------------------------------------------------------------

namespace {

void check_tree(const HtcParams& params, const HtcTree& tree) {
  if (params.sizes() != tree.sizes) {
    throw Error(ErrorCode::kShapeMismatch, "parameter class counts do not match the taxonomy");
  }
}

Vec relu(const Vec& x) { return x.cwiseMax(0.0); }

Vec mean_of(const std::vector<Vec>& nodes, const std::vector<std::size_t>& which,
            std::size_t d) {
  Vec m = Vec::Zero(static_cast<Eigen::Index>(d));
  for (auto c : which) m += nodes[c];
  return m / static_cast<double>(which.size());
}

Vec mean_all(const std::vector<Vec>& nodes, std::size_t d) {
  Vec m = Vec::Zero(static_cast<Eigen::Index>(d));
  for (const auto& v : nodes) m += v;
  return m / static_cast<double>(nodes.size());
}

}  // namespace

Vec softmax(const Vec& logits) {
  const double mx = logits.maxCoeff();
  Vec e = (logits.array() - mx).exp().matrix();
  return e / e.sum();
}

LocalOutput local_forward(const Vec& H, const HtcParams& params) {
  const auto d = static_cast<Eigen::Index>(params.d());
  if (H.size() != d) {
    throw Error(ErrorCode::kShapeMismatch, "input has dimension " + std::to_string(H.size()) +
                                               ", model expects " + std::to_string(d));
  }
  LocalOutput out;
  for (int l = 1; l <= 3; ++l) {
    Vec x;
    if (l == 1) {
      x = H;
    } else {
      x.resize(2 * d);
      x << H, out.L[l - 2];
    }
    out.L[l - 1] = params.W1(l).transpose() * x + params.b1(l).col(0);
    out.logits[l - 1] = params.W2(l).transpose() * out.L[l - 1] + params.b2(l).col(0);
  }
  return out;
}

GlobalOutput global_forward(const Vec& H, const HtcParams& params, const HtcTree& tree) {
  check_tree(params, tree);
  const std::size_t d = params.d();
  if (static_cast<std::size_t>(H.size()) != d) {
    throw Error(ErrorCode::kShapeMismatch, "input dimension does not match the model");
  }
  GlobalOutput out;
  out.nodes[2].assign(tree.sizes[2], H);
  for (int l = 2; l >= 1; --l) {
    auto& pre = out.pre[l - 1];
    auto& nodes = out.nodes[l - 1];
    pre.resize(tree.sizes[l - 1]);
    nodes.resize(tree.sizes[l - 1]);
    for (std::size_t p = 0; p < tree.sizes[l - 1]; ++p) {
      const Vec a = mean_of(out.nodes[l], tree.children[l - 1][p], d);
      pre[p] = params.A(l) * a + params.c(l).col(0);
      nodes[p] = relu(pre[p]);
    }
  }
  const auto di = static_cast<Eigen::Index>(d);
  out.z.resize(3 * di);
  for (int l = 0; l < 3; ++l) out.z.segment(l * di, di) = mean_all(out.nodes[l], d);
  const Vec all = params.Wg().transpose() * out.z + params.bg().col(0);
  Eigen::Index off = 0;
  for (int l = 0; l < 3; ++l) {
    const auto n = static_cast<Eigen::Index>(tree.sizes[l]);
    out.logits[l] = all.segment(off, n);
    off += n;
  }
  return out;
}

HtcOutput forward_embedding(const Vec& H, const HtcParams& params, const HtcTree& tree) {
  HtcOutput out;
  out.H = H;
  auto local = local_forward(H, params);
  auto global = global_forward(H, params, tree);
  for (int l = 0; l < 3; ++l) {
    out.L[l] = std::move(local.L[l]);
    out.local_logits[l] = std::move(local.logits[l]);
    out.global_logits[l] = std::move(global.logits[l]);
    out.P[l] = softmax(out.local_logits[l] + out.global_logits[l]);
  }
  return out;
}

HtcOutput forward(std::string_view text, const EmbeddingProvider& embedder,
                  const HtcParams& params, const HtcTree& tree) {
  const Embedding e = embedder.embed(text);
  const Vec H = Eigen::Map<const Vec>(e.data(), static_cast<Eigen::Index>(e.size()));
  return forward_embedding(H, params, tree);
}

std::array<std::size_t, 3> argmax_classes(const HtcOutput& out) {
  std::array<std::size_t, 3> cls{};
  for (int l = 0; l < 3; ++l) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < out.P[l].size(); ++i) {
      if (out.P[l][i] > out.P[l][best]) best = i;
    }
    cls[l] = static_cast<std::size_t>(best);
  }
  return cls;
}

// ---- gradients -------------------------------------------------------------

namespace {

void check_targets(const HtcSample& s, const HtcTree& tree) {
  for (int l = 0; l < 3; ++l) {
    if (s.targets[l] >= tree.sizes[l]) {
      throw Error(ErrorCode::kInvalidTarget, "layer " + std::to_string(l + 1) + " target " +
                                                 std::to_string(s.targets[l]) + " out of range");
    }
  }
}

struct SampleEval {
  double loss = 0.0;
  bool leaf_correct = false;
};

SampleEval evaluate(const HtcSample& s, const HtcParams& params, const HtcTree& tree) {
  check_targets(s, tree);
  const HtcOutput out = forward_embedding(s.H, params, tree);
  SampleEval r;
  for (int l = 0; l < 3; ++l) r.loss -= std::log(out.P[l][static_cast<Eigen::Index>(s.targets[l])]);
  r.leaf_correct = argmax_classes(out)[2] == s.targets[2];
  return r;
}

// Loss of one sample; its gradient is written into g (overwritten).
SampleEval sample_grad(const HtcSample& s, const HtcParams& params, const HtcTree& tree,
                       HtcParams& g) {
  check_targets(s, tree);
  std::fill(g.data().begin(), g.data().end(), 0.0);
  const std::size_t d = params.d();
  const auto di = static_cast<Eigen::Index>(d);
  const LocalOutput local = local_forward(s.H, params);
  const GlobalOutput global = global_forward(s.H, params, tree);

  SampleEval r;
  std::array<Vec, 3> dS;
  for (int l = 0; l < 3; ++l) {
    const Vec P = softmax(local.logits[l] + global.logits[l]);
    const auto t = static_cast<Eigen::Index>(s.targets[l]);
    r.loss -= std::log(P[t]);
    if (l == 2) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < P.size(); ++i) {
        if (P[i] > P[best]) best = i;
      }
      r.leaf_correct = best == t;
    }
    dS[l] = P;
    dS[l][t] -= 1.0;
  }

  // Local heads, top layer first so dL flows down through the concatenation.
  Vec dL_carry = Vec::Zero(di);
  for (int l = 3; l >= 1; --l) {
    g.W2(l).noalias() += local.L[l - 1] * dS[l - 1].transpose();
    g.b2(l).col(0) += dS[l - 1];
    Vec dL = params.W2(l) * dS[l - 1];
    if (l < 3) dL += dL_carry;
    Vec x;
    if (l == 1) {
      x = s.H;
    } else {
      x.resize(2 * di);
      x << s.H, local.L[l - 2];
    }
    g.W1(l).noalias() += x * dL.transpose();
    g.b1(l).col(0) += dL;
    if (l > 1) dL_carry = (params.W1(l) * dL).segment(di, di);
  }

  // Global classifier over all nodes.
  const auto N = static_cast<Eigen::Index>(tree.node_count());
  Vec dAll(N);
  dAll << dS[0], dS[1], dS[2];
  g.Wg().noalias() += global.z * dAll.transpose();
  g.bg().col(0) += dAll;
  const Vec dz = params.Wg() * dAll;

  // Node embedding gradients, layer 1 down to layer 2 (leaves are the frozen input).
  std::array<std::vector<Vec>, 2> dnode;
  for (int l = 0; l < 2; ++l) {
    const Vec dm = dz.segment(l * di, di) / static_cast<double>(tree.sizes[l]);
    dnode[l].assign(tree.sizes[l], dm);
  }
  for (int l = 1; l <= 2; ++l) {
    const auto& children = tree.children[l - 1];
    for (std::size_t p = 0; p < tree.sizes[l - 1]; ++p) {
      const Vec du = (global.pre[l - 1][p].array() > 0.0).select(dnode[l - 1][p].array(), 0.0);
      const Vec a = mean_of(global.nodes[l], children[p], d);
      g.A(l).noalias() += du * a.transpose();
      g.c(l).col(0) += du;
      if (l == 1) {
        const Vec da = params.A(l).transpose() * du / static_cast<double>(children[p].size());
        for (auto ch : children[p]) dnode[1][ch] += da;
      }
    }
  }
  return r;
}

struct Workspace {
  std::vector<HtcParams> per_sample;
  std::vector<SampleEval> evals;
};

// Sums per-sample gradients in sample order into grads (mean over batch).
double batch_grads(std::span<const HtcSample> batch, std::span<const std::size_t> order,
                   const HtcParams& params, const HtcTree& tree, Workspace& ws,
                   std::vector<double>& grads, std::size_t workers) {
  const std::size_t n = order.size();
  if (ws.per_sample.size() < n) ws.per_sample.resize(n, HtcParams(params.d(), params.sizes()));
  ws.evals.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    ws.evals[i] = sample_grad(batch[order[i]], params, tree, ws.per_sample[i]);
  });
  grads.assign(params.data().size(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& gi = ws.per_sample[i].data();
    for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += gi[k];
    loss += ws.evals[i].loss;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : grads) v *= inv;
  return loss * inv;
}

std::pair<double, double> evaluate_set(std::span<const HtcSample> set, const HtcParams& params,
                                       const HtcTree& tree, std::size_t workers) {
  std::vector<SampleEval> evals(set.size());
  parallel_for(set.size(), workers,
               [&](std::size_t i) { evals[i] = evaluate(set[i], params, tree); });
  double loss = 0.0;
  std::size_t correct = 0;
  for (const auto& e : evals) {
    loss += e.loss;
    correct += e.leaf_correct ? 1 : 0;
  }
  const double n = static_cast<double>(set.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

double loss_and_grads(std::span<const HtcSample> batch, const HtcParams& params,
                      const HtcTree& tree, std::vector<double>& grads, std::size_t workers) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyDataset, "empty batch");
  check_tree(params, tree);
  std::vector<std::size_t> order(batch.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Workspace ws;
  return batch_grads(batch, order, params, tree, ws, grads, workers);
}

double batch_loss(std::span<const HtcSample> batch, const HtcParams& params, const HtcTree& tree) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyDataset, "empty batch");
  check_tree(params, tree);
  return evaluate_set(batch, params, tree, 1).first;
}

// ---- training --------------------------------------------------------------

TrainResult train(std::span<const HtcSample> train_set, std::span<const HtcSample> val_set,
                  const HtcTree& tree, const TrainConfig& config) {
  return train(train_set, val_set, tree, config,
               HtcParams::glorot(config.d, tree.sizes, config.seed));
}

TrainResult train(std::span<const HtcSample> train_set, std::span<const HtcSample> val_set,
                  const HtcTree& tree, const TrainConfig& config, HtcParams init) {
  if (train_set.empty()) throw Error(ErrorCode::kEmptyDataset, "training set is empty");
  if (config.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be > 0");
  check_tree(init, tree);
  for (const auto& s : train_set) check_targets(s, tree);
  for (const auto& s : val_set) check_targets(s, tree);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  TrainResult result;
  HtcParams params = std::move(init);
  std::vector<double>& w = params.data();
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0), grads;
  double b1t = 1.0, b2t = 1.0;
  Workspace ws;
  std::vector<std::size_t> order(train_set.size());
  std::vector<SampleEval> epoch_evals(train_set.size());

  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  result.params = params;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(config.seed, epoch));
    rng.shuffle(order);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      batch_grads(train_set, idx, params, tree, ws, grads, config.workers);
      for (std::size_t i = 0; i < idx.size(); ++i) epoch_evals[idx[i]] = ws.evals[i];
      b1t *= kBeta1;
      b2t *= kBeta2;
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grads[k];
        v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grads[k] * grads[k];
        const double mh = m[k] / (1.0 - b1t);
        const double vh = v[k] / (1.0 - b2t);
        w[k] -= config.lr * mh / (std::sqrt(vh) + kEps);
      }
    }

    EpochStats st;
    st.epoch = epoch;
    std::size_t correct = 0;
    for (const auto& e : epoch_evals) {
      st.train_loss += e.loss;
      correct += e.leaf_correct ? 1 : 0;
    }
    st.train_loss /= static_cast<double>(train_set.size());
    st.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      std::tie(st.val_loss, st.val_accuracy) = evaluate_set(val_set, params, tree, config.workers);
    }
    result.history.push_back(st);

    if (val_set.empty()) {
      result.params = params;
      result.best_epoch = epoch;
      continue;
    }
    if (st.val_loss < best_val) {
      best_val = st.val_loss;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

std::vector<HtcSample> make_samples(std::span<const LabeledExample> examples,
                                    const Taxonomy& taxonomy, const EmbeddingProvider& embedder,
                                    std::size_t workers) {
  std::vector<HtcSample> out(examples.size());
  parallel_for(examples.size(), workers, [&](std::size_t i) {
    const Embedding e = embedder.embed(examples[i].query);
    out[i].H = Eigen::Map<const Vec>(e.data(), static_cast<Eigen::Index>(e.size()));
    out[i].targets = taxonomy.class_targets(examples[i].intent_id);
  });
  return out;
}

// ---- prediction ------------------------------------------------------------

std::string_view to_string(PredictStrategy strategy) {
  switch (strategy) {
    case PredictStrategy::kSingleTurn: return "single_turn";
    case PredictStrategy::kNaiveConcat: return "naive_concat";
    case PredictStrategy::kSelectiveConcat: return "selective_concat";
  }
  return "single_turn";
}

PredictStrategy parse_predict_strategy(std::string_view name) {
  for (auto s : {PredictStrategy::kSingleTurn, PredictStrategy::kNaiveConcat,
                 PredictStrategy::kSelectiveConcat}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

std::string strategy_input(const Session& session, PredictStrategy strategy,
                           const EmbeddingProvider& embedder) {
  if (session.turns.empty()) {
    throw Error(ErrorCode::kEmptySession, "session '" + session.id + "' has no turns");
  }
  const std::string& last = session.last_turn();
  const std::size_t n = session.turns.size();
  if (n == 1 || strategy == PredictStrategy::kSingleTurn) return last;
  if (strategy == PredictStrategy::kNaiveConcat) {
    return text::join(session.turns, kTurnSeparator);
  }
  const Embedding q = embedder.embed(last);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double score = cosine(embedder.embed(session.turns[i]), q);
    if (score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return session.turns[best] + std::string(kTurnSeparator) + last;
}

std::vector<LabeledExample> session_examples(std::span<const PseudoLabel> labels,
                                             const Taxonomy& taxonomy) {
  std::vector<LabeledExample> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    out.push_back({text::join(l.session.turns, kTurnSeparator), l.intent_id,
                   taxonomy.at(l.intent_id).language});
  }
  return out;
}

Prediction predict(const Session& session, PredictStrategy strategy, const HtcParams& params,
                   const HtcTree& tree, const Taxonomy& taxonomy,
                   const EmbeddingProvider& embedder) {
  Prediction p;
  p.session_id = session.id;
  p.input = strategy_input(session, strategy, embedder);
  p.classes = argmax_classes(forward(p.input, embedder, params, tree));
  const Intent* intent = taxonomy.intent_for_leaf_class(p.classes[2]);
  if (intent) p.intent_id = intent->id;
  return p;
}

// ---- model file ------------------------------------------------------------

namespace {
constexpr std::string_view kModelFormat = "clara-htc";
constexpr int kModelVersion = 1;
}  // namespace

Json model_to_json(const HtcModel& model) {
  Json tensors = Json::array();
  const auto& data = model.params.data();
  for (const auto& s : model.params.tensors()) {
    tensors.push_back({{"name", s.name},
                       {"rows", s.rows},
                       {"cols", s.cols},
                       {"data", std::vector<double>(data.begin() + static_cast<long>(s.offset),
                                                    data.begin() + static_cast<long>(s.offset +
                                                                                    s.rows * s.cols))}});
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"d", model.params.d()},
          {"classes", {model.classes[0], model.classes[1], model.classes[2]}},
          {"embedder", model.embedder},
          {"tensors", tensors}};
}

HtcModel model_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat ||
        j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::kShapeMismatch, "unsupported model format");
    }
    HtcModel m;
    const auto& cls = j.at("classes");
    if (!cls.is_array() || cls.size() != 3) {
      throw Error(ErrorCode::kShapeMismatch, "model must list 3 class layers");
    }
    for (int l = 0; l < 3; ++l) m.classes[l] = cls[l].get<std::vector<std::string>>();
    m.params = HtcParams(j.at("d").get<std::size_t>(),
                         {m.classes[0].size(), m.classes[1].size(), m.classes[2].size()});
    m.embedder = j.at("embedder");
    const auto& tensors = j.at("tensors");
    if (tensors.size() != m.params.tensors().size()) {
      throw Error(ErrorCode::kShapeMismatch, "unexpected tensor count");
    }
    for (const auto& t : tensors) {
      const TensorSpec& s = m.params.spec(t.at("name").get<std::string>());
      const auto values = t.at("data").get<std::vector<double>>();
      if (t.at("rows").get<std::size_t>() != s.rows || t.at("cols").get<std::size_t>() != s.cols ||
          values.size() != s.rows * s.cols) {
        throw Error(ErrorCode::kShapeMismatch, "tensor '" + s.name + "' has the wrong shape");
      }
      for (double x : values) {
        if (!std::isfinite(x)) {
          throw Error(ErrorCode::kShapeMismatch, "tensor '" + s.name + "' has non-finite entries");
        }
      }
      std::copy(values.begin(), values.end(), m.params.data().begin() + static_cast<long>(s.offset));
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kShapeMismatch, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const HtcModel& model) {
  write_json(path, model_to_json(model));
}

HtcModel load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void check_model_matches(const HtcModel& model, const Taxonomy& taxonomy) {
  for (int l = 1; l <= 3; ++l) {
    if (model.classes[l - 1] != taxonomy.classes(l)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "model classes at layer " + std::to_string(l) + " differ from the taxonomy");
    }
  }
}

}  // namespace clara
