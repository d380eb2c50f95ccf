#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "clara/corpus.hpp"
#include "clara/embedding.hpp"
#include "clara/jsonl.hpp"
#include "clara/labeling.hpp"
#include "clara/taxonomy.hpp"

namespace clara {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

/// Parent/child structure of a depth-3 taxonomy in class-index space.
struct HtcTree {
  std::array<std::size_t, 3> sizes{};
  /// children[l][c]: classes at layer l+2 under class c of layer l+1 (l = 0, 1).
  std::array<std::vector<std::vector<std::size_t>>, 2> children;

  /// Throws UnsimplifiedTaxonomy when a layer-1/2 class has no children or a
  /// leaf is not at depth 3.
  static HtcTree from_taxonomy(const Taxonomy& taxonomy);
  std::size_t node_count() const noexcept { return sizes[0] + sizes[1] + sizes[2]; }
};

struct TensorSpec {
  std::string name;
  std::size_t rows = 0, cols = 0, offset = 0;
};

/// All trainable tensors in one flat, column-major buffer.
///   W1_l: (d or 2d) x d, b1_l: d, W2_l: d x |I_l|, b2_l: |I_l|   (l = 1..3)
///   A_l: d x d, c_l: d   (parents at layer l = 1, 2)
///   Wg: 3d x N, bg: N    (N = all taxonomy nodes, layer 1 first)
class HtcParams {
 public:
  HtcParams() = default;
  HtcParams(std::size_t d, std::array<std::size_t, 3> sizes);  // all zero

  std::size_t d() const noexcept { return d_; }
  const std::array<std::size_t, 3>& sizes() const noexcept { return sizes_; }
  std::size_t node_count() const noexcept { return sizes_[0] + sizes_[1] + sizes_[2]; }

  const std::vector<TensorSpec>& tensors() const noexcept { return specs_; }
  const TensorSpec& spec(std::string_view name) const;
  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  // l is 1-based.
  MatMap W1(int l) { return map(0, l); }
  MatMap b1(int l) { return map(1, l); }
  MatMap W2(int l) { return map(2, l); }
  MatMap b2(int l) { return map(3, l); }
  MatMap A(int l) { return map(4, l); }
  MatMap c(int l) { return map(5, l); }
  MatMap Wg() { return map(6, 1); }
  MatMap bg() { return map(7, 1); }
  ConstMatMap W1(int l) const { return cmap(0, l); }
  ConstMatMap b1(int l) const { return cmap(1, l); }
  ConstMatMap W2(int l) const { return cmap(2, l); }
  ConstMatMap b2(int l) const { return cmap(3, l); }
  ConstMatMap A(int l) const { return cmap(4, l); }
  ConstMatMap c(int l) const { return cmap(5, l); }
  ConstMatMap Wg() const { return cmap(6, 1); }
  ConstMatMap bg() const { return cmap(7, 1); }

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)) for matrices, zero biases.
  static HtcParams glorot(std::size_t d, std::array<std::size_t, 3> sizes, std::uint64_t seed);

  bool operator==(const HtcParams& o) const {
    return d_ == o.d_ && sizes_ == o.sizes_ && data_ == o.data_;
  }

 private:
  std::size_t index(int kind, int l) const;
  MatMap map(int kind, int l);
  ConstMatMap cmap(int kind, int l) const;

  std::size_t d_ = 0;
  std::array<std::size_t, 3> sizes_{};
  std::vector<TensorSpec> specs_;
  std::vector<double> data_;
};

struct LocalOutput {
  std::array<Vec, 3> L;
  std::array<Vec, 3> logits;
};

struct GlobalOutput {
  /// Node embeddings per layer, [layer][class].
  std::array<std::vector<Vec>, 3> nodes;
  /// Pre-activation of parent nodes (layers 1 and 2).
  std::array<std::vector<Vec>, 2> pre;
  Vec z;  // per-layer means, layer 1 first (3d)
  std::array<Vec, 3> logits;
};

struct HtcOutput {
  Vec H;
  std::array<Vec, 3> L;
  std::array<Vec, 3> local_logits;
  std::array<Vec, 3> global_logits;
  std::array<Vec, 3> P;
};

/// Throws ShapeMismatch when H does not have dimension d.
LocalOutput local_forward(const Vec& H, const HtcParams& params);
GlobalOutput global_forward(const Vec& H, const HtcParams& params, const HtcTree& tree);
HtcOutput forward_embedding(const Vec& H, const HtcParams& params, const HtcTree& tree);
HtcOutput forward(std::string_view text, const EmbeddingProvider& embedder,
                  const HtcParams& params, const HtcTree& tree);

/// Max-subtracted softmax.
Vec softmax(const Vec& logits);

struct HtcSample {
  Vec H;
  std::array<std::size_t, 3> targets{};
};

/// Mean over the batch of sum_l -log P_l[target_l]; `grads` (resized to the
/// parameter buffer) receives the gradient. Per-sample gradients are summed
/// in sample order whatever the worker count. Throws InvalidTarget.
double loss_and_grads(std::span<const HtcSample> batch, const HtcParams& params,
                      const HtcTree& tree, std::vector<double>& grads, std::size_t workers = 1);

/// Loss only.
double batch_loss(std::span<const HtcSample> batch, const HtcParams& params, const HtcTree& tree);

struct TrainConfig {
  std::size_t d = 64;
  std::size_t epochs = 60;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // leaf layer, measured during the epoch
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  HtcParams params;  // best validation epoch (last epoch without validation)
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

/// Adam (beta 0.9/0.999) with early stopping on validation loss. Throws
/// EmptyDataset for an empty training set.
TrainResult train(std::span<const HtcSample> train_set, std::span<const HtcSample> val_set,
                  const HtcTree& tree, const TrainConfig& config);
/// Starts from `init` instead of a seeded initialization.
TrainResult train(std::span<const HtcSample> train_set, std::span<const HtcSample> val_set,
                  const HtcTree& tree, const TrainConfig& config, HtcParams init);

/// Embeds (text, intent) pairs with the frozen encoder.
std::vector<HtcSample> make_samples(std::span<const LabeledExample> examples,
                                    const Taxonomy& taxonomy, const EmbeddingProvider& embedder,
                                    std::size_t workers = 1);

enum class PredictStrategy { kSingleTurn, kNaiveConcat, kSelectiveConcat };
std::string_view to_string(PredictStrategy strategy);
PredictStrategy parse_predict_strategy(std::string_view name);

inline constexpr std::string_view kTurnSeparator = " | ";

/// Classifier input for a session under a strategy. Throws EmptySession.
std::string strategy_input(const Session& session, PredictStrategy strategy,
                           const EmbeddingProvider& embedder);

/// Training examples from pseudo-labeled sessions: every turn joined with
/// kTurnSeparator, labeled with the kept intent.
std::vector<LabeledExample> session_examples(std::span<const PseudoLabel> labels,
                                             const Taxonomy& taxonomy);

struct Prediction {
  std::string session_id;
  std::string input;
  std::array<std::size_t, 3> classes{};
  std::string intent_id;
};

/// argmax per layer, lowest index on ties.
std::array<std::size_t, 3> argmax_classes(const HtcOutput& out);

Prediction predict(const Session& session, PredictStrategy strategy, const HtcParams& params,
                   const HtcTree& tree, const Taxonomy& taxonomy,
                   const EmbeddingProvider& embedder);

/// Trained parameters plus what is needed to use them.
struct HtcModel {
  HtcParams params;
  std::array<std::vector<std::string>, 3> classes;
  Json embedder;  // EmbeddingProvider::describe()
};

Json model_to_json(const HtcModel& model);
HtcModel model_from_json(const Json& j);
void save_model(const std::filesystem::path& path, const HtcModel& model);
HtcModel load_model(const std::filesystem::path& path);
/// Throws ShapeMismatch when the model's class lists differ from the taxonomy's.
void check_model_matches(const HtcModel& model, const Taxonomy& taxonomy);

}  // namespace clara
