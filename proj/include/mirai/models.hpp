#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirai/common.hpp"
#include "mirai/data.hpp"

namespace mirai::models {

enum class Family { kDecisionTree, kGradientBoostedTrees, kLinearMaxMargin, kMlp, kExternal };

std::string_view family_name(Family family);
Family parse_family(std::string_view name);

/// Static cost of one prediction. FLOPs are counted as 2 x MACs for every
/// model; activation and comparison costs beyond that are ignored.
struct ResourceInfo {
  std::int64_t parameter_count = 0;
  std::int64_t macs_per_sample = 0;
  std::int64_t flops_per_sample = 0;

  static ResourceInfo from_macs(std::int64_t parameters, std::int64_t macs) {
    return {parameters, macs, 2 * macs};
  }
  bool operator==(const ResourceInfo&) const = default;
};

/// A trained binary classifier seen as a probability function. Implementations
/// are immutable after training and safe to call concurrently.
class Model {
 public:
  virtual ~Model() = default;
  virtual Family family() const = 0;
  /// Probability of class 1 for each row of x.
  virtual std::vector<double> predict_proba(const Matrix& x) const = 0;
  virtual std::optional<ResourceInfo> resource_info() const = 0;
  /// Copy whose continuous trainable parameters are re-initialized at random;
  /// nullptr for models without such parameters.
  virtual std::unique_ptr<Model> randomized_copy(std::uint64_t /*seed*/) const { return nullptr; }
  /// Estimated arithmetic spent during training, in FLOPs (0 when unknown).
  virtual double training_flops() const { return 0.0; }
};

/// Uniform handle over built-in and external models. Copies share the
/// underlying model and the query counter.
class ClassifierHandle {
 public:
  ClassifierHandle() = default;
  ClassifierHandle(std::string model_id, std::shared_ptr<const Model> model,
                   double train_time_seconds = 0.0);

  const std::string& model_id() const noexcept { return model_id_; }
  Family family() const { return model_->family(); }
  const Model& model() const { return *model_; }
  std::shared_ptr<const Model> shared_model() const { return model_; }
  double train_time_seconds() const noexcept { return train_time_seconds_; }
  std::optional<ResourceInfo> resource_info() const;
  void declare_resource_info(ResourceInfo info) { declared_ = info; }

  /// Evaluates the model and validates the output (one value per row, all in [0,1]).
  std::vector<double> predict_proba(const Matrix& x) const;
  double predict_one(std::span<const double> row) const;
  std::uint64_t queried_rows() const { return queries_->load(std::memory_order_relaxed); }

 private:
  std::string model_id_;
  std::shared_ptr<const Model> model_;
  double train_time_seconds_ = 0.0;
  std::optional<ResourceInfo> declared_;
  std::shared_ptr<std::atomic<std::uint64_t>> queries_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

inline int hard_label(double p) { return p >= 0.5 ? 1 : 0; }

// ---------------------------------------------------------------------------
// Trees

/// Binary tree with `x[feature] <= threshold` going left. Leaves carry the
/// output value (class-1 frequency for classification trees).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t path_length(std::span<const double> x) const;
  std::size_t internal_count() const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
  /// Three parameters per internal node (feature, threshold, child link) and one per leaf.
  std::int64_t parameter_count() const;
  double mean_path_length(const Matrix& x) const;
};

struct TreeParams {
  int max_depth = 6;
  std::size_t min_leaf = 1;
};

class DecisionTreeModel final : public Model {
 public:
  DecisionTreeModel(Tree tree, std::int64_t macs, double training_flops)
      : tree_(std::move(tree)), macs_(macs), training_flops_(training_flops) {}
  Family family() const override { return Family::kDecisionTree; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override;
  double training_flops() const override { return training_flops_; }
  const Tree& tree() const { return tree_; }

 private:
  Tree tree_;
  std::int64_t macs_;
  double training_flops_;
};

/// CART with Gini impurity.
ClassifierHandle train_decision_tree(const data::LabeledData& train, const TreeParams& params,
                                     std::string model_id = "decision_tree");

struct GbtParams {
  int n_trees = 100;
  int depth = 3;
  double learning_rate = 0.1;
  double lambda = 1.0;
  std::size_t min_leaf = 1;
  double subsample = 1.0;
  std::uint64_t seed = 0;
};

class GbtModel final : public Model {
 public:
  GbtModel(double base_score, std::vector<Tree> trees, std::int64_t macs, double training_flops)
      : base_score_(base_score), trees_(std::move(trees)), macs_(macs),
        training_flops_(training_flops) {}
  Family family() const override { return Family::kGradientBoostedTrees; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override;
  double training_flops() const override { return training_flops_; }
  double raw_score(std::span<const double> x) const;
  double base_score() const { return base_score_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  double base_score_;
  std::vector<Tree> trees_;
  std::int64_t macs_;
  double training_flops_;
};

/// Gradient boosting on logistic loss with Newton-step regression trees. A
/// round whose step would raise the training loss is shrunk until it does
/// not, so training loss is non-increasing in the number of trees.
ClassifierHandle train_gbt(const data::LabeledData& train, const GbtParams& params,
                           std::string model_id = "gbt");

double logistic_loss(std::span<const double> probabilities, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Linear max-margin

struct LinearMarginParams {
  double C = 1.0;
  int epochs = 200;
  double calibration_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Platt scaling: p = 1 / (1 + exp(a * margin + b)).
struct PlattScaling {
  double a = -1.0;
  double b = 0.0;

  double operator()(double margin) const;
};

/// Newton fit with Platt's smoothed targets.
PlattScaling fit_platt(std::span<const double> margins, std::span<const int> labels);

class LinearMarginModel final : public Model {
 public:
  LinearMarginModel(std::vector<double> weights, double bias, PlattScaling calibration,
                    double training_flops)
      : weights_(std::move(weights)), bias_(bias), calibration_(calibration),
        training_flops_(training_flops) {}
  Family family() const override { return Family::kLinearMaxMargin; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override;
  double training_flops() const override { return training_flops_; }
  double margin(std::span<const double> x) const;
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const PlattScaling& calibration() const { return calibration_; }

 private:
  std::vector<double> weights_;
  double bias_;
  PlattScaling calibration_;
  double training_flops_;
};

/// L2-regularized hinge loss minimized by full-batch subgradient descent
/// (step 1/(lambda t), lambda = 1/(C n)), then Platt-calibrated on a held-out
/// stratified fold.
ClassifierHandle train_linear_margin(const data::LabeledData& train, const LinearMarginParams& params,
                                     std::string model_id = "linear_margin");

// ---------------------------------------------------------------------------
// Multilayer perceptron

struct MlpParams {
  std::vector<int> hidden_sizes{64};
  int epochs = 100;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// Fully connected ReLU network with a single sigmoid output. Parameters are
/// stored flat, layer by layer: weights (out x in, row-major) then biases.
class MlpModel final : public Model {
 public:
  MlpModel(std::vector<int> layer_sizes, std::uint64_t init_seed);

  Family family() const override { return Family::kMlp; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override;
  std::unique_ptr<Model> randomized_copy(std::uint64_t seed) const override;
  double training_flops() const override { return training_flops_; }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  std::span<const double> parameters() const { return params_; }
  void set_parameters(std::span<const double> values);

  double logit(std::span<const double> x) const;
  /// Mean binary cross-entropy over `rows` and its gradient w.r.t. the flat parameters.
  double loss_and_gradient(const Matrix& x, std::span<const int> y,
                           std::span<const std::size_t> rows, std::span<double> grad) const;
  double loss(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows) const;

  void fit(const Matrix& x, std::span<const int> y, const MlpParams& params);

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1] * sizes_[layer]);
  }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  double training_flops_ = 0.0;
};

ClassifierHandle train_mlp(const data::LabeledData& train, const MlpParams& params,
                           std::string model_id = "mlp");

// ---------------------------------------------------------------------------
// External models

/// Batch command adapter. Each predict call writes the rows to a temporary
/// CSV (header = feature names), runs the command with `{input}` replaced by
/// that path (appended when absent), and reads one probability per stdout line.
class ExternalCommandModel final : public Model {
 public:
  ExternalCommandModel(std::string command, std::vector<std::string> feature_names,
                       std::filesystem::path scratch_dir = std::filesystem::temp_directory_path());
  Family family() const override { return Family::kExternal; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override { return std::nullopt; }

 private:
  std::string command_;
  std::vector<std::string> feature_names_;
  std::filesystem::path scratch_dir_;
};

/// Precomputed probabilities for a fixed set of rows (e.g. one split). Only
/// rows present in the table can be answered; any other query throws
/// MetricError.
class PredictionTableModel final : public Model {
 public:
  PredictionTableModel(const Matrix& rows, std::vector<double> probabilities);
  Family family() const override { return Family::kExternal; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override { return std::nullopt; }

 private:
  std::vector<std::pair<std::vector<double>, double>> entries_;  // sorted by row
};

/// One probability per non-empty line, parsed at full precision.
std::vector<double> parse_probabilities(std::string_view text);
std::vector<double> read_probability_file(const std::filesystem::path& path);

ClassifierHandle attach_external_command(std::string model_id, std::string command,
                                         std::vector<std::string> feature_names,
                                         std::optional<ResourceInfo> declared = std::nullopt);
ClassifierHandle attach_external_predictions(std::string model_id,
                                             const std::filesystem::path& prediction_file,
                                             const Matrix& rows,
                                             std::optional<ResourceInfo> declared = std::nullopt);

// ---------------------------------------------------------------------------
// Lambda-backed model, used for oracles and synthetic experiments.

class FunctionModel final : public Model {
 public:
  using Fn = std::function<double(std::span<const double>)>;
  explicit FunctionModel(Fn fn, Family family = Family::kExternal,
                         std::optional<ResourceInfo> info = std::nullopt)
      : fn_(std::move(fn)), family_(family), info_(info) {}
  Family family() const override { return family_; }
  std::vector<double> predict_proba(const Matrix& x) const override;
  std::optional<ResourceInfo> resource_info() const override { return info_; }

 private:
  Fn fn_;
  Family family_;
  std::optional<ResourceInfo> info_;
};

ClassifierHandle make_function_handle(std::string model_id, FunctionModel::Fn fn,
                                      Family family = Family::kExternal);

// ---------------------------------------------------------------------------

struct PredictiveScores {
  double accuracy = 0.0;
  double f1 = 0.0;
};

/// Accuracy and F1 at threshold 0.5; F1 is 0 when precision + recall is 0.
PredictiveScores accuracy_f1(std::span<const int> y_true, std::span<const double> probabilities);
PredictiveScores accuracy_f1(const ClassifierHandle& handle, const data::LabeledData& test);

}  // namespace mirai::models
