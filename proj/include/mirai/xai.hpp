#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mirai/common.hpp"
#include "mirai/data.hpp"
#include "mirai/models.hpp"

namespace mirai::xai {

/// Model output over a batch of rows.
using BatchFn = std::function<std::vector<double>(const Matrix&)>;
/// Attribution vector for one input row.
using ExplainFn = std::function<std::vector<double>(std::span<const double>)>;
/// Attribution vector for one input row and a target class (0 or 1).
using ExplainClassFn = std::function<std::vector<double>(std::span<const double>, int)>;

BatchFn batch_fn(const models::ClassifierHandle& handle);

struct ShapOptions {
  std::size_t budget = 256;  // coalitions, excluding the empty and full ones
  std::uint64_t seed = 0;
};

struct Attribution {
  std::vector<double> values;
  double base_value = 0.0;  // expected output over the background
  double output = 0.0;      // output at the explained row
};

/// Kernel SHAP with interventional feature removal: a coalition's value is
/// the mean output over background rows with absent features taken from the
/// background row. The empty and full coalitions are enforced as an exact
/// constraint (sum of attributions = output - base), and the remaining
/// Shapley-kernel weighted least squares is solved in closed form.
///
/// When 2^d <= budget every coalition is enumerated and the result equals the
/// exact Shapley values of the value function. Otherwise complete coalition
/// sizes are enumerated while the budget allows (smallest and largest sizes
/// first) and the rest are sampled in complementary pairs. The coalition set
/// is drawn once per Explainer, so every row is explained with the same
/// design matrix.
class Explainer {
 public:
  Explainer(BatchFn model, Matrix background, ShapOptions options);

  Attribution explain(std::span<const double> x, int target_class = 1) const;

  std::size_t n_features() const noexcept { return d_; }
  std::size_t n_coalitions() const noexcept { return masks_.size(); }
  bool exact() const noexcept { return exact_; }
  bool ridge_fallback() const noexcept { return ridge_; }
  const Matrix& background() const noexcept { return background_; }

 private:
  BatchFn model_;
  Matrix background_;
  std::size_t d_ = 0;
  std::vector<std::vector<char>> masks_;
  std::vector<double> weights_;
  bool exact_ = false;
  bool ridge_ = false;
  // Factorized normal equations of the reduced (d-1)-dimensional problem.
  std::vector<double> normal_inverse_;
};

Attribution kernel_shap(const models::ClassifierHandle& handle, std::span<const double> x,
                        const Matrix& background, const ShapOptions& options);

// ---------------------------------------------------------------------------
// Explanation-quality metrics. Every function returns a value in [0,1] with
// 1 the desirable end.

struct LipschitzEstimate {
  double constant = 0.0;
  double aligned = 1.0;  // 1 / (1 + constant)
};

/// Max of |e(x) - e(x')| / |x - x'| over points drawn uniformly from the L2
/// ball of `radius` around x.
LipschitzEstimate local_lipschitz(const ExplainFn& explain, std::span<const double> x, double radius,
                                  std::size_t n_perturb, std::uint64_t seed);

/// Signature of a row = indices of its `top_k` largest attributions in order.
/// Score = mean over rows of the fraction of same-prediction rows (self
/// included) that share the row's signature.
double consistency(std::span<const std::vector<double>> explanations,
                   std::span<const int> predictions, std::size_t top_k);

/// Pearson r between the attribution mass of random feature subsets and the
/// output drop when those features are set to `baseline`; mapped by (r+1)/2.
double faithfulness_correlation(const BatchFn& model, std::span<const double> attributions,
                                std::span<const double> x, std::span<const double> baseline,
                                std::size_t subset_size, std::size_t n_subsets, std::uint64_t seed);

/// Pearson r between each attribution and the output drop from removing that
/// single feature; mapped by (r+1)/2.
double faithfulness_estimate(const BatchFn& model, std::span<const double> attributions,
                             std::span<const double> x, std::span<const double> baseline);

/// (1 - mean_rho) / 4 + 0.5: 0.5 when randomization leaves explanations
/// unchanged, 0.75 when it decorrelates them, 1 when it inverts them.
double parameter_randomization_score(double mean_correlation);
double param_randomization_test(const ExplainFn& original, const ExplainFn& randomized,
                                const Matrix& rows);

/// (1 - mean_rho) / 2 between explanations of the predicted class and of the
/// other class.
double random_logit_test(const ExplainClassFn& explain, const Matrix& rows,
                         std::span<const int> predicted);

/// Gini index of |a|: sum_i (2i - n - 1) |a|_(i) / (n sum |a|), ascending order.
double sparseness(std::span<const double> attributions);

/// 1 - H(p)/ln(d) with p_i = |a_i| / sum |a|; 0 for an all-zero row.
double complexity_entropy(std::span<const double> attributions);

struct XaiMetrics {
  double local_lipschitz = 0.0;
  double consistency = 0.0;
  double faithfulness_correlation = 0.0;
  double faithfulness_estimate = 0.0;
  double param_randomization = 0.0;
  double random_logit = 0.0;
  double sparseness = 0.0;
  double complexity_entropy = 0.0;
};

struct XaiSubscores {
  double robustness_expl = 0.0;
  double faithfulness = 0.0;
  double randomization = 0.0;
  double complexity = 0.0;
  double dimension = 0.0;
  XaiMetrics metrics;
};

XaiSubscores explainability_dimension(const XaiMetrics& metrics);

// ---------------------------------------------------------------------------

struct XaiConfig {
  std::size_t eval_rows = 100;
  std::size_t background_rows = 32;
  std::size_t shap_budget = 256;
  std::size_t lipschitz_rows = 20;
  std::size_t lipschitz_perturbations = 10;
  double lipschitz_radius = 0.1;
  std::size_t consistency_top_k = 3;
  std::size_t faithfulness_subset_size = 0;  // 0: max(1, d/4)
  std::size_t faithfulness_draws = 50;
};

struct XaiEvaluation {
  XaiSubscores scores;
  std::vector<std::string> flags;
  std::vector<std::size_t> rows;  // test-row positions that were explained
  std::vector<Attribution> attributions;
};

XaiEvaluation evaluate_explainability(const models::ClassifierHandle& handle,
                                      const data::LabeledData& train, const data::LabeledData& test,
                                      const XaiConfig& config, std::uint64_t seed);

/// CSV with columns test_position, one per feature, base_value.
void write_attributions_csv(const std::string& path, const XaiEvaluation& evaluation,
                            std::span<const std::string> feature_names);

}  // namespace mirai::xai
