#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mirai/common.hpp"
#include "mirai/data.hpp"
#include "mirai/models.hpp"

namespace mirai::robust {

struct AttackBudget {
  std::size_t max_queries = 2000;   // per attacked point
  double epsilon = 2.0;             // L2, standardized feature space
  std::size_t n_eval_points = 100;
  std::uint64_t seed = 0;
  /// Stop as soon as the best perturbation norm drops to this value.
  std::optional<double> stop_below;
};

struct AttackResult {
  bool success = false;
  std::vector<double> adversarial;
  double norm = 0.0;
  std::size_t queries = 0;
  /// Best-so-far perturbation norm after initialization and after each iteration.
  std::vector<double> norm_history;
};

/// Decision-based L2 attack after HopSkipJump: random-noise initialization,
/// binary search to the boundary, Monte-Carlo estimate of the boundary normal
/// from label flips, geometric step-size search, repeat. The returned row
/// always has the opposite hard label to `true_label`.
AttackResult hsja_attack(const models::ClassifierHandle& handle, std::span<const double> x,
                         int true_label, const AttackBudget& budget, std::uint64_t seed);

struct AttackLogEntry {
  std::size_t row = 0;
  bool success = false;
  std::size_t queries = 0;
  double norm = 0.0;
};

struct HsjaScore {
  double score = 0.0;
  std::size_t evaluated = 0;
  std::vector<AttackLogEntry> log;
  std::vector<std::string> flags;
};

/// Fraction of attacked (correctly classified) test rows on which the attack
/// fails or needs a perturbation larger than epsilon.
HsjaScore hsja_robustness_score(const models::ClassifierHandle& handle, const data::LabeledData& test,
                                const AttackBudget& budget);

// ---------------------------------------------------------------------------

struct Bandwidth {
  double sigma = 1.0;
  bool fallback = false;  // median distance was 0
};

/// Median of the pairwise Euclidean distances of the pooled sample.
Bandwidth median_heuristic(const Matrix& x, const Matrix& y);

/// Unbiased (U-statistic) squared MMD with k(a,b) = exp(-|a-b|^2 / (2 sigma^2)).
double mmd2_unbiased(const Matrix& x, const Matrix& y, double sigma);
/// Biased (V-statistic) squared MMD, always >= 0.
double mmd2_biased(const Matrix& x, const Matrix& y, double sigma);

struct PermutationTest {
  double statistic = 0.0;
  double p_value = 1.0;
  double sigma = 1.0;
  bool bandwidth_fallback = false;
};

/// Permutation test on mmd2_unbiased. p = (1 + #{perm stat >= observed}) / (P + 1).
PermutationTest mmd_permutation_test(const Matrix& x, const Matrix& y, std::size_t n_permutations,
                                     std::uint64_t seed, std::optional<double> sigma = std::nullopt);

struct DriftLadder {
  std::vector<double> levels{0.05, 0.1, 0.2, 0.5};
  std::size_t batch_size = 100;
  std::size_t n_permutations = 200;
  std::optional<double> bandwidth;  // median heuristic when unset
  std::uint64_t seed = 0;
};

struct DriftScore {
  double score = 0.0;
  std::vector<double> level_p_values;
  std::vector<std::string> flags;
};

/// Mean permutation p-value between the model's clean and noise-perturbed
/// prediction samples over the ladder levels.
DriftScore drift_robustness(const models::ClassifierHandle& handle, const data::LabeledData& test,
                            const DriftLadder& ladder);

/// Mean of the two scores.
double robustness_dimension(double hsja_score, double drift_score);

}  // namespace mirai::robust
