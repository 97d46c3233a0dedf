#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirai/common.hpp"
#include "mirai/data.hpp"
#include "mirai/models.hpp"

namespace mirai::privacy {

/// Balanced membership evaluation set: members from the training split,
/// non-members from the test split.
struct MembershipEvalSet {
  data::LabeledData members;
  data::LabeledData non_members;
};

/// Draws n_each rows from each side (0: as many as the smaller side allows).
MembershipEvalSet make_membership_set(const data::LabeledData& train, const data::LabeledData& test,
                                      std::size_t n_each, std::uint64_t seed);

struct MembershipResult {
  double attack_accuracy = 0.5;
  double mi_privacy = 1.0;
  std::vector<std::string> flags;
};

/// Best balanced accuracy of "member iff statistic >= t" over all thresholds t.
double best_threshold_accuracy(std::span<const double> member_stat, std::span<const double> non_member_stat);

/// 1 - max(0, 2 acc - 1)
double mi_privacy_from_accuracy(double attack_accuracy);

/// Confidence-threshold attack: the statistic is the predicted probability of the true label.
MembershipResult mi_attack(const models::ClassifierHandle& handle, const MembershipEvalSet& eval);

/// Exact KNN-Shapley values of `train` for one labelled query point, by the
/// recursion over neighbours sorted by distance (ties by row index).
std::vector<double> knn_shapley_point(const Matrix& train_x, std::span<const int> train_y,
                                      std::span<const double> query, int query_label, std::size_t k);

/// Per-record value averaged over all other records used as query points
/// (each record is left out of its own query).
std::vector<double> knn_shapley(const Matrix& x, std::span<const int> y, std::size_t k);

/// 1 - mean(max(v, 0) / max positive value); 1 when no value is positive.
double shapr_privacy(std::span<const double> values);

/// Space in which SHAPr measures neighbour distance.
enum class Embedding { kPredictions, kFeatures };

struct PrivacyConfig {
  std::size_t mi_rows_per_side = 0;  // 0: min(|train|, |test|)
  std::size_t knn_k = 5;
  Embedding embedding = Embedding::kPredictions;
};

struct PrivacyRecord {
  double attack_accuracy = 0.5;
  double mi_privacy = 1.0;
  double shapr_privacy = 1.0;
  std::vector<double> record_values;
  std::vector<std::string> flags;
};

PrivacyRecord evaluate_privacy(const models::ClassifierHandle& handle, const data::LabeledData& train,
                               const data::LabeledData& test, const PrivacyConfig& config,
                               std::uint64_t seed);

/// Mean of the two privacy scores.
double privacy_dimension(const PrivacyRecord& record);

}  // namespace mirai::privacy
