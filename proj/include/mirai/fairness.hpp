#pragma once

#include <span>
#include <string>
#include <vector>

#include "mirai/data.hpp"

namespace mirai::fairness {

/// Confusion-matrix rates of one group. A rate whose denominator is zero is
/// stored as 0 and flagged degenerate.
struct RateStats {
  std::size_t n = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double selection_rate = 0.0;
  bool precision_degenerate = false;
  bool tpr_degenerate = false;
  bool fpr_degenerate = false;
};

struct GroupStats {
  RateStats privileged;
  RateStats unprivileged;
};

/// Rates of one group from parallel label and prediction arrays.
RateStats rate_stats(std::span<const int> y_true, std::span<const int> y_pred);

/// Per-group rates. Throws MetricError("fairness-degenerate ...") when a group is empty.
GroupStats group_stats(std::span<const int> y_true, std::span<const int> y_pred,
                       const data::GroupPartition& partition);

struct FairnessRecord {
  double accuracy_diff = 0.0;
  double precision_diff = 0.0;
  double tpr_diff = 0.0;
  double fpr_diff = 0.0;
  double demographic_parity_diff = 0.0;
  double equalized_odds_diff = 0.0;
  std::vector<std::string> flags;

  /// The six raw disparities in report order.
  std::vector<std::pair<std::string, double>> named() const;
};

FairnessRecord disparities(const GroupStats& stats);

/// Mean of (1 - raw) over the six disparities.
double fairness_dimension(const FairnessRecord& record);

}  // namespace mirai::fairness
