#include "mirai/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mirai::fairness {

namespace {

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
  degenerate = den == 0;
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

RateStats stats_of(std::span<const int> y_true, std::span<const int> y_pred,
                   std::span<const std::size_t> rows, const char* group) {
  if (rows.empty()) {
    throw MetricError(std::string("fairness-degenerate: ") + group + " group is empty");
  }
  std::vector<int> t, p;
  t.reserve(rows.size());
  p.reserve(rows.size());
  for (std::size_t r : rows) {
    t.push_back(y_true[r]);
    p.push_back(y_pred[r]);
  }
  return rate_stats(t, p);
}

}  // namespace

RateStats rate_stats(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("rate_stats: size mismatch");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_pred[i] == 1) {
      (y_true[i] == 1 ? tp : fp) += 1;
    } else {
      (y_true[i] == 1 ? fn : tn) += 1;
    }
  }
  RateStats s;
  s.n = y_true.size();
  bool unused = false;
  s.accuracy = ratio(tp + tn, s.n, unused);
  s.selection_rate = ratio(tp + fp, s.n, unused);
  s.precision = ratio(tp, tp + fp, s.precision_degenerate);
  s.tpr = ratio(tp, tp + fn, s.tpr_degenerate);
  s.fpr = ratio(fp, fp + tn, s.fpr_degenerate);
  return s;
}

GroupStats group_stats(std::span<const int> y_true, std::span<const int> y_pred,
                       const data::GroupPartition& partition) {
  if (y_true.size() != y_pred.size()) throw std::invalid_argument("group_stats: size mismatch");
  return {stats_of(y_true, y_pred, partition.privileged, "privileged"),
          stats_of(y_true, y_pred, partition.unprivileged, "unprivileged")};
}

std::vector<std::pair<std::string, double>> FairnessRecord::named() const {
  return {{"accuracy_diff", accuracy_diff},
          {"precision_diff", precision_diff},
          {"tpr_diff", tpr_diff},
          {"fpr_diff", fpr_diff},
          {"demographic_parity_diff", demographic_parity_diff},
          {"equalized_odds_diff", equalized_odds_diff}};
}

FairnessRecord disparities(const GroupStats& stats) {
  const RateStats& a = stats.privileged;
  const RateStats& b = stats.unprivileged;
  FairnessRecord r;
  auto diff = [&](double x, double y, bool degenerate, const char* name) {
    if (degenerate) {
      r.flags.push_back(std::string("degenerate:") + name);
      return 0.0;
    }
    return std::abs(x - y);
  };
  r.accuracy_diff = std::abs(a.accuracy - b.accuracy);
  r.precision_diff = diff(a.precision, b.precision, a.precision_degenerate || b.precision_degenerate,
                          "precision_diff");
  r.tpr_diff = diff(a.tpr, b.tpr, a.tpr_degenerate || b.tpr_degenerate, "tpr_diff");
  r.fpr_diff = diff(a.fpr, b.fpr, a.fpr_degenerate || b.fpr_degenerate, "fpr_diff");
  r.demographic_parity_diff = std::abs(a.selection_rate - b.selection_rate);
  r.equalized_odds_diff = std::max(r.tpr_diff, r.fpr_diff);
  return r;
}

double fairness_dimension(const FairnessRecord& record) {
  double total = 0.0;
  const auto values = record.named();
  for (const auto& [name, raw] : values) total += 1.0 - raw;
  return total / static_cast<double>(values.size());
}

}  // namespace mirai::fairness
