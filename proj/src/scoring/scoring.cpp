#include <algorithm>
#include <cmath>
#include <map>

#include "mirai/scoring.hpp"

namespace mirai::scoring {

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kExplainability:
      return "explainability";
    case Dimension::kFairness:
      return "fairness";
    case Dimension::kSustainability:
      return "sustainability";
    case Dimension::kRobustness:
      return "robustness";
    case Dimension::kPrivacy:
      return "privacy";
  }
  return "unknown";
}

Dimension parse_dimension(std::string_view name) {
  for (Dimension d : kAllDimensions) {
    if (dimension_name(d) == name) return d;
  }
  throw ConfigError("unknown dimension '" + std::string(name) + "'");
}

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kHigherBetter:
      return "higher_better";
    case Direction::kLowerBetter:
      return "lower_better";
    case Direction::kCohortCost:
      return "cohort_cost";
  }
  return "unknown";
}

Direction parse_direction(std::string_view name) {
  for (Direction d : {Direction::kHigherBetter, Direction::kLowerBetter, Direction::kCohortCost}) {
    if (direction_name(d) == name) return d;
  }
  throw ConfigError("unknown metric direction '" + std::string(name) + "'");
}

MetricRecord align(std::string name, Dimension dimension, double raw, Direction direction,
                   std::string subcategory) {
  if (std::isnan(raw)) throw MetricError("metric '" + name + "' is NaN");
  if (direction == Direction::kCohortCost) {
    throw std::invalid_argument("align: cohort costs are aligned across the cohort");
  }
  MetricRecord r{std::move(name), dimension, std::move(subcategory), raw, 0.0, direction, {}};
  if (raw < 0.0 || raw > 1.0) {
    r.flags.push_back("clamped");
    r.raw = clamp01(raw);
  }
  r.aligned = direction == Direction::kLowerBetter ? 1.0 - r.raw : r.raw;
  return r;
}

MetricRecord cohort_record(std::string name, Dimension dimension, double raw, double aligned) {
  if (std::isnan(raw) || std::isnan(aligned)) throw MetricError("metric '" + name + "' is NaN");
  MetricRecord r{std::move(name), dimension, {}, raw, clamp01(aligned), Direction::kCohortCost, {}};
  if (aligned < 0.0 || aligned > 1.0) r.flags.push_back("clamped");
  return r;
}

WeightVector WeightVector::normalized(std::array<double, kDimensions> raw, std::string* warning) {
  double total = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("weights must be finite and non-negative");
    total += v;
  }
  if (!(total > 0.0)) throw ConfigError("weights must not all be zero");
  WeightVector out;
  for (std::size_t i = 0; i < kDimensions; ++i) out.w[i] = raw[i] / total;
  if (warning && std::abs(total - 1.0) > 1e-12) {
    *warning = "weights summed to " + std::to_string(total) + "; normalized to 1";
  }
  return out;
}

double aggregate(Dimension dimension, std::span<const MetricRecord> metrics) {
  if (metrics.empty()) throw MetricError("dimension '" + std::string(dimension_name(dimension)) + "' has no metrics");
  if (dimension != Dimension::kExplainability) {
    double total = 0.0;
    for (const auto& m : metrics) total += m.aligned;
    return total / static_cast<double>(metrics.size());
  }
  // Two-level mean, subcategories in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> groups;
  for (const auto& m : metrics) {
    auto [it, inserted] = groups.try_emplace(m.subcategory, 0.0, 0);
    if (inserted) order.push_back(m.subcategory);
    it->second.first += m.aligned;
    it->second.second += 1;
  }
  double total = 0.0;
  for (const auto& name : order) {
    const auto& [sum, n] = groups[name];
    total += sum / static_cast<double>(n);
  }
  return total / static_cast<double>(order.size());
}

DimensionScore make_dimension(Dimension dimension, std::vector<MetricRecord> metrics) {
  const double score = aggregate(dimension, metrics);
  return {dimension, score, std::move(metrics)};
}

double mirai(std::span<const double, kDimensions> scores, const WeightVector& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < kDimensions; ++i) total += weights.w[i] * scores[i];
  return total;
}

std::array<double, kDimensions> ModelReport::scores() const {
  std::array<double, kDimensions> out{};
  for (std::size_t i = 0; i < kDimensions; ++i) out[i] = dimensions[i].score;
  return out;
}

Ranking rank_and_compare(std::span<const ModelReport> models, const std::string& target) {
  const auto t = std::find_if(models.begin(), models.end(),
                              [&](const ModelReport& m) { return m.model_id == target; });
  if (t == models.end()) throw ConfigError("target model '" + target + "' is not among the evaluated models");
  std::vector<const ModelReport*> sorted;
  for (const auto& m : models) sorted.push_back(&m);
  std::stable_sort(sorted.begin(), sorted.end(), [](const ModelReport* a, const ModelReport* b) {
    if (a->mirai != b->mirai) return a->mirai > b->mirai;
    if (a->f1 != b->f1) return a->f1 > b->f1;
    return a->model_id < b->model_id;
  });
  Ranking r;
  for (const auto* m : sorted) r.order.push_back(m->model_id);
  const auto target_scores = t->scores();
  for (const auto& m : models) {
    ModelDelta d{m.model_id, {}, m.mirai - t->mirai};
    const auto s = m.scores();
    for (std::size_t i = 0; i < kDimensions; ++i) d.dimension_deltas[i] = s[i] - target_scores[i];
    r.deltas.push_back(std::move(d));
  }
  return r;
}

}  // namespace mirai::scoring
