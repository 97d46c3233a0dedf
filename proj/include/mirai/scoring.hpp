#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mirai/common.hpp"

namespace mirai::scoring {

enum class Dimension { kExplainability, kFairness, kSustainability, kRobustness, kPrivacy };
inline constexpr std::size_t kDimensions = 5;
inline constexpr std::array<Dimension, kDimensions> kAllDimensions{
    Dimension::kExplainability, Dimension::kFairness, Dimension::kSustainability,
    Dimension::kRobustness, Dimension::kPrivacy};

std::string_view dimension_name(Dimension d);
Dimension parse_dimension(std::string_view name);

enum class Direction { kHigherBetter, kLowerBetter, kCohortCost };

std::string_view direction_name(Direction d);
Direction parse_direction(std::string_view name);

struct MetricRecord {
  std::string name;
  Dimension dimension = Dimension::kExplainability;
  std::string subcategory;  // empty when the dimension has none
  double raw = 0.0;
  double aligned = 0.0;
  Direction direction = Direction::kHigherBetter;
  std::vector<std::string> flags;

  bool operator==(const MetricRecord&) const = default;
};

/// Direction alignment for bounded metrics. Raw values outside [0,1] are
/// clamped and flagged; NaN throws MetricError naming the metric.
MetricRecord align(std::string name, Dimension dimension, double raw, Direction direction,
                   std::string subcategory = {});
/// Record for a cohort-normalized cost metric whose aligned value is already known.
MetricRecord cohort_record(std::string name, Dimension dimension, double raw, double aligned);

struct WeightVector {
  std::array<double, kDimensions> w{0.2, 0.2, 0.2, 0.2, 0.2};

  /// Normalizes to sum 1. Returns a warning when the input did not already
  /// sum to 1; throws ConfigError on negative, non-finite, or all-zero weights.
  static WeightVector normalized(std::array<double, kDimensions> raw, std::string* warning = nullptr);
  double operator[](Dimension d) const { return w[static_cast<std::size_t>(d)]; }
  bool operator==(const WeightVector&) const = default;
};

struct DimensionScore {
  Dimension dimension = Dimension::kExplainability;
  double score = 0.0;
  std::vector<MetricRecord> metrics;

  bool operator==(const DimensionScore&) const = default;
};

/// Aggregate of a dimension's aligned metrics: the plain mean, or for
/// explainability the mean of subcategory means.
double aggregate(Dimension dimension, std::span<const MetricRecord> metrics);
DimensionScore make_dimension(Dimension dimension, std::vector<MetricRecord> metrics);

/// Weighted sum of the five dimension scores.
double mirai(std::span<const double, kDimensions> scores, const WeightVector& weights);

struct ModelReport {
  std::string model_id;
  std::string family;
  std::array<DimensionScore, kDimensions> dimensions;
  double mirai = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::vector<std::string> flags;
  // Diagnostics that do not enter any score (attack accuracy, query counts, ...).
  std::map<std::string, double> details;

  std::array<double, kDimensions> scores() const;
  bool operator==(const ModelReport&) const = default;
};

struct ModelDelta {
  std::string model_id;
  std::array<double, kDimensions> dimension_deltas{};
  double mirai_delta = 0.0;

  bool operator==(const ModelDelta&) const = default;
};

struct Ranking {
  std::vector<std::string> order;
  std::vector<ModelDelta> deltas;  // configured model order

  bool operator==(const Ranking&) const = default;
};

/// Sort by MIRAI descending, ties by F1 descending then id; deltas are
/// model minus target. Throws ConfigError when the target is absent.
Ranking rank_and_compare(std::span<const ModelReport> models, const std::string& target);

struct MiraiReport {
  std::string target_model;
  WeightVector weights;
  std::vector<ModelReport> models;
  Ranking ranking;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json config;    // effective configuration
  nlohmann::json run_info;  // timestamp, wall time; excluded from the determinism hash
  bool warnings = false;

  bool operator==(const MiraiReport&) const = default;
};

nlohmann::json to_json(const MiraiReport& report);
MiraiReport from_json(const nlohmann::json& doc);

/// FNV-1a over the serialized report without run_info.
std::string determinism_hash(const MiraiReport& report);

enum class TableFormat { kMarkdown, kPlain };

/// Dimensions as header rows, one column per model; lower-is-better metrics
/// carry an asterisk. Best value per row is bold (markdown) or "(1)" (plain),
/// second best underlined or "(2)".
std::string render_table(const MiraiReport& report, TableFormat format);

void write_json(const std::filesystem::path& path, const MiraiReport& report);
MiraiReport read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mirai::scoring
