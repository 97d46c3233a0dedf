#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirai/common.hpp"

namespace mirai::data {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 parser: comma separated, double-quoted fields with "" escapes,
/// LF or CRLF line endings. The first record is the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Column roles for ingestion. Columns not named here are numeric features.
struct Schema {
  std::string label;
  std::optional<std::string> sensitive;
  bool sensitive_as_feature = true;
  std::vector<std::string> categorical;
  std::vector<std::string> drop;
};

struct TabularDataset {
  std::string name;
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  // Group code per row (index into sensitive_levels); empty without a sensitive column.
  std::vector<int> sensitive;
  std::vector<std::string> sensitive_levels;
  std::string sensitive_column;
  // True for numeric feature columns (standardized), false for one-hot columns.
  std::vector<bool> numeric;
  // Rows rejected for containing missing cells.
  std::size_t dropped_rows = 0;

  std::size_t n_samples() const noexcept { return features.rows(); }
  std::size_t n_features() const noexcept { return features.cols(); }

  /// Throws DataError when a structural invariant is broken.
  void validate() const;
};

TabularDataset ingest_table(const CsvTable& table, const Schema& schema, std::string name);
TabularDataset ingest_csv(const std::filesystem::path& path, const Schema& schema);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

SplitIndices split(const TabularDataset& ds, const SplitSpec& spec);

/// z-score parameters estimated on a subset of rows. Constant columns get
/// scale 1; one-hot columns are left untouched.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const TabularDataset& ds, std::span<const std::size_t> rows);
  void apply(TabularDataset& ds) const;
};

struct SensitiveSpec {
  std::string column;
  std::string privileged;
  std::string unprivileged;
};

struct GroupPartition {
  std::vector<std::size_t> privileged;
  std::vector<std::size_t> unprivileged;
  std::size_t excluded = 0;
};

/// Partition of `rows` (or all rows) by sensitive value. Returned indices are
/// positions within `rows`, so they address the corresponding subset arrays.
GroupPartition group_partition(const TabularDataset& ds, const SensitiveSpec& spec);
GroupPartition group_partition(const TabularDataset& ds, const SensitiveSpec& spec,
                               std::span<const std::size_t> rows);
/// Same partition over a bare vector of group codes.
GroupPartition group_partition(std::span<const int> groups, int privileged_code,
                               int unprivileged_code);

/// Features, labels and group codes of one split.
struct LabeledData {
  Matrix x;
  std::vector<int> y;
  std::vector<int> group;

  std::size_t size() const noexcept { return x.rows(); }
};

LabeledData subset(const TabularDataset& ds, std::span<const std::size_t> rows);

/// Ingested, split, and train-standardized data ready for model training.
struct PreparedData {
  TabularDataset dataset;
  SplitIndices indices;
  Standardizer standardizer;
  LabeledData train;
  LabeledData test;
  int privileged_code = -1;
  int unprivileged_code = -1;
};

PreparedData prepare(const std::filesystem::path& path, const Schema& schema,
                     const SplitSpec& split_spec, const std::optional<SensitiveSpec>& sensitive);

int level_code(const TabularDataset& ds, const std::string& value);

}  // namespace mirai::data
