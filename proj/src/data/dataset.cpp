#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <unordered_map>

#include "mirai/data.hpp"

namespace mirai::data {

namespace {

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "?" || cell == "NA" || cell == "N/A";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, const std::string& column, std::size_t row) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw DataError("unparseable value '" + cell + "' in column '" + column + "'", row);
  }
  if (!std::isfinite(v)) {
    throw DataError("non-finite value '" + cell + "' in column '" + column + "'", row);
  }
  return v;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw DataError("schema error: missing column '" + name + "'");
  return static_cast<std::size_t>(it - table.header.begin());
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

void TabularDataset::validate() const {
  const std::size_t n = features.rows();
  if (labels.size() != n) throw DataError("dataset: label count does not match feature rows");
  if (!sensitive.empty() && sensitive.size() != n) {
    throw DataError("dataset: sensitive count does not match feature rows");
  }
  if (feature_names.size() != features.cols()) {
    throw DataError("dataset: feature name count does not match columns");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("label error: non-binary label", i);
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
  }
}

TabularDataset ingest_table(const CsvTable& table, const Schema& schema, std::string name) {
  const std::size_t label_col = column_index(table, schema.label);
  std::optional<std::size_t> sensitive_col;
  if (schema.sensitive) sensitive_col = column_index(table, *schema.sensitive);
  for (const auto& c : schema.categorical) column_index(table, c);
  for (const auto& c : schema.drop) column_index(table, c);

  struct FeatureColumn {
    std::size_t source;
    bool categorical;
  };
  std::vector<FeatureColumn> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (c == label_col || contains(schema.drop, h)) continue;
    if (sensitive_col && c == *sensitive_col && !schema.sensitive_as_feature) continue;
    const bool categorical =
        contains(schema.categorical, h) || (sensitive_col && c == *sensitive_col);
    columns.push_back({c, categorical});
  }

  // Reject rows with missing cells in any used column before encoding, so
  // category order only reflects rows that survive.
  std::vector<std::size_t> kept;
  TabularDataset ds;
  ds.name = std::move(name);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    bool missing = is_missing(trim(row[label_col])) ||
                   (sensitive_col && is_missing(trim(row[*sensitive_col])));
    for (const auto& col : columns) missing = missing || is_missing(trim(row[col.source]));
    if (missing) {
      ++ds.dropped_rows;
    } else {
      kept.push_back(r);
    }
  }

  // Category levels in first-occurrence order.
  std::vector<std::vector<std::string>> levels(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (!columns[k].categorical) continue;
    for (std::size_t r : kept) {
      const std::string cell = trim(table.rows[r][columns[k].source]);
      if (!contains(levels[k], cell)) levels[k].push_back(cell);
    }
  }

  for (std::size_t k = 0; k < columns.size(); ++k) {
    const std::string& h = table.header[columns[k].source];
    if (columns[k].categorical) {
      for (const auto& level : levels[k]) {
        ds.feature_names.push_back(h + "=" + level);
        ds.numeric.push_back(false);
      }
    } else {
      ds.feature_names.push_back(h);
      ds.numeric.push_back(true);
    }
  }

  if (sensitive_col) ds.sensitive_column = *schema.sensitive;
  const std::size_t width = ds.feature_names.size();
  std::vector<double> values;
  values.reserve(kept.size() * width);
  for (std::size_t r : kept) {
    const auto& row = table.rows[r];
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const std::string cell = trim(row[columns[k].source]);
      if (columns[k].categorical) {
        for (const auto& level : levels[k]) values.push_back(level == cell ? 1.0 : 0.0);
      } else {
        values.push_back(parse_number(cell, table.header[columns[k].source], r));
      }
    }
    const double label = parse_number(trim(row[label_col]), schema.label, r);
    if (label != 0.0 && label != 1.0) {
      throw DataError("label error: value '" + trim(row[label_col]) + "' is not 0 or 1", r);
    }
    ds.labels.push_back(static_cast<int>(label));
    if (sensitive_col) {
      const std::string cell = trim(row[*sensitive_col]);
      auto it = std::find(ds.sensitive_levels.begin(), ds.sensitive_levels.end(), cell);
      if (it == ds.sensitive_levels.end()) {
        ds.sensitive_levels.push_back(cell);
        it = ds.sensitive_levels.end() - 1;
      }
      ds.sensitive.push_back(static_cast<int>(it - ds.sensitive_levels.begin()));
    }
  }
  ds.features = Matrix(kept.size(), width, std::move(values));
  ds.validate();
  return ds;
}

TabularDataset ingest_csv(const std::filesystem::path& path, const Schema& schema) {
  return ingest_table(read_csv(path), schema, path.stem().string());
}

SplitIndices split(const TabularDataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0,1)");
  }
  Rng rng(spec.seed);
  SplitIndices out;
  auto take = [&](std::vector<std::size_t> pool) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(pool.size())));
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + n_train);
    out.test.insert(out.test.end(), pool.begin() + n_train, pool.end());
  };
  if (spec.stratified) {
    std::vector<std::size_t> negatives, positives;
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
      (ds.labels[i] == 1 ? positives : negatives).push_back(i);
    }
    take(std::move(negatives));
    take(std::move(positives));
  } else {
    std::vector<std::size_t> all(ds.n_samples());
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());

  std::size_t train_pos = 0;
  for (std::size_t i : out.train) train_pos += ds.labels[i];
  if (train_pos == 0 || train_pos == out.train.size()) {
    throw DataError("split: training split is missing a class");
  }
  if (out.test.empty()) throw DataError("split: test split is empty");
  return out;
}

Standardizer Standardizer::fit(const TabularDataset& ds, std::span<const std::size_t> rows) {
  const std::size_t d = ds.n_features();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  if (rows.empty()) return s;
  for (std::size_t j = 0; j < d; ++j) {
    if (!ds.numeric[j]) continue;
    double sum = 0.0;
    for (std::size_t r : rows) sum += ds.features(r, j);
    const double m = sum / static_cast<double>(rows.size());
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double dv = ds.features(r, j) - m;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
    s.mean[j] = m;
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply(TabularDataset& ds) const {
  for (std::size_t r = 0; r < ds.n_samples(); ++r) {
    auto row = ds.features.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
  }
}

int level_code(const TabularDataset& ds, const std::string& value) {
  auto it = std::find(ds.sensitive_levels.begin(), ds.sensitive_levels.end(), value);
  if (it == ds.sensitive_levels.end()) return -1;
  return static_cast<int>(it - ds.sensitive_levels.begin());
}

GroupPartition group_partition(std::span<const int> groups, int privileged_code,
                               int unprivileged_code) {
  GroupPartition p;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == privileged_code) {
      p.privileged.push_back(i);
    } else if (groups[i] == unprivileged_code) {
      p.unprivileged.push_back(i);
    } else {
      ++p.excluded;
    }
  }
  if (p.privileged.empty() || p.unprivileged.empty()) {
    throw DataError("fairness-degenerate: a sensitive group partition is empty");
  }
  return p;
}

GroupPartition group_partition(const TabularDataset& ds, const SensitiveSpec& spec,
                               std::span<const std::size_t> rows) {
  if (ds.sensitive.empty() || spec.column != ds.sensitive_column) {
    throw ConfigError("sensitive column '" + spec.column + "' is not the dataset's sensitive column");
  }
  if (spec.privileged == spec.unprivileged) {
    throw ConfigError("privileged and unprivileged values must differ");
  }
  const int priv = level_code(ds, spec.privileged);
  const int unpriv = level_code(ds, spec.unprivileged);
  if (priv < 0) throw DataError("fairness-degenerate: privileged value '" + spec.privileged + "' absent");
  if (unpriv < 0) {
    throw DataError("fairness-degenerate: unprivileged value '" + spec.unprivileged + "' absent");
  }
  std::vector<int> groups(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) groups[i] = ds.sensitive[rows[i]];
  return group_partition(groups, priv, unpriv);
}

GroupPartition group_partition(const TabularDataset& ds, const SensitiveSpec& spec) {
  std::vector<std::size_t> all(ds.n_samples());
  std::iota(all.begin(), all.end(), 0);
  return group_partition(ds, spec, all);
}

LabeledData subset(const TabularDataset& ds, std::span<const std::size_t> rows) {
  LabeledData out;
  out.x = ds.features.select_rows(rows);
  out.y.reserve(rows.size());
  for (std::size_t r : rows) out.y.push_back(ds.labels[r]);
  if (!ds.sensitive.empty()) {
    for (std::size_t r : rows) out.group.push_back(ds.sensitive[r]);
  }
  return out;
}

PreparedData prepare(const std::filesystem::path& path, const Schema& schema,
                     const SplitSpec& split_spec, const std::optional<SensitiveSpec>& sensitive) {
  PreparedData p;
  p.dataset = ingest_csv(path, schema);
  p.indices = split(p.dataset, split_spec);
  p.standardizer = Standardizer::fit(p.dataset, p.indices.train);
  p.standardizer.apply(p.dataset);
  p.train = subset(p.dataset, p.indices.train);
  p.test = subset(p.dataset, p.indices.test);
  if (sensitive) {
    if (sensitive->column != p.dataset.sensitive_column) {
      throw ConfigError("sensitive column '" + sensitive->column +
                        "' must match the schema's sensitive column");
    }
    p.privileged_code = level_code(p.dataset, sensitive->privileged);
    p.unprivileged_code = level_code(p.dataset, sensitive->unprivileged);
    if (p.privileged_code < 0 || p.unprivileged_code < 0) {
      throw DataError("fairness-degenerate: sensitive value absent from dataset");
    }
    if (p.privileged_code == p.unprivileged_code) {
      throw ConfigError("privileged and unprivileged values must differ");
    }
  }
  return p;
}

}  // namespace mirai::data
