#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <unistd.h>

#include "mirai/models.hpp"

namespace mirai::models {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kDecisionTree:
      return "decision_tree";
    case Family::kGradientBoostedTrees:
      return "gradient_boosted_trees";
    case Family::kLinearMaxMargin:
      return "linear_max_margin";
    case Family::kMlp:
      return "mlp";
    case Family::kExternal:
      return "external";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::kDecisionTree, Family::kGradientBoostedTrees, Family::kLinearMaxMargin,
                   Family::kMlp, Family::kExternal}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

ClassifierHandle::ClassifierHandle(std::string model_id, std::shared_ptr<const Model> model,
                                   double train_time_seconds)
    : model_id_(std::move(model_id)), model_(std::move(model)),
      train_time_seconds_(train_time_seconds) {
  if (!model_) throw std::invalid_argument("ClassifierHandle: null model");
}

std::optional<ResourceInfo> ClassifierHandle::resource_info() const {
  if (declared_) return declared_;
  return model_->resource_info();
}

std::vector<double> ClassifierHandle::predict_proba(const Matrix& x) const {
  std::vector<double> p = model_->predict_proba(x);
  queries_->fetch_add(x.rows(), std::memory_order_relaxed);
  if (p.size() != x.rows()) {
    throw MetricError("model '" + model_id_ + "' returned " + std::to_string(p.size()) +
                      " probabilities for " + std::to_string(x.rows()) + " rows");
  }
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw MetricError("model '" + model_id_ + "' returned a probability outside [0,1]");
    }
  }
  return p;
}

double ClassifierHandle::predict_one(std::span<const double> row) const {
  return predict_proba(Matrix::from_row(row)).front();
}

// ---------------------------------------------------------------------------

std::vector<double> FunctionModel::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = fn_(x.row(r));
  return out;
}

ClassifierHandle make_function_handle(std::string model_id, FunctionModel::Fn fn, Family family) {
  return ClassifierHandle(std::move(model_id), std::make_shared<FunctionModel>(std::move(fn), family));
}

// ---------------------------------------------------------------------------

std::vector<double> parse_probabilities(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) {
      if (end == text.size()) break;
      continue;
    }
    line.erase(0, first);
    char* stop = nullptr;
    errno = 0;
    const double v = std::strtod(line.c_str(), &stop);
    if (stop == line.c_str() || *stop != '\0' || errno == ERANGE) {
      throw DataError("unparseable probability '" + line + "' on line " + std::to_string(line_no));
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError("probability outside [0,1] on line " + std::to_string(line_no));
    }
    out.push_back(v);
    if (end == text.size()) break;
  }
  return out;
}

std::vector<double> read_probability_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prediction file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_probabilities(buf.str());
}

ExternalCommandModel::ExternalCommandModel(std::string command,
                                           std::vector<std::string> feature_names,
                                           std::filesystem::path scratch_dir)
    : command_(std::move(command)), feature_names_(std::move(feature_names)),
      scratch_dir_(std::move(scratch_dir)) {
  if (command_.empty()) throw ConfigError("external model: empty command");
}

std::vector<double> ExternalCommandModel::predict_proba(const Matrix& x) const {
  static std::atomic<std::uint64_t> counter{0};
  const auto path = scratch_dir_ / ("mirai-ext-" + std::to_string(::getpid()) + "-" +
                                    std::to_string(counter.fetch_add(1)) + ".csv");
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t j = 0; j < feature_names_.size(); ++j) {
      out << (j ? "," : "") << feature_names_[j];
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << x(r, j);
      out << '\n';
    }
  }
  std::string cmd = command_;
  const std::string quoted = "'" + path.string() + "'";
  if (auto at = cmd.find("{input}"); at != std::string::npos) {
    cmd.replace(at, 7, quoted);
  } else {
    cmd += " " + quoted;
  }
  std::string output;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(path);
    throw MetricError("cannot start external model command");
  }
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (status != 0) {
    throw MetricError("external model command exited with status " + std::to_string(status));
  }
  std::vector<double> p;
  try {
    p = parse_probabilities(output);
  } catch (const DataError& e) {
    throw MetricError(std::string("external model output: ") + e.what());
  }
  if (p.size() != x.rows()) {
    throw MetricError("external model returned " + std::to_string(p.size()) +
                      " probabilities for " + std::to_string(x.rows()) + " rows");
  }
  return p;
}

PredictionTableModel::PredictionTableModel(const Matrix& rows, std::vector<double> probabilities) {
  if (rows.rows() != probabilities.size()) {
    throw DataError("prediction file has " + std::to_string(probabilities.size()) +
                    " probabilities for " + std::to_string(rows.rows()) + " rows");
  }
  entries_.reserve(rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    if (!(probabilities[r] >= 0.0 && probabilities[r] <= 1.0)) {
      throw DataError("prediction file: probability outside [0,1]", r);
    }
    entries_.emplace_back(std::vector<double>(rows.row(r).begin(), rows.row(r).end()),
                          probabilities[r]);
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].first == entries_[i - 1].first && entries_[i].second != entries_[i - 1].second) {
      throw DataError("prediction file assigns different probabilities to identical rows");
    }
  }
}

std::vector<double> PredictionTableModel::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows());
  std::vector<double> key;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    key.assign(x.row(r).begin(), x.row(r).end());
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const auto& e, const std::vector<double>& k) { return e.first < k; });
    if (it == entries_.end() || it->first != key) {
      throw MetricError("prediction file cannot answer a query for an unseen row");
    }
    out[r] = it->second;
  }
  return out;
}

ClassifierHandle attach_external_command(std::string model_id, std::string command,
                                         std::vector<std::string> feature_names,
                                         std::optional<ResourceInfo> declared) {
  ClassifierHandle h(std::move(model_id),
                     std::make_shared<ExternalCommandModel>(std::move(command), std::move(feature_names)));
  if (declared) h.declare_resource_info(*declared);
  return h;
}

ClassifierHandle attach_external_predictions(std::string model_id,
                                             const std::filesystem::path& prediction_file,
                                             const Matrix& rows,
                                             std::optional<ResourceInfo> declared) {
  ClassifierHandle h(std::move(model_id), std::make_shared<PredictionTableModel>(
                                              rows, read_probability_file(prediction_file)));
  if (declared) h.declare_resource_info(*declared);
  return h;
}

// ---------------------------------------------------------------------------

PredictiveScores accuracy_f1(std::span<const int> y_true, std::span<const double> probabilities) {
  if (y_true.size() != probabilities.size()) throw std::invalid_argument("accuracy_f1: size mismatch");
  if (y_true.empty()) return {};
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int pred = hard_label(probabilities[i]);
    correct += pred == y_true[i];
    tp += pred == 1 && y_true[i] == 1;
    fp += pred == 1 && y_true[i] == 0;
    fn += pred == 0 && y_true[i] == 1;
  }
  const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  return {static_cast<double>(correct) / static_cast<double>(y_true.size()), f1};
}

PredictiveScores accuracy_f1(const ClassifierHandle& handle, const data::LabeledData& test) {
  return accuracy_f1(test.y, handle.predict_proba(test.x));
}

}  // namespace mirai::models
