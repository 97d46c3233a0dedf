#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mirai/config.hpp"
#include "mirai/data.hpp"
#include "mirai/models.hpp"
#include "mirai/privacy.hpp"
#include "mirai/robust.hpp"
#include "mirai/scoring.hpp"
#include "mirai/xai.hpp"

namespace mirai::pipeline {

/// Data split plus the trained or attached model handles, in config order.
struct Cohort {
  data::PreparedData data;
  std::vector<models::ClassifierHandle> handles;
};

data::PreparedData prepare_data(const config::RunConfig& config);

/// Trains every built-in model and attaches every external one.
Cohort build_cohort(const config::RunConfig& config);

/// Per-model artifacts that are written next to the report.
struct ModelArtifacts {
  xai::XaiEvaluation explanations;
  robust::HsjaScore attack;
  privacy::PrivacyRecord privacy;
};

struct RunResult {
  scoring::MiraiReport report;
  std::vector<ModelArtifacts> artifacts;  // config order
  std::vector<std::string> feature_names;
};

using Progress = std::function<void(const std::string&)>;

/// Evaluates all five dimensions for every model (in parallel over models),
/// normalizes the cost metrics across the cohort, and assembles the report.
RunResult evaluate(const config::RunConfig& config, const Cohort& cohort, const Progress& progress = {});

/// prepare + build + evaluate.
RunResult run(const config::RunConfig& config, const Progress& progress = {});

/// report.json, report.md, report.txt and per-model CSV artifacts. Returns the JSON path.
std::filesystem::path write_outputs(const config::RunConfig& config, const RunResult& result);

}  // namespace mirai::pipeline
