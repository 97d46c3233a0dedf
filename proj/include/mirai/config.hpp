#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mirai/data.hpp"
#include "mirai/models.hpp"
#include "mirai/privacy.hpp"
#include "mirai/robust.hpp"
#include "mirai/scoring.hpp"
#include "mirai/sustain.hpp"
#include "mirai/xai.hpp"

namespace mirai::config {

struct ModelSpec {
  std::string id;
  models::Family family = models::Family::kDecisionTree;
  nlohmann::json params = nlohmann::json::object();
  // External models: a batch command, or a file of precomputed probabilities
  // (one per dataset row, in file order).
  std::string command;
  std::filesystem::path predictions;
  std::optional<models::ResourceInfo> resources;
};

enum class RuntimeMode { kModeled, kMeasured };

struct SustainConfig {
  sustain::PowerProfile power;
  sustain::EmissionConstants emissions;
  RuntimeMode runtime = RuntimeMode::kModeled;
  double throughput_flops_per_second = 1e10;
};

struct OutputConfig {
  std::filesystem::path dir;
  bool attributions = true;
  bool attack_log = true;
  bool privacy_risk = true;
};

struct RunConfig {
  std::filesystem::path source;  // config file, empty when built in memory
  std::uint64_t seed = 0;
  std::string dataset_name;
  std::filesystem::path dataset_path;
  data::Schema schema;
  data::SplitSpec split;
  data::SensitiveSpec sensitive;
  std::vector<ModelSpec> models;
  std::string target_model;
  scoring::WeightVector weights;
  xai::XaiConfig xai;
  robust::AttackBudget attack;
  robust::DriftLadder drift;
  privacy::PrivacyConfig privacy;
  SustainConfig sustain;
  OutputConfig output;
  std::size_t workers = 1;
  std::vector<std::string> warnings;
};

/// Parses and validates a config document. Relative paths resolve against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json read_config_json(const std::filesystem::path& path);

/// Throws ConfigError when a cross-field invariant is broken (target among
/// models, at least two models, unique ids, ...).
void validate(const RunConfig& config);

/// Effective configuration with every default filled in and absolute paths.
/// Parsing the echo reproduces the same RunConfig (except `workers`, which
/// does not influence results).
nlohmann::json echo(const RunConfig& config);

/// FNV-1a of the serialized echo, hex.
std::string config_hash(const RunConfig& config);

}  // namespace mirai::config

namespace mirai::config {

// Typed hyperparameters of a built-in model spec; unknown keys are config errors.
models::TreeParams tree_params(const ModelSpec& spec);
models::GbtParams gbt_params(const ModelSpec& spec, std::uint64_t seed);
models::LinearMarginParams linear_params(const ModelSpec& spec, std::uint64_t seed);
models::MlpParams mlp_params(const ModelSpec& spec, std::uint64_t seed);

}  // namespace mirai::config
