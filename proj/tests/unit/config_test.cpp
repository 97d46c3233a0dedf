#include <gtest/gtest.h>

#include "mirai/config.hpp"

namespace mirai::config {
namespace {

const std::filesystem::path kBundled = MIRAI_SOURCE_DIR "/configs/german_credit.json";

nlohmann::json bundled() { return read_config_json(kBundled); }

RunConfig parse(const nlohmann::json& doc) { return parse_config(doc, kBundled.parent_path()); }

TEST(Config, BundledParses) {
  const auto cfg = load_config(kBundled);
  EXPECT_EQ(cfg.models.size(), 4u);
  EXPECT_EQ(cfg.target_model, "mlp");
  EXPECT_EQ(cfg.sensitive.privileged, "male");
  EXPECT_TRUE(cfg.dataset_path.is_absolute());
  EXPECT_TRUE(std::filesystem::exists(cfg.dataset_path));
  EXPECT_EQ(cfg.attack.max_queries, 2000u);
  EXPECT_DOUBLE_EQ(cfg.weights[scoring::Dimension::kPrivacy], 0.2);
  EXPECT_EQ(mlp_params(cfg.models[3], cfg.seed).hidden_sizes, std::vector<int>{64});
}

TEST(Config, TargetMustBeAModel) {
  auto doc = bundled();
  doc["target_model"] = "missing";
  EXPECT_THROW(parse(doc), ConfigError);
}

TEST(Config, UnknownKeysAreRejected) {
  auto doc = bundled();
  doc["robustness"]["hsja"]["max_querys"] = 10;
  try {
    parse(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("max_querys"), std::string::npos);
  }
  doc = bundled();
  doc["models"][0]["params"]["depth_max"] = 3;
  EXPECT_THROW(tree_params(parse(doc).models[0]), ConfigError);
}

TEST(Config, NeedsTwoModels) {
  auto doc = bundled();
  doc["models"] = nlohmann::json::array({doc["models"][3]});
  EXPECT_THROW(parse(doc), ConfigError);
  doc = bundled();
  doc["models"][1]["id"] = "decision_tree";
  EXPECT_THROW(parse(doc), ConfigError);
}

TEST(Config, WeightsAreNormalizedWithWarning) {
  auto doc = bundled();
  doc["weights"] = {{"explainability", 1}, {"fairness", 1}, {"sustainability", 1},
                    {"robustness", 1}, {"privacy", 1}};
  const auto cfg = parse(doc);
  EXPECT_DOUBLE_EQ(cfg.weights[scoring::Dimension::kFairness], 0.2);
  EXPECT_FALSE(cfg.warnings.empty());
}

TEST(Config, EchoRoundTrip) {
  const auto cfg = load_config(kBundled);
  const auto e = echo(cfg);
  const auto again = parse_config(e, "/");
  EXPECT_EQ(echo(again), e);
  EXPECT_EQ(config_hash(again), config_hash(cfg));
  auto changed = bundled();
  changed["seed"] = 1;
  EXPECT_NE(config_hash(parse(changed)), config_hash(cfg));
  auto workers = bundled();
  workers["workers"] = 3;
  EXPECT_EQ(config_hash(parse(workers)), config_hash(cfg));
}

TEST(Config, ExternalModelNeedsOneSource) {
  auto doc = bundled();
  doc["models"].push_back({{"id", "ext"}, {"family", "external"}});
  EXPECT_THROW(parse(doc), ConfigError);
  doc["models"].back()["command"] = "cat";
  doc["models"].back()["resources"] = {{"parameter_count", 10}, {"macs_per_sample", 4}};
  const auto cfg = parse(doc);
  ASSERT_TRUE(cfg.models.back().resources.has_value());
  EXPECT_EQ(cfg.models.back().resources->flops_per_sample, 8);
}

}  // namespace
}  // namespace mirai::config
