#include "mirai/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace mirai::config {

using nlohmann::json;

namespace {

/// Typed access to one config object that rejects unknown keys.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in " + where_);
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError("missing key '" + key + "' in " + where_);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    try {
      return raw(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("key '" + key + "' in " + where_ + " has the wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  Section child(const std::string& key) {
    static const json empty = json::object();
    return Section(has(key) ? j_.at(key) : empty, where_ + "." + key);
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

ModelSpec parse_model(const json& j, std::size_t index, const std::filesystem::path& base) {
  Section s(j, "models[" + std::to_string(index) + "]");
  ModelSpec m;
  m.id = s.get<std::string>("id");
  require(!m.id.empty(), s.where() + ".id must not be empty");
  m.family = models::parse_family(s.get<std::string>("family"));
  if (s.has("params")) {
    m.params = s.raw("params");
    require(m.params.is_object(), s.where() + ".params must be an object");
  }
  m.command = s.get<std::string>("command", "");
  if (s.has("predictions")) m.predictions = resolve(base, s.get<std::string>("predictions"));
  if (s.has("resources")) {
    Section r = s.child("resources");
    m.resources = models::ResourceInfo::from_macs(r.get<std::int64_t>("parameter_count"),
                                                  r.get<std::int64_t>("macs_per_sample"));
    require(m.resources->parameter_count >= 0 && m.resources->macs_per_sample >= 0,
            s.where() + ".resources must be non-negative");
  }
  if (m.family == models::Family::kExternal) {
    require(m.command.empty() != m.predictions.empty(),
            s.where() + ": an external model needs exactly one of 'command' or 'predictions'");
  } else {
    require(m.command.empty() && m.predictions.empty(),
            s.where() + ": 'command' and 'predictions' apply to external models only");
  }
  return m;
}

}  // namespace

models::TreeParams tree_params(const ModelSpec& spec) {
  Section s(spec.params, "models." + spec.id + ".params");
  models::TreeParams p;
  p.max_depth = s.get<int>("max_depth", p.max_depth);
  p.min_leaf = s.get<std::size_t>("min_leaf", p.min_leaf);
  require(p.max_depth >= 1 && p.min_leaf >= 1, s.where() + ": max_depth and min_leaf must be >= 1");
  return p;
}

models::GbtParams gbt_params(const ModelSpec& spec, std::uint64_t seed) {
  Section s(spec.params, "models." + spec.id + ".params");
  models::GbtParams p;
  p.n_trees = s.get<int>("n_trees", p.n_trees);
  p.depth = s.get<int>("depth", p.depth);
  p.learning_rate = s.get<double>("learning_rate", p.learning_rate);
  p.lambda = s.get<double>("lambda", p.lambda);
  p.min_leaf = s.get<std::size_t>("min_leaf", p.min_leaf);
  p.subsample = s.get<double>("subsample", p.subsample);
  p.seed = seed;
  require(p.n_trees >= 1 && p.depth >= 1 && p.min_leaf >= 1, s.where() + ": sizes must be >= 1");
  require(p.learning_rate > 0.0 && p.lambda >= 0.0, s.where() + ": learning_rate > 0 and lambda >= 0");
  require(p.subsample > 0.0 && p.subsample <= 1.0, s.where() + ": subsample must be in (0,1]");
  return p;
}

models::LinearMarginParams linear_params(const ModelSpec& spec, std::uint64_t seed) {
  Section s(spec.params, "models." + spec.id + ".params");
  models::LinearMarginParams p;
  p.C = s.get<double>("C", p.C);
  p.epochs = s.get<int>("epochs", p.epochs);
  p.calibration_fraction = s.get<double>("calibration_fraction", p.calibration_fraction);
  p.seed = seed;
  require(p.C > 0.0 && p.epochs >= 1, s.where() + ": C > 0 and epochs >= 1");
  require(p.calibration_fraction > 0.0 && p.calibration_fraction < 1.0,
          s.where() + ": calibration_fraction must be in (0,1)");
  return p;
}

models::MlpParams mlp_params(const ModelSpec& spec, std::uint64_t seed) {
  Section s(spec.params, "models." + spec.id + ".params");
  models::MlpParams p;
  p.hidden_sizes = s.get<std::vector<int>>("hidden_sizes", p.hidden_sizes);
  p.epochs = s.get<int>("epochs", p.epochs);
  p.learning_rate = s.get<double>("learning_rate", p.learning_rate);
  p.momentum = s.get<double>("momentum", p.momentum);
  p.batch_size = s.get<std::size_t>("batch_size", p.batch_size);
  p.seed = seed;
  for (int h : p.hidden_sizes) require(h >= 1, s.where() + ": hidden sizes must be >= 1");
  require(p.epochs >= 1 && p.batch_size >= 1, s.where() + ": epochs and batch_size must be >= 1");
  require(p.learning_rate > 0.0 && p.momentum >= 0.0 && p.momentum < 1.0,
          s.where() + ": learning_rate > 0 and momentum in [0,1)");
  return p;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig c;
  {
    Section root(doc, "config");
    c.seed = root.get<std::uint64_t>("seed", 0);
    c.workers = root.get<std::size_t>("workers", 1);
    c.target_model = root.get<std::string>("target_model");

    Section ds = root.child("dataset");
    c.dataset_path = resolve(base_dir, ds.get<std::string>("path"));
    c.dataset_name = ds.get<std::string>("name", c.dataset_path.stem().string());
    c.schema.label = ds.get<std::string>("label");
    c.schema.categorical = ds.get<std::vector<std::string>>("categorical", {});
    c.schema.drop = ds.get<std::vector<std::string>>("drop", {});
    c.schema.sensitive_as_feature = ds.get<bool>("sensitive_as_feature", true);
    c.split.train_fraction = ds.get<double>("train_fraction", 0.8);
    c.split.stratified = ds.get<bool>("stratified", true);

    Section sens = root.child("sensitive");
    c.sensitive.column = sens.get<std::string>("column");
    c.sensitive.privileged = sens.get<std::string>("privileged");
    c.sensitive.unprivileged = sens.get<std::string>("unprivileged");
    c.schema.sensitive = c.sensitive.column;

    const json& models = root.raw("models");
    require(models.is_array(), "config.models must be an array");
    for (std::size_t i = 0; i < models.size(); ++i) c.models.push_back(parse_model(models[i], i, base_dir));

    if (root.has("weights")) {
      Section w = root.child("weights");
      std::array<double, scoring::kDimensions> raw{};
      for (scoring::Dimension d : scoring::kAllDimensions) {
        raw[static_cast<std::size_t>(d)] = w.get<double>(std::string(scoring::dimension_name(d)), 0.0);
      }
      std::string warning;
      c.weights = scoring::WeightVector::normalized(raw, &warning);
      if (!warning.empty()) c.warnings.push_back(warning);
    }

    Section x = root.child("explainability");
    c.xai.eval_rows = x.get<std::size_t>("eval_rows", c.xai.eval_rows);
    c.xai.background_rows = x.get<std::size_t>("background_rows", c.xai.background_rows);
    c.xai.shap_budget = x.get<std::size_t>("shap_budget", c.xai.shap_budget);
    c.xai.lipschitz_rows = x.get<std::size_t>("lipschitz_rows", c.xai.lipschitz_rows);
    c.xai.lipschitz_perturbations = x.get<std::size_t>("lipschitz_perturbations", c.xai.lipschitz_perturbations);
    c.xai.lipschitz_radius = x.get<double>("lipschitz_radius", c.xai.lipschitz_radius);
    c.xai.consistency_top_k = x.get<std::size_t>("consistency_top_k", c.xai.consistency_top_k);
    c.xai.faithfulness_subset_size = x.get<std::size_t>("faithfulness_subset_size", c.xai.faithfulness_subset_size);
    c.xai.faithfulness_draws = x.get<std::size_t>("faithfulness_draws", c.xai.faithfulness_draws);

    Section rob = root.child("robustness");
    Section h = rob.child("hsja");
    c.attack.max_queries = h.get<std::size_t>("max_queries", c.attack.max_queries);
    c.attack.epsilon = h.get<double>("epsilon", c.attack.epsilon);
    c.attack.n_eval_points = h.get<std::size_t>("n_eval_points", c.attack.n_eval_points);
    Section dr = rob.child("drift");
    c.drift.levels = dr.get<std::vector<double>>("levels", c.drift.levels);
    c.drift.batch_size = dr.get<std::size_t>("batch_size", c.drift.batch_size);
    c.drift.n_permutations = dr.get<std::size_t>("n_permutations", c.drift.n_permutations);
    if (dr.has("bandwidth")) c.drift.bandwidth = dr.get<double>("bandwidth");

    Section pr = root.child("privacy");
    c.privacy.mi_rows_per_side = pr.get<std::size_t>("mi_rows_per_side", c.privacy.mi_rows_per_side);
    c.privacy.knn_k = pr.get<std::size_t>("knn_k", c.privacy.knn_k);
    const std::string emb = pr.get<std::string>("embedding", "predictions");
    require(emb == "predictions" || emb == "features", "privacy.embedding must be 'predictions' or 'features'");
    c.privacy.embedding = emb == "features" ? privacy::Embedding::kFeatures : privacy::Embedding::kPredictions;

    Section su = root.child("sustainability");
    c.sustain.power.cpu_watts = su.get<double>("cpu_watts", c.sustain.power.cpu_watts);
    c.sustain.power.gpu_watts = su.get<double>("gpu_watts", c.sustain.power.gpu_watts);
    c.sustain.emissions.grid_intensity = su.get<double>("grid_intensity", c.sustain.emissions.grid_intensity);
    c.sustain.emissions.daily_per_capita = su.get<double>("daily_per_capita", c.sustain.emissions.daily_per_capita);
    const std::string rt = su.get<std::string>("runtime", "modeled");
    require(rt == "modeled" || rt == "measured", "sustainability.runtime must be 'modeled' or 'measured'");
    c.sustain.runtime = rt == "measured" ? RuntimeMode::kMeasured : RuntimeMode::kModeled;
    c.sustain.throughput_flops_per_second =
        su.get<double>("throughput_flops_per_second", c.sustain.throughput_flops_per_second);

    Section out = root.child("output");
    c.output.dir = resolve(base_dir, out.get<std::string>("dir", "mirai-out"));
    c.output.attributions = out.get<bool>("attributions", true);
    c.output.attack_log = out.get<bool>("attack_log", true);
    c.output.privacy_risk = out.get<bool>("privacy_risk", true);
  }
  c.split.seed = derive_seed(c.seed, "split");
  c.attack.seed = derive_seed(c.seed, "hsja");
  c.drift.seed = derive_seed(c.seed, "drift");
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  require(c.models.size() >= 2, "at least two models must be configured");
  std::set<std::string> ids;
  for (const auto& m : c.models) require(ids.insert(m.id).second, "duplicate model id '" + m.id + "'");
  require(ids.count(c.target_model) == 1, "target model '" + c.target_model + "' is not among the configured models");
  require(c.split.train_fraction > 0.0 && c.split.train_fraction < 1.0, "train_fraction must be in (0,1)");
  require(!c.schema.label.empty(), "dataset.label must be set");
  require(c.sensitive.privileged != c.sensitive.unprivileged, "privileged and unprivileged values must differ");
  require(c.workers >= 1, "workers must be >= 1");
  require(c.xai.eval_rows >= 1 && c.xai.background_rows >= 1, "explainability row counts must be >= 1");
  require(c.xai.consistency_top_k >= 1, "consistency_top_k must be >= 1");
  require(c.xai.lipschitz_radius > 0.0, "lipschitz_radius must be positive");
  require(c.xai.faithfulness_draws >= 2, "faithfulness_draws must be >= 2");
  require(c.attack.max_queries > 0, "hsja.max_queries must be positive");
  require(c.attack.epsilon > 0.0, "hsja.epsilon must be positive");
  require(c.attack.n_eval_points >= 1, "hsja.n_eval_points must be >= 1");
  require(!c.drift.levels.empty(), "drift.levels must not be empty");
  for (double s : c.drift.levels) require(s >= 0.0, "drift levels must be >= 0");
  require(c.drift.n_permutations >= 100, "drift.n_permutations must be >= 100");
  require(c.drift.batch_size >= 2, "drift.batch_size must be >= 2");
  require(c.privacy.knn_k >= 1, "privacy.knn_k must be >= 1");
  require(c.sustain.power.cpu_watts >= 0.0 && c.sustain.power.gpu_watts >= 0.0, "power draw must be >= 0");
  require(c.sustain.emissions.grid_intensity > 0.0 && c.sustain.emissions.daily_per_capita > 0.0,
          "emission constants must be positive");
  require(c.sustain.throughput_flops_per_second > 0.0, "throughput_flops_per_second must be positive");
  for (const auto& m : c.models) {
    switch (m.family) {
      case models::Family::kDecisionTree:
        tree_params(m);
        break;
      case models::Family::kGradientBoostedTrees:
        gbt_params(m, 0);
        break;
      case models::Family::kLinearMaxMargin:
        linear_params(m, 0);
        break;
      case models::Family::kMlp:
        mlp_params(m, 0);
        break;
      case models::Family::kExternal:
        require(m.params.empty(), "external model '" + m.id + "' takes no params");
        break;
    }
  }
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig c = parse_config(read_config_json(path), std::filesystem::absolute(path).parent_path());
  c.source = path;
  return c;
}

json echo(const RunConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) {
    json jm = {{"id", m.id}, {"family", models::family_name(m.family)}};
    switch (m.family) {
      case models::Family::kDecisionTree: {
        const auto p = tree_params(m);
        jm["params"] = {{"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}};
        break;
      }
      case models::Family::kGradientBoostedTrees: {
        const auto p = gbt_params(m, 0);
        jm["params"] = {{"n_trees", p.n_trees}, {"depth", p.depth}, {"learning_rate", p.learning_rate},
                        {"lambda", p.lambda}, {"min_leaf", p.min_leaf}, {"subsample", p.subsample}};
        break;
      }
      case models::Family::kLinearMaxMargin: {
        const auto p = linear_params(m, 0);
        jm["params"] = {{"C", p.C}, {"epochs", p.epochs}, {"calibration_fraction", p.calibration_fraction}};
        break;
      }
      case models::Family::kMlp: {
        const auto p = mlp_params(m, 0);
        jm["params"] = {{"hidden_sizes", p.hidden_sizes}, {"epochs", p.epochs},
                        {"learning_rate", p.learning_rate}, {"momentum", p.momentum},
                        {"batch_size", p.batch_size}};
        break;
      }
      case models::Family::kExternal:
        if (!m.command.empty()) jm["command"] = m.command;
        if (!m.predictions.empty()) jm["predictions"] = m.predictions.string();
        break;
    }
    if (m.resources) {
      jm["resources"] = {{"parameter_count", m.resources->parameter_count},
                         {"macs_per_sample", m.resources->macs_per_sample}};
    }
    models.push_back(std::move(jm));
  }
  json weights = json::object();
  for (scoring::Dimension d : scoring::kAllDimensions) {
    weights[std::string(scoring::dimension_name(d))] = c.weights[d];
  }
  json drift = {{"levels", c.drift.levels},
                {"batch_size", c.drift.batch_size},
                {"n_permutations", c.drift.n_permutations}};
  if (c.drift.bandwidth) drift["bandwidth"] = *c.drift.bandwidth;
  return {
      {"seed", c.seed},
      {"target_model", c.target_model},
      {"dataset",
       {{"name", c.dataset_name},
        {"path", c.dataset_path.string()},
        {"label", c.schema.label},
        {"categorical", c.schema.categorical},
        {"drop", c.schema.drop},
        {"sensitive_as_feature", c.schema.sensitive_as_feature},
        {"train_fraction", c.split.train_fraction},
        {"stratified", c.split.stratified}}},
      {"sensitive",
       {{"column", c.sensitive.column}, {"privileged", c.sensitive.privileged},
        {"unprivileged", c.sensitive.unprivileged}}},
      {"models", models},
      {"weights", weights},
      {"explainability",
       {{"eval_rows", c.xai.eval_rows},
        {"background_rows", c.xai.background_rows},
        {"shap_budget", c.xai.shap_budget},
        {"lipschitz_rows", c.xai.lipschitz_rows},
        {"lipschitz_perturbations", c.xai.lipschitz_perturbations},
        {"lipschitz_radius", c.xai.lipschitz_radius},
        {"consistency_top_k", c.xai.consistency_top_k},
        {"faithfulness_subset_size", c.xai.faithfulness_subset_size},
        {"faithfulness_draws", c.xai.faithfulness_draws}}},
      {"robustness",
       {{"hsja",
         {{"max_queries", c.attack.max_queries},
          {"epsilon", c.attack.epsilon},
          {"n_eval_points", c.attack.n_eval_points}}},
        {"drift", drift}}},
      {"privacy",
       {{"mi_rows_per_side", c.privacy.mi_rows_per_side},
        {"knn_k", c.privacy.knn_k},
        {"embedding", c.privacy.embedding == privacy::Embedding::kFeatures ? "features" : "predictions"}}},
      {"sustainability",
       {{"cpu_watts", c.sustain.power.cpu_watts},
        {"gpu_watts", c.sustain.power.gpu_watts},
        {"grid_intensity", c.sustain.emissions.grid_intensity},
        {"daily_per_capita", c.sustain.emissions.daily_per_capita},
        {"runtime", c.sustain.runtime == RuntimeMode::kMeasured ? "measured" : "modeled"},
        {"throughput_flops_per_second", c.sustain.throughput_flops_per_second}}},
      {"output",
       {{"dir", c.output.dir.string()},
        {"attributions", c.output.attributions},
        {"attack_log", c.output.attack_log},
        {"privacy_risk", c.output.privacy_risk}}},
  };
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(echo(c).dump())));
  return buf;
}

}  // namespace mirai::config
