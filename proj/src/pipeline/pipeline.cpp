#include "mirai/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

#include "mirai/fairness.hpp"
#include "mirai/simd.hpp"
#include "mirai/sustain.hpp"

namespace mirai::pipeline {

using scoring::Dimension;
using scoring::Direction;
using scoring::MetricRecord;

namespace {

constexpr std::size_t kExpl = static_cast<std::size_t>(Dimension::kExplainability);
constexpr std::size_t kFair = static_cast<std::size_t>(Dimension::kFairness);
constexpr std::size_t kSust = static_cast<std::size_t>(Dimension::kSustainability);
constexpr std::size_t kRob = static_cast<std::size_t>(Dimension::kRobustness);
constexpr std::size_t kPriv = static_cast<std::size_t>(Dimension::kPrivacy);

const std::string kFailed = "failed: ";

struct MetricSpec {
  const char* name;
  const char* subcategory;
  Direction direction;
};

constexpr MetricSpec kXaiMetrics[] = {
    {"local_lipschitz", "robustness", Direction::kHigherBetter},
    {"consistency", "robustness", Direction::kHigherBetter},
    {"faithfulness_correlation", "faithfulness", Direction::kHigherBetter},
    {"faithfulness_estimate", "faithfulness", Direction::kHigherBetter},
    {"param_randomization", "randomization", Direction::kHigherBetter},
    {"random_logit", "randomization", Direction::kHigherBetter},
    {"sparseness", "complexity", Direction::kHigherBetter},
    {"complexity_entropy", "complexity", Direction::kHigherBetter},
};

constexpr MetricSpec kFairMetrics[] = {
    {"accuracy_diff", "", Direction::kLowerBetter},
    {"precision_diff", "", Direction::kLowerBetter},
    {"tpr_diff", "", Direction::kLowerBetter},
    {"fpr_diff", "", Direction::kLowerBetter},
    {"demographic_parity_diff", "", Direction::kLowerBetter},
    {"equalized_odds_diff", "", Direction::kLowerBetter},
};

constexpr const char* kCostMetrics[] = {"parameter_count", "flops_per_sample", "macs_per_sample",
                                        "normalized_kgco2e"};

/// Worst-case record for a metric that could not be computed.
MetricRecord failed(const MetricSpec& spec, Dimension dim, const std::string& why) {
  MetricRecord r{spec.name, dim, spec.subcategory, 0.0, 0.0, spec.direction, {kFailed + why}};
  if (spec.direction == Direction::kLowerBetter) r.raw = 1.0;
  return r;
}

std::vector<MetricRecord> failed_all(std::span<const MetricSpec> specs, Dimension dim, const std::string& why) {
  std::vector<MetricRecord> out;
  for (const auto& s : specs) out.push_back(failed(s, dim, why));
  return out;
}

struct Partial {
  std::array<std::vector<MetricRecord>, scoring::kDimensions> metrics;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::vector<std::string> flags;
  std::map<std::string, double> details;
  ModelArtifacts artifacts;
  // Sustainability inputs, aligned after every model has finished.
  std::optional<models::ResourceInfo> resources;
  double runtime_hours = 0.0;
  bool runtime_measured = false;
  double wall_seconds = 0.0;
};

Partial evaluate_model(const config::RunConfig& cfg, const data::PreparedData& data,
                       const models::ClassifierHandle& handle, const Progress& progress) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = derive_seed(cfg.seed, "evaluate." + handle.model_id());
  const auto& train = data.train;
  const auto& test = data.test;
  Partial out;
  auto note = [&](const std::string& what) {
    if (progress) progress(handle.model_id() + ": " + what);
  };

  std::vector<int> predicted;
  try {
    const auto p = handle.predict_proba(test.x);
    const auto scores = models::accuracy_f1(test.y, p);
    out.accuracy = scores.accuracy;
    out.f1 = scores.f1;
    for (double v : p) predicted.push_back(models::hard_label(v));
  } catch (const MetricError& e) {
    out.flags.push_back(kFailed + "predictive scores: " + e.what());
  }

  // Explainability
  try {
    auto ev = xai::evaluate_explainability(handle, train, test, cfg.xai, derive_seed(seed, "xai"));
    const auto& m = ev.scores.metrics;
    const double values[] = {m.local_lipschitz, m.consistency, m.faithfulness_correlation,
                             m.faithfulness_estimate, m.param_randomization, m.random_logit,
                             m.sparseness, m.complexity_entropy};
    for (std::size_t i = 0; i < std::size(kXaiMetrics); ++i) {
      const auto& s = kXaiMetrics[i];
      auto rec = scoring::align(s.name, Dimension::kExplainability, values[i], s.direction, s.subcategory);
      if (std::string(s.subcategory) == "randomization") {
        for (const auto& f : ev.flags) {
          if (f.rfind("randomization_neutral", 0) == 0) rec.flags.push_back(f);
        }
      }
      out.metrics[kExpl].push_back(std::move(rec));
    }
    for (const auto& f : ev.flags) {
      if (f.rfind("randomization_neutral", 0) != 0) out.flags.push_back("explainability: " + f);
    }
    out.artifacts.explanations = std::move(ev);
  } catch (const MetricError& e) {
    out.metrics[kExpl] = failed_all(kXaiMetrics, Dimension::kExplainability, e.what());
  }
  note("explainability done");

  // Fairness
  try {
    if (predicted.size() != test.size()) throw MetricError("no test predictions");
    const auto partition = data::group_partition(test.group, data.privileged_code, data.unprivileged_code);
    const auto rec = fairness::disparities(fairness::group_stats(test.y, predicted, partition));
    for (const auto& [name, raw] : rec.named()) {
      auto r = scoring::align(name, Dimension::kFairness, raw, Direction::kLowerBetter);
      for (const auto& f : rec.flags) {
        if (f == "degenerate:" + name) r.flags.push_back("degenerate rate");
      }
      if (name == "equalized_odds_diff") {
        for (const auto& f : rec.flags) {
          if (f == "degenerate:tpr_diff" || f == "degenerate:fpr_diff") r.flags.push_back(f);
        }
      }
      out.metrics[kFair].push_back(std::move(r));
    }
    if (partition.excluded) out.details["fairness_excluded_rows"] = static_cast<double>(partition.excluded);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kMetric && e.kind() != ErrorKind::kData) throw;
    out.metrics[kFair] = failed_all(kFairMetrics, Dimension::kFairness, e.what());
  }
  note("fairness done");

  // Robustness
  const MetricSpec hsja_spec{"hsja", "", Direction::kHigherBetter};
  const MetricSpec drift_spec{"mmd_drift", "", Direction::kHigherBetter};
  try {
    auto attack = robust::hsja_robustness_score(handle, test, cfg.attack);
    auto rec = scoring::align(hsja_spec.name, Dimension::kRobustness, attack.score, hsja_spec.direction);
    rec.flags = attack.flags;
    out.metrics[kRob].push_back(std::move(rec));
    out.details["hsja_evaluated_rows"] = static_cast<double>(attack.evaluated);
    out.artifacts.attack = std::move(attack);
  } catch (const MetricError& e) {
    out.metrics[kRob].push_back(failed(hsja_spec, Dimension::kRobustness, e.what()));
  }
  try {
    auto drift = robust::drift_robustness(handle, test, cfg.drift);
    auto rec = scoring::align(drift_spec.name, Dimension::kRobustness, drift.score, drift_spec.direction);
    rec.flags = drift.flags;
    out.metrics[kRob].push_back(std::move(rec));
    for (std::size_t k = 0; k < drift.level_p_values.size(); ++k) {
      out.details["drift_p_value_" + std::to_string(k)] = drift.level_p_values[k];
    }
  } catch (const MetricError& e) {
    out.metrics[kRob].push_back(failed(drift_spec, Dimension::kRobustness, e.what()));
  }
  note("robustness done");

  // Privacy
  const MetricSpec mi_spec{"mi_privacy", "", Direction::kHigherBetter};
  const MetricSpec shapr_spec{"shapr_privacy", "", Direction::kHigherBetter};
  try {
    auto rec = privacy::evaluate_privacy(handle, train, test, cfg.privacy, derive_seed(seed, "privacy"));
    auto mi = scoring::align(mi_spec.name, Dimension::kPrivacy, rec.mi_privacy, mi_spec.direction);
    mi.flags = rec.flags;
    out.metrics[kPriv].push_back(std::move(mi));
    out.metrics[kPriv].push_back(
        scoring::align(shapr_spec.name, Dimension::kPrivacy, rec.shapr_privacy, shapr_spec.direction));
    out.details["mi_attack_accuracy"] = rec.attack_accuracy;
    out.artifacts.privacy = std::move(rec);
  } catch (const MetricError& e) {
    out.metrics[kPriv] = {failed(mi_spec, Dimension::kPrivacy, e.what()),
                          failed(shapr_spec, Dimension::kPrivacy, e.what())};
  }
  note("privacy done");

  // Cost accounting; alignment waits for the whole cohort.
  out.resources = handle.resource_info();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.details["queried_rows"] = static_cast<double>(handle.queried_rows());
  if (cfg.sustain.runtime == config::RuntimeMode::kModeled && out.resources) {
    const double flops = handle.model().training_flops() +
                         static_cast<double>(handle.queried_rows()) *
                             static_cast<double>(out.resources->flops_per_sample);
    out.runtime_hours = flops / cfg.sustain.throughput_flops_per_second / 3600.0;
  } else {
    out.runtime_hours = (handle.train_time_seconds() + out.wall_seconds) / 3600.0;
    out.runtime_measured = true;
  }
  out.details["runtime_hours"] = out.runtime_hours;
  return out;
}

/// 1 - raw/max over the models whose value is known; unknown values score 0.
std::vector<MetricRecord> align_costs(const char* name, const std::vector<std::optional<double>>& raw) {
  std::vector<double> known;
  for (const auto& v : raw) {
    if (v) known.push_back(*v);
  }
  std::vector<double> aligned;
  bool all_zero = false;
  if (known.size() >= 2) {
    auto a = sustain::cohort_align(known);
    aligned = std::move(a.aligned);
    all_zero = a.all_zero;
  } else if (known.size() == 1) {
    aligned = {known[0] > 0.0 ? 0.0 : 1.0};
    all_zero = known[0] == 0.0;
  }
  std::vector<MetricRecord> out;
  std::size_t k = 0;
  for (const auto& v : raw) {
    if (v) {
      auto r = scoring::cohort_record(name, Dimension::kSustainability, *v, aligned[k++]);
      if (all_zero) r.flags.push_back("cohort all zero");
      out.push_back(std::move(r));
    } else {
      MetricRecord r{name, Dimension::kSustainability, {}, 0.0, 0.0, Direction::kCohortCost,
                     {kFailed + "resource information unavailable"}};
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

data::PreparedData prepare_data(const config::RunConfig& cfg) {
  return data::prepare(cfg.dataset_path, cfg.schema, cfg.split, cfg.sensitive);
}

Cohort build_cohort(const config::RunConfig& cfg) {
  Cohort cohort{prepare_data(cfg), {}};
  const auto& train = cohort.data.train;
  for (const auto& spec : cfg.models) {
    const std::uint64_t seed = derive_seed(cfg.seed, "model." + spec.id);
    models::ClassifierHandle h;
    switch (spec.family) {
      case models::Family::kDecisionTree:
        h = models::train_decision_tree(train, config::tree_params(spec), spec.id);
        break;
      case models::Family::kGradientBoostedTrees:
        h = models::train_gbt(train, config::gbt_params(spec, seed), spec.id);
        break;
      case models::Family::kLinearMaxMargin:
        h = models::train_linear_margin(train, config::linear_params(spec, seed), spec.id);
        break;
      case models::Family::kMlp:
        h = models::train_mlp(train, config::mlp_params(spec, seed), spec.id);
        break;
      case models::Family::kExternal:
        if (!spec.command.empty()) {
          h = models::attach_external_command(spec.id, spec.command, cohort.data.dataset.feature_names,
                                              spec.resources);
        } else {
          h = models::attach_external_predictions(spec.id, spec.predictions, cohort.data.dataset.features,
                                                  spec.resources);
        }
        break;
    }
    if (spec.resources && spec.family != models::Family::kExternal) h.declare_resource_info(*spec.resources);
    cohort.handles.push_back(std::move(h));
  }
  return cohort;
}

RunResult evaluate(const config::RunConfig& cfg, const Cohort& cohort, const Progress& progress) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = cohort.handles.size();
  std::vector<Partial> partials(n);
  std::vector<std::exception_ptr> errors(n);
  std::mutex progress_mutex;
  const Progress locked = [&](const std::string& msg) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(progress_mutex);
    progress(msg);
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        partials[i] = evaluate_model(cfg, cohort.data, cohort.handles[i], locked);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, n));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Cohort barrier: cost metrics need every model's raw values.
  std::array<std::vector<std::optional<double>>, 4> costs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = partials[i];
    std::optional<double> params, flops, macs;
    if (p.resources) {
      params = static_cast<double>(p.resources->parameter_count);
      flops = static_cast<double>(p.resources->flops_per_sample);
      macs = static_cast<double>(p.resources->macs_per_sample);
    }
    costs[0].push_back(params);
    costs[1].push_back(flops);
    costs[2].push_back(macs);
    costs[3].push_back(sustain::carbon_estimate(cfg.sustain.power, p.runtime_hours, cfg.sustain.emissions));
  }
  for (std::size_t c = 0; c < costs.size(); ++c) {
    const auto records = align_costs(kCostMetrics[c], costs[c]);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = records[i];
      if (c == 3 && partials[i].runtime_measured) r.flags.push_back("runtime measured by wall clock");
      partials[i].metrics[kSust].push_back(std::move(r));
    }
  }

  RunResult result;
  result.feature_names = cohort.data.dataset.feature_names;
  auto& report = result.report;
  report.target_model = cfg.target_model;
  report.weights = cfg.weights;
  report.seed = cfg.seed;
  report.config = config::echo(cfg);
  report.config_hash = config::config_hash(cfg);
  nlohmann::json train_seconds = nlohmann::json::object();
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = partials[i];
    const auto& h = cohort.handles[i];
    scoring::ModelReport m;
    m.model_id = h.model_id();
    m.family = std::string(models::family_name(h.family()));
    for (Dimension d : scoring::kAllDimensions) {
      const auto k = static_cast<std::size_t>(d);
      m.dimensions[k] = scoring::make_dimension(d, std::move(p.metrics[k]));
    }
    const auto scores = m.scores();
    m.mirai = scoring::mirai(scores, cfg.weights);
    m.accuracy = p.accuracy;
    m.f1 = p.f1;
    m.flags = std::move(p.flags);
    m.details = std::move(p.details);
    for (const auto& d : m.dimensions) {
      for (const auto& r : d.metrics) {
        for (const auto& f : r.flags) report.warnings = report.warnings || f.rfind(kFailed, 0) == 0;
      }
    }
    for (const auto& f : m.flags) report.warnings = report.warnings || f.rfind(kFailed, 0) == 0;
    report.models.push_back(std::move(m));
    result.artifacts.push_back(std::move(p.artifacts));
    train_seconds[h.model_id()] = h.train_time_seconds();
  }
  report.ranking = scoring::rank_and_compare(report.models, cfg.target_model);
  report.run_info = {
      {"timestamp", utc_timestamp()},
      {"evaluation_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
      {"train_seconds", train_seconds},
      {"workers", workers},
      {"simd", simd::isa_name(simd::active_isa())},
      {"config_warnings", cfg.warnings},
  };
  return result;
}

RunResult run(const config::RunConfig& cfg, const Progress& progress) {
  const Cohort cohort = build_cohort(cfg);
  if (progress) {
    progress("data: " + std::to_string(cohort.data.train.size()) + " train rows, " +
             std::to_string(cohort.data.test.size()) + " test rows, " +
             std::to_string(cohort.data.dataset.n_features()) + " features");
  }
  RunResult result = evaluate(cfg, cohort, progress);
  return result;
}

std::filesystem::path write_outputs(const config::RunConfig& cfg, const RunResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output.dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output.dir.string() + ": " + ec.message());
  const auto json_path = cfg.output.dir / "report.json";
  scoring::write_json(json_path, result.report);
  scoring::write_text(cfg.output.dir / "report.md", scoring::render_table(result.report, scoring::TableFormat::kMarkdown));
  scoring::write_text(cfg.output.dir / "report.txt", scoring::render_table(result.report, scoring::TableFormat::kPlain));
  for (std::size_t i = 0; i < result.artifacts.size(); ++i) {
    const auto& id = result.report.models[i].model_id;
    const auto& a = result.artifacts[i];
    if (cfg.output.attributions && !a.explanations.attributions.empty()) {
      xai::write_attributions_csv((cfg.output.dir / ("attributions_" + id + ".csv")).string(), a.explanations,
                                  result.feature_names);
    }
    if (cfg.output.attack_log && !a.attack.log.empty()) {
      std::ofstream out(cfg.output.dir / ("attack_log_" + id + ".csv"));
      if (!out) throw IoError("cannot write attack log for " + id);
      out << "test_position,success,queries,perturbation_norm\n" << std::setprecision(17);
      for (const auto& e : a.attack.log) {
        out << e.row << ',' << (e.success ? 1 : 0) << ',' << e.queries << ',' << e.norm << '\n';
      }
    }
    if (cfg.output.privacy_risk && !a.privacy.record_values.empty()) {
      std::ofstream out(cfg.output.dir / ("privacy_risk_" + id + ".csv"));
      if (!out) throw IoError("cannot write privacy risk for " + id);
      double top = 0.0;
      for (double v : a.privacy.record_values) top = std::max(top, v);
      out << "train_position,knn_shapley,risk\n" << std::setprecision(17);
      for (std::size_t r = 0; r < a.privacy.record_values.size(); ++r) {
        const double v = a.privacy.record_values[r];
        out << r << ',' << v << ',' << (top > 0.0 ? std::max(v, 0.0) / top : 0.0) << '\n';
      }
    }
  }
  return json_path;
}

}  // namespace mirai::pipeline
