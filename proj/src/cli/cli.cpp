#include "mirai/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "mirai/config.hpp"
#include "mirai/pipeline.hpp"
#include "mirai/scoring.hpp"

namespace mirai::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string data;
  std::string out_dir;
  std::string target;
  std::optional<std::size_t> workers;
  std::string format = "txt";
  std::string input;
  bool quiet = false;
};

fs::path resolve_config_path(const std::string& given) {
  const char* env = std::getenv("MIRAI_CONFIG_DIR");
  const fs::path env_dir = env && *env ? fs::path(env) : fs::path();
  if (given.empty()) {
    if (env_dir.empty()) throw ConfigError("no config given: pass --config or set MIRAI_CONFIG_DIR");
    return env_dir / "mirai.json";
  }
  fs::path p(given);
  if (p.is_relative() && !fs::exists(p) && !env_dir.empty() && fs::exists(env_dir / p)) return env_dir / p;
  return p;
}

config::RunConfig load(const Options& o) {
  const fs::path path = resolve_config_path(o.config);
  nlohmann::json doc = config::read_config_json(path);
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  if (o.seed) doc["seed"] = *o.seed;
  if (!o.data.empty()) doc["dataset"]["path"] = fs::absolute(o.data).lexically_normal().string();
  if (!o.out_dir.empty()) doc["output"]["dir"] = fs::absolute(o.out_dir).lexically_normal().string();
  if (!o.target.empty()) doc["target_model"] = o.target;
  if (o.workers) doc["workers"] = *o.workers;
  config::RunConfig cfg = config::parse_config(doc, fs::absolute(path).parent_path());
  cfg.source = path;
  return cfg;
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

scoring::TableFormat table_format(const std::string& f) {
  return f == "md" ? scoring::TableFormat::kMarkdown : scoring::TableFormat::kPlain;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto data = pipeline::prepare_data(cfg);
  // Both groups must be present in the evaluation split for the fairness metrics.
  const auto part = data::group_partition(data.test.group, data.privileged_code, data.unprivileged_code);
  out << "config: " << cfg.source.string() << " (hash " << config::config_hash(cfg) << ")\n";
  out << "dataset: " << cfg.dataset_name << " " << cfg.dataset_path.string() << "\n";
  out << "  rows " << data.dataset.n_samples() << ", features " << data.dataset.n_features()
      << ", dropped rows " << data.dataset.dropped_rows << "\n";
  out << "  split " << data.train.size() << " train / " << data.test.size() << " test\n";
  out << "  sensitive " << cfg.sensitive.column << ": " << cfg.sensitive.privileged << " "
      << part.privileged.size() << " / " << cfg.sensitive.unprivileged << " " << part.unprivileged.size()
      << " test rows\n";
  out << "models:\n";
  for (const auto& m : cfg.models) {
    out << "  " << m.id << " (" << models::family_name(m.family) << ")"
        << (m.id == cfg.target_model ? " [target]" : "") << "\n";
  }
  out << "weights:";
  for (auto d : scoring::kAllDimensions) out << " " << scoring::dimension_name(d) << "=" << cfg.weights[d];
  out << "\nplan: explainability (" << cfg.xai.eval_rows << " rows, budget " << cfg.xai.shap_budget
      << "), fairness, sustainability, robustness (hsja " << cfg.attack.n_eval_points << " rows x "
      << cfg.attack.max_queries << " queries, eps " << cfg.attack.epsilon << "; drift "
      << cfg.drift.levels.size() << " levels), privacy (knn k=" << cfg.privacy.knn_k << ")\n";
  out << "seed: " << cfg.seed << "\n";
  for (const auto& w : cfg.warnings) out << "warning: " << w << "\n";
  out << "ok\n";
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const auto cohort = pipeline::build_cohort(cfg);
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& h : cohort.handles) {
    const auto s = models::accuracy_f1(h, cohort.data.test);
    const auto info = h.resource_info();
    out << h.model_id() << ": accuracy " << fixed4(s.accuracy) << ", f1 " << fixed4(s.f1);
    if (info) out << ", parameters " << info->parameter_count << ", MACs/sample " << info->macs_per_sample;
    out << "\n";
    nlohmann::json j = {{"model_id", h.model_id()},
                        {"family", models::family_name(h.family())},
                        {"accuracy", s.accuracy},
                        {"f1", s.f1}};
    if (info) {
      j["parameter_count"] = info->parameter_count;
      j["macs_per_sample"] = info->macs_per_sample;
      j["flops_per_sample"] = info->flops_per_sample;
    }
    summary.push_back(std::move(j));
  }
  std::error_code ec;
  fs::create_directories(cfg.output.dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output.dir.string());
  const auto path = cfg.output.dir / "training.json";
  scoring::write_text(path, summary.dump(2) + "\n");
  out << path.string() << "\n";
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err, bool compare) {
  const auto cfg = load(o);
  const pipeline::Progress progress = [&](const std::string& msg) {
    if (!o.quiet) err << msg << "\n";
  };
  const auto result = pipeline::run(cfg, progress);
  const auto path = pipeline::write_outputs(cfg, result);
  const auto& report = result.report;
  if (compare) {
    out << scoring::render_table(report, table_format(o.format));
  } else {
    for (const auto& m : report.models) {
      out << m.model_id << ":";
      for (std::size_t i = 0; i < scoring::kDimensions; ++i) {
        out << " " << scoring::dimension_name(scoring::kAllDimensions[i]) << " " << fixed4(m.dimensions[i].score);
      }
      out << " mirai " << fixed4(m.mirai) << "\n";
    }
  }
  if (report.warnings) err << "completed with warnings: some metrics failed and were scored 0 (see flags)\n";
  out << path.string() << "\n";
  return report.warnings ? kWarnings : kOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto cfg = load(o);
  const fs::path input = o.input.empty() ? cfg.output.dir / "report.json" : fs::path(o.input);
  const auto report = scoring::read_json(input);
  const fs::path dir = input.parent_path().empty() ? fs::path(".") : input.parent_path();
  scoring::write_text(dir / "report.md", scoring::render_table(report, scoring::TableFormat::kMarkdown));
  scoring::write_text(dir / "report.txt", scoring::render_table(report, scoring::TableFormat::kPlain));
  if (o.format == "json") {
    out << scoring::to_json(report).dump(2) << "\n";
  } else {
    out << scoring::render_table(report, table_format(o.format));
  }
  out << input.string() << "\n";
  return report.warnings ? kWarnings : kOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* m = dynamic_cast<const Error*>(&e)) {
    switch (m->kind()) {
      case ErrorKind::kConfig:
        return kConfig;
      case ErrorKind::kData:
        return kData;
      case ErrorKind::kMetric:
        return kMetric;
      case ErrorKind::kIo:
        return kIo;
    }
  }
  return kOther;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Responsible-AI evaluation of tabular binary classifiers"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "Config file (default: $MIRAI_CONFIG_DIR/mirai.json)");
    sub->add_option("--seed", o.seed, "Override the root seed");
    sub->add_option("--data", o.data, "Override the dataset path");
    sub->add_option("--out-dir", o.out_dir, "Override the output directory");
    sub->add_option("--target", o.target, "Override the target model id");
    sub->add_option("--workers", o.workers, "Models evaluated in parallel")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "Table format on stdout")->check(CLI::IsMember({"txt", "md", "json"}));
    sub->add_flag("-q,--quiet", o.quiet, "No progress messages");
  };
  auto* validate = app.add_subcommand("validate", "Check config and data, print the evaluation plan");
  auto* train = app.add_subcommand("train", "Train the configured models and print predictive scores");
  auto* evaluate = app.add_subcommand("evaluate", "Run all five dimensions for every model");
  auto* compare = app.add_subcommand("compare", "Evaluate and print the ranking against the target model");
  auto* report = app.add_subcommand("report", "Re-render a stored report without recomputation");
  for (auto* sub : {validate, train, evaluate, compare, report}) add_common(sub);
  report->add_option("--input", o.input, "Stored report.json (default: <out-dir>/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out, help_err;
    const int code = app.exit(e, help_out, help_err);
    out << help_out.str();
    err << help_err.str();
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*train) return cmd_train(o, out);
    if (*evaluate) return cmd_evaluate(o, out, err, false);
    if (*compare) return cmd_evaluate(o, out, err, true);
    if (*report) return cmd_report(o, out);
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "error: " << e.what() << "\n";
    return code;
  }
  return kOther;
}

}  // namespace mirai::cli
