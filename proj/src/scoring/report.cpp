#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mirai/scoring.hpp"

namespace mirai::scoring {

using nlohmann::json;

namespace {

json metric_to_json(const MetricRecord& m) {
  return {{"name", m.name},           {"subcategory", m.subcategory},
          {"raw", m.raw},             {"aligned", m.aligned},
          {"direction", direction_name(m.direction)}, {"flags", m.flags}};
}

MetricRecord metric_from_json(const json& j, Dimension d) {
  MetricRecord m;
  m.name = j.at("name").get<std::string>();
  m.dimension = d;
  m.subcategory = j.at("subcategory").get<std::string>();
  m.raw = j.at("raw").get<double>();
  m.aligned = j.at("aligned").get<double>();
  m.direction = parse_direction(j.at("direction").get<std::string>());
  m.flags = j.at("flags").get<std::vector<std::string>>();
  return m;
}

json dims_to_json(const std::array<double, kDimensions>& v) {
  json out = json::object();
  for (Dimension d : kAllDimensions) out[std::string(dimension_name(d))] = v[static_cast<std::size_t>(d)];
  return out;
}

std::array<double, kDimensions> dims_from_json(const json& j) {
  std::array<double, kDimensions> out{};
  for (Dimension d : kAllDimensions) out[static_cast<std::size_t>(d)] = j.at(std::string(dimension_name(d))).get<double>();
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

json to_json(const MiraiReport& report) {
  json models = json::array();
  for (const auto& m : report.models) {
    json dims = json::array();
    for (const auto& d : m.dimensions) {
      json metrics = json::array();
      for (const auto& r : d.metrics) metrics.push_back(metric_to_json(r));
      dims.push_back({{"dimension", dimension_name(d.dimension)}, {"score", d.score}, {"metrics", metrics}});
    }
    models.push_back({{"model_id", m.model_id},
                      {"family", m.family},
                      {"mirai", m.mirai},
                      {"accuracy", m.accuracy},
                      {"f1", m.f1},
                      {"flags", m.flags},
                      {"details", m.details},
                      {"dimensions", dims}});
  }
  json deltas = json::array();
  for (const auto& d : report.ranking.deltas) {
    deltas.push_back({{"model_id", d.model_id},
                      {"dimensions", dims_to_json(d.dimension_deltas)},
                      {"mirai", d.mirai_delta}});
  }
  json doc = {{"schema_version", 1},
              {"target_model", report.target_model},
              {"seed", report.seed},
              {"config_hash", report.config_hash},
              {"weights", dims_to_json(report.weights.w)},
              {"warnings", report.warnings},
              {"models", models},
              {"ranking", report.ranking.order},
              {"deltas_vs_target", deltas},
              {"config", report.config},
              {"run_info", report.run_info}};
  return doc;
}

MiraiReport from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != 1) throw ConfigError("unsupported report schema version");
    MiraiReport r;
    r.target_model = doc.at("target_model").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.weights.w = dims_from_json(doc.at("weights"));
    r.warnings = doc.at("warnings").get<bool>();
    for (const auto& jm : doc.at("models")) {
      ModelReport m;
      m.model_id = jm.at("model_id").get<std::string>();
      m.family = jm.at("family").get<std::string>();
      m.mirai = jm.at("mirai").get<double>();
      m.accuracy = jm.at("accuracy").get<double>();
      m.f1 = jm.at("f1").get<double>();
      m.flags = jm.at("flags").get<std::vector<std::string>>();
      m.details = jm.at("details").get<std::map<std::string, double>>();
      const auto& dims = jm.at("dimensions");
      if (dims.size() != kDimensions) throw ConfigError("report model has wrong number of dimensions");
      for (std::size_t i = 0; i < kDimensions; ++i) {
        const Dimension d = parse_dimension(dims[i].at("dimension").get<std::string>());
        if (d != kAllDimensions[i]) throw ConfigError("report dimensions out of order");
        m.dimensions[i].dimension = d;
        m.dimensions[i].score = dims[i].at("score").get<double>();
        for (const auto& jr : dims[i].at("metrics")) m.dimensions[i].metrics.push_back(metric_from_json(jr, d));
      }
      r.models.push_back(std::move(m));
    }
    r.ranking.order = doc.at("ranking").get<std::vector<std::string>>();
    for (const auto& jd : doc.at("deltas_vs_target")) {
      r.ranking.deltas.push_back({jd.at("model_id").get<std::string>(), dims_from_json(jd.at("dimensions")),
                                  jd.at("mirai").get<double>()});
    }
    r.config = doc.at("config");
    r.run_info = doc.at("run_info");
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string determinism_hash(const MiraiReport& report) {
  json doc = to_json(report);
  doc.erase("run_info");
  return hex64(fnv1a64(doc.dump()));
}

// ---------------------------------------------------------------------------

namespace {

std::string display_name(const std::string& name) {
  static const std::map<std::string, std::string> special{
      {"tpr", "TPR"}, {"fpr", "FPR"}, {"kgco2e", "kgCO2e"}, {"hsja", "HSJA"}, {"mmd", "MMD"},
      {"flops", "FLOPs"}, {"macs", "MACs"}, {"shapr", "SHAPr"}, {"mi", "MI"}};
  std::string out;
  std::istringstream in(name);
  std::string word;
  while (std::getline(in, word, '_')) {
    if (word.empty()) continue;
    if (!out.empty()) out += ' ';
    if (auto it = special.find(word); it != special.end()) {
      out += it->second;
    } else {
      word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
      out += word;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string signed_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.4f", v);
  return buf;
}

struct Row {
  std::string label;
  std::vector<std::string> cells;
  bool header = false;
};

/// Cell text plus best / second-best markers ranked by `key` (higher is better).
std::vector<std::string> mark(const std::vector<double>& shown, const std::vector<double>& key,
                              TableFormat format) {
  std::set<double, std::greater<>> distinct(key.begin(), key.end());
  const double best = distinct.empty() ? 0.0 : *distinct.begin();
  const bool has_second = distinct.size() > 1;
  const double second = has_second ? *std::next(distinct.begin()) : 0.0;
  const bool all_equal = distinct.size() == 1;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < shown.size(); ++i) {
    std::string s = fixed(shown[i]);
    if (!all_equal && key[i] == best) {
      s = format == TableFormat::kMarkdown ? "**" + s + "**" : s + " (1)";
    } else if (has_second && key[i] == second) {
      s = format == TableFormat::kMarkdown ? "<u>" + s + "</u>" : s + " (2)";
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::string render_table(const MiraiReport& report, TableFormat format) {
  const auto& models = report.models;
  std::vector<Row> rows;
  for (std::size_t di = 0; di < kDimensions; ++di) {
    const Dimension dim = kAllDimensions[di];
    std::vector<double> scores;
    for (const auto& m : models) scores.push_back(m.dimensions[di].score);
    std::string label = display_name(std::string(dimension_name(dim)));
    rows.push_back({label, mark(scores, scores, format), true});
    if (models.empty()) continue;
    const auto& reference = models.front().dimensions[di].metrics;
    for (std::size_t k = 0; k < reference.size(); ++k) {
      std::vector<double> shown, key;
      for (const auto& m : models) {
        const auto& metrics = m.dimensions[di].metrics;
        const MetricRecord& r = k < metrics.size() ? metrics[k] : reference[k];
        shown.push_back(r.direction == Direction::kLowerBetter ? r.raw : r.aligned);
        key.push_back(r.aligned);
      }
      std::string name = display_name(reference[k].name);
      if (reference[k].direction != Direction::kHigherBetter) name += "*";
      rows.push_back({name, mark(shown, key, format), false});
    }
  }
  std::vector<double> mirai_values, acc, f1;
  for (const auto& m : models) {
    mirai_values.push_back(m.mirai);
    acc.push_back(m.accuracy);
    f1.push_back(m.f1);
  }
  rows.push_back({"MIRAI", mark(mirai_values, mirai_values, format), true});
  rows.push_back({"Accuracy", mark(acc, acc, format), false});
  rows.push_back({"F1", mark(f1, f1, format), false});

  std::vector<std::string> columns;
  for (const auto& m : models) columns.push_back(m.model_id == report.target_model ? m.model_id + " (target)" : m.model_id);

  std::ostringstream out;
  if (format == TableFormat::kMarkdown) {
    out << "| Metric |";
    for (const auto& c : columns) out << ' ' << c << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto& r : rows) {
      out << "| " << (r.header ? "**" + r.label + "**" : r.label) << " |";
      for (const auto& c : r.cells) out << ' ' << c << " |";
      out << '\n';
    }
  } else {
    std::size_t label_w = 6;
    for (const auto& r : rows) label_w = std::max(label_w, r.label.size() + (r.header ? 0 : 2));
    std::vector<std::size_t> widths;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::size_t w = columns[c].size();
      for (const auto& r : rows) w = std::max(w, r.cells[c].size());
      widths.push_back(w);
    }
    auto pad = [](const std::string& s, std::size_t w, bool right) {
      const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
      return right ? fill + s : s + fill;
    };
    out << pad("Metric", label_w, false);
    for (std::size_t c = 0; c < columns.size(); ++c) out << "  " << pad(columns[c], widths[c], true);
    out << '\n';
    for (const auto& r : rows) {
      if (r.header) {
        std::size_t total = label_w;
        for (auto w : widths) total += w + 2;
        out << std::string(total, '-') << '\n';
      }
      out << pad(r.header ? r.label : "  " + r.label, label_w, false);
      for (std::size_t c = 0; c < r.cells.size(); ++c) out << "  " << pad(r.cells[c], widths[c], true);
      out << '\n';
    }
  }

  out << "\nRanking: ";
  for (std::size_t i = 0; i < report.ranking.order.size(); ++i) {
    out << (i ? " > " : "") << report.ranking.order[i];
  }
  out << "\n\nDeltas vs target (" << report.target_model << "):\n\n";
  if (format == TableFormat::kMarkdown) {
    out << "| Model |";
    for (Dimension d : kAllDimensions) out << ' ' << display_name(std::string(dimension_name(d))) << " |";
    out << " MIRAI |\n|---|";
    for (std::size_t i = 0; i <= kDimensions; ++i) out << "---:|";
    out << '\n';
    for (const auto& d : report.ranking.deltas) {
      out << "| " << d.model_id << " |";
      for (double v : d.dimension_deltas) out << ' ' << signed_fixed(v) << " |";
      out << ' ' << signed_fixed(d.mirai_delta) << " |\n";
    }
  } else {
    for (const auto& d : report.ranking.deltas) {
      out << "  " << d.model_id << ':';
      for (std::size_t i = 0; i < kDimensions; ++i) {
        out << ' ' << dimension_name(kAllDimensions[i]) << ' ' << signed_fixed(d.dimension_deltas[i]);
      }
      out << " mirai " << signed_fixed(d.mirai_delta) << '\n';
    }
  }

  std::vector<std::string> notes;
  for (const auto& m : models) {
    for (const auto& f : m.flags) notes.push_back(m.model_id + ": " + f);
    for (const auto& d : m.dimensions) {
      for (const auto& r : d.metrics) {
        for (const auto& f : r.flags) notes.push_back(m.model_id + ": " + r.name + ": " + f);
      }
    }
  }
  out << "\n* lower raw values are better. Fairness rows show raw disparities; cost rows show "
         "1 - raw/max over the cohort. Scores use the aligned values.\n";
  if (!notes.empty()) {
    out << "\nFlags:\n";
    for (const auto& n : notes) out << "- " << n << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const MiraiReport& report) {
  write_text(path, to_json(report).dump(2) + "\n");
}

MiraiReport read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("report " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

}  // namespace mirai::scoring
