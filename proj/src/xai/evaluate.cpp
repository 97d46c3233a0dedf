#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "mirai/xai.hpp"

namespace mirai::xai {

namespace {

std::vector<std::size_t> sample_positions(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (k < n) {
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

}  // namespace

XaiEvaluation evaluate_explainability(const models::ClassifierHandle& handle,
                                      const data::LabeledData& train, const data::LabeledData& test,
                                      const XaiConfig& config, std::uint64_t seed) {
  XaiEvaluation ev;
  const std::size_t d = test.x.cols();
  ev.rows = sample_positions(test.size(), config.eval_rows, derive_seed(seed, "xai.rows"));
  const Matrix rows = test.x.select_rows(ev.rows);
  const Matrix background = train.x.select_rows(
      sample_positions(train.size(), config.background_rows, derive_seed(seed, "xai.background")));
  const ShapOptions shap{config.shap_budget, derive_seed(seed, "xai.coalitions")};
  const BatchFn model = batch_fn(handle);
  const Explainer explainer(model, background, shap);
  if (explainer.ridge_fallback()) ev.flags.push_back("shap_ridge_fallback");
  if (!explainer.exact()) ev.flags.push_back("shap_sampled");

  std::vector<double> baseline(d, 0.0);
  for (std::size_t b = 0; b < background.rows(); ++b) {
    for (std::size_t j = 0; j < d; ++j) baseline[j] += background(b, j);
  }
  for (double& v : baseline) v /= static_cast<double>(background.rows());

  std::vector<std::vector<double>> explanations;
  std::vector<int> predicted;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    ev.attributions.push_back(explainer.explain(rows.row(r)));
    explanations.push_back(ev.attributions.back().values);
    predicted.push_back(models::hard_label(ev.attributions.back().output));
  }

  XaiMetrics m;
  const std::size_t subset =
      config.faithfulness_subset_size ? config.faithfulness_subset_size : std::max<std::size_t>(1, d / 4);
  std::vector<double> fc, fe, sp, ce;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    fc.push_back(faithfulness_correlation(model, explanations[r], rows.row(r), baseline, subset,
                                          config.faithfulness_draws,
                                          derive_seed(seed, "xai.faithfulness", r)));
    fe.push_back(faithfulness_estimate(model, explanations[r], rows.row(r), baseline));
    sp.push_back(sparseness(explanations[r]));
    ce.push_back(complexity_entropy(explanations[r]));
  }
  m.faithfulness_correlation = mean(fc);
  m.faithfulness_estimate = mean(fe);
  m.sparseness = mean(sp);
  m.complexity_entropy = mean(ce);
  m.consistency = consistency(explanations, predicted, config.consistency_top_k);

  const ExplainFn explain = [&](std::span<const double> x) { return explainer.explain(x).values; };
  std::vector<double> lip;
  const std::size_t n_lip = std::min(config.lipschitz_rows, rows.rows());
  for (std::size_t r = 0; r < n_lip; ++r) {
    lip.push_back(local_lipschitz(explain, rows.row(r), config.lipschitz_radius,
                                  config.lipschitz_perturbations,
                                  derive_seed(seed, "xai.lipschitz", r))
                      .aligned);
  }
  m.local_lipschitz = lip.empty() ? 1.0 : mean(lip);

  auto randomized = handle.model().randomized_copy(derive_seed(seed, "xai.randomize"));
  if (!randomized) {
    m.param_randomization = 0.5;
    m.random_logit = 0.5;
    ev.flags.push_back("randomization_neutral:no_randomizable_parameters");
  } else {
    const std::shared_ptr<const models::Model> shared(std::move(randomized));
    const BatchFn random_model = [shared](const Matrix& x) { return shared->predict_proba(x); };
    const Explainer random_explainer(random_model, background, shap);
    std::vector<double> rho;
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      rho.push_back(pearson(explanations[r], random_explainer.explain(rows.row(r)).values));
    }
    m.param_randomization = parameter_randomization_score(mean(rho));
    const ExplainClassFn by_class = [&](std::span<const double> x, int c) {
      return explainer.explain(x, c).values;
    };
    m.random_logit = random_logit_test(by_class, rows, predicted);
  }
  ev.scores = explainability_dimension(m);
  return ev;
}

void write_attributions_csv(const std::string& path, const XaiEvaluation& evaluation,
                            std::span<const std::string> feature_names) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "test_position";
  for (const auto& f : feature_names) out << ',' << f;
  out << ",base_value\n" << std::setprecision(17);
  for (std::size_t r = 0; r < evaluation.attributions.size(); ++r) {
    out << evaluation.rows[r];
    for (double v : evaluation.attributions[r].values) out << ',' << v;
    out << ',' << evaluation.attributions[r].base_value << '\n';
  }
}

}  // namespace mirai::xai
