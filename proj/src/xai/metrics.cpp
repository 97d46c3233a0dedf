#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mirai/simd.hpp"
#include "mirai/xai.hpp"

namespace mirai::xai {

LipschitzEstimate local_lipschitz(const ExplainFn& explain, std::span<const double> x, double radius,
                                  std::size_t n_perturb, std::uint64_t seed) {
  const std::size_t d = x.size();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::vector<double> base = explain(x);
  std::vector<double> xp(d);
  LipschitzEstimate est;
  for (std::size_t k = 0; k < n_perturb; ++k) {
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      xp[i] = normal(rng);
      norm += xp[i] * xp[i];
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    // Uniform in the ball: radius * U^(1/d) along a uniform direction.
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(d));
    if (r <= 0.0) continue;
    for (std::size_t i = 0; i < d; ++i) xp[i] = x[i] + r * xp[i] / norm;
    const std::vector<double> e = explain(xp);
    const double num = std::sqrt(simd::squared_distance(base, e));
    const double den = std::sqrt(simd::squared_distance(x, xp));
    if (den > 0.0) est.constant = std::max(est.constant, num / den);
  }
  est.aligned = 1.0 / (1.0 + est.constant);
  return est;
}

double consistency(std::span<const std::vector<double>> explanations,
                   std::span<const int> predictions, std::size_t top_k) {
  const std::size_t n = explanations.size();
  if (n == 0) return 0.0;
  std::vector<std::vector<std::size_t>> signatures(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& e = explanations[r];
    std::vector<std::size_t> order(e.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return e[a] > e[b]; });
    order.resize(std::min(top_k == 0 ? e.size() : top_k, e.size()));
    signatures[r] = std::move(order);
  }
  std::map<std::pair<int, std::vector<std::size_t>>, std::size_t> shared;
  std::map<int, std::size_t> per_prediction;
  for (std::size_t r = 0; r < n; ++r) {
    ++shared[{predictions[r], signatures[r]}];
    ++per_prediction[predictions[r]];
  }
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    total += static_cast<double>(shared[{predictions[r], signatures[r]}]) /
             static_cast<double>(per_prediction[predictions[r]]);
  }
  return total / static_cast<double>(n);
}

double faithfulness_correlation(const BatchFn& model, std::span<const double> attributions,
                                std::span<const double> x, std::span<const double> baseline,
                                std::size_t subset_size, std::size_t n_subsets, std::uint64_t seed) {
  const std::size_t d = x.size();
  subset_size = std::clamp<std::size_t>(subset_size, 1, d);
  Rng rng(seed);
  std::vector<std::size_t> order(d);
  Matrix batch(n_subsets + 1, d);
  std::copy(x.begin(), x.end(), batch.row(0).begin());
  std::vector<double> mass(n_subsets, 0.0);
  for (std::size_t s = 0; s < n_subsets; ++s) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto row = batch.row(s + 1);
    std::copy(x.begin(), x.end(), row.begin());
    for (std::size_t k = 0; k < subset_size; ++k) {
      row[order[k]] = baseline[order[k]];
      mass[s] += attributions[order[k]];
    }
  }
  const std::vector<double> out = model(batch);
  std::vector<double> drop(n_subsets);
  for (std::size_t s = 0; s < n_subsets; ++s) drop[s] = out[0] - out[s + 1];
  return (pearson(mass, drop) + 1.0) / 2.0;
}

double faithfulness_estimate(const BatchFn& model, std::span<const double> attributions,
                             std::span<const double> x, std::span<const double> baseline) {
  const std::size_t d = x.size();
  Matrix batch(d + 1, d);
  for (std::size_t r = 0; r <= d; ++r) std::copy(x.begin(), x.end(), batch.row(r).begin());
  for (std::size_t i = 0; i < d; ++i) batch(i + 1, i) = baseline[i];
  const std::vector<double> out = model(batch);
  std::vector<double> drop(d);
  for (std::size_t i = 0; i < d; ++i) drop[i] = out[0] - out[i + 1];
  return (pearson(attributions, drop) + 1.0) / 2.0;
}

double parameter_randomization_score(double mean_correlation) {
  return clamp01((1.0 - mean_correlation) / 4.0 + 0.5);
}

double param_randomization_test(const ExplainFn& original, const ExplainFn& randomized,
                                const Matrix& rows) {
  if (rows.rows() == 0) return 0.5;
  double total = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto a = original(rows.row(r));
    const auto b = randomized(rows.row(r));
    total += pearson(a, b);
  }
  return parameter_randomization_score(total / static_cast<double>(rows.rows()));
}

double random_logit_test(const ExplainClassFn& explain, const Matrix& rows,
                         std::span<const int> predicted) {
  if (rows.rows() == 0) return 0.5;
  double total = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const int c = predicted[r];
    const auto own = explain(rows.row(r), c);
    const auto other = explain(rows.row(r), 1 - c);
    total += pearson(own, other);
  }
  return clamp01((1.0 - total / static_cast<double>(rows.rows())) / 2.0);
}

double sparseness(std::span<const double> attributions) {
  const std::size_t n = attributions.size();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(attributions[i]);
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  if (n == 0 || total <= 0.0) return 0.0;
  std::sort(a.begin(), a.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * a[i];
  }
  return clamp01(acc / (static_cast<double>(n) * total));
}

double complexity_entropy(std::span<const double> attributions) {
  const std::size_t d = attributions.size();
  double total = 0.0;
  for (double v : attributions) total += std::abs(v);
  if (d == 0 || total <= 0.0) return 0.0;
  if (d == 1) return 1.0;
  double h = 0.0;
  for (double v : attributions) {
    const double p = std::abs(v) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return clamp01(1.0 - h / std::log(static_cast<double>(d)));
}

XaiSubscores explainability_dimension(const XaiMetrics& m) {
  XaiSubscores s;
  s.metrics = m;
  s.robustness_expl = (m.local_lipschitz + m.consistency) / 2.0;
  s.faithfulness = (m.faithfulness_correlation + m.faithfulness_estimate) / 2.0;
  s.randomization = (m.param_randomization + m.random_logit) / 2.0;
  s.complexity = (m.sparseness + m.complexity_entropy) / 2.0;
  s.dimension = (s.robustness_expl + s.faithfulness + s.randomization + s.complexity) / 4.0;
  return s;
}

}  // namespace mirai::xai
