#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mirai/xai.hpp"

namespace mirai::xai {
namespace {

using RowFn = std::function<double(std::span<const double>)>;

BatchFn batch(RowFn f) {
  return [f](const Matrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = f(x.row(r));
    return out;
  };
}

Matrix random_matrix(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(n, d);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

// Shapley values by averaging marginal contributions over all d! orderings of
// the interventional value function v(S) = mean_b f(x_S, b_rest).
std::vector<double> brute_force_shapley(const RowFn& f, std::span<const double> x, const Matrix& bg) {
  const std::size_t d = x.size();
  auto value = [&](const std::vector<char>& in) {
    double total = 0.0;
    std::vector<double> z(d);
    for (std::size_t b = 0; b < bg.rows(); ++b) {
      for (std::size_t i = 0; i < d; ++i) z[i] = in[i] ? x[i] : bg(b, i);
      total += f(z);
    }
    return total / static_cast<double>(bg.rows());
  };
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(d, 0.0);
  std::size_t count = 0;
  do {
    std::vector<char> in(d, 0);
    double prev = value(in);
    for (std::size_t i : order) {
      in[i] = 1;
      const double cur = value(in);
      phi[i] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= static_cast<double>(count);
  return phi;
}

// A bounded nonlinear function with interactions between every feature pair.
RowFn random_model(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> w(d), v(d * d);
  for (double& a : w) a = normal(rng);
  for (double& a : v) a = 0.5 * normal(rng);
  return [w, v, d](std::span<const double> z) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      s += w[i] * z[i];
      for (std::size_t j = i + 1; j < d; ++j) s += v[i * d + j] * z[i] * z[j];
    }
    return 1.0 / (1.0 + std::exp(-s));
  };
}

TEST(KernelShap, FullEnumerationMatchesPermutationShapley) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + trial % 4;
    const RowFn f = random_model(d, rng);
    const Matrix bg = random_matrix(5, d, rng);
    const Matrix x = random_matrix(1, d, rng);
    const Explainer e(batch(f), bg, {.budget = 256, .seed = 1});
    ASSERT_TRUE(e.exact());
    const auto a = e.explain(x.row(0));
    const auto oracle = brute_force_shapley(f, x.row(0), bg);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(a.values[i], oracle[i], 1e-6);
    const double sum = std::accumulate(a.values.begin(), a.values.end(), a.base_value);
    EXPECT_NEAR(sum, f(x.row(0)), 1e-6);
  }
}

TEST(KernelShap, LinearModelGivesCentredWeights) {
  std::mt19937_64 rng(3);
  const std::vector<double> w{0.3, -0.2, 0.05, 0.1};
  const RowFn f = [&](std::span<const double> z) {
    double s = 0.5;
    for (std::size_t i = 0; i < 4; ++i) s += 0.1 * w[i] * z[i];
    return s;
  };
  const Matrix bg = random_matrix(20, 4, rng);
  const Matrix x = random_matrix(1, 4, rng);
  const auto a = Explainer(batch(f), bg, {}).explain(x.row(0));
  for (std::size_t i = 0; i < 4; ++i) {
    double m = 0.0;
    for (std::size_t b = 0; b < bg.rows(); ++b) m += bg(b, i) / static_cast<double>(bg.rows());
    EXPECT_NEAR(a.values[i], 0.1 * w[i] * (x(0, i) - m), 1e-6);
  }
}

TEST(KernelShap, SymmetryAndDummy) {
  std::mt19937_64 rng(4);
  // Columns 0 and 1 are duplicates, column 3 is ignored.
  const RowFn f = [](std::span<const double> z) {
    return 1.0 / (1.0 + std::exp(-(z[0] + z[1] + z[0] * z[1] - 0.7 * z[2])));
  };
  Matrix bg = random_matrix(8, 4, rng);
  for (std::size_t b = 0; b < bg.rows(); ++b) bg(b, 1) = bg(b, 0);
  Matrix x = random_matrix(1, 4, rng);
  x(0, 1) = x(0, 0);
  const auto a = Explainer(batch(f), bg, {}).explain(x.row(0));
  EXPECT_NEAR(a.values[0], a.values[1], 1e-6);
  EXPECT_NEAR(a.values[3], 0.0, 1e-6);
}

TEST(KernelShap, SampledCoalitionsStayExactOnLinearModel) {
  std::mt19937_64 rng(5);
  const std::size_t d = 12;
  std::vector<double> w(d);
  std::normal_distribution<double> normal;
  for (double& v : w) v = 0.02 * normal(rng);
  const RowFn f = [&](std::span<const double> z) {
    double s = 0.5;
    for (std::size_t i = 0; i < d; ++i) s += w[i] * z[i];
    return s;
  };
  const Matrix bg = random_matrix(6, d, rng);
  const Matrix x = random_matrix(1, d, rng);
  const Explainer e(batch(f), bg, {.budget = 64, .seed = 9});
  EXPECT_FALSE(e.exact());
  const auto a = e.explain(x.row(0));
  double sum = a.base_value;
  for (std::size_t i = 0; i < d; ++i) {
    double m = 0.0;
    for (std::size_t b = 0; b < bg.rows(); ++b) m += bg(b, i) / static_cast<double>(bg.rows());
    EXPECT_NEAR(a.values[i], w[i] * (x(0, i) - m), 1e-6);
    sum += a.values[i];
  }
  EXPECT_NEAR(sum, f(x.row(0)), 1e-9);
  EXPECT_THROW(Explainer(batch(f), bg, {.budget = 10}), ConfigError);
}

TEST(KernelShap, SampledLocalAccuracyOnNonlinearModel) {
  std::mt19937_64 rng(6);
  const std::size_t d = 10;
  const RowFn f = random_model(d, rng);
  const Matrix bg = random_matrix(8, d, rng);
  const Explainer e(batch(f), bg, {.budget = 128, .seed = 2});
  for (int t = 0; t < 5; ++t) {
    const Matrix x = random_matrix(1, d, rng);
    const auto a = e.explain(x.row(0));
    const double sum = std::accumulate(a.values.begin(), a.values.end(), a.base_value);
    EXPECT_NEAR(sum, f(x.row(0)), 1e-2);
  }
}

TEST(KernelShap, OtherClassIsNegated) {
  std::mt19937_64 rng(7);
  const RowFn f = random_model(3, rng);
  const Matrix bg = random_matrix(4, 3, rng);
  const Matrix x = random_matrix(1, 3, rng);
  const Explainer e(batch(f), bg, {});
  const auto one = e.explain(x.row(0), 1);
  const auto zero = e.explain(x.row(0), 0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(one.values[i], -zero.values[i], 1e-12);
}

TEST(Lipschitz, ClosedForms) {
  const std::vector<double> x{0.3, -0.4};
  const ExplainFn constant = [](std::span<const double>) { return std::vector<double>{1, 2}; };
  const ExplainFn identity = [](std::span<const double> z) { return std::vector<double>(z.begin(), z.end()); };
  const ExplainFn triple = [](std::span<const double> z) {
    return std::vector<double>{3 * z[0], 3 * z[1]};
  };
  EXPECT_DOUBLE_EQ(local_lipschitz(constant, x, 0.1, 10, 1).aligned, 1.0);
  EXPECT_NEAR(local_lipschitz(identity, x, 0.1, 10, 1).aligned, 0.5, 1e-12);
  EXPECT_NEAR(local_lipschitz(triple, x, 0.1, 10, 1).aligned, 0.25, 1e-12);
}

TEST(Consistency, Examples) {
  const std::vector<std::vector<double>> same(4, {0.3, 0.1, 0.2});
  EXPECT_DOUBLE_EQ(consistency(same, std::vector<int>{1, 1, 1, 1}, 3), 1.0);
  const std::vector<std::vector<double>> groups{{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 1, 0}};
  EXPECT_DOUBLE_EQ(consistency(groups, std::vector<int>{1, 1, 0, 0}, 3), 1.0);
  EXPECT_DOUBLE_EQ(consistency(groups, std::vector<int>{1, 1, 1, 1}, 3), 0.5);
}

struct LinearCase {
  RowFn f;
  std::vector<double> x, baseline, exact;
};

LinearCase linear_case() {
  LinearCase c;
  const std::vector<double> w{0.05, -0.1, 0.2, 0.07, -0.03, 0.15};
  c.f = [w](std::span<const double> z) {
    double s = 0.4;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * z[i];
    return s;
  };
  c.x = {1.0, 0.5, -0.4, 0.9, 2.0, -1.2};
  c.baseline = {0.1, -0.2, 0.3, 0.0, 0.5, 0.2};
  for (std::size_t i = 0; i < w.size(); ++i) c.exact.push_back(w[i] * (c.x[i] - c.baseline[i]));
  return c;
}

TEST(Faithfulness, CorrelationExamples) {
  const auto c = linear_case();
  const auto model = batch(c.f);
  EXPECT_NEAR(faithfulness_correlation(model, c.exact, c.x, c.baseline, 2, 40, 1), 1.0, 1e-12);
  const std::vector<double> zero(6, 0.0);
  EXPECT_DOUBLE_EQ(faithfulness_correlation(model, zero, c.x, c.baseline, 2, 40, 1), 0.5);
  std::vector<double> neg = c.exact;
  for (double& v : neg) v = -v;
  EXPECT_NEAR(faithfulness_correlation(model, neg, c.x, c.baseline, 2, 40, 1), 0.0, 1e-12);
}

TEST(Faithfulness, EstimateExamples) {
  const auto c = linear_case();
  const auto model = batch(c.f);
  EXPECT_NEAR(faithfulness_estimate(model, c.exact, c.x, c.baseline), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(faithfulness_estimate(model, std::vector<double>(6, 0.0), c.x, c.baseline), 0.5);
  std::vector<double> neg = c.exact;
  for (double& v : neg) v = -v;
  EXPECT_NEAR(faithfulness_estimate(model, neg, c.x, c.baseline), 0.0, 1e-12);
}

TEST(Randomization, ParameterScoreMapping) {
  EXPECT_DOUBLE_EQ(parameter_randomization_score(1.0), 0.5);
  EXPECT_DOUBLE_EQ(parameter_randomization_score(0.0), 0.75);
  EXPECT_DOUBLE_EQ(parameter_randomization_score(-1.0), 1.0);
  Matrix rows(3, 3, std::vector<double>{1, 2, 3, 4, 5, 7, 0, 1, 0});
  const ExplainFn id = [](std::span<const double> z) { return std::vector<double>(z.begin(), z.end()); };
  EXPECT_NEAR(param_randomization_test(id, id, rows), 0.5, 1e-12);
}

TEST(Randomization, RandomLogit) {
  std::mt19937_64 rng(11);
  const Matrix rows = random_matrix(50, 8, rng);
  const std::vector<int> predicted(50, 1);
  const ExplainClassFn same = [](std::span<const double> z, int) {
    return std::vector<double>(z.begin(), z.end());
  };
  const ExplainClassFn negated = [](std::span<const double> z, int c) {
    std::vector<double> v(z.begin(), z.end());
    if (c == 0) for (double& a : v) a = -a;
    return v;
  };
  EXPECT_NEAR(random_logit_test(same, rows, predicted), 0.0, 1e-12);
  EXPECT_NEAR(random_logit_test(negated, rows, predicted), 1.0, 1e-12);
  auto noise = std::make_shared<std::mt19937_64>(12);
  const ExplainClassFn unrelated = [noise](std::span<const double> z, int) {
    std::normal_distribution<double> normal;
    std::vector<double> v(z.size());
    for (double& a : v) a = normal(*noise);
    return v;
  };
  EXPECT_NEAR(random_logit_test(unrelated, rows, predicted), 0.5, 0.1);
}

TEST(Sparseness, Examples) {
  EXPECT_NEAR(sparseness(std::vector<double>{2, 2, 2, 2}), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(sparseness(std::vector<double>{1, 0, 0, 0}), 0.75);
  EXPECT_DOUBLE_EQ(sparseness(std::vector<double>{0, 0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(sparseness(std::vector<double>{0, -1, 0, 0}), 0.75);
}

TEST(ComplexityEntropy, Examples) {
  EXPECT_DOUBLE_EQ(complexity_entropy(std::vector<double>{0, 5, 0}), 1.0);
  EXPECT_NEAR(complexity_entropy(std::vector<double>{1, 1, 1, 1}), 0.0, 1e-12);
  EXPECT_NEAR(complexity_entropy(std::vector<double>{0.9, 0.1}), 0.5310, 5e-5);
  EXPECT_DOUBLE_EQ(complexity_entropy(std::vector<double>{0, 0}), 0.0);
}

XaiMetrics paired(double robust, double faith, double random, double complexity) {
  return {robust, robust, faith, faith, random, random, complexity, complexity};
}

TEST(Dimension, PublishedSubcategories) {
  EXPECT_NEAR(explainability_dimension(paired(0.5619, 0.6105, 0.1101, 0.5000)).dimension, 0.4456, 5e-5);
  EXPECT_NEAR(explainability_dimension(paired(0.6988, 0.5571, 0.1730, 0.6117)).dimension, 0.5101, 1.5e-4);
  EXPECT_DOUBLE_EQ(explainability_dimension(paired(1, 1, 1, 1)).dimension, 1.0);
}

TEST(Dimension, IsMeanOfSubcategories) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  for (int t = 0; t < 100; ++t) {
    const XaiMetrics m{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const auto s = explainability_dimension(m);
    EXPECT_DOUBLE_EQ(s.robustness_expl, (m.local_lipschitz + m.consistency) / 2);
    EXPECT_DOUBLE_EQ(s.complexity, (m.sparseness + m.complexity_entropy) / 2);
    EXPECT_DOUBLE_EQ(s.dimension, (s.robustness_expl + s.faithfulness + s.randomization + s.complexity) / 4);
  }
}

TEST(Properties, MetricsBoundedOnRandomInputs) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + t % 9;
    std::vector<double> a(d);
    for (double& v : a) v = normal(rng);
    const double s = sparseness(a), c = complexity_entropy(a);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    const RowFn f = random_model(d, rng);
    std::vector<double> x(d), base(d, 0.0);
    for (double& v : x) v = normal(rng);
    const double fc = faithfulness_correlation(batch(f), a, x, base, 1, 10, t);
    const double fe = faithfulness_estimate(batch(f), a, x, base);
    EXPECT_GE(fc, 0.0);
    EXPECT_LE(fc, 1.0);
    EXPECT_GE(fe, 0.0);
    EXPECT_LE(fe, 1.0);
  }
}

data::LabeledData blob(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  data::LabeledData d;
  d.x = random_matrix(n, 4, rng);
  for (std::size_t i = 0; i < n; ++i) d.y.push_back(d.x(i, 0) + 0.5 * d.x(i, 1) > 0 ? 1 : 0);
  d.group.assign(n, 0);
  return d;
}

TEST(Evaluate, TreeIsRandomizationNeutral) {
  const auto train = blob(120, 1), test = blob(40, 2);
  const auto h = models::train_decision_tree(train, {.max_depth = 3});
  XaiConfig cfg;
  cfg.eval_rows = 10;
  cfg.background_rows = 8;
  cfg.lipschitz_rows = 3;
  const auto ev = evaluate_explainability(h, train, test, cfg, 5);
  EXPECT_DOUBLE_EQ(ev.scores.metrics.param_randomization, 0.5);
  EXPECT_DOUBLE_EQ(ev.scores.metrics.random_logit, 0.5);
  EXPECT_NE(std::find(ev.flags.begin(), ev.flags.end(),
                      "randomization_neutral:no_randomizable_parameters"),
            ev.flags.end());
  EXPECT_EQ(ev.rows.size(), 10u);
}

TEST(Evaluate, MlpScoresBoundedAndDeterministic) {
  const auto train = blob(120, 3), test = blob(40, 4);
  const auto h = models::train_mlp(train, {.hidden_sizes = {6}, .epochs = 10, .seed = 1});
  XaiConfig cfg;
  cfg.eval_rows = 8;
  cfg.background_rows = 6;
  cfg.lipschitz_rows = 2;
  const auto a = evaluate_explainability(h, train, test, cfg, 9);
  const auto b = evaluate_explainability(h, train, test, cfg, 9);
  const auto& m = a.scores.metrics;
  for (double v : {m.local_lipschitz, m.consistency, m.faithfulness_correlation, m.faithfulness_estimate,
                   m.param_randomization, m.random_logit, m.sparseness, m.complexity_entropy,
                   a.scores.dimension}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(a.scores.dimension, b.scores.dimension);
  EXPECT_DOUBLE_EQ(m.random_logit, 1.0);
}

}  // namespace
}  // namespace mirai::xai
