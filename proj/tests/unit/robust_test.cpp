#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mirai/robust.hpp"

namespace mirai::robust {
namespace {

models::ClassifierHandle linear_x0() {
  return models::make_function_handle("linear", [](std::span<const double> z) {
    return 1.0 / (1.0 + std::exp(-4.0 * z[0]));
  });
}

models::ClassifierHandle constant(double p) {
  return models::make_function_handle("constant", [p](std::span<const double>) { return p; });
}

// x0 <= 0 ? (x1 <= 0 ? 0 : 1) : (x1 <= 0.5 ? 1 : 0)
models::ClassifierHandle depth2_tree() {
  models::Tree t;
  t.nodes = {{0, 0.0, 1, 2, 0.0}, {1, 0.0, 3, 4, 0.0}, {1, 0.5, 5, 6, 0.0},
             {-1, 0, -1, -1, 0.0}, {-1, 0, -1, -1, 1.0}, {-1, 0, -1, -1, 1.0}, {-1, 0, -1, -1, 0.0}};
  return {"tree", std::make_shared<models::DecisionTreeModel>(t, 2, 0.0)};
}

TEST(Hsja, LinearBoundary) {
  const auto h = linear_x0();
  const std::vector<double> x{1.0, 0.0};
  const auto a = hsja_attack(h, x, 1, {}, 7);
  ASSERT_TRUE(a.success);
  EXPECT_EQ(models::hard_label(h.predict_one(a.adversarial)), 0);
  EXPECT_LE(a.norm, 1.5);
  EXPECT_GE(a.norm, 1.0 - 1e-9);
  EXPECT_LE(a.queries, 2000u);
}

TEST(Hsja, ConstantClassifierFails) {
  const auto a = hsja_attack(constant(0.8), std::vector<double>{0.2, 0.3}, 1, {.max_queries = 500}, 1);
  EXPECT_FALSE(a.success);
  EXPECT_LE(a.queries, 500u);
}

TEST(Hsja, NormHistoryIsMonotone) {
  const auto h = models::make_function_handle("curved", [](std::span<const double> z) {
    return 1.0 / (1.0 + std::exp(-(z[0] * z[0] + 0.5 * z[1] - z[2] * z[1] - 1.0)));
  });
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.5);
  int attacked = 0;
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x{normal(rng), normal(rng), normal(rng)};
    const int label = models::hard_label(h.predict_one(x));
    const auto a = hsja_attack(h, x, label, {.max_queries = 800}, t);
    if (!a.success) continue;
    ++attacked;
    EXPECT_NE(models::hard_label(h.predict_one(a.adversarial)), label);
    for (std::size_t i = 1; i < a.norm_history.size(); ++i) {
      EXPECT_LE(a.norm_history[i], a.norm_history[i - 1]);
    }
    EXPECT_DOUBLE_EQ(a.norm_history.back(), a.norm);
  }
  EXPECT_GT(attacked, 5);
}

// Minimal flip distance by exhaustive search on a 0.01 grid.
double grid_oracle(const models::ClassifierHandle& h, std::span<const double> x) {
  const int label = models::hard_label(h.predict_one(x));
  double best = INFINITY;
  std::vector<double> z(2);
  for (int i = -300; i <= 300; ++i) {
    for (int j = -300; j <= 300; ++j) {
      z[0] = i * 0.01;
      z[1] = j * 0.01;
      const double d = std::hypot(z[0] - x[0], z[1] - x[1]);
      if (d < best && models::hard_label(h.predict_one(z)) != label) best = d;
    }
  }
  return best;
}

TEST(Hsja, DepthTwoTreeAgainstGrid) {
  const auto h = depth2_tree();
  const std::vector<std::vector<double>> starts{{-1.0, -1.0}, {1.0, 1.5}, {-0.5, 1.2}, {0.8, -0.7}};
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto& x = starts[s];
    const int label = models::hard_label(h.predict_one(x));
    const auto a = hsja_attack(h, x, label, {}, 100 + s);
    ASSERT_TRUE(a.success);
    const double oracle = grid_oracle(h, x);
    EXPECT_LE(a.norm, 2.0 * oracle + 0.01) << "start " << s;
  }
}

data::LabeledData points_at_distance(double dist, std::size_t n) {
  data::LabeledData d;
  d.x = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    d.x(i, 0) = label ? dist : -dist;
    d.x(i, 1) = static_cast<double>(i) * 0.1;
    d.y.push_back(label);
  }
  d.group.assign(n, 0);
  return d;
}

TEST(HsjaScoreTest, Examples) {
  AttackBudget b;
  b.n_eval_points = 10;
  b.seed = 4;
  const auto far = hsja_robustness_score(linear_x0(), points_at_distance(2 * b.epsilon, 10), b);
  EXPECT_EQ(far.evaluated, 10u);
  EXPECT_DOUBLE_EQ(far.score, 1.0);
  const auto near = hsja_robustness_score(linear_x0(), points_at_distance(b.epsilon / 10, 10), b);
  EXPECT_DOUBLE_EQ(near.score, 0.0);
  auto ones = points_at_distance(1.0, 10);
  b.max_queries = 200;
  const auto flat = hsja_robustness_score(constant(0.9), ones, b);
  EXPECT_DOUBLE_EQ(flat.score, 1.0);
  EXPECT_EQ(flat.evaluated, 5u);
}

TEST(RobustnessDimension, Examples) {
  EXPECT_NEAR(robustness_dimension(0.9558, 0.7794), 0.8676, 5e-5);
  EXPECT_NEAR(robustness_dimension(0.9237, 0.8224), 0.87305, 1e-9);
  EXPECT_DOUBLE_EQ(robustness_dimension(1, 0), 0.5);
}

Matrix gaussian(std::size_t n, std::size_t d, double mu, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(mu, 1.0);
  Matrix m(n, d);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

TEST(Mmd, BiasedIsZeroOnIdenticalSamples) {
  std::mt19937_64 rng(1);
  const Matrix x = gaussian(50, 3, 0.0, rng);
  EXPECT_NEAR(mmd2_biased(x, x, 1.3), 0.0, 1e-12);
  const Matrix y = gaussian(40, 3, 0.5, rng);
  EXPECT_GE(mmd2_biased(x, y, 0.7), 0.0);
}

TEST(Mmd, UnbiasedNullWithinThreeStandardErrors) {
  std::vector<double> stats;
  for (std::uint64_t s = 0; s < 60; ++s) {
    std::mt19937_64 rng(1000 + s);
    const Matrix x = gaussian(200, 1, 0.0, rng), y = gaussian(200, 1, 0.0, rng);
    stats.push_back(mmd2_unbiased(x, y, 1.0));
  }
  const double m = mean(stats);
  double var = 0.0;
  for (double v : stats) var += (v - m) * (v - m);
  var /= static_cast<double>(stats.size() - 1);
  const double se = std::sqrt(var / static_cast<double>(stats.size()));
  EXPECT_LE(std::abs(m), 3 * se);
}

TEST(Mmd, ShiftedGaussiansRejected) {
  std::mt19937_64 rng(2);
  const Matrix x = gaussian(200, 1, 0.0, rng), y = gaussian(200, 1, 3.0, rng);
  const auto t = mmd_permutation_test(x, y, 200, 5, 1.0);
  EXPECT_LT(t.p_value, 0.01);
  EXPECT_DOUBLE_EQ(t.p_value, 1.0 / 201.0);
}

TEST(Mmd, MedianHeuristicFallback) {
  const Matrix same(5, 2, 1.5);
  const auto bw = median_heuristic(same, same);
  EXPECT_TRUE(bw.fallback);
  EXPECT_EQ(bw.sigma, 1.0);
  Matrix a(2, 1, std::vector<double>{0, 1}), b(2, 1, std::vector<double>{3, 6});
  // Pairwise distances of {0,1,3,6}: 1,3,6,2,5,3 -> median 3.
  EXPECT_DOUBLE_EQ(median_heuristic(a, b).sigma, 3.0);
}

TEST(Mmd, UnbiasedConvergesToBiased) {
  std::mt19937_64 rng(9);
  for (std::size_t n : {25, 50, 100, 200, 400}) {
    const Matrix x = gaussian(n, 2, 0.0, rng), y = gaussian(n, 2, 0.5, rng);
    const double gap = std::abs(mmd2_biased(x, y, 1.0) - mmd2_unbiased(x, y, 1.0));
    EXPECT_LE(gap * static_cast<double>(n), 4.0) << "n=" << n;
  }
}

// Kolmogorov-Smirnov distance of a sample from Uniform(0,1).
double ks_uniform(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, (i + 1) / n - p[i], p[i] - i / n});
  }
  return d;
}

TEST(Mmd, NullPermutationPValuesAreUniform) {
  std::vector<double> p;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    std::mt19937_64 rng(5000 + rep);
    const Matrix x = gaussian(30, 2, 0.0, rng), y = gaussian(30, 2, 0.0, rng);
    p.push_back(mmd_permutation_test(x, y, 200, rep).p_value);
  }
  // Critical value at alpha = 0.01 for n = 200.
  EXPECT_LT(ks_uniform(p), 1.628 / std::sqrt(200.0));
}

data::LabeledData drift_batch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  data::LabeledData d;
  d.x = Matrix(n, 3);
  for (double& v : d.x.data()) v = u(rng);
  d.y.assign(n, 1);
  d.group.assign(n, 0);
  return d;
}

TEST(Drift, ConstantModelScoresOne) {
  const auto d = drift_robustness(constant(0.3), drift_batch(100, 1), {.seed = 3});
  EXPECT_DOUBLE_EQ(d.score, 1.0);
  EXPECT_EQ(d.level_p_values.size(), 4u);
}

TEST(Drift, SensitiveModelScoresNearZero) {
  const auto sign = models::make_function_handle("sign", [](std::span<const double> z) {
    return z[0] > 0 ? 1.0 : 0.0;
  });
  const auto d = drift_robustness(sign, drift_batch(100, 2), {.levels = {3.0, 5.0}, .seed = 3});
  for (double p : d.level_p_values) EXPECT_NEAR(p, 1.0 / 201.0, 1e-12);
  EXPECT_LT(d.score, 0.01);
}

TEST(Drift, ScoreIsMeanOfLevels) {
  const auto smooth = models::make_function_handle("smooth", [](std::span<const double> z) {
    return 1.0 / (1.0 + std::exp(-(z[0] - 1.0)));
  });
  const auto d = drift_robustness(smooth, drift_batch(80, 3), {.levels = {0.1, 0.0, 0.4}, .seed = 5});
  ASSERT_EQ(d.level_p_values.size(), 2u);
  EXPECT_DOUBLE_EQ(d.score, (d.level_p_values[0] + d.level_p_values[1]) / 2);
  EXPECT_NE(std::find(d.flags.begin(), d.flags.end(), "drift:zero_level_skipped"), d.flags.end());
  const auto again = drift_robustness(smooth, drift_batch(80, 3), {.levels = {0.1, 0.0, 0.4}, .seed = 5});
  EXPECT_EQ(d.level_p_values, again.level_p_values);
  EXPECT_THROW(drift_robustness(smooth, drift_batch(10, 3), {.n_permutations = 50}), ConfigError);
}

}  // namespace
}  // namespace mirai::robust
