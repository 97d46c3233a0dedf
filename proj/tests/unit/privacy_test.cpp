#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mirai/privacy.hpp"

namespace mirai::privacy {
namespace {

data::LabeledData rows_with_x0(std::vector<double> x0, int label) {
  data::LabeledData d;
  const std::size_t n = x0.size();
  d.x = Matrix(n, 1, std::move(x0));
  d.y.assign(d.x.rows(), label);
  d.group.assign(d.x.rows(), 0);
  return d;
}

// The model's output is the row's single feature, so tests choose confidences directly.
models::ClassifierHandle identity_model() {
  return models::make_function_handle("id", [](std::span<const double> z) { return z[0]; });
}

TEST(MembershipInference, ConstantConfidence) {
  const MembershipEvalSet set{rows_with_x0(std::vector<double>(12, 0.9), 1),
                              rows_with_x0(std::vector<double>(12, 0.9), 1)};
  const auto r = mi_attack(identity_model(), set);
  EXPECT_EQ(r.attack_accuracy, 0.5);
  EXPECT_EQ(r.mi_privacy, 1.0);
  EXPECT_TRUE(r.flags.empty());
}

TEST(MembershipInference, PerfectlySeparable) {
  const MembershipEvalSet set{rows_with_x0(std::vector<double>(12, 0.99), 1),
                              rows_with_x0(std::vector<double>(12, 0.51), 1)};
  const auto r = mi_attack(identity_model(), set);
  EXPECT_EQ(r.attack_accuracy, 1.0);
  EXPECT_EQ(r.mi_privacy, 0.0);
}

TEST(MembershipInference, HalfSeparable) {
  std::vector<double> members(12, 0.6);
  std::fill(members.begin(), members.begin() + 6, 0.99);
  const MembershipEvalSet set{rows_with_x0(members, 1), rows_with_x0(std::vector<double>(12, 0.6), 1)};
  const auto r = mi_attack(identity_model(), set);
  EXPECT_DOUBLE_EQ(r.attack_accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.mi_privacy, 0.5);
}

TEST(MembershipInference, UsesTrueLabelConfidence) {
  // Label 0 rows: confidence is 1 - p.
  const MembershipEvalSet set{rows_with_x0(std::vector<double>(12, 0.01), 0),
                              rows_with_x0(std::vector<double>(12, 0.49), 0)};
  EXPECT_EQ(mi_attack(identity_model(), set).mi_privacy, 0.0);
}

TEST(MembershipInference, SmallSetIsFlagged) {
  const MembershipEvalSet set{rows_with_x0({0.7, 0.8}, 1), rows_with_x0({0.7, 0.6}, 1)};
  EXPECT_FALSE(mi_attack(identity_model(), set).flags.empty());
}

// Balanced accuracy of "member iff stat >= t" at every candidate threshold.
double exhaustive_threshold(const std::vector<double>& m, const std::vector<double>& n) {
  std::vector<double> cuts(m);
  cuts.insert(cuts.end(), n.begin(), n.end());
  cuts.push_back(INFINITY);
  double best = 0.0;
  for (double t : cuts) {
    double tp = 0, tn = 0;
    for (double v : m) tp += v >= t;
    for (double v : n) tn += v < t;
    best = std::max(best, 0.5 * (tp / m.size() + tn / n.size()));
  }
  return best;
}

TEST(MembershipInference, ThresholdSweepMatchesExhaustiveAndIsMonotoneInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> level(0, 9);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> m(1 + rng() % 15), n(1 + rng() % 15);
    for (double& v : m) v = level(rng) / 10.0 + 0.05;
    for (double& v : n) v = level(rng) / 10.0;
    const double acc = best_threshold_accuracy(m, n);
    EXPECT_DOUBLE_EQ(acc, exhaustive_threshold(m, n));
    auto f = [](double v) { return std::exp(3 * v) - 7.0; };
    std::vector<double> fm(m), fn(n);
    std::transform(m.begin(), m.end(), fm.begin(), f);
    std::transform(n.begin(), n.end(), fn.begin(), f);
    EXPECT_DOUBLE_EQ(best_threshold_accuracy(fm, fn), acc);
    const double priv = mi_privacy_from_accuracy(acc);
    EXPECT_DOUBLE_EQ(priv, 1.0 - std::max(0.0, 2 * acc - 1));
    // Identical multisets leak nothing.
    EXPECT_EQ(mi_privacy_from_accuracy(best_threshold_accuracy(m, m)), 1.0);
  }
}

TEST(MembershipSet, BalancedAndDeterministic) {
  const auto train = rows_with_x0(std::vector<double>(30, 0.2), 1);
  const auto test = rows_with_x0(std::vector<double>(12, 0.3), 0);
  const auto a = make_membership_set(train, test, 0, 9);
  EXPECT_EQ(a.members.size(), 12u);
  EXPECT_EQ(a.non_members.size(), 12u);
  const auto b = make_membership_set(train, test, 0, 9);
  EXPECT_EQ(a.members.x, b.members.x);
}

// KNN utility: fraction of the k nearest (ties by index) sharing the query label,
// normalized by k.
double knn_utility(const std::vector<std::size_t>& subset, const std::vector<double>& dist,
                   const std::vector<int>& y, int label, std::size_t k) {
  std::vector<std::size_t> s(subset);
  std::sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  });
  double u = 0.0;
  for (std::size_t i = 0; i < std::min(k, s.size()); ++i) u += y[s[i]] == label;
  return u / static_cast<double>(k);
}

// Exact Shapley values over all subsets of `players`.
std::vector<double> subset_shapley(const std::vector<std::size_t>& players, const std::vector<double>& dist,
                                   const std::vector<int>& y, int label, std::size_t k, std::size_t n_total) {
  const std::size_t n = players.size();
  std::vector<double> phi(n_total, 0.0);
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t i = 1; i <= n; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (mask & (1u << p)) continue;
      std::vector<std::size_t> s;
      for (std::size_t q = 0; q < n; ++q) {
        if (mask & (1u << q)) s.push_back(players[q]);
      }
      const double w = fact[s.size()] * fact[n - s.size() - 1] / fact[n];
      const double without = knn_utility(s, dist, y, label, k);
      s.push_back(players[p]);
      phi[players[p]] += w * (knn_utility(s, dist, y, label, k) - without);
    }
  }
  return phi;
}

TEST(KnnShapley, PointMatchesExhaustiveSubsets) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 6;
    const std::size_t k = 1 + rng() % 4;
    Matrix x(n, 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse coordinates make distance ties common.
      x(i, 0) = std::round(normal(rng));
      x(i, 1) = std::round(normal(rng));
      y[i] = static_cast<int>(rng() % 2);
    }
    const std::vector<double> q{0.0, 0.0};
    const int label = static_cast<int>(rng() % 2);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1);
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const auto oracle = subset_shapley(all, dist, y, label, k, n);
    const auto got = knn_shapley_point(x, y, q, label, k);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(got[i], oracle[i], 1e-9);
      sum += got[i];
    }
    // Efficiency: values sum to U(full) - U(empty).
    EXPECT_NEAR(sum, knn_utility(all, dist, y, label, k), 1e-9);
  }
}

TEST(KnnShapley, LeaveSelfOutMatchesExhaustive) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + t % 5;
    const std::size_t k = 1 + rng() % 3;
    Matrix x(n, 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = normal(rng);
      x(i, 1) = normal(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    std::vector<double> expected(n, 0.0);
    for (std::size_t q = 0; q < n; ++q) {
      std::vector<double> dist(n);
      std::vector<std::size_t> others;
      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::pow(x(i, 0) - x(q, 0), 2) + std::pow(x(i, 1) - x(q, 1), 2);
        if (i != q) others.push_back(i);
      }
      const auto phi = subset_shapley(others, dist, y, y[q], k, n);
      for (std::size_t i : others) expected[i] += phi[i] / static_cast<double>(n - 1);
    }
    const auto got = knn_shapley(x, y, k);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], expected[i], 1e-9);
  }
}

TEST(KnnShapley, DisagreeingRecordIsNonPositive) {
  // Record 4 sits inside a cluster of the other label.
  Matrix x(5, 1, std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.15});
  const std::vector<int> y{1, 1, 1, 1, 0};
  const auto v = knn_shapley_point(x, y, std::vector<double>{0.12}, 1, 3);
  EXPECT_LE(v[4], 0.0);
}

TEST(KnnShapley, IdenticalRecordsGetIdenticalValues) {
  Matrix x(4, 2, std::vector<double>{0, 0, 1, 1, 1, 1, 3, 0});
  const std::vector<int> y{0, 1, 1, 0};
  const auto v = knn_shapley(x, y, 2);
  EXPECT_DOUBLE_EQ(v[1], v[2]);
}

TEST(Shapr, Examples) {
  EXPECT_EQ(shapr_privacy(std::vector<double>{-1, 0, -0.5}), 1.0);
  EXPECT_EQ(shapr_privacy(std::vector<double>{1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(shapr_privacy(std::vector<double>{2, 1, 0, -1}), 0.625);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0, 10);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + t % 20);
    for (double& a : v) a = normal(rng);
    const double s = shapr_privacy(v);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(PrivacyDimension, Examples) {
  PrivacyRecord r;
  r.mi_privacy = 0.4762;
  r.shapr_privacy = 0.5566;
  EXPECT_NEAR(privacy_dimension(r), 0.5164, 5e-5);
  r.mi_privacy = 0.7158;
  r.shapr_privacy = 0.5565;
  EXPECT_NEAR(privacy_dimension(r), 0.63615, 1e-12);
  r.mi_privacy = r.shapr_privacy = 1.0;
  EXPECT_EQ(privacy_dimension(r), 1.0);
}

TEST(EvaluatePrivacy, BoundedAndDeterministic) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  data::LabeledData train, test;
  train.x = Matrix(60, 3);
  test.x = Matrix(30, 3);
  for (double& v : train.x.data()) v = normal(rng);
  for (double& v : test.x.data()) v = normal(rng);
  for (std::size_t i = 0; i < 60; ++i) train.y.push_back(train.x(i, 0) > 0);
  for (std::size_t i = 0; i < 30; ++i) test.y.push_back(test.x(i, 0) > 0);
  train.group.assign(60, 0);
  test.group.assign(30, 0);
  const auto h = models::train_decision_tree(train, {.max_depth = 4});
  for (Embedding e : {Embedding::kPredictions, Embedding::kFeatures}) {
    const auto a = evaluate_privacy(h, train, test, {.embedding = e}, 3);
    const auto b = evaluate_privacy(h, train, test, {.embedding = e}, 3);
    EXPECT_EQ(a.mi_privacy, b.mi_privacy);
    EXPECT_EQ(a.record_values, b.record_values);
    EXPECT_EQ(a.record_values.size(), 60u);
    EXPECT_DOUBLE_EQ(a.mi_privacy, mi_privacy_from_accuracy(a.attack_accuracy));
    for (double v : {a.mi_privacy, a.shapr_privacy, privacy_dimension(a)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

}  // namespace
}  // namespace mirai::privacy
