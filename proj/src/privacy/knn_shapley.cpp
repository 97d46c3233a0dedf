#include <algorithm>
#include <numeric>

#include "mirai/privacy.hpp"
#include "mirai/simd.hpp"

namespace mirai::privacy {

namespace {

// Recursion over neighbours already sorted nearest first.
void shapley_recursion(std::span<const std::size_t> order, std::span<const int> labels, int query_label,
                       std::size_t k, std::span<double> out) {
  const std::size_t n = order.size();
  auto match = [&](std::size_t pos) { return labels[order[pos]] == query_label ? 1.0 : 0.0; };
  // The farthest point only counts when fewer than k others precede it.
  double s = match(n - 1) / static_cast<double>(std::max(n, k));
  out[order[n - 1]] = s;
  for (std::size_t pos = n - 1; pos-- > 0;) {
    const double i = static_cast<double>(pos + 1);  // 1-based rank
    s += (match(pos) - match(pos + 1)) / static_cast<double>(k) *
         std::min(static_cast<double>(k), i) / i;
    out[order[pos]] = s;
  }
}

}  // namespace

std::vector<double> knn_shapley_point(const Matrix& train_x, std::span<const int> train_y,
                                      std::span<const double> query, int query_label, std::size_t k) {
  if (k == 0) throw ConfigError("knn shapley: k must be at least 1");
  const std::size_t n = train_x.rows();
  if (n == 0) throw MetricError("knn shapley: empty training set");
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = simd::squared_distance(train_x.row(i), query);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<double> out(n, 0.0);
  shapley_recursion(order, train_y, query_label, k, out);
  return out;
}

std::vector<double> knn_shapley(const Matrix& x, std::span<const int> y, std::size_t k) {
  if (k == 0) throw ConfigError("knn shapley: k must be at least 1");
  const std::size_t n = x.rows();
  if (n < 2) throw MetricError("knn shapley needs at least two records");
  Matrix d2;
  simd::pairwise_squared_distances(x, x, d2);
  std::vector<double> total(n, 0.0), values(n, 0.0);
  std::vector<std::size_t> order;
  order.reserve(n - 1);
  for (std::size_t q = 0; q < n; ++q) {
    order.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i != q) order.push_back(i);
    }
    const auto row = d2.row(q);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
    shapley_recursion(order, y, y[q], k, values);
    for (std::size_t i : order) total[i] += values[i];
  }
  for (double& v : total) v /= static_cast<double>(n - 1);
  return total;
}

double shapr_privacy(std::span<const double> values) {
  if (values.empty()) return 1.0;
  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  if (!(top > 0.0)) return 1.0;
  double risk = 0.0;
  for (double v : values) risk += std::max(v, 0.0) / top;
  return clamp01(1.0 - risk / static_cast<double>(values.size()));
}

}  // namespace mirai::privacy
