#include <algorithm>
#include <cmath>
#include <numeric>

#include "mirai/robust.hpp"
#include "mirai/simd.hpp"

namespace mirai::robust {

namespace {

Matrix pooled(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw MetricError("mmd: samples have different widths");
  Matrix z(x.rows() + y.rows(), x.cols());
  std::copy(x.data().begin(), x.data().end(), z.data().begin());
  std::copy(y.data().begin(), y.data().end(), z.data().begin() + static_cast<std::ptrdiff_t>(x.data().size()));
  return z;
}

Matrix kernel_matrix(const Matrix& z, double sigma) {
  Matrix k;
  simd::pairwise_squared_distances(z, z, k);
  const double scale = -1.0 / (2.0 * sigma * sigma);
  for (double& v : k.data()) v = std::exp(scale * v);
  return k;
}

// Statistic over a pooled kernel matrix where `idx[0..n)` is the first sample.
double unbiased_from_kernel(const Matrix& k, std::span<const std::size_t> idx, std::size_t n) {
  const std::size_t m = idx.size() - n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto row = k.row(idx[a]);
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const double v = row[idx[b]];
      if (b < n) {
        sxx += v;
      } else if (a >= n) {
        syy += v;
      } else {
        sxy += v;
      }
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return 2.0 * sxx / (dn * (dn - 1.0)) + 2.0 * syy / (dm * (dm - 1.0)) - 2.0 * sxy / (dn * dm);
}

void check_sizes(const Matrix& x, const Matrix& y) {
  if (x.rows() < 2 || y.rows() < 2) throw MetricError("mmd: each sample needs at least two rows");
}

}  // namespace

Bandwidth median_heuristic(const Matrix& x, const Matrix& y) {
  const Matrix z = pooled(x, y);
  Matrix d2;
  simd::pairwise_squared_distances(z, z, d2);
  std::vector<double> dist;
  dist.reserve(z.rows() * (z.rows() - 1) / 2);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t j = i + 1; j < z.rows(); ++j) dist.push_back(std::sqrt(d2(i, j)));
  }
  if (dist.empty()) return {1.0, true};
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  if (!(median > 0.0)) return {1.0, true};
  return {median, false};
}

double mmd2_unbiased(const Matrix& x, const Matrix& y, double sigma) {
  check_sizes(x, y);
  if (!(sigma > 0.0)) throw MetricError("mmd: bandwidth must be positive");
  const Matrix k = kernel_matrix(pooled(x, y), sigma);
  std::vector<std::size_t> idx(k.rows());
  std::iota(idx.begin(), idx.end(), 0);
  return unbiased_from_kernel(k, idx, x.rows());
}

double mmd2_biased(const Matrix& x, const Matrix& y, double sigma) {
  if (x.rows() == 0 || y.rows() == 0) throw MetricError("mmd: empty sample");
  if (!(sigma > 0.0)) throw MetricError("mmd: bandwidth must be positive");
  const Matrix k = kernel_matrix(pooled(x, y), sigma);
  const std::size_t n = x.rows(), total = k.rows();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t a = 0; a < total; ++a) {
    for (std::size_t b = 0; b < total; ++b) {
      const double v = k(a, b);
      if (a < n && b < n) {
        sxx += v;
      } else if (a >= n && b >= n) {
        syy += v;
      } else if (a < n) {
        sxy += v;
      }
    }
  }
  const double dn = static_cast<double>(n), dm = static_cast<double>(total - n);
  return std::max(0.0, sxx / (dn * dn) + syy / (dm * dm) - 2.0 * sxy / (dn * dm));
}

PermutationTest mmd_permutation_test(const Matrix& x, const Matrix& y, std::size_t n_permutations,
                                     std::uint64_t seed, std::optional<double> sigma) {
  check_sizes(x, y);
  if (n_permutations == 0) throw ConfigError("permutation test needs at least one permutation");
  PermutationTest out;
  if (sigma) {
    if (!(*sigma > 0.0)) throw ConfigError("mmd bandwidth must be positive");
    out.sigma = *sigma;
  } else {
    const Bandwidth bw = median_heuristic(x, y);
    out.sigma = bw.sigma;
    out.bandwidth_fallback = bw.fallback;
  }
  const Matrix k = kernel_matrix(pooled(x, y), out.sigma);
  std::vector<std::size_t> idx(k.rows());
  std::iota(idx.begin(), idx.end(), 0);
  out.statistic = unbiased_from_kernel(k, idx, x.rows());
  // Relative slack so permutations that reproduce the observed split count as ties.
  const double slack = 1e-12 * (std::abs(out.statistic) + 1.0);
  Rng rng(seed);
  std::size_t at_least = 0;
  for (std::size_t p = 0; p < n_permutations; ++p) {
    std::shuffle(idx.begin(), idx.end(), rng);
    if (unbiased_from_kernel(k, idx, x.rows()) >= out.statistic - slack) ++at_least;
  }
  out.p_value = static_cast<double>(1 + at_least) / static_cast<double>(n_permutations + 1);
  return out;
}

}  // namespace mirai::robust
