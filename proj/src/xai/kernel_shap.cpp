#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include "mirai/simd.hpp"
#include "mirai/xai.hpp"

namespace mirai::xai {

BatchFn batch_fn(const models::ClassifierHandle& handle) {
  return [handle](const Matrix& x) { return handle.predict_proba(x); };
}

namespace {

double log_binomial(std::size_t n, std::size_t k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Shapley kernel weight of one coalition of size s out of d.
double kernel_weight(std::size_t d, std::size_t s) {
  return (d - 1.0) / (std::exp(log_binomial(d, s)) * s * (d - s));
}

void enumerate_size(std::size_t d, std::size_t s, std::vector<std::vector<char>>& out) {
  std::vector<char> mask(d, 0);
  std::fill(mask.begin(), mask.begin() + s, 1);
  // prev_permutation over a descending-sorted mask visits every combination once.
  do {
    out.push_back(mask);
  } while (std::prev_permutation(mask.begin(), mask.end()));
}

}  // namespace

Explainer::Explainer(BatchFn model, Matrix background, ShapOptions options)
    : model_(std::move(model)), background_(std::move(background)), d_(background_.cols()) {
  if (background_.rows() == 0) throw MetricError("kernel shap: background is empty");
  if (d_ == 0) throw MetricError("kernel shap: no features");
  const std::size_t d = d_;
  if (d == 1) {
    exact_ = true;
    return;
  }

  const bool full = d < 63 && (std::uint64_t{1} << d) <= options.budget;
  if (!full && options.budget < 2 * d + 2) {
    throw ConfigError("kernel shap: budget must be >= 2d+2 when coalitions are not enumerated");
  }

  std::map<std::vector<char>, double> weighted;
  if (full) {
    for (std::size_t s = 1; s < d; ++s) {
      std::vector<std::vector<char>> masks;
      enumerate_size(d, s, masks);
      const double w = kernel_weight(d, s);
      for (auto& m : masks) weighted.emplace(std::move(m), w);
    }
    exact_ = true;
  } else {
    // Mass of each size pair {s, d-s}; enumerate pairs while the budget share covers them.
    const std::size_t half = d / 2;
    std::vector<double> mass(half + 1, 0.0);
    for (std::size_t s = 1; s <= half; ++s) {
      mass[s] = (d - 1.0) / (s * (d - s)) * (s == d - s ? 1.0 : 2.0);
    }
    double remaining_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
    std::size_t remaining = options.budget;
    std::size_t next_size = 1;
    for (; next_size <= half; ++next_size) {
      const double count = std::exp(log_binomial(d, next_size)) * (next_size == d - next_size ? 1 : 2);
      if (count > static_cast<double>(remaining) ||
          remaining * mass[next_size] / remaining_mass < count - 1e-8) {
        break;
      }
      std::vector<std::vector<char>> masks;
      enumerate_size(d, next_size, masks);
      if (next_size != d - next_size) enumerate_size(d, d - next_size, masks);
      const double w = kernel_weight(d, next_size);
      for (auto& m : masks) weighted.emplace(std::move(m), w);
      remaining -= static_cast<std::size_t>(std::llround(count));
      remaining_mass -= mass[next_size];
    }
    if (next_size > half) {
      exact_ = true;
    } else if (remaining >= 2) {
      Rng rng(options.seed);
      std::vector<double> size_mass(mass.begin() + next_size, mass.end());
      std::discrete_distribution<std::size_t> pick_size(size_mass.begin(), size_mass.end());
      const std::size_t pairs = remaining / 2;
      const double w = remaining_mass / static_cast<double>(2 * pairs);
      // Per-coalition kernel weights are relative to a total mass of
      // sum_s (d-1)/(s(d-s)); sampled coalitions share the remaining mass.
      std::vector<std::size_t> order(d);
      for (std::size_t p = 0; p < pairs; ++p) {
        std::size_t s = next_size + pick_size(rng);
        if (s != d - s && std::uniform_int_distribution<int>(0, 1)(rng) == 1) s = d - s;
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<char> mask(d, 0);
        for (std::size_t k = 0; k < s; ++k) mask[order[k]] = 1;
        std::vector<char> complement(d);
        for (std::size_t k = 0; k < d; ++k) complement[k] = mask[k] ? 0 : 1;
        weighted[mask] += w;
        weighted[complement] += w;
      }
    }
  }

  masks_.reserve(weighted.size());
  for (auto& [mask, w] : weighted) {
    masks_.push_back(mask);
    weights_.push_back(w);
  }

  // Reduced design: eliminate the last attribution through the sum constraint.
  const std::size_t n = masks_.size();
  const std::size_t k = d - 1;
  Eigen::MatrixXd design(n, k);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < k; ++i) design(c, i) = masks_[c][i] - masks_[c][k];
  }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights_.data(), n);
  const Eigen::MatrixXd xtw = design.transpose() * w.asDiagonal();
  Eigen::MatrixXd normal = xtw * design;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
    normal += 1e-9 * Eigen::MatrixXd::Identity(k, k);
    ldlt.compute(normal);
    ridge_ = true;
    std::cerr << "warning: kernel shap regression is singular; using ridge fallback\n";
  }
  const Eigen::MatrixXd projection = ldlt.solve(xtw);  // k x n
  normal_inverse_.resize(k * n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < n; ++c) normal_inverse_[i * n + c] = projection(i, c);
  }
}

Attribution Explainer::explain(std::span<const double> x, int target_class) const {
  if (x.size() != d_) throw MetricError("kernel shap: row width does not match background");
  const std::size_t nb = background_.rows();
  const std::size_t n = masks_.size();
  const std::size_t d = d_;

  // Batch layout: [x] [background rows] [coalition 0 x background] ...
  Matrix batch(1 + nb + n * nb, d);
  std::copy(x.begin(), x.end(), batch.row(0).begin());
  for (std::size_t b = 0; b < nb; ++b) {
    std::copy(background_.row(b).begin(), background_.row(b).end(), batch.row(1 + b).begin());
  }
  for (std::size_t c = 0; c < n; ++c) {
    const auto& mask = masks_[c];
    for (std::size_t b = 0; b < nb; ++b) {
      auto dst = batch.row(1 + nb + c * nb + b);
      auto bg = background_.row(b);
      for (std::size_t i = 0; i < d; ++i) dst[i] = mask[i] ? x[i] : bg[i];
    }
  }
  std::vector<double> out = model_(batch);
  if (out.size() != batch.rows()) throw MetricError("kernel shap: model returned wrong row count");
  if (target_class == 0) {
    for (double& v : out) v = 1.0 - v;
  }

  Attribution result;
  result.output = out[0];
  result.base_value = mean(std::span<const double>(out).subspan(1, nb));
  const double delta = result.output - result.base_value;
  result.values.assign(d, 0.0);
  if (d == 1) {
    result.values[0] = delta;
    return result;
  }

  std::vector<double> target(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double v = mean(std::span<const double>(out).subspan(1 + nb + c * nb, nb));
    target[c] = v - result.base_value - masks_[c][d - 1] * delta;
  }
  double rest = 0.0;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    result.values[i] = simd::dot({normal_inverse_.data() + i * n, n}, target);
    rest += result.values[i];
  }
  result.values[d - 1] = delta - rest;
  return result;
}

Attribution kernel_shap(const models::ClassifierHandle& handle, std::span<const double> x,
                        const Matrix& background, const ShapOptions& options) {
  return Explainer(batch_fn(handle), background, options).explain(x);
}

}  // namespace mirai::xai
