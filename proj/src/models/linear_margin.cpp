#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mirai/models.hpp"
#include "mirai/simd.hpp"
#include "model_util.hpp"

namespace mirai::models {

double PlattScaling::operator()(double margin) const {
  return internal::sigmoid(-(a * margin + b));
}

PlattScaling fit_platt(std::span<const double> margins, std::span<const int> labels) {
  double prior1 = 0.0;
  for (int v : labels) prior1 += v;
  const double prior0 = static_cast<double>(labels.size()) - prior1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) t[i] = labels[i] == 1 ? hi : lo;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double z = margins[i] * a + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  constexpr double kSigma = 1e-12;
  constexpr double kMinStep = 1e-10;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double z = margins[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += margins[i] * margins[i] * d2;
      h22 += d2;
      h21 += margins[i] * d2;
      const double d1 = t[i] - p;
      g1 += margins[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) break;
  }
  return {a, b};
}

double LinearMarginModel::margin(std::span<const double> x) const {
  return simd::dot(weights_, x) + bias_;
}

std::vector<double> LinearMarginModel::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = calibration_(margin(x.row(r)));
  return out;
}

std::optional<ResourceInfo> LinearMarginModel::resource_info() const {
  const auto d = static_cast<std::int64_t>(weights_.size());
  // d weights + bias + two calibration coefficients; d MACs for the margin, one for calibration.
  return ResourceInfo::from_macs(d + 3, d + 1);
}

namespace {

struct HingeFit {
  std::vector<double> w;  // last entry is the bias
  double objective = std::numeric_limits<double>::infinity();
};

double hinge_objective(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                       std::span<const double> w, double lambda) {
  const std::size_t d = x.cols();
  double loss = 0.0;
  for (std::size_t r : rows) {
    const double s = y[r] == 1 ? 1.0 : -1.0;
    const double m = simd::dot(w.first(d), x.row(r)) + w[d];
    loss += std::max(0.0, 1.0 - s * m);
  }
  return 0.5 * lambda * simd::dot(w, w) + loss / static_cast<double>(rows.size());
}

HingeFit fit_hinge(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                   double C, int epochs) {
  const std::size_t d = x.cols();
  const double lambda = 1.0 / (C * static_cast<double>(rows.size()));
  std::vector<double> w(d + 1, 0.0), g(d + 1, 0.0);
  HingeFit best{w, hinge_objective(x, y, rows, w, lambda)};
  const double radius = 1.0 / std::sqrt(lambda);
  for (int t = 1; t <= epochs; ++t) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t r : rows) {
      const double s = y[r] == 1 ? 1.0 : -1.0;
      const double m = simd::dot(std::span<const double>(w).first(d), x.row(r)) + w[d];
      if (s * m < 1.0) {
        simd::axpy(s, x.row(r), std::span<double>(g).first(d));
        g[d] += s;
      }
    }
    const double eta = 1.0 / (lambda * t);
    const double decay = 1.0 - eta * lambda;
    for (double& v : w) v *= decay;
    simd::axpy(eta / static_cast<double>(rows.size()), g, w);
    const double norm = std::sqrt(simd::dot(w, w));
    if (norm > radius) {
      for (double& v : w) v *= radius / norm;
    }
    const double obj = hinge_objective(x, y, rows, w, lambda);
    if (obj < best.objective) best = {w, obj};
  }
  return best;
}

}  // namespace

ClassifierHandle train_linear_margin(const data::LabeledData& train,
                                     const LinearMarginParams& params, std::string model_id) {
  if (params.C <= 0.0) throw ConfigError("linear margin: C must be > 0");
  if (params.epochs < 1) throw ConfigError("linear margin: epochs must be >= 1");
  if (!(params.calibration_fraction >= 0.0 && params.calibration_fraction < 1.0)) {
    throw ConfigError("linear margin: calibration_fraction must lie in [0,1)");
  }
  if (train.size() == 0) throw DataError("training split is empty");
  const auto start = std::chrono::steady_clock::now();

  // Stratified calibration fold.
  Rng rng(params.seed);
  std::vector<std::size_t> fit_rows, calib_rows;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.y[i] == cls) pool.push_back(i);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto n_cal = static_cast<std::size_t>(
        std::llround(params.calibration_fraction * static_cast<double>(pool.size())));
    calib_rows.insert(calib_rows.end(), pool.begin(), pool.begin() + n_cal);
    fit_rows.insert(fit_rows.end(), pool.begin() + n_cal, pool.end());
  }
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(calib_rows.begin(), calib_rows.end());
  auto has_both = [&](const std::vector<std::size_t>& rows) {
    bool pos = false, neg = false;
    for (std::size_t r : rows) (train.y[r] == 1 ? pos : neg) = true;
    return pos && neg;
  };
  if (!has_both(fit_rows) || !has_both(calib_rows)) {
    fit_rows.resize(train.size());
    std::iota(fit_rows.begin(), fit_rows.end(), 0);
    calib_rows = fit_rows;
  }

  HingeFit fit = fit_hinge(train.x, train.y, fit_rows, params.C, params.epochs);
  const double bias = fit.w.back();
  fit.w.pop_back();

  std::vector<double> margins;
  std::vector<int> labels;
  for (std::size_t r : calib_rows) {
    margins.push_back(simd::dot(fit.w, train.x.row(r)) + bias);
    labels.push_back(train.y[r]);
  }
  const PlattScaling platt = fit_platt(margins, labels);
  const double d = static_cast<double>(train.x.cols());
  const double work =
      static_cast<double>(params.epochs) * 2.0 * static_cast<double>(fit_rows.size()) * 2.0 * (d + 1);
  auto model = std::make_shared<LinearMarginModel>(std::move(fit.w), bias, platt, work);
  return ClassifierHandle(std::move(model_id), std::move(model),
                          internal::elapsed_seconds(start));
}

}  // namespace mirai::models
