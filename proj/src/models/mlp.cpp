#include <algorithm>
#include <cmath>
#include <numeric>

#include "mirai/models.hpp"
#include "mirai/simd.hpp"
#include "model_util.hpp"

namespace mirai::models {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

MlpModel::MlpModel(std::vector<int> layer_sizes, std::uint64_t init_seed)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("mlp: needs at least an input and an output layer");
  for (int s : sizes_) {
    if (s < 1) throw ConfigError("mlp: layer sizes must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * (static_cast<std::size_t>(sizes_[l]) + 1);
  }
  params_.assign(total, 0.0);
  Rng rng(init_seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / sizes_[l]));
    const std::size_t n_w = static_cast<std::size_t>(sizes_[l + 1] * sizes_[l]);
    for (std::size_t i = 0; i < n_w; ++i) params_[weight_offset(l) + i] = dist(rng);
  }
}

void MlpModel::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) throw std::invalid_argument("mlp: parameter size mismatch");
  std::copy(values.begin(), values.end(), params_.begin());
}

double MlpModel::logit(std::span<const double> x) const {
  std::vector<double> in(x.begin(), x.end()), out;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t n_in = sizes_[l];
    const std::size_t n_out = sizes_[l + 1];
    out.assign(n_out, 0.0);
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    for (std::size_t j = 0; j < n_out; ++j) {
      double z = b[j] + simd::dot({w + j * n_in, n_in}, in);
      out[j] = (l + 1 < layers && z < 0.0) ? 0.0 : z;
    }
    in.swap(out);
  }
  return in[0];
}

std::vector<double> MlpModel::predict_proba(const Matrix& x) const {
  if (x.cols() != static_cast<std::size_t>(sizes_.front())) {
    throw DataError("mlp: input width does not match the network");
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = internal::sigmoid(logit(x.row(r)));
  return out;
}

std::optional<ResourceInfo> MlpModel::resource_info() const {
  std::int64_t macs = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    macs += static_cast<std::int64_t>(sizes_[l]) * sizes_[l + 1];
  }
  return ResourceInfo::from_macs(static_cast<std::int64_t>(params_.size()), macs);
}

std::unique_ptr<Model> MlpModel::randomized_copy(std::uint64_t seed) const {
  return std::make_unique<MlpModel>(sizes_, seed);
}

double MlpModel::loss_and_gradient(const Matrix& x, std::span<const int> y,
                                   std::span<const std::size_t> rows, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  if (rows.empty()) return 0.0;
  const std::size_t layers = sizes_.size() - 1;
  // acts[l] is the input to layer l; pre[l] its pre-activation output.
  std::vector<std::vector<double>> acts(layers + 1), pre(layers);
  std::vector<double> delta, delta_prev;
  double total = 0.0;

  for (std::size_t r : rows) {
    acts[0].assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t n_in = sizes_[l];
      const std::size_t n_out = sizes_[l + 1];
      const double* w = params_.data() + weight_offset(l);
      const double* b = params_.data() + bias_offset(l);
      pre[l].resize(n_out);
      acts[l + 1].resize(n_out);
      for (std::size_t j = 0; j < n_out; ++j) {
        const double z = b[j] + simd::dot({w + j * n_in, n_in}, acts[l]);
        pre[l][j] = z;
        acts[l + 1][j] = (l + 1 < layers && z < 0.0) ? 0.0 : z;
      }
    }
    const double z = pre[layers - 1][0];
    total += y[r] == 1 ? softplus(-z) : softplus(z);

    delta.assign(1, internal::sigmoid(z) - y[r]);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t n_in = sizes_[l];
      const std::size_t n_out = sizes_[l + 1];
      const double* w = params_.data() + weight_offset(l);
      double* gw = grad.data() + weight_offset(l);
      double* gb = grad.data() + bias_offset(l);
      for (std::size_t j = 0; j < n_out; ++j) {
        simd::axpy(delta[j], acts[l], {gw + j * n_in, n_in});
        gb[j] += delta[j];
      }
      if (l == 0) break;
      delta_prev.assign(n_in, 0.0);
      for (std::size_t j = 0; j < n_out; ++j) simd::axpy(delta[j], {w + j * n_in, n_in}, delta_prev);
      for (std::size_t i = 0; i < n_in; ++i) {
        if (pre[l - 1][i] <= 0.0) delta_prev[i] = 0.0;
      }
      delta.swap(delta_prev);
    }
  }
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= scale;
  return total * scale;
}

double MlpModel::loss(const Matrix& x, std::span<const int> y,
                      std::span<const std::size_t> rows) const {
  double total = 0.0;
  for (std::size_t r : rows) {
    const double z = logit(x.row(r));
    total += y[r] == 1 ? softplus(-z) : softplus(z);
  }
  return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

void MlpModel::fit(const Matrix& x, std::span<const int> y, const MlpParams& params) {
  if (params.epochs < 0) throw ConfigError("mlp: epochs must be >= 0");
  if (params.learning_rate <= 0.0) throw ConfigError("mlp: learning_rate must be > 0");
  if (params.batch_size == 0) throw ConfigError("mlp: batch_size must be >= 1");
  Rng rng(derive_seed(params.seed, "mlp.shuffle"));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params_.size()), velocity(params_.size(), 0.0);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t end = std::min(order.size(), start + params.batch_size);
      loss_and_gradient(x, y, std::span<const std::size_t>(order).subspan(start, end - start), grad);
      for (std::size_t i = 0; i < params_.size(); ++i) {
        velocity[i] = params.momentum * velocity[i] - params.learning_rate * grad[i];
        params_[i] += velocity[i];
      }
    }
  }
  const double flops = static_cast<double>(resource_info()->flops_per_sample);
  training_flops_ = static_cast<double>(params.epochs) * static_cast<double>(x.rows()) * 3.0 * flops;
}

ClassifierHandle train_mlp(const data::LabeledData& train, const MlpParams& params,
                           std::string model_id) {
  if (params.hidden_sizes.empty()) throw ConfigError("mlp: hidden_sizes must not be empty");
  if (train.size() == 0) throw DataError("training split is empty");
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> sizes{static_cast<int>(train.x.cols())};
  sizes.insert(sizes.end(), params.hidden_sizes.begin(), params.hidden_sizes.end());
  sizes.push_back(1);
  auto model = std::make_shared<MlpModel>(std::move(sizes), derive_seed(params.seed, "mlp.init"));
  model->fit(train.x, train.y, params);
  return ClassifierHandle(std::move(model_id), std::move(model), internal::elapsed_seconds(start));
}

}  // namespace mirai::models
