#include <algorithm>
#include <numeric>

#include "mirai/robust.hpp"

namespace mirai::robust {

namespace {

Matrix prediction_space(std::span<const double> p) {
  Matrix out(p.size(), 2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    out(i, 0) = 1.0 - p[i];
    out(i, 1) = p[i];
  }
  return out;
}

}  // namespace

DriftScore drift_robustness(const models::ClassifierHandle& handle, const data::LabeledData& test,
                            const DriftLadder& ladder) {
  if (ladder.n_permutations < 100) throw ConfigError("drift ladder needs at least 100 permutations");
  if (ladder.batch_size < 2) throw ConfigError("drift batch size must be at least 2");
  DriftScore out;
  std::vector<double> levels;
  for (double s : ladder.levels) {
    if (s < 0.0) throw ConfigError("drift levels must be non-negative");
    if (s == 0.0) {
      out.flags.push_back("drift:zero_level_skipped");
    } else {
      levels.push_back(s);
    }
  }
  if (levels.empty()) throw ConfigError("drift ladder has no positive levels");
  if (test.size() < 2) throw MetricError("drift: evaluation split has fewer than two rows");

  std::vector<std::size_t> order(test.size());
  std::iota(order.begin(), order.end(), 0);
  Rng pick(derive_seed(ladder.seed, "drift.rows"));
  std::shuffle(order.begin(), order.end(), pick);
  order.resize(std::min(ladder.batch_size, order.size()));
  std::sort(order.begin(), order.end());
  const Matrix batch = test.x.select_rows(order);
  const Matrix clean = prediction_space(handle.predict_proba(batch));

  bool fallback = false;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    Matrix noisy = batch;
    Rng rng(derive_seed(ladder.seed, "drift.noise", k));
    std::normal_distribution<double> noise(0.0, levels[k]);
    for (double& v : noisy.data()) v += noise(rng);
    const Matrix shifted = prediction_space(handle.predict_proba(noisy));
    const PermutationTest t = mmd_permutation_test(
        clean, shifted, ladder.n_permutations, derive_seed(ladder.seed, "drift.permutation", k),
        ladder.bandwidth);
    fallback = fallback || t.bandwidth_fallback;
    out.level_p_values.push_back(t.p_value);
  }
  if (fallback) out.flags.push_back("drift:bandwidth_fallback");
  out.score = mean(out.level_p_values);
  return out;
}

}  // namespace mirai::robust
