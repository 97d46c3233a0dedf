#include <algorithm>
#include <cmath>
#include <numeric>

#include "mirai/robust.hpp"
#include "mirai/simd.hpp"

namespace mirai::robust {

namespace {

constexpr double kBinaryTolerance = 1e-3;  // relative to the segment length
constexpr std::size_t kInitialEvals = 100;
constexpr std::size_t kMaxEvals = 1000;

class Oracle {
 public:
  Oracle(const models::ClassifierHandle& handle, int true_label, std::size_t budget)
      : handle_(handle), label_(true_label), budget_(budget) {}

  std::size_t used() const { return used_; }
  std::size_t remaining() const { return budget_ - used_; }

  /// 1 where the point is adversarial. Caller guarantees rows <= remaining().
  std::vector<char> decide(const Matrix& points) {
    used_ += points.rows();
    const auto p = handle_.predict_proba(points);
    std::vector<char> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = models::hard_label(p[i]) != label_;
    return out;
  }
  bool decide_one(std::span<const double> x) { return decide(Matrix::from_row(x)).front() != 0; }

 private:
  const models::ClassifierHandle& handle_;
  int label_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

std::vector<double> blend(std::span<const double> x, std::span<const double> a, double alpha) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (1.0 - alpha) * x[i] + alpha * a[i];
  return out;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(simd::squared_distance(a, b));
}

/// Shrinks the adversarial point `adv` toward x along the segment; returns the
/// closest point known to be adversarial.
std::vector<double> binary_search(Oracle& oracle, std::span<const double> x, std::vector<double> adv) {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > kBinaryTolerance && oracle.remaining() > 0) {
    const double mid = 0.5 * (lo + hi);
    if (oracle.decide_one(blend(x, adv, mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi == 1.0 ? adv : blend(x, adv, hi);
}

}  // namespace

AttackResult hsja_attack(const models::ClassifierHandle& handle, std::span<const double> x,
                         int true_label, const AttackBudget& budget, std::uint64_t seed) {
  if (budget.max_queries == 0) throw ConfigError("attack budget must allow at least one query");
  if (!(budget.epsilon > 0.0)) throw ConfigError("attack epsilon must be positive");
  const std::size_t d = x.size();
  Oracle oracle(handle, true_label, budget.max_queries);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  AttackResult result;

  if (oracle.decide_one(x)) {
    result.success = true;
    result.adversarial.assign(x.begin(), x.end());
    result.queries = oracle.used();
    result.norm_history.push_back(0.0);
    return result;
  }

  // Initialization: Gaussian noise of growing scale until the label flips.
  std::vector<double> start;
  constexpr std::size_t kTriesPerScale = 4;
  for (double scale = 0.25; scale <= 4096.0 && start.empty(); scale *= 2.0) {
    if (oracle.remaining() < kTriesPerScale) break;
    Matrix trial(kTriesPerScale, d);
    for (std::size_t k = 0; k < kTriesPerScale; ++k) {
      for (std::size_t i = 0; i < d; ++i) trial(k, i) = x[i] + scale * normal(rng);
    }
    const auto adv = oracle.decide(trial);
    for (std::size_t k = 0; k < kTriesPerScale; ++k) {
      if (adv[k]) {
        start.assign(trial.row(k).begin(), trial.row(k).end());
        break;
      }
    }
  }
  if (start.empty()) {
    result.queries = oracle.used();
    return result;
  }

  std::vector<double> boundary = binary_search(oracle, x, std::move(start));
  std::vector<double> best = boundary;
  double best_norm = distance(x, best);
  result.norm_history.push_back(best_norm);

  std::vector<double> grad(d), u(d);
  for (std::size_t t = 1; oracle.remaining() > 0; ++t) {
    if (budget.stop_below && best_norm <= *budget.stop_below) break;
    const double dist = distance(x, boundary);
    if (dist == 0.0) break;

    // Boundary normal from label flips of random probes around the boundary point.
    const double delta = dist / static_cast<double>(std::max<std::size_t>(d, 2));
    std::size_t n_eval = std::min<std::size_t>(
        kMaxEvals, static_cast<std::size_t>(kInitialEvals * std::sqrt(static_cast<double>(t))));
    const std::size_t reserve = 24;
    if (oracle.remaining() <= reserve + 2) break;
    n_eval = std::min(n_eval, oracle.remaining() - reserve);
    Matrix probes(n_eval, d);
    Matrix dirs(n_eval, d);
    for (std::size_t k = 0; k < n_eval; ++k) {
      double norm = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        dirs(k, i) = normal(rng);
        norm += dirs(k, i) * dirs(k, i);
      }
      norm = std::sqrt(norm);
      for (std::size_t i = 0; i < d; ++i) {
        dirs(k, i) /= norm;
        probes(k, i) = boundary[i] + delta * dirs(k, i);
      }
    }
    const auto flips = oracle.decide(probes);
    double fbar = 0.0;
    for (char f : flips) fbar += f ? 1.0 : -1.0;
    fbar /= static_cast<double>(n_eval);
    const double baseline = std::abs(fbar) == 1.0 ? 0.0 : fbar;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t k = 0; k < n_eval; ++k) {
      simd::axpy((flips[k] ? 1.0 : -1.0) - baseline, dirs.row(k), grad);
    }
    const double gnorm = std::sqrt(simd::dot(grad, grad));
    if (gnorm == 0.0) break;
    for (double& g : grad) g /= gnorm;

    // Geometric step-size search along the estimated normal.
    double step = dist / std::sqrt(static_cast<double>(t));
    std::vector<double> candidate;
    while (oracle.remaining() > 0 && step > 1e-12 * dist) {
      std::vector<double> trial(boundary);
      simd::axpy(step, grad, trial);
      if (oracle.decide_one(trial)) {
        candidate = std::move(trial);
        break;
      }
      step *= 0.5;
    }
    if (candidate.empty()) break;

    boundary = binary_search(oracle, x, std::move(candidate));
    const double norm = distance(x, boundary);
    if (norm < best_norm) {
      best_norm = norm;
      best = boundary;
    }
    result.norm_history.push_back(best_norm);
  }

  result.success = true;
  result.adversarial = std::move(best);
  result.norm = best_norm;
  result.queries = oracle.used();
  return result;
}

HsjaScore hsja_robustness_score(const models::ClassifierHandle& handle, const data::LabeledData& test,
                                const AttackBudget& budget) {
  HsjaScore out;
  if (test.size() == 0) throw MetricError("hsja: empty evaluation split");
  std::vector<std::size_t> order(test.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(budget.seed, "hsja.rows"));
  std::shuffle(order.begin(), order.end(), rng);
  const auto p = handle.predict_proba(test.x);

  AttackBudget per_point = budget;
  if (!per_point.stop_below) per_point.stop_below = budget.epsilon;
  std::size_t robust = 0;
  bool exhausted = false;
  for (std::size_t r : order) {
    if (out.evaluated == budget.n_eval_points) break;
    if (models::hard_label(p[r]) != test.y[r]) continue;
    const AttackResult a =
        hsja_attack(handle, test.x.row(r), test.y[r], per_point, derive_seed(budget.seed, "hsja.point", r));
    ++out.evaluated;
    const bool held = !a.success || a.norm > budget.epsilon;
    robust += held;
    if (!a.success) exhausted = true;
    out.log.push_back({r, a.success, a.queries, a.norm});
  }
  if (out.evaluated == 0) {
    out.flags.push_back("hsja:no_correctly_classified_rows");
    out.score = 0.0;
    return out;
  }
  if (exhausted) out.flags.push_back("hsja:attack_failed_on_some_rows");
  if (out.evaluated < budget.n_eval_points) out.flags.push_back("hsja:fewer_rows_than_requested");
  out.score = static_cast<double>(robust) / static_cast<double>(out.evaluated);
  return out;
}

double robustness_dimension(double hsja_score, double drift_score) {
  return (hsja_score + drift_score) / 2.0;
}

}  // namespace mirai::robust
