#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mirai/models.hpp"
#include "model_util.hpp"

namespace mirai::models {

double Tree::predict(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

std::size_t Tree::path_length(std::span<const double> x) const {
  std::size_t steps = 0;
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    ++steps;
  }
  return steps;
}

std::size_t Tree::internal_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

std::size_t Tree::leaf_count() const { return nodes.size() - internal_count(); }

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    d[nodes[i].left] = d[i] + 1;
    d[nodes[i].right] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

std::int64_t Tree::parameter_count() const {
  return static_cast<std::int64_t>(3 * internal_count() + leaf_count());
}

double Tree::mean_path_length(const Matrix& x) const {
  if (x.rows() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) total += static_cast<double>(path_length(x.row(r)));
  return total / static_cast<double>(x.rows());
}

namespace {

std::vector<std::vector<std::size_t>> presort(const Matrix& x, std::span<const std::size_t> rows) {
  std::vector<std::vector<std::size_t>> lists(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& l = lists[f];
    l.assign(rows.begin(), rows.end());
    std::stable_sort(l.begin(), l.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }
  return lists;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace {

struct GiniCriterion {
  std::span<const int> y;

  struct Stats {
    double n = 0;
    double pos = 0;
    void add(const Stats& o) { n += o.n, pos += o.pos; }
    void sub(const Stats& o) { n -= o.n, pos -= o.pos; }
  };

  // Any valid split of an impure node is taken, including zero-gain ones
  // (XOR-like structure only pays off one level down).
  static constexpr double kMinGain = -1.0;

  Stats stats(std::size_t row) const { return {1.0, static_cast<double>(y[row])}; }
  static double weighted_gini(const Stats& s) {
    if (s.n <= 0) return 0.0;
    const double p = s.pos / s.n;
    return s.n * 2.0 * p * (1.0 - p);
  }
  double gain(const Stats& left, const Stats& right, const Stats& parent) const {
    return (weighted_gini(parent) - weighted_gini(left) - weighted_gini(right)) / parent.n;
  }
  bool pure(const Stats& s) const { return s.pos == 0 || s.pos == s.n; }
  double leaf_value(const Stats& s) const { return s.n > 0 ? s.pos / s.n : 0.0; }
};

struct NewtonCriterion {
  std::span<const double> grad;
  std::span<const double> hess;
  double lambda;

  struct Stats {
    double n = 0;
    double g = 0;
    double h = 0;
    void add(const Stats& o) { n += o.n, g += o.g, h += o.h; }
    void sub(const Stats& o) { n -= o.n, g -= o.g, h -= o.h; }
  };

  static constexpr double kMinGain = 1e-12;

  Stats stats(std::size_t row) const { return {1.0, grad[row], hess[row]}; }
  double score(const Stats& s) const { return s.g * s.g / (s.h + lambda); }
  double gain(const Stats& left, const Stats& right, const Stats& parent) const {
    return 0.5 * (score(left) + score(right) - score(parent));
  }
  bool pure(const Stats&) const { return false; }
  double leaf_value(const Stats& s) const { return -s.g / (s.h + lambda); }
};

template <class Criterion>
class Builder {
 public:
  Builder(const Matrix& x, const Criterion& crit, int max_depth, std::size_t min_leaf)
      : x_(x), crit_(crit), max_depth_(max_depth), min_leaf_(std::max<std::size_t>(1, min_leaf)),
        goes_left_(x.rows(), 0) {}

  Tree build(std::span<const std::size_t> rows) {
    Tree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, presort(x_, rows), 0);
    return tree;
  }

  double work() const { return work_; }

 private:
  using Stats = typename Criterion::Stats;
  using Lists = std::vector<std::vector<std::size_t>>;

  void grow(Tree& tree, int node, Lists lists, int depth) {
    const auto& rows = lists.front();
    Stats total;
    for (std::size_t r : rows) total.add(crit_.stats(r));
    tree.nodes[node].value = crit_.leaf_value(total);

    const std::size_t n = rows.size();
    if (depth >= max_depth_ || n < 2 * min_leaf_ || crit_.pure(total)) return;

    work_ += static_cast<double>(n * x_.cols());
    double best_gain = Criterion::kMinGain;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      const auto& l = lists[f];
      Stats left;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left.add(crit_.stats(l[k]));
        const std::size_t n_left = k + 1;
        if (n_left < min_leaf_) continue;
        if (n - n_left < min_leaf_) break;
        const double a = x_(l[k], f);
        const double b = x_(l[k + 1], f);
        if (!(a < b)) continue;
        Stats right = total;
        right.sub(left);
        const double g = crit_.gain(left, right, total);
        if (g > best_gain) {
          best_gain = g;
          best_feature = static_cast<int>(f);
          best_threshold = a + 0.5 * (b - a);
          if (best_threshold >= b) best_threshold = a;
        }
      }
    }
    if (best_feature < 0) return;

    for (std::size_t r : rows) goes_left_[r] = x_(r, best_feature) <= best_threshold ? 1 : 0;
    Lists left_lists(lists.size()), right_lists(lists.size());
    for (std::size_t f = 0; f < lists.size(); ++f) {
      for (std::size_t r : lists[f]) (goes_left_[r] ? left_lists[f] : right_lists[f]).push_back(r);
    }
    lists.clear();

    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node].feature = best_feature;
    tree.nodes[node].threshold = best_threshold;
    tree.nodes[node].left = left;
    tree.nodes[node].right = right;
    grow(tree, left, std::move(left_lists), depth + 1);
    grow(tree, right, std::move(right_lists), depth + 1);
  }

  const Matrix& x_;
  const Criterion& crit_;
  int max_depth_;
  std::size_t min_leaf_;
  std::vector<char> goes_left_;
  double work_ = 0.0;
};

using internal::elapsed_seconds;
using internal::sigmoid;

void require_trainable(const data::LabeledData& train) {
  if (train.size() == 0) throw DataError("training split is empty");
  if (train.y.size() != train.size()) throw DataError("training labels do not match rows");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> DecisionTreeModel::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = tree_.predict(x.row(r));
  return out;
}

std::optional<ResourceInfo> DecisionTreeModel::resource_info() const {
  return ResourceInfo::from_macs(tree_.parameter_count(), macs_);
}

ClassifierHandle train_decision_tree(const data::LabeledData& train, const TreeParams& params,
                                     std::string model_id) {
  if (params.max_depth < 1) throw ConfigError("decision tree: max_depth must be >= 1");
  require_trainable(train);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), 0);
  GiniCriterion crit{train.y};
  Builder<GiniCriterion> builder(train.x, crit, params.max_depth, params.min_leaf);
  Tree tree = builder.build(rows);
  const auto macs = static_cast<std::int64_t>(std::llround(tree.mean_path_length(train.x)));
  auto model = std::make_shared<DecisionTreeModel>(std::move(tree), macs, 2.0 * builder.work());
  return ClassifierHandle(std::move(model_id), std::move(model), elapsed_seconds(start));
}

// ---------------------------------------------------------------------------

double GbtModel::raw_score(std::span<const double> x) const {
  double s = base_score_;
  for (const auto& t : trees_) s += t.predict(x);
  return s;
}

std::vector<double> GbtModel::predict_proba(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = sigmoid(raw_score(x.row(r)));
  return out;
}

std::optional<ResourceInfo> GbtModel::resource_info() const {
  std::int64_t params = 1;
  for (const auto& t : trees_) params += t.parameter_count();
  return ResourceInfo::from_macs(params, macs_);
}

double logistic_loss(std::span<const double> probabilities, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], 1e-15, 1.0 - 1e-15);
    total -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return labels.empty() ? 0.0 : total / static_cast<double>(labels.size());
}

namespace {

double loss_from_scores(std::span<const double> scores, std::span<const int> y) {
  // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0, computed stably.
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = y[i] == 1 ? -scores[i] : scores[i];
    total += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

ClassifierHandle train_gbt(const data::LabeledData& train, const GbtParams& params,
                           std::string model_id) {
  if (params.learning_rate <= 0.0) throw ConfigError("gbt: learning_rate must be > 0");
  if (params.n_trees < 0) throw ConfigError("gbt: n_trees must be >= 0");
  if (params.depth < 1) throw ConfigError("gbt: depth must be >= 1");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) {
    throw ConfigError("gbt: subsample must lie in (0,1]");
  }
  require_trainable(train);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = train.size();
  const Matrix& x = train.x;

  double pos = 0.0;
  for (int v : train.y) pos += v;
  const double rate = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  const double base = std::log(rate / (1.0 - rate));

  std::vector<double> scores(n, base), grad(n), hess(n), step(n), trial(n);
  std::vector<Tree> trees;
  Rng rng(params.seed);
  double work = 0.0;
  double current = loss_from_scores(scores, train.y);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(scores[i]);
      grad[i] = p - train.y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    std::vector<std::size_t> rows = all;
    if (params.subsample < 1.0) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n)))));
      std::sort(rows.begin(), rows.end());
    }
    NewtonCriterion crit{grad, hess, params.lambda};
    Builder<NewtonCriterion> builder(x, crit, params.depth, params.min_leaf);
    Tree tree = builder.build(rows);
    work += 2.0 * builder.work() + 10.0 * static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) step[i] = tree.predict(x.row(i));
    double shrink = params.learning_rate;
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = scores[i] + shrink * step[i];
      const double next = loss_from_scores(trial, train.y);
      if (next <= current) {
        current = next;
        accepted = true;
        break;
      }
      shrink *= 0.5;
    }
    if (!accepted) shrink = 0.0;
    for (auto& node : tree.nodes) node.value *= shrink;
    if (accepted) scores.swap(trial);
    trees.push_back(std::move(tree));
  }

  double macs = static_cast<double>(trees.size());
  for (const auto& t : trees) macs += t.mean_path_length(x);
  auto model = std::make_shared<GbtModel>(base, std::move(trees),
                                          static_cast<std::int64_t>(std::llround(macs)), work);
  return ClassifierHandle(std::move(model_id), std::move(model), elapsed_seconds(start));
}

}  // namespace mirai::models
