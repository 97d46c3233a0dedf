#include <algorithm>
#include <numeric>

#include "mirai/privacy.hpp"

namespace mirai::privacy {

namespace {

std::vector<std::size_t> draw(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

data::LabeledData take(const data::LabeledData& d, std::span<const std::size_t> rows) {
  data::LabeledData out;
  out.x = d.x.select_rows(rows);
  for (std::size_t r : rows) {
    out.y.push_back(d.y[r]);
    if (!d.group.empty()) out.group.push_back(d.group[r]);
  }
  return out;
}

std::vector<double> true_label_confidence(const models::ClassifierHandle& handle,
                                          const data::LabeledData& d) {
  auto p = handle.predict_proba(d.x);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (d.y[i] == 0) p[i] = 1.0 - p[i];
  }
  return p;
}

}  // namespace

MembershipEvalSet make_membership_set(const data::LabeledData& train, const data::LabeledData& test,
                                      std::size_t n_each, std::uint64_t seed) {
  const std::size_t cap = std::min(train.size(), test.size());
  const std::size_t n = n_each == 0 ? cap : std::min(n_each, cap);
  Rng rng(seed);
  const auto m = draw(train.size(), n, rng);
  const auto nm = draw(test.size(), n, rng);
  return {take(train, m), take(test, nm)};
}

double best_threshold_accuracy(std::span<const double> member_stat, std::span<const double> non_member_stat) {
  const double nm = static_cast<double>(member_stat.size());
  const double nn = static_cast<double>(non_member_stat.size());
  if (member_stat.empty() || non_member_stat.empty()) return 0.5;
  // (value, is_member), descending; lowering the threshold past each distinct
  // value moves that value's rows to the "member" side.
  std::vector<std::pair<double, int>> all;
  for (double v : member_stat) all.emplace_back(v, 1);
  for (double v : non_member_stat) all.emplace_back(v, 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.5;  // threshold above every value
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? tp : fp) += 1;
      ++j;
    }
    const double acc = 0.5 * (static_cast<double>(tp) / nm + 1.0 - static_cast<double>(fp) / nn);
    best = std::max(best, acc);
    i = j;
  }
  return best;
}

double mi_privacy_from_accuracy(double attack_accuracy) {
  return clamp01(1.0 - std::max(0.0, 2.0 * attack_accuracy - 1.0));
}

MembershipResult mi_attack(const models::ClassifierHandle& handle, const MembershipEvalSet& eval) {
  MembershipResult out;
  if (eval.members.size() != eval.non_members.size()) {
    throw MetricError("membership evaluation set is not balanced");
  }
  if (eval.members.size() < 10) out.flags.push_back("mi:fewer_than_10_rows_per_side");
  const auto ms = true_label_confidence(handle, eval.members);
  const auto ns = true_label_confidence(handle, eval.non_members);
  out.attack_accuracy = best_threshold_accuracy(ms, ns);
  out.mi_privacy = mi_privacy_from_accuracy(out.attack_accuracy);
  return out;
}

PrivacyRecord evaluate_privacy(const models::ClassifierHandle& handle, const data::LabeledData& train,
                               const data::LabeledData& test, const PrivacyConfig& config,
                               std::uint64_t seed) {
  PrivacyRecord rec;
  const auto eval = make_membership_set(train, test, config.mi_rows_per_side, derive_seed(seed, "privacy.mi"));
  const MembershipResult mi = mi_attack(handle, eval);
  rec.attack_accuracy = mi.attack_accuracy;
  rec.mi_privacy = mi.mi_privacy;
  rec.flags = mi.flags;

  if (train.size() < 2) throw MetricError("knn shapley needs at least two training records");
  Matrix embedded;
  if (config.embedding == Embedding::kPredictions) {
    const auto p = handle.predict_proba(train.x);
    embedded = Matrix(p.size(), 2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      embedded(i, 0) = 1.0 - p[i];
      embedded(i, 1) = p[i];
    }
  } else {
    embedded = train.x;
  }
  rec.record_values = knn_shapley(embedded, train.y, config.knn_k);
  rec.shapr_privacy = shapr_privacy(rec.record_values);
  return rec;
}

double privacy_dimension(const PrivacyRecord& record) {
  return (record.mi_privacy + record.shapr_privacy) / 2.0;
}

}  // namespace mirai::privacy
