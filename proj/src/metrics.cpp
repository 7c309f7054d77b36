#include "marlids/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "marlids/errors.hpp"

namespace marlids {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size(), std::vector<std::uint64_t>(labels_.size(), 0)) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
  if (truth >= labels_.size() || predicted >= labels_.size()) {
    throw ValidationError("confusion: class index out of range");
  }
  counts_[truth][predicted] += count;
  total_ += count;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  const auto& row = counts_.at(truth);
  return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (const auto& row : counts_) s += row.at(predicted);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) s += counts_[i][i];
  return s;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          const std::vector<std::string>& labels) {
  if (truth.size() != predicted.size()) throw ValidationError("confusion: truth and predictions differ in length");
  ConfusionMatrix cm(labels);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          const std::vector<std::string>& labels) {
  if (truth.size() != predicted.size()) throw ValidationError("confusion: truth and predictions differ in length");
  auto index_of = [&](const std::string& l) {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) throw ValidationError("confusion: unknown label '" + l + "'");
    return static_cast<std::size_t>(it - labels.begin());
  };
  ConfusionMatrix cm(labels);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(index_of(truth[i]), index_of(predicted[i]));
  return cm;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    ClassMetrics m;
    m.label = cm.labels()[c];
    m.tp = cm.count(c, c);
    m.support = cm.row_sum(c);
    m.fn = m.support - m.tp;
    m.fp = cm.col_sum(c) - m.tp;
    m.tn = cm.total() - m.tp - m.fn - m.fp;
    m.precision = ratio(m.tp, m.tp + m.fp, m.degenerate);
    m.recall = ratio(m.tp, m.tp + m.fn, m.degenerate);
    m.fpr = ratio(m.fp, m.fp + m.tn, m.degenerate);
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.degenerate = true;
    }
    out.push_back(std::move(m));
  }
  return out;
}

AggregateMetrics aggregate(const std::vector<ClassMetrics>& per_class, const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("aggregate: empty evaluation set");
  AggregateMetrics a;
  a.total = cm.total();
  const auto total = static_cast<double>(cm.total());
  for (const auto& m : per_class) {
    const double w = static_cast<double>(m.support) / total;
    a.precision += w * m.precision;
    a.recall += w * m.recall;
    a.f1 += w * m.f1;
    a.fpr += w * m.fpr;
  }
  a.accuracy = static_cast<double>(cm.trace()) / total;
  return a;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const bool> is_positive) {
  if (scores.size() != is_positive.size()) throw ValidationError("roc: scores and labels differ in length");
  RocCurve roc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) return roc;
    (is_positive[i] ? roc.positives : roc.negatives) += 1;
  }
  if (roc.positives == 0 || roc.negatives == 0) return roc;
  roc.defined = true;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average 1-based ranks over tie groups.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (is_positive[order[k]]) positive_rank_sum += avg_rank;
    }
    i = j;
  }
  const auto p = static_cast<double>(roc.positives);
  const auto n = static_cast<double>(roc.negatives);
  roc.auc = (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);

  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = order.size(); i > 0;) {
    const double t = scores[order[i - 1]];
    while (i > 0 && scores[order[i - 1]] == t) {
      (is_positive[order[i - 1]] ? tp : fp) += 1;
      --i;
    }
    roc.points.push_back({t, static_cast<double>(fp) / n, static_cast<double>(tp) / p});
  }
  return roc;
}

RocCurve roc_auc(const std::vector<std::vector<double>>& scores, std::span<const std::size_t> truth, std::size_t cls) {
  if (scores.size() != truth.size()) throw ValidationError("roc: one score vector per record required");
  std::vector<double> s(scores.size());
  std::vector<char> pos(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (cls >= scores[i].size()) throw ValidationError("roc: class index outside the score vector");
    s[i] = scores[i][cls];
    pos[i] = truth[i] == cls ? 1 : 0;
  }
  std::unique_ptr<bool[]> flags(new bool[pos.size()]);
  for (std::size_t i = 0; i < pos.size(); ++i) flags[i] = pos[i] != 0;
  return roc_auc(s, std::span<const bool>(flags.get(), pos.size()));
}

EvaluationReport evaluate(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          const std::vector<std::string>& labels, const std::vector<std::vector<double>>& scores) {
  EvaluationReport r;
  r.labels = labels;
  r.confusion = confusion(truth, predicted, labels);
  r.per_class = per_class_metrics(r.confusion);
  r.weighted = aggregate(r.per_class, r.confusion);
  if (!scores.empty()) {
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      auto curve = roc_auc(scores, truth, c);
      curve.label = labels[c];
      if (curve.defined) {
        sum += curve.auc;
        ++defined;
      }
      r.roc.push_back(std::move(curve));
    }
    r.macro_auc_defined = defined > 0;
    r.macro_auc = defined > 0 ? sum / static_cast<double>(defined) : 0.0;
  }
  return r;
}

}  // namespace marlids
