#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace marlids {

/// Rows are true labels, columns predicted labels.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels);

  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_classes() const { return labels_.size(); }
  std::uint64_t count(std::size_t truth, std::size_t predicted) const { return counts_.at(truth).at(predicted); }
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;
  std::uint64_t total() const { return total_; }
  std::uint64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::uint64_t>> counts_;
  std::uint64_t total_ = 0;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          const std::vector<std::string>& labels);
/// Throws ValidationError for labels outside `labels`.
ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> predicted,
                          const std::vector<std::string>& labels);

/// One-vs-rest rates of one class. A zero denominator yields 0 and sets degenerate.
struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  std::uint64_t support = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  bool degenerate = false;

  bool operator==(const ClassMetrics&) const = default;
};

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

/// Support-weighted averages plus accuracy = trace / total.
struct AggregateMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  double accuracy = 0.0;
  std::uint64_t total = 0;

  bool operator==(const AggregateMetrics&) const = default;
};

AggregateMetrics aggregate(const std::vector<ClassMetrics>& per_class, const ConfusionMatrix& cm);

struct RocPoint {
  double threshold = 0.0;  // positive iff score >= threshold; the first point uses +inf
  double fpr = 0.0;
  double tpr = 0.0;

  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::string label;
  bool defined = false;  // false without at least one positive and one negative
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<RocPoint> points;

  bool operator==(const RocCurve&) const = default;
};

/// One-vs-rest ROC. AUC is the Mann-Whitney rank statistic: the probability
/// a random positive outscores a random negative, ties counting one half.
RocCurve roc_auc(std::span<const double> scores, std::span<const bool> is_positive);
/// scores[record][class] form; NaN scores leave the curve undefined.
RocCurve roc_auc(const std::vector<std::vector<double>>& scores, std::span<const std::size_t> truth,
                 std::size_t cls);

struct EvaluationReport {
  std::vector<std::string> labels;
  std::vector<ClassMetrics> per_class;
  AggregateMetrics weighted;
  std::vector<RocCurve> roc;  // one per label; empty when no scores were supplied
  double macro_auc = 0.0;     // mean over defined curves
  bool macro_auc_defined = false;
  ConfusionMatrix confusion;

  bool operator==(const EvaluationReport&) const = default;
};

/// scores may be empty; otherwise scores[record][class] over `labels`.
EvaluationReport evaluate(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          const std::vector<std::string>& labels, const std::vector<std::vector<double>>& scores = {});

}  // namespace marlids
