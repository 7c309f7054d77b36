#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "marlids/errors.hpp"
#include "marlids/metrics.hpp"
#include "marlids/report.hpp"
#include "oracles.hpp"

namespace marlids {
namespace {

struct Instance {
  std::vector<std::string> labels;
  std::vector<std::size_t> truth, pred;
};

Instance random_instance(std::mt19937_64& rng, std::size_t max_records, std::size_t max_classes) {
  std::uniform_int_distribution<std::size_t> nc(1, max_classes), nr(1, max_records);
  Instance in;
  const std::size_t k = nc(rng);
  for (std::size_t c = 0; c < k; ++c) in.labels.push_back("c" + std::to_string(c));
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  const std::size_t n = nr(rng);
  for (std::size_t i = 0; i < n; ++i) {
    in.truth.push_back(pick(rng));
    // Bias towards correct predictions so precision/recall vary.
    in.pred.push_back(rng() % 3 == 0 ? pick(rng) : in.truth.back());
  }
  return in;
}

TEST(Confusion, Examples) {
  const std::vector<std::string> labels{"A", "B"};
  const std::vector<std::size_t> t{0, 1, 1}, p{0, 1, 1};
  const auto cm = confusion(t, p, labels);
  EXPECT_EQ(cm.count(0, 0), 1U);
  EXPECT_EQ(cm.count(1, 1), 2U);
  EXPECT_EQ(cm.count(0, 1) + cm.count(1, 0), 0U);

  const std::vector<std::string> ts{"A"}, ps{"B"};
  const auto one = confusion(std::span<const std::string>(ts), std::span<const std::string>(ps), labels);
  EXPECT_EQ(one.count(0, 1), 1U);
  EXPECT_EQ(one.total(), 1U);
}

TEST(Confusion, MatchesDoubleLoop) {
  std::mt19937_64 rng(1);
  std::vector<std::string> labels{"a", "b", "c", "d", "e"};
  std::vector<std::size_t> t(1000), p(1000);
  for (auto& v : t) v = rng() % 5;
  for (auto& v : p) v = rng() % 5;
  const auto cm = confusion(t, p, labels);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      std::uint64_t n = 0;
      for (std::size_t k = 0; k < t.size(); ++k) n += (t[k] == i && p[k] == j) ? 1 : 0;
      EXPECT_EQ(cm.count(i, j), n);
    }
    EXPECT_EQ(cm.row_sum(i), static_cast<std::uint64_t>(std::count(t.begin(), t.end(), i)));
  }
}

TEST(Confusion, RejectsOutOfRange) {
  const std::vector<std::size_t> t{0, 2}, p{0, 0};
  EXPECT_THROW(confusion(t, p, {"A", "B"}), ValidationError);
  const std::vector<std::size_t> shorter{0};
  EXPECT_THROW(confusion(t, shorter, {"A", "B", "C"}), ValidationError);
}

TEST(PerClass, SymmetricCounts) {
  // Class 0: TP=1, FN=1 (predicted 1), FP=1 (truth 1 predicted 0), TN=1.
  const std::vector<std::size_t> t{0, 0, 1, 1}, p{0, 1, 0, 1};
  const auto m = per_class_metrics(confusion(t, p, {"A", "B"}));
  EXPECT_DOUBLE_EQ(m[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(m[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(m[0].f1, 0.5);
  EXPECT_DOUBLE_EQ(m[0].fpr, 0.5);
  EXPECT_FALSE(m[0].degenerate);
}

TEST(PerClass, AbsentClassIsDegenerate) {
  const std::vector<std::size_t> t{0, 0}, p{0, 0};
  const auto m = per_class_metrics(confusion(t, p, {"A", "B"}));
  EXPECT_TRUE(m[1].degenerate);
  EXPECT_EQ(m[1].precision, 0.0);
  EXPECT_EQ(m[1].recall, 0.0);
  EXPECT_EQ(m[1].f1, 0.0);
  EXPECT_EQ(m[1].fpr, 0.0);
}

TEST(Aggregate, Examples) {
  const std::vector<std::size_t> t{0, 0, 0}, p{0, 0, 0};
  const auto r = evaluate(t, p, {"A"});
  EXPECT_EQ(r.weighted.precision, 1.0);
  EXPECT_EQ(r.weighted.recall, 1.0);
  EXPECT_EQ(r.weighted.f1, 1.0);
  EXPECT_EQ(r.weighted.accuracy, 1.0);
  EXPECT_EQ(r.weighted.fpr, 0.0);

  // Supports 3:1, class 0 all right, class 1 all wrong.
  const std::vector<std::size_t> t2{0, 0, 0, 1}, p2{0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(evaluate(t2, p2, {"A", "B"}).weighted.recall, 0.75);
}

TEST(Metrics, BruteForceOracleOnRandomInstances) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = random_instance(rng, 500, 8);
    const auto r = evaluate(in.truth, in.pred, in.labels);
    double wp = 0, wr = 0, wf = 0, wfpr = 0, correct = 0;
    const auto n = static_cast<double>(in.truth.size());
    for (std::size_t c = 0; c < in.labels.size(); ++c) {
      const auto k = oracle::count_pairs(in.truth, in.pred, c);
      const double p = oracle::ratio(k.tp, k.tp + k.fp);
      const double rc = oracle::ratio(k.tp, k.tp + k.fn);
      const double f = (p + rc) == 0.0 ? 0.0 : 2 * p * rc / (p + rc);
      const double fpr = oracle::ratio(k.fp, k.fp + k.tn);
      const auto& m = r.per_class[c];
      EXPECT_EQ(m.tp, k.tp);
      EXPECT_EQ(m.fp, k.fp);
      EXPECT_EQ(m.fn, k.fn);
      EXPECT_EQ(m.tn, k.tn);
      EXPECT_NEAR(m.precision, p, 1e-12);
      EXPECT_NEAR(m.recall, rc, 1e-12);
      EXPECT_NEAR(m.f1, f, 1e-12);
      EXPECT_NEAR(m.fpr, fpr, 1e-12);
      const double support = static_cast<double>(k.tp + k.fn);
      wp += support * p;
      wr += support * rc;
      wf += support * f;
      wfpr += support * fpr;
      correct += static_cast<double>(k.tp);
      for (double v : {m.precision, m.recall, m.f1, m.fpr}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
    EXPECT_NEAR(r.weighted.precision, wp / n, 1e-12);
    EXPECT_NEAR(r.weighted.recall, wr / n, 1e-12);
    EXPECT_NEAR(r.weighted.f1, wf / n, 1e-12);
    EXPECT_NEAR(r.weighted.fpr, wfpr / n, 1e-12);
    EXPECT_NEAR(r.weighted.accuracy, correct / n, 1e-12);
    // Micro identity: support-weighted recall is accuracy.
    EXPECT_NEAR(r.weighted.recall, r.weighted.accuracy, 1e-12);
  }
}

// std::vector<bool> cannot back a span, so the flags live in a plain array.
struct Flags {
  explicit Flags(const std::vector<bool>& v) : n(v.size()), data(new bool[v.size()]) {
    std::copy(v.begin(), v.end(), data.get());
  }
  std::span<const bool> span() const { return {data.get(), n}; }
  std::size_t n;
  std::unique_ptr<bool[]> data;
};

TEST(RocAuc, Examples) {
  const Flags pos({true, true, false, false});
  const std::vector<double> separated{1, 1, 0, 0}, tied{0.3, 0.3, 0.3, 0.3};
  const auto perfect = roc_auc(separated, pos.span());
  EXPECT_TRUE(perfect.defined);
  EXPECT_EQ(perfect.auc, 1.0);
  EXPECT_EQ(roc_auc(tied, pos.span()).auc, 0.5);
  const Flags none({false, false});
  const std::vector<double> two{0.1, 0.2};
  EXPECT_FALSE(roc_auc(two, none.span()).defined);
}

TEST(RocAuc, CurveEndpoints) {
  const Flags pos({true, false, true, false, false});
  const std::vector<double> s{0.9, 0.8, 0.4, 0.4, 0.1};
  const auto c = roc_auc(s, pos.span());
  ASSERT_GE(c.points.size(), 2U);
  EXPECT_TRUE(std::isinf(c.points.front().threshold));
  EXPECT_EQ(c.points.front().tpr, 0.0);
  EXPECT_EQ(c.points.front().fpr, 0.0);
  EXPECT_EQ(c.points.back().tpr, 1.0);
  EXPECT_EQ(c.points.back().fpr, 1.0);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
    EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
  }
}

TEST(RocAuc, RankStatisticEqualsPairwise) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    std::vector<double> s(n);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 20) / 4.0;  // coarse grid forces ties
      pos[i] = rng() % 3 == 0;
    }
    pos[0] = true;
    pos[1] = false;
    const auto c = roc_auc(s, Flags(pos).span());
    EXPECT_NEAR(c.auc, oracle::pairwise_auc(s, pos), 1e-12);
  }
}

TEST(RocAuc, AreaUnderPointsEqualsAuc) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> s(50);
  std::vector<bool> pos(50);
  for (std::size_t i = 0; i < 50; ++i) {
    pos[i] = i % 3 == 0;
    s[i] = nd(rng) + (pos[i] ? 0.7 : 0.0);
  }
  const auto c = roc_auc(s, Flags(pos).span());
  double area = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    area += (c.points[i].fpr - c.points[i - 1].fpr) * (c.points[i].tpr + c.points[i - 1].tpr) / 2.0;
  }
  EXPECT_NEAR(area, oracle::pairwise_auc(s, pos), 1e-12);
}

TEST(Report, PerfectRunRendersOnes) {
  const std::vector<std::size_t> t{0, 1, 2, 2}, p{0, 1, 2, 2};
  const std::vector<std::vector<double>> scores{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 1}};
  const auto r = evaluate(t, p, {"DDoS", "Bot", "BENIGN"}, scores);
  const auto text = render_text(r);
  EXPECT_NE(text.find("Weighted Average"), std::string::npos);
  EXPECT_EQ(text.find("0.9"), std::string::npos);
  // Rows follow registry order.
  EXPECT_LT(text.find("DDoS"), text.find("Bot"));
  EXPECT_LT(text.find("Bot"), text.find("BENIGN"));
  EXPECT_TRUE(r.macro_auc_defined);
  EXPECT_EQ(r.macro_auc, 1.0);
}

TEST(Report, JsonRoundTrip) {
  std::mt19937_64 rng(12);
  const auto in = random_instance(rng, 80, 4);
  std::vector<std::vector<double>> scores(in.truth.size(), std::vector<double>(in.labels.size()));
  std::normal_distribution<double> nd;
  for (auto& row : scores) {
    for (auto& v : row) v = nd(rng);
  }
  const auto r = evaluate(in.truth, in.pred, in.labels, scores);
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
}

TEST(Report, CsvShapes) {
  const std::vector<std::size_t> t{0, 1}, p{1, 1};
  const auto r = evaluate(t, p, {"A", "B"}, {{0.2, 0.8}, {0.1, 0.9}});
  const auto cm = confusion_csv(r.confusion);
  EXPECT_EQ(std::count(cm.begin(), cm.end(), '\n'), 3);
  EXPECT_NE(roc_csv(r).find("label"), std::string::npos);
}

}  // namespace
}  // namespace marlids
