#pragma once

// Reference implementations used only by the tests. Each one is written the
// slow, obvious way and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Dense network as nested vectors: w[l][out][in], b[l][out], relu[l].
struct PlainNet {
  std::vector<std::vector<std::vector<double>>> w;
  std::vector<std::vector<double>> b;
  std::vector<bool> relu;
};

inline std::vector<double> forward(const PlainNet& net, std::vector<double> x) {
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    std::vector<double> y(net.w[l].size());
    for (std::size_t o = 0; o < y.size(); ++o) {
      double s = net.b[l][o];
      for (std::size_t i = 0; i < x.size(); ++i) s += net.w[l][o][i] * x[i];
      y[o] = net.relu[l] ? std::max(0.0, s) : s;
    }
    x = std::move(y);
  }
  return x;
}

// Smallest |pre-activation| of any ReLU unit; finite differences are only
// meaningful away from the kink.
inline double relu_margin(const PlainNet& net, std::vector<double> x) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < net.w.size(); ++l) {
    std::vector<double> y(net.w[l].size());
    for (std::size_t o = 0; o < y.size(); ++o) {
      double s = net.b[l][o];
      for (std::size_t i = 0; i < x.size(); ++i) s += net.w[l][o][i] * x[i];
      if (net.relu[l]) margin = std::min(margin, std::abs(s));
      y[o] = net.relu[l] ? std::max(0.0, s) : s;
    }
    x = std::move(y);
  }
  return margin;
}

inline double wmse(const std::vector<double>& p, const std::vector<double>& t, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = (p[i] - t[i]) * w[i];
    s += r * r;
  }
  return s / static_cast<double>(p.size());
}

// Scalar Adam, one parameter.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double theta, double g, double lr = 0.01, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return theta - lr * mh / (std::sqrt(vh) + eps);
  }
};

// Reward table with the five stated cases expanded to all nine cells.
// Categories: 0 = agent's attack, 1 = other attack, 2 = normal.
inline double l1_reward(int truth, int action, double k) {
  static const char* table[3][3] = {
      // action: agent   other  normal
      {"+k", "-k", "-k"},  // truth = agent's attack
      {"-k", "+1", "-1"},  // truth = other attack
      {"-k", "-1", "+1"},  // truth = normal
  };
  const std::string cell = table[truth][action];
  if (cell == "+k") return k;
  if (cell == "-k") return -k;
  return cell == "+1" ? 1.0 : -1.0;
}

// FIFO with a plain deque.
template <typename T>
struct ListFifo {
  std::size_t capacity;
  std::deque<T> items;
  void push(T v) {
    items.push_back(std::move(v));
    if (items.size() > capacity) items.pop_front();
  }
};

// One-vs-rest counts straight from label pairs.
struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts count_pairs(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& pred, std::size_t c) {
  Counts k;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == c, p = pred[i] == c;
    if (t && p) ++k.tp;
    else if (!t && p) ++k.fp;
    else if (t && !p) ++k.fn;
    else ++k.tn;
  }
  return k;
}

inline double ratio(std::uint64_t a, std::uint64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

// Probability that a random positive outranks a random negative, ties count
// one half. Quadratic on purpose.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Per-class counts after cleaning and benign downsampling, with the expected
// train/test split, as published for the CIC-IDS-2017 flows.
struct TableRow {
  const char* label;
  std::size_t total, preprocessed, train, test;
};

inline const std::vector<TableRow>& cicids2017_table() {
  static const std::vector<TableRow> rows = {
      {"BENIGN", 2271781, 2271320, 559999, 140001},
      {"DoS Hulk", 230124, 230124, 184099, 46025},
      {"PortScan", 158804, 158804, 127043, 31761},
      {"DDoS", 128027, 128025, 102420, 25605},
      {"DoS GoldenEye", 10293, 10293, 8234, 2059},
      {"FTP Patator", 7938, 7935, 6348, 1587},
      {"SSH Patator", 5897, 5897, 4717, 1180},
      {"DoS slowloris", 5796, 5796, 4637, 1159},
      {"DoS Slowhttptest", 5499, 5499, 4399, 1100},
      {"Bot", 1956, 1956, 1565, 391},
      {"Web_Attack Brute Force", 1507, 1507, 1206, 301},
      {"Web_Attack XSS", 652, 652, 522, 130},
      {"Infiltration", 36, 36, 29, 7},
      {"Web_Attack Sql Injection", 21, 21, 17, 4},
      {"Heartbleed", 11, 11, 9, 2},
  };
  return rows;
}

}  // namespace oracle
