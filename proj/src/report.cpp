#include "marlids/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "marlids/errors.hpp"

namespace marlids {

using nlohmann::json;

std::string render_text(const EvaluationReport& report) {
  std::size_t width = std::string("Weighted Average").size();
  for (const auto& l : report.labels) width = std::max(width, l.size());
  std::ostringstream os;
  os << std::fixed;
  auto row = [&](const std::string& name, double p, double r, double f1, double fpr, std::uint64_t support) {
    os << std::left << std::setw(static_cast<int>(width)) << name << std::right << std::setprecision(2)
       << std::setw(11) << p << std::setw(9) << r << std::setw(10) << f1 << std::setprecision(5) << std::setw(10)
       << fpr << std::setw(10) << support << '\n';
  };
  os << std::left << std::setw(static_cast<int>(width)) << "Class" << std::right << std::setw(11) << "Precision"
     << std::setw(9) << "Recall" << std::setw(10) << "F1-Score" << std::setw(10) << "FPR" << std::setw(10)
     << "Support" << '\n';
  for (const auto& m : report.per_class) row(m.label, m.precision, m.recall, m.f1, m.fpr, m.support);
  const auto& w = report.weighted;
  row("Weighted Average", w.precision, w.recall, w.f1, w.fpr, w.total);
  os << std::left << std::setw(static_cast<int>(width)) << "Accuracy" << std::right << std::setprecision(2)
     << std::setw(11) << w.accuracy << '\n';
  if (report.macro_auc_defined) {
    os << std::left << std::setw(static_cast<int>(width)) << "AUC" << std::right << std::setprecision(2)
       << std::setw(11) << report.macro_auc << '\n';
  } else {
    os << std::left << std::setw(static_cast<int>(width)) << "AUC" << std::right << std::setw(11) << "n/a" << '\n';
  }
  return os.str();
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double threshold_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

json report_to_json(const EvaluationReport& r) {
  json classes = json::array();
  for (const auto& m : r.per_class) {
    classes.push_back({{"label", m.label},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"fpr", m.fpr},
                       {"support", m.support},
                       {"tp", m.tp},
                       {"fp", m.fp},
                       {"fn", m.fn},
                       {"tn", m.tn},
                       {"degenerate", m.degenerate}});
  }
  json matrix = json::array();
  for (std::size_t i = 0; i < r.confusion.num_classes(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < r.confusion.num_classes(); ++j) row.push_back(r.confusion.count(i, j));
    matrix.push_back(std::move(row));
  }
  json roc = json::array();
  for (const auto& c : r.roc) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back({finite_or_null(p.threshold), p.fpr, p.tpr});
    roc.push_back({{"label", c.label},
                   {"defined", c.defined},
                   {"auc", c.auc},
                   {"positives", c.positives},
                   {"negatives", c.negatives},
                   {"points", std::move(pts)}});
  }
  return {{"labels", r.labels},
          {"per_class", std::move(classes)},
          {"weighted_average",
           {{"precision", r.weighted.precision},
            {"recall", r.weighted.recall},
            {"f1", r.weighted.f1},
            {"fpr", r.weighted.fpr},
            {"support", r.weighted.total}}},
          {"accuracy", r.weighted.accuracy},
          {"auc", r.macro_auc_defined ? json(r.macro_auc) : json(nullptr)},
          {"confusion_matrix", std::move(matrix)},
          {"roc", std::move(roc)}};
}

EvaluationReport report_from_json(const json& j) {
  try {
    EvaluationReport r;
    r.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& c : j.at("per_class")) {
      ClassMetrics m;
      m.label = c.at("label").get<std::string>();
      m.precision = c.at("precision").get<double>();
      m.recall = c.at("recall").get<double>();
      m.f1 = c.at("f1").get<double>();
      m.fpr = c.at("fpr").get<double>();
      m.support = c.at("support").get<std::uint64_t>();
      m.tp = c.at("tp").get<std::uint64_t>();
      m.fp = c.at("fp").get<std::uint64_t>();
      m.fn = c.at("fn").get<std::uint64_t>();
      m.tn = c.at("tn").get<std::uint64_t>();
      m.degenerate = c.at("degenerate").get<bool>();
      r.per_class.push_back(std::move(m));
    }
    const auto& w = j.at("weighted_average");
    r.weighted.precision = w.at("precision").get<double>();
    r.weighted.recall = w.at("recall").get<double>();
    r.weighted.f1 = w.at("f1").get<double>();
    r.weighted.fpr = w.at("fpr").get<double>();
    r.weighted.total = w.at("support").get<std::uint64_t>();
    r.weighted.accuracy = j.at("accuracy").get<double>();
    r.macro_auc_defined = !j.at("auc").is_null();
    r.macro_auc = r.macro_auc_defined ? j.at("auc").get<double>() : 0.0;
    r.confusion = ConfusionMatrix(r.labels);
    const auto& matrix = j.at("confusion_matrix");
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      for (std::size_t k = 0; k < matrix[i].size(); ++k) {
        const auto n = matrix[i][k].get<std::uint64_t>();
        if (n > 0) r.confusion.add(i, k, n);
      }
    }
    for (const auto& c : j.at("roc")) {
      RocCurve curve;
      curve.label = c.at("label").get<std::string>();
      curve.defined = c.at("defined").get<bool>();
      curve.auc = c.at("auc").get<double>();
      curve.positives = c.at("positives").get<std::size_t>();
      curve.negatives = c.at("negatives").get<std::size_t>();
      for (const auto& p : c.at("points")) {
        curve.points.push_back({threshold_from(p.at(0)), p.at(1).get<double>(), p.at(2).get<double>()});
      }
      r.roc.push_back(std::move(curve));
    }
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("report: malformed JSON: ") + e.what());
  }
}

std::string roc_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "label,threshold,fpr,tpr\n";
  for (const auto& c : report.roc) {
    if (!c.defined) continue;
    for (const auto& p : c.points) {
      os << c.label << ',';
      if (std::isfinite(p.threshold)) {
        os << p.threshold;
      } else {
        os << "inf";
      }
      os << ',' << p.fpr << ',' << p.tpr << '\n';
    }
  }
  return os.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream os;
  os << "true\\predicted";
  for (const auto& l : cm.labels()) os << ',' << l;
  os << '\n';
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    os << cm.labels()[i];
    for (std::size_t j = 0; j < cm.num_classes(); ++j) os << ',' << cm.count(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace marlids
