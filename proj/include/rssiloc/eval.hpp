#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rssiloc/core.hpp"
#include "rssiloc/error.hpp"

namespace rssiloc {

/// Population (1/N) statistics of the prediction errors.
struct RegressionMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double std_err = 0.0;      // spread of the errors about their mean
  std::optional<double> r2;  // nullopt when the truth has zero variance
  std::size_t count = 0;
};

/// Metrics over N samples of dimension D (rows are samples). Errors are
/// Euclidean norms per sample, so for D = 1 this is the usual scalar case
/// and for D = 2 the position-error form.
inline RegressionMetrics regression_metrics(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& predicted) {
  if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
    throw Error(ErrorKind::LengthMismatch, "actual and predicted differ in shape");
  }
  if (actual.rows() == 0) throw Error(ErrorKind::LengthMismatch, "no samples");
  const auto n = static_cast<double>(actual.rows());
  const Eigen::MatrixXd err = predicted - actual;
  RegressionMetrics m;
  m.count = static_cast<std::size_t>(actual.rows());
  const Eigen::VectorXd sq = err.rowwise().squaredNorm();
  m.rmse = std::sqrt(sq.sum() / n);
  m.mae = sq.cwiseSqrt().sum() / n;
  const Eigen::RowVectorXd mean_err = err.colwise().mean();
  m.std_err = std::sqrt((err.rowwise() - mean_err).rowwise().squaredNorm().sum() / n);
  const Eigen::RowVectorXd mean_truth = actual.colwise().mean();
  const double ss_tot = (actual.rowwise() - mean_truth).rowwise().squaredNorm().sum();
  if (ss_tot > 0.0) m.r2 = 1.0 - sq.sum() / ss_tot;
  return m;
}

inline RegressionMetrics regression_metrics(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw Error(ErrorKind::LengthMismatch, "actual and predicted differ in length");
  const auto n = static_cast<Eigen::Index>(actual.size());
  return regression_metrics(Eigen::MatrixXd(Eigen::Map<const Eigen::VectorXd>(actual.data(), n)),
                            Eigen::MatrixXd(Eigen::Map<const Eigen::VectorXd>(predicted.data(), n)));
}

inline RegressionMetrics regression_metrics(std::span<const Position> actual, std::span<const Position> predicted) {
  if (actual.size() != predicted.size()) throw Error(ErrorKind::LengthMismatch, "actual and predicted differ in length");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(actual.size()), 2), p(static_cast<Eigen::Index>(actual.size()), 2);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) << actual[i].x, actual[i].y;
    p.row(static_cast<Eigen::Index>(i)) << predicted[i].x, predicted[i].y;
  }
  return regression_metrics(a, p);
}

// ---------------------------------------------------------------------------

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// K x K counts, rows = actual class, columns = predicted class.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;

  static ConfusionMatrix from_labels(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                     std::size_t classes) {
    if (actual.size() != predicted.size()) throw Error(ErrorKind::LengthMismatch, "label sequences differ in length");
    ConfusionMatrix cm;
    cm.counts.assign(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < actual.size(); ++i) {
      if (actual[i] >= classes || predicted[i] >= classes) throw Error(ErrorKind::ShapeMismatch, "label out of range");
      ++cm.counts[actual[i]][predicted[i]];
    }
    return cm;
  }

  std::size_t classes() const { return counts.size(); }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
      for (auto c : row) n += c;
    }
    return n;
  }

  /// One-vs-rest counts for class k.
  ClassCounts one_vs_rest(std::size_t k) const {
    ClassCounts c;
    for (std::size_t a = 0; a < classes(); ++a) {
      for (std::size_t p = 0; p < classes(); ++p) {
        const auto v = counts[a][p];
        if (a == k && p == k) c.tp += v;
        else if (a == k) c.fn += v;
        else if (p == k) c.fp += v;
        else c.tn += v;
      }
    }
    return c;
  }
};

struct ClassScores {
  double accuracy = 0.0;     // (TP + TN) / all
  double precision = 0.0;    // TP / (TP + FP)
  double sensitivity = 0.0;  // TP / (TP + FN)
  double f1 = 0.0;
  std::size_t support = 0;   // TP + FN
  bool degenerate = false;   // some ratio had a zero denominator and was reported as 0
};

inline ClassScores class_scores(const ClassCounts& c) {
  if (c.total() == 0) throw Error(ErrorKind::EmptyMatrix, "confusion counts are empty");
  ClassScores s;
  s.support = c.tp + c.fn;
  s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      s.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.sensitivity = ratio(c.tp, c.tp + c.fn);
  if (s.precision + s.sensitivity > 0.0) {
    s.f1 = 2.0 * s.sensitivity * s.precision / (s.sensitivity + s.precision);
  } else {
    s.degenerate = true;
  }
  return s;
}

struct ClassificationMetrics {
  std::vector<ClassScores> per_class;
  ClassScores macro;               // unweighted mean over classes
  double overall_accuracy = 0.0;   // trace / N
};

inline ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (cm.classes() == 0 || n == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix is empty");
  ClassificationMetrics out;
  std::size_t trace = 0;
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    out.per_class.push_back(class_scores(cm.one_vs_rest(k)));
    trace += cm.counts[k][k];
  }
  const auto k = static_cast<double>(cm.classes());
  for (const auto& s : out.per_class) {
    out.macro.accuracy += s.accuracy / k;
    out.macro.precision += s.precision / k;
    out.macro.sensitivity += s.sensitivity / k;
    out.macro.f1 += s.f1 / k;
    out.macro.support += s.support;
    out.macro.degenerate = out.macro.degenerate || s.degenerate;
  }
  out.overall_accuracy = static_cast<double>(trace) / static_cast<double>(n);
  return out;
}

}  // namespace rssiloc
