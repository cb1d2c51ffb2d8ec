#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/linalg.hpp"

namespace rssiloc {

/// Linear model on a polynomial feature expansion; degree 1 is plain linear
/// regression. coefficients(0) is the intercept.
struct PolynomialModel {
  std::size_t input_features = 0;
  std::size_t degree = 1;
  bool cross_terms = false;
  Eigen::VectorXd coefficients;
};

/// Exponent tuples of the expansion, intercept excluded. Without cross terms
/// the order is x1, x1^2, ..., x1^n, x2, ...; with cross terms, every
/// monomial of total degree 1..n in graded order.
inline std::vector<std::vector<std::size_t>> polynomial_terms(std::size_t features, std::size_t degree, bool cross_terms) {
  std::vector<std::vector<std::size_t>> terms;
  if (!cross_terms) {
    for (std::size_t f = 0; f < features; ++f) {
      for (std::size_t p = 1; p <= degree; ++p) {
        std::vector<std::size_t> e(features, 0);
        e[f] = p;
        terms.push_back(std::move(e));
      }
    }
    return terms;
  }
  std::vector<std::size_t> e(features, 0);
  for (std::size_t total = 1; total <= degree; ++total) {
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t f, std::size_t remaining) {
      if (f + 1 == features) {
        e[f] = remaining;
        terms.push_back(e);
        e[f] = 0;
        return;
      }
      for (std::size_t p = remaining + 1; p-- > 0;) {
        e[f] = p;
        rec(f + 1, remaining - p);
      }
      e[f] = 0;
    };
    rec(0, total);
  }
  return terms;
}

/// Design matrix [1, expansion(x)].
inline Eigen::MatrixXd polynomial_design(const Eigen::MatrixXd& x, std::size_t degree, bool cross_terms) {
  const auto terms = polynomial_terms(static_cast<std::size_t>(x.cols()), degree, cross_terms);
  Eigen::MatrixXd design(x.rows(), static_cast<Eigen::Index>(terms.size() + 1));
  design.col(0).setOnes();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    auto col = design.col(static_cast<Eigen::Index>(t + 1));
    col.setOnes();
    for (std::size_t f = 0; f < terms[t].size(); ++f) {
      for (std::size_t p = 0; p < terms[t][f]; ++p) col.array() *= x.col(static_cast<Eigen::Index>(f)).array();
    }
  }
  return design;
}

/// Least-squares fit on the expanded features. Rank-deficient designs get
/// the minimal-norm solution.
inline PolynomialModel fit_polynomial(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t degree,
                                      bool cross_terms = false) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyDataset, "no training rows");
  if (y.size() != x.rows()) throw Error(ErrorKind::ShapeMismatch, "target length differs from row count");
  if (degree < 1) throw Error(ErrorKind::Config, "polynomial degree must be >= 1");
  PolynomialModel model;
  model.input_features = static_cast<std::size_t>(x.cols());
  model.degree = degree;
  model.cross_terms = cross_terms;
  model.coefficients = linalg::min_norm_lstsq(polynomial_design(x, degree, cross_terms), y);
  return model;
}

inline PolynomialModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) { return fit_polynomial(x, y, 1); }

inline Eigen::VectorXd predict(const PolynomialModel& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.input_features) {
    throw Error(ErrorKind::ShapeMismatch, "feature count differs from the fitted model");
  }
  return polynomial_design(x, model.degree, model.cross_terms) * model.coefficients;
}

inline double predict_one(const PolynomialModel& model, const Eigen::RowVectorXd& x) {
  return predict(model, Eigen::MatrixXd(x))(0);
}

}  // namespace rssiloc
