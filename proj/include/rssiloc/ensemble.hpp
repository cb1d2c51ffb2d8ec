#pragma once

// TreeLoc stacking ensemble. Extra trees, a single regression tree and a
// random forest are each fitted on one third of the data; their position
// predictions are combined per coordinate by multiple linear regression:
//
//   X = a1 + W1 x_etr + W2 x_dtr + W3 x_rfr
//   Y = a2 + W1' y_etr + W2' y_dtr + W3' y_rfr

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "rssiloc/core.hpp"
#include "rssiloc/error.hpp"
#include "rssiloc/learners/dataset.hpp"
#include "rssiloc/learners/forest.hpp"
#include "rssiloc/learners/tree.hpp"
#include "rssiloc/linalg.hpp"
#include "rssiloc/rng.hpp"

namespace rssiloc {

/// (intercept, weight_etr, weight_dtr, weight_rfr)
using CombinerCoefficients = std::array<double, 4>;

/// Combiner coefficients published with the reference testbed experiment.
inline constexpr CombinerCoefficients kPublishedCombinerX = {-0.9494, 0.8036, 0.5476, 0.5212};
inline constexpr CombinerCoefficients kPublishedCombinerY = {-0.8348, 0.8922, 0.5937, 0.5292};

enum class CombinerMode { Fitted, FixedPaper };

constexpr std::string_view to_string(CombinerMode m) { return m == CombinerMode::Fitted ? "fitted" : "fixed-paper"; }

/// The three component learners for one coordinate.
struct TreeLocComponents {
  Forest etr;
  RegressionTree dtr;
  Forest rfr;

  friend bool operator==(const TreeLocComponents&, const TreeLocComponents&) = default;
};

struct TreeLocModel {
  std::array<TreeLocComponents, 2> components;  // x, y
  CombinerCoefficients combiner_x{};
  CombinerCoefficients combiner_y{};
  CombinerMode mode = CombinerMode::Fitted;
  std::size_t feature_count = 0;

  friend bool operator==(const TreeLocModel&, const TreeLocModel&) = default;
};

struct TreeLocOptions {
  std::size_t etr_trees = 100;
  std::optional<std::size_t> etr_depth = 25;
  std::optional<std::size_t> dtr_depth = 25;
  std::size_t rfr_trees = 100;
  std::optional<std::size_t> rfr_depth;
  CombinerMode mode = CombinerMode::Fitted;
  bool shuffle = false;           // seeded random partition instead of contiguous thirds
  bool combiner_holdout = false;  // fit the combiner on a held-out 20% instead of all rows
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

inline double combine(const CombinerCoefficients& c, double etr, double dtr, double rfr) {
  return c[0] + c[1] * etr + c[2] * dtr + c[3] * rfr;
}

/// Three equal parts; remainder rows go to the last one.
inline std::array<std::vector<std::size_t>, 3> partition_thirds(const std::vector<std::size_t>& rows) {
  const std::size_t third = rows.size() / 3;
  std::array<std::vector<std::size_t>, 3> parts;
  parts[0].assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(third));
  parts[1].assign(rows.begin() + static_cast<std::ptrdiff_t>(third), rows.begin() + static_cast<std::ptrdiff_t>(2 * third));
  parts[2].assign(rows.begin() + static_cast<std::ptrdiff_t>(2 * third), rows.end());
  return parts;
}

/// Component predictions for every row of x: columns (etr, dtr, rfr).
inline Eigen::MatrixXd component_predictions(const TreeLocComponents& c, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), 3);
  out.col(0) = predict(c.etr, x);
  out.col(1) = predict(c.dtr, x);
  out.col(2) = predict(c.rfr, x);
  return out;
}

/// Minimal-norm OLS of target on [1, etr, dtr, rfr].
inline CombinerCoefficients fit_combiner(const Eigen::MatrixXd& component_outputs, const Eigen::VectorXd& target) {
  Eigen::MatrixXd design(component_outputs.rows(), 4);
  design.col(0).setOnes();
  design.rightCols(3) = component_outputs;
  const Eigen::VectorXd beta = linalg::min_norm_lstsq(design, target);
  return {beta(0), beta(1), beta(2), beta(3)};
}

inline TreeLocModel treeloc_fit(const RegressionDataset& ds, const TreeLocOptions& options = {}) {
  ds.validate();
  const std::size_t n = ds.rows();
  if (n < 6) throw Error(ErrorKind::TooFewSamples, "TreeLoc needs at least 6 rows, got " + std::to_string(n));

  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (options.shuffle) {
    Rng rng(options.seed, 0x7265654C6F63ULL);
    shuffle(rows.begin(), rows.end(), rng);
  }
  std::vector<std::size_t> combiner_rows = rows;
  if (options.combiner_holdout) {
    const std::size_t holdout = std::max<std::size_t>(1, n / 5);
    if (n - holdout < 6) throw Error(ErrorKind::TooFewSamples, "too few rows for a combiner hold-out");
    combiner_rows.assign(rows.end() - static_cast<std::ptrdiff_t>(holdout), rows.end());
    rows.resize(n - holdout);
  }
  const auto parts = partition_thirds(rows);

  const RegressionDataset first = ds.subset(parts[0]);
  const RegressionDataset second = ds.subset(parts[1]);
  const RegressionDataset third = ds.subset(parts[2]);
  const RegressionDataset fit_set = ds.subset(combiner_rows);

  TreeLocModel model;
  model.mode = options.mode;
  model.feature_count = ds.feature_count();
  for (std::size_t axis = 0; axis < 2; ++axis) {
    const auto col = static_cast<Eigen::Index>(axis);
    auto& comp = model.components[axis];
    // distinct substreams per (axis, component)
    const std::uint64_t base = options.seed ^ (0x9E3779B97F4A7C15ULL * (axis + 1));

    ForestOptions etr = ForestOptions::extra_trees(options.etr_trees, options.etr_depth);
    etr.seed = base + 1;
    etr.threads = options.threads;
    comp.etr = fit_forest(first.features, first.targets.col(col), etr);

    TreeOptions dtr{options.dtr_depth, 1, SplitMode::Exhaustive, base + 2};
    comp.dtr = fit_tree(second.features, second.targets.col(col), dtr);

    ForestOptions rfr = ForestOptions::random_forest(options.rfr_trees, options.rfr_depth);
    rfr.seed = base + 3;
    rfr.threads = options.threads;
    comp.rfr = fit_forest(third.features, third.targets.col(col), rfr);

    CombinerCoefficients coeffs = axis == 0 ? kPublishedCombinerX : kPublishedCombinerY;
    if (options.mode == CombinerMode::Fitted) {
      coeffs = fit_combiner(component_predictions(comp, fit_set.features), fit_set.targets.col(col));
    }
    (axis == 0 ? model.combiner_x : model.combiner_y) = coeffs;
  }
  return model;
}

inline Position treeloc_predict(const TreeLocModel& model, const Eigen::RowVectorXd& rssi) {
  if (static_cast<std::size_t>(rssi.size()) != model.feature_count) {
    throw Error(ErrorKind::ShapeMismatch, "feature count differs from the fitted model");
  }
  const auto& cx = model.components[0];
  const auto& cy = model.components[1];
  const double x = combine(model.combiner_x, predict_row(cx.etr, rssi), predict_row(cx.dtr, rssi), predict_row(cx.rfr, rssi));
  const double y = combine(model.combiner_y, predict_row(cy.etr, rssi), predict_row(cy.dtr, rssi), predict_row(cy.rfr, rssi));
  return {x, y, 0.0};
}

/// N x 2 predicted positions.
inline Eigen::MatrixXd treeloc_predict(const TreeLocModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Position p = treeloc_predict(model, Eigen::RowVectorXd(x.row(i)));
    out(i, 0) = p.x;
    out(i, 1) = p.y;
  }
  return out;
}

}  // namespace rssiloc
