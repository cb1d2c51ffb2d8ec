#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/learners/tree.hpp"
#include "rssiloc/parallel.hpp"
#include "rssiloc/rng.hpp"

namespace rssiloc {

struct ForestOptions {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  SplitMode split_mode = SplitMode::Exhaustive;
  std::optional<std::size_t> max_depth;
  std::size_t min_leaf = 1;
  std::uint64_t seed = 42;
  unsigned threads = 1;

  /// Bootstrap resamples with exhaustive splits.
  static ForestOptions random_forest(std::size_t n_trees = 100, std::optional<std::size_t> max_depth = std::nullopt) {
    return ForestOptions{n_trees, true, SplitMode::Exhaustive, max_depth};
  }

  /// Whole training set per tree with random thresholds.
  static ForestOptions extra_trees(std::size_t n_trees = 100, std::optional<std::size_t> max_depth = 25) {
    return ForestOptions{n_trees, false, SplitMode::Random, max_depth};
  }
};

struct Forest {
  std::vector<RegressionTree> trees;
  std::size_t feature_count = 0;

  friend bool operator==(const Forest&, const Forest&) = default;
};

/// Tree t draws its bootstrap sample and thresholds from substream (seed, t),
/// so the forest is identical for any thread count.
inline Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestOptions& options) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyDataset, "no training rows");
  if (options.n_trees < 1) throw Error(ErrorKind::Config, "n_trees must be >= 1");
  const auto n = static_cast<std::size_t>(x.rows());
  Forest forest;
  forest.feature_count = static_cast<std::size_t>(x.cols());
  forest.trees.resize(options.n_trees);
  const TreeOptions tree_options{options.max_depth, options.min_leaf, options.split_mode, options.seed};
  parallel_for(options.n_trees, options.threads, [&](std::size_t t) {
    Rng rng(options.seed, t);
    std::vector<std::size_t> rows(n);
    if (options.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees[t] = fit_tree_rows(x, y, std::move(rows), tree_options, rng);
  });
  return forest;
}

/// Arithmetic mean of the member predictions.
template <typename Row>
double predict_row(const Forest& forest, const Row& row) {
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += predict_row(tree, row);
  return sum / static_cast<double>(forest.trees.size());
}

inline Eigen::VectorXd predict(const Forest& forest, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != forest.feature_count) {
    throw Error(ErrorKind::ShapeMismatch, "feature count differs from the fitted forest");
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_row(forest, x.row(i));
  return out;
}

}  // namespace rssiloc
