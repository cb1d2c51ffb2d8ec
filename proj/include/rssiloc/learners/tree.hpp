#pragma once

// CART regression trees. Splits minimize the summed squared error of the two
// children; leaves predict the mean target of their training rows.

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/rng.hpp"

namespace rssiloc {

enum class SplitMode {
  Exhaustive,  // best midpoint over every feature
  Random,      // one uniform threshold per feature, best of those (extra trees)
};

constexpr std::string_view to_string(SplitMode mode) { return mode == SplitMode::Exhaustive ? "exhaustive" : "random"; }

struct TreeOptions {
  std::optional<std::size_t> max_depth;  // nullopt: grow until pure or min_leaf
  std::size_t min_leaf = 1;
  SplitMode split_mode = SplitMode::Exhaustive;
  std::uint64_t seed = 42;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         // mean training target of the node
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Nodes in preorder; nodes[0] is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;
  std::size_t feature_count = 0;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

  std::size_t depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [id, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      const auto& n = nodes[static_cast<std::size_t>(id)];
      if (!n.is_leaf()) {
        stack.emplace_back(n.left, d + 1);
        stack.emplace_back(n.right, d + 1);
      }
    }
    return best;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }
};

namespace detail {

struct SplitCandidate {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // parent SSE minus children SSE
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeOptions& options, Rng& rng)
      : x_(x), y_(y), options_(options), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    tree_.feature_count = static_cast<std::size_t>(x_.cols());
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = rows.size();
    double mean = 0.0;
    double lo = y_(static_cast<Eigen::Index>(rows[0])), hi = lo;
    for (auto r : rows) {
      const double v = y_(static_cast<Eigen::Index>(r));
      mean += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    mean /= static_cast<double>(n);
    {
      auto& node = tree_.nodes.back();
      node.value = mean;
      node.samples = n;
    }
    const bool depth_reached = options_.max_depth && depth >= *options_.max_depth;
    if (depth_reached || n < 2 * options_.min_leaf || lo == hi) return id;

    double sse = 0.0;
    for (auto r : rows) {
      const double c = y_(static_cast<Eigen::Index>(r)) - mean;
      sse += c * c;
    }
    const SplitCandidate split = options_.split_mode == SplitMode::Exhaustive ? best_exhaustive(rows, mean)
                                                                                : best_random(rows, mean);
    if (split.feature < 0 || !(split.gain > 1e-12 * sse)) return id;

    std::vector<std::size_t> left, right;
    left.reserve(n);
    right.reserve(n);
    for (auto r : rows) {
      (x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const std::int32_t left_id = grow(std::move(left), depth + 1);
    const std::int32_t right_id = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    return id;
  }

  /// Gain of a partition from centered sums: sl^2/nl + sr^2/nr (parent term is 0).
  static double gain(double sum_left, std::size_t n_left, double sum_right, std::size_t n_right) {
    return sum_left * sum_left / static_cast<double>(n_left) + sum_right * sum_right / static_cast<double>(n_right);
  }

  SplitCandidate best_exhaustive(const std::vector<std::size_t>& rows, double mean) {
    SplitCandidate best;
    const std::size_t n = rows.size();
    std::vector<std::size_t> order(rows);
    double total = 0.0;
    for (auto r : rows) total += y_(static_cast<Eigen::Index>(r)) - mean;
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), f) < x_(static_cast<Eigen::Index>(b), f);
      });
      double sum_left = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        sum_left += y_(static_cast<Eigen::Index>(order[k])) - mean;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < options_.min_leaf || n_right < options_.min_leaf) continue;
        const double a = x_(static_cast<Eigen::Index>(order[k]), f);
        const double b = x_(static_cast<Eigen::Index>(order[k + 1]), f);
        if (!(a < b)) continue;
        const double g = gain(sum_left, n_left, total - sum_left, n_right);
        if (g > best.gain) {
          double t = a + 0.5 * (b - a);
          if (!(t < b)) t = a;
          best = {static_cast<std::int32_t>(f), t, g};
        }
      }
    }
    return best;
  }

  SplitCandidate best_random(const std::vector<std::size_t>& rows, double mean) {
    SplitCandidate best;
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      double lo = x_(static_cast<Eigen::Index>(rows[0]), f), hi = lo;
      for (auto r : rows) {
        lo = std::min(lo, x_(static_cast<Eigen::Index>(r), f));
        hi = std::max(hi, x_(static_cast<Eigen::Index>(r), f));
      }
      if (!(lo < hi)) continue;
      double t = rng_.uniform(lo, hi);
      if (!(t < hi)) t = lo;
      double sum_left = 0.0, sum_right = 0.0;
      std::size_t n_left = 0, n_right = 0;
      for (auto r : rows) {
        const double c = y_(static_cast<Eigen::Index>(r)) - mean;
        if (x_(static_cast<Eigen::Index>(r), f) <= t) {
          sum_left += c;
          ++n_left;
        } else {
          sum_right += c;
          ++n_right;
        }
      }
      if (n_left < options_.min_leaf || n_right < options_.min_leaf) continue;
      const double g = gain(sum_left, n_left, sum_right, n_right);
      if (g > best.gain) best = {static_cast<std::int32_t>(f), t, g};
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const TreeOptions& options_;
  Rng& rng_;
  RegressionTree tree_;
};

}  // namespace detail

/// Grows a tree on the given rows (duplicates allowed, as in a bootstrap
/// sample) using the caller's random stream.
inline RegressionTree fit_tree_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::size_t> rows,
                                    const TreeOptions& options, Rng& rng) {
  if (x.rows() == 0 || rows.empty()) throw Error(ErrorKind::EmptyDataset, "no training rows");
  if (y.size() != x.rows()) throw Error(ErrorKind::ShapeMismatch, "target length differs from row count");
  if (options.min_leaf < 1) throw Error(ErrorKind::Config, "min_leaf must be >= 1");
  return detail::TreeBuilder(x, y, options, rng).build(std::move(rows));
}

/// Grows a tree on every row. Random-mode thresholds come from substream
/// (seed, 0), the same stream a one-tree forest would use.
inline RegressionTree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeOptions& options = {}) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(options.seed, 0);
  return fit_tree_rows(x, y, std::move(rows), options, rng);
}

template <typename Row>
double predict_row(const RegressionTree& tree, const Row& row) {
  std::size_t id = 0;
  while (!tree.nodes[id].is_leaf()) {
    const auto& n = tree.nodes[id];
    id = static_cast<std::size_t>(row(n.feature) <= n.threshold ? n.left : n.right);
  }
  return tree.nodes[id].value;
}

inline Eigen::VectorXd predict(const RegressionTree& tree, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != tree.feature_count) {
    throw Error(ErrorKind::ShapeMismatch, "feature count differs from the fitted tree");
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_row(tree, x.row(i));
  return out;
}

}  // namespace rssiloc
