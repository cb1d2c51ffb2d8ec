#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/learners/dataset.hpp"

namespace rssiloc {

struct KnnResult {
  std::size_t label = 0;
  std::vector<double> probabilities;  // P(y = j) = votes_j / k
};

inline double euclidean_distance(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) { return (a - b).norm(); }

/// Majority vote among the k nearest training rows (Euclidean). Neighbors
/// at equal distance keep training order; vote ties go to the smaller class.
inline KnnResult knn_classify(const ClassificationDataset& train, const Eigen::RowVectorXd& query, std::size_t k) {
  const std::size_t n = train.rows();
  if (n == 0) throw Error(ErrorKind::EmptyTrainingSet, "kNN training set is empty");
  if (k < 1 || k > n) throw Error(ErrorKind::KTooLarge, "k must be in [1, " + std::to_string(n) + "]");
  if (query.size() != train.features.cols()) throw Error(ErrorKind::ShapeMismatch, "query length differs from feature count");

  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = (train.features.row(static_cast<Eigen::Index>(i)) - query).squaredNorm();
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  KnnResult result;
  result.probabilities.assign(train.class_count, 0.0);
  std::vector<std::size_t> votes(train.class_count, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[train.labels[order[i]]];
  for (std::size_t c = 0; c < votes.size(); ++c) {
    result.probabilities[c] = static_cast<double>(votes[c]) / static_cast<double>(k);
    if (votes[c] > votes[result.label]) result.label = c;
  }
  return result;
}

inline std::vector<std::size_t> knn_predict(const ClassificationDataset& train, const Eigen::MatrixXd& queries, std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < queries.rows(); ++i) out.push_back(knn_classify(train, queries.row(i), k).label);
  return out;
}

}  // namespace rssiloc
