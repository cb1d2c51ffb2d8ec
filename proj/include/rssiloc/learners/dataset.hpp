#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/rng.hpp"

namespace rssiloc {

/// RSSI features (dBm, one column per anchor) with (x, y) ground truth in cm.
struct RegressionDataset {
  Eigen::MatrixXd features;  // N x F
  Eigen::MatrixXd targets;   // N x 2
  std::vector<std::string> feature_names;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }

  void validate() const {
    if (features.rows() == 0) throw Error(ErrorKind::EmptyDataset, "dataset has no rows");
    if (targets.rows() != features.rows() || targets.cols() != 2) {
      throw Error(ErrorKind::ShapeMismatch, "targets must be N x 2");
    }
    if (!features.allFinite() || !targets.allFinite()) throw Error(ErrorKind::MalformedNumber, "dataset has non-finite entries");
  }

  RegressionDataset subset(const std::vector<std::size_t>& rows_to_take) const {
    RegressionDataset out;
    out.feature_names = feature_names;
    out.features.resize(static_cast<Eigen::Index>(rows_to_take.size()), features.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows_to_take.size()), 2);
    for (std::size_t i = 0; i < rows_to_take.size(); ++i) {
      out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows_to_take[i]));
      out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(static_cast<Eigen::Index>(rows_to_take[i]));
    }
    return out;
  }

  friend bool operator==(const RegressionDataset& a, const RegressionDataset& b) {
    return a.feature_names == b.feature_names && a.features.rows() == b.features.rows() &&
           a.features.cols() == b.features.cols() && a.features == b.features && a.targets == b.targets;
  }
};

enum class Zone { A = 0, B = 1, C = 2, D = 3 };
inline constexpr std::size_t kZoneCount = 4;
inline constexpr std::size_t kBeaconCount = 13;

constexpr char zone_letter(std::size_t index) { return static_cast<char>('A' + index); }

inline std::size_t parse_zone(std::string_view s) {
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'D') return static_cast<std::size_t>(s[0] - 'A');
  if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'd') return static_cast<std::size_t>(s[0] - 'a');
  throw Error(ErrorKind::Config, "unknown zone '" + std::string(s) + "' (expected A-D)");
}

/// Beacon RSSI vectors (raw -200 sentinels kept) labeled with a zone index.
struct ClassificationDataset {
  Eigen::MatrixXd features;  // N x 13
  std::vector<std::size_t> labels;
  std::vector<std::string> locations;  // original location labels, may be empty
  std::size_t class_count = kZoneCount;

  std::size_t rows() const { return labels.size(); }

  /// One-hot row per sample.
  Eigen::MatrixXd one_hot() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(class_count));
    for (std::size_t i = 0; i < labels.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    return out;
  }

  ClassificationDataset subset(const std::vector<std::size_t>& rows_to_take) const {
    ClassificationDataset out;
    out.class_count = class_count;
    out.features.resize(static_cast<Eigen::Index>(rows_to_take.size()), features.cols());
    for (std::size_t i = 0; i < rows_to_take.size(); ++i) {
      out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows_to_take[i]));
      out.labels.push_back(labels[rows_to_take[i]]);
      if (!locations.empty()) out.locations.push_back(locations[rows_to_take[i]]);
    }
    return out;
  }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then the first round(n * test_size) rows become the test set.
inline SplitIndices train_test_split(std::size_t n, double test_size, std::uint64_t seed) {
  if (!(test_size > 0.0 && test_size < 1.0)) throw Error(ErrorKind::Config, "test_size must be in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_size));
  if (n_test == 0 || n_test >= n) throw Error(ErrorKind::TooFewSamples, "split leaves an empty train or test set");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, 0x73706C6974ULL);
  shuffle(order.begin(), order.end(), rng);
  SplitIndices out;
  out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return out;
}

}  // namespace rssiloc
