#pragma once

// Portable JSON model files:
//
//   {"format": "rssiloc-model", "version": 1, "kind": "...",
//    "hyperparameters": {...}, "parameters": {...}}
//
// Doubles are written in shortest round-trip form, so load(save(m)) == m.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include "rssiloc/ensemble.hpp"
#include "rssiloc/error.hpp"
#include "rssiloc/ingest.hpp"
#include "rssiloc/learners/dataset.hpp"
#include "rssiloc/learners/forest.hpp"
#include "rssiloc/learners/linear.hpp"
#include "rssiloc/learners/mlp.hpp"
#include "rssiloc/learners/tree.hpp"

namespace rssiloc {

using nlohmann::json;

inline constexpr const char* kModelFormat = "rssiloc-model";
inline constexpr int kModelVersion = 1;

namespace io {

inline json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Row-major nested arrays.
inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw Error(ErrorKind::ShapeMismatch, "matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto r = vector_from(data[static_cast<std::size_t>(i)]);
    if (r.size() != cols) throw Error(ErrorKind::ShapeMismatch, "matrix column count mismatch");
    m.row(i) = r.transpose();
  }
  return m;
}

inline json depth_json(const std::optional<std::size_t>& d) { return d ? json(*d) : json(nullptr); }

inline std::optional<std::size_t> depth_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::size_t>();
}

// --- per-type parameters ------------------------------------------------

inline json to_json(const PolynomialModel& m) {
  return {{"input_features", m.input_features},
          {"degree", m.degree},
          {"cross_terms", m.cross_terms},
          {"coefficients", vector_json(m.coefficients)}};
}

inline PolynomialModel polynomial_from(const json& j) {
  PolynomialModel m;
  m.input_features = j.at("input_features").get<std::size_t>();
  m.degree = j.at("degree").get<std::size_t>();
  m.cross_terms = j.at("cross_terms").get<bool>();
  m.coefficients = vector_from(j.at("coefficients"));
  return m;
}

/// Nodes as [feature, threshold, left, right, value, samples].
inline json to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value, n.samples}));
  return {{"feature_count", t.feature_count}, {"nodes", nodes}};
}

inline RegressionTree tree_from(const json& j) {
  RegressionTree t;
  t.feature_count = j.at("feature_count").get<std::size_t>();
  for (const auto& n : j.at("nodes")) {
    if (n.size() != 6) throw Error(ErrorKind::ShapeMismatch, "tree node must have 6 fields");
    t.nodes.push_back({n[0].get<std::int32_t>(), n[1].get<double>(), n[2].get<std::int32_t>(), n[3].get<std::int32_t>(),
                       n[4].get<double>(), n[5].get<std::size_t>()});
  }
  const auto count = static_cast<std::int32_t>(t.nodes.size());
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) continue;
    if (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count ||
        static_cast<std::size_t>(n.feature) >= t.feature_count) {
      throw Error(ErrorKind::ShapeMismatch, "tree node references are out of range");
    }
  }
  return t;
}

inline json to_json(const Forest& f) {
  json trees = json::array();
  for (const auto& t : f.trees) trees.push_back(to_json(t));
  return {{"feature_count", f.feature_count}, {"trees", trees}};
}

inline Forest forest_from(const json& j) {
  Forest f;
  f.feature_count = j.at("feature_count").get<std::size_t>();
  for (const auto& t : j.at("trees")) f.trees.push_back(tree_from(t));
  if (f.trees.empty()) throw Error(ErrorKind::ShapeMismatch, "forest has no trees");
  return f;
}

inline json to_json(const TreeLocModel& m) {
  json comps = json::array();
  for (const auto& c : m.components) comps.push_back({{"etr", to_json(c.etr)}, {"dtr", to_json(c.dtr)}, {"rfr", to_json(c.rfr)}});
  return {{"feature_count", m.feature_count},
          {"combiner_mode", std::string(to_string(m.mode))},
          {"combiner_x", m.combiner_x},
          {"combiner_y", m.combiner_y},
          {"components", comps}};
}

inline TreeLocModel treeloc_from(const json& j) {
  TreeLocModel m;
  m.feature_count = j.at("feature_count").get<std::size_t>();
  const auto mode = j.at("combiner_mode").get<std::string>();
  if (mode == "fitted") m.mode = CombinerMode::Fitted;
  else if (mode == "fixed-paper") m.mode = CombinerMode::FixedPaper;
  else throw Error(ErrorKind::Config, "unknown combiner mode '" + mode + "'");
  m.combiner_x = j.at("combiner_x").get<CombinerCoefficients>();
  m.combiner_y = j.at("combiner_y").get<CombinerCoefficients>();
  const auto& comps = j.at("components");
  if (comps.size() != 2) throw Error(ErrorKind::ShapeMismatch, "TreeLoc needs two coordinate components");
  for (std::size_t a = 0; a < 2; ++a) {
    m.components[a].etr = forest_from(comps[a].at("etr"));
    m.components[a].dtr = tree_from(comps[a].at("dtr"));
    m.components[a].rfr = forest_from(comps[a].at("rfr"));
  }
  return m;
}

inline json to_json(const MlpModel& m) {
  json layers = json::array();
  for (const auto& l : m.layers) layers.push_back({{"weights", matrix_json(l.weights)}, {"bias", vector_json(l.bias)}});
  return {{"hidden", std::string(to_string(m.hidden))},
          {"input_offset", vector_json(m.input_offset)},
          {"input_scale", vector_json(m.input_scale)},
          {"layers", layers}};
}

inline MlpModel mlp_from(const json& j) {
  MlpModel m;
  const auto hidden = j.at("hidden").get<std::string>();
  if (hidden == "relu") m.hidden = Activation::Relu;
  else if (hidden == "sigmoid") m.hidden = Activation::Sigmoid;
  else throw Error(ErrorKind::Config, "unknown activation '" + hidden + "'");
  m.input_offset = vector_from(j.at("input_offset"));
  m.input_scale = vector_from(j.at("input_scale"));
  for (const auto& l : j.at("layers")) m.layers.push_back({matrix_from(l.at("weights")), vector_from(l.at("bias"))});
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    if (l.bias.size() != l.weights.rows() || (i > 0 && l.weights.cols() != m.layers[i - 1].weights.rows())) {
      throw Error(ErrorKind::ShapeMismatch, "MLP layer shapes are inconsistent");
    }
  }
  return m;
}

inline json to_json(const ClassificationDataset& ds) {
  return {{"class_count", ds.class_count}, {"features", matrix_json(ds.features)}, {"labels", ds.labels}, {"locations", ds.locations}};
}

inline ClassificationDataset classification_from(const json& j) {
  ClassificationDataset ds;
  ds.class_count = j.at("class_count").get<std::size_t>();
  ds.features = matrix_from(j.at("features"));
  ds.labels = j.at("labels").get<std::vector<std::size_t>>();
  ds.locations = j.at("locations").get<std::vector<std::string>>();
  if (ds.labels.size() != static_cast<std::size_t>(ds.features.rows())) throw Error(ErrorKind::ShapeMismatch, "label count mismatch");
  return ds;
}

}  // namespace io

// --- fitted model wrappers ------------------------------------------------

/// Independent per-coordinate regressors (x, y).
template <typename M>
struct AxisModels {
  std::array<M, 2> axes;
  friend bool operator==(const AxisModels&, const AxisModels&) = default;
};

/// kNN keeps its training set as its parameters.
struct KnnModel {
  ClassificationDataset train;
  std::size_t k = 5;
};

/// Regression learners produce (x, y); zone classifiers produce a class index.
struct SavedModel {
  std::string kind;  // linear, polynomial, tree, random-forest, extra-trees, treeloc, knn, mlp
  json hyperparameters = json::object();
  std::variant<AxisModels<PolynomialModel>, AxisModels<RegressionTree>, AxisModels<Forest>, TreeLocModel, KnnModel, MlpModel> model;

  bool is_classifier() const { return kind == "knn" || kind == "mlp"; }
};

inline json to_json(const SavedModel& m) {
  json params;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TreeLocModel> || std::is_same_v<T, MlpModel>) {
          params = io::to_json(v);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          params = {{"k", v.k}, {"train", io::to_json(v.train)}};
        } else {
          params = {{"x", io::to_json(v.axes[0])}, {"y", io::to_json(v.axes[1])}};
        }
      },
      m.model);
  return {{"format", kModelFormat}, {"version", kModelVersion}, {"kind", m.kind}, {"hyperparameters", m.hyperparameters}, {"parameters", params}};
}

inline SavedModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw Error(ErrorKind::Config, "not an rssiloc model file");
    if (j.at("version").get<int>() != kModelVersion) throw Error(ErrorKind::Config, "unsupported model file version");
    SavedModel m;
    m.kind = j.at("kind").get<std::string>();
    m.hyperparameters = j.at("hyperparameters");
    const auto& p = j.at("parameters");
    if (m.kind == "linear" || m.kind == "polynomial") {
      m.model = AxisModels<PolynomialModel>{{io::polynomial_from(p.at("x")), io::polynomial_from(p.at("y"))}};
    } else if (m.kind == "tree") {
      m.model = AxisModels<RegressionTree>{{io::tree_from(p.at("x")), io::tree_from(p.at("y"))}};
    } else if (m.kind == "random-forest" || m.kind == "extra-trees") {
      m.model = AxisModels<Forest>{{io::forest_from(p.at("x")), io::forest_from(p.at("y"))}};
    } else if (m.kind == "treeloc") {
      m.model = io::treeloc_from(p);
    } else if (m.kind == "knn") {
      m.model = KnnModel{io::classification_from(p.at("train")), p.at("k").get<std::size_t>()};
    } else if (m.kind == "mlp") {
      m.model = io::mlp_from(p);
    } else {
      throw Error(ErrorKind::Config, "unknown model kind '" + m.kind + "'");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedNumber, std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const SavedModel& m, const std::filesystem::path& path) { write_file_atomic(path, to_json(m).dump(1) + "\n"); }

inline SavedModel load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedNumber, std::string("model file is not JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace rssiloc
