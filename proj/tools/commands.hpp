#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rssiloc/rssiloc.hpp"

namespace rssiloc::cli {

namespace fs = std::filesystem;

struct Common {
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct RadioOptions {
  double p0 = -40.0;
  double d0 = 100.0;
  double eta = 2.0;

  PathLossParams params(double sigma_p) const {
    PathLossParams p{p0, d0, eta, sigma_p};
    p.validate();
    return p;
  }
};

/// "x,y;x,y;..." (z optional as a third value).
inline std::vector<Position> parse_points(const std::string& text) {
  std::vector<Position> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (detail::trim(item).empty()) continue;
    const auto fields = detail::split_fields(item);
    if (fields.size() < 2 || fields.size() > 3) throw Error(ErrorKind::Config, "point '" + item + "' needs x,y");
    Position p;
    double* slots[3] = {&p.x, &p.y, &p.z};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto v = parse_double(fields[i]);
      if (!v) throw Error(ErrorKind::Config, "point '" + item + "' has a non-numeric coordinate");
      *slots[i] = *v;
    }
    out.push_back(p);
  }
  return out;
}

/// One "x,y" per line; lines starting with '#' are skipped.
inline std::vector<Position> read_points_file(const fs::path& path) {
  std::stringstream in(read_file(path));
  std::string line, joined;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    joined += std::string(t) + ';';
  }
  return parse_points(joined);
}

inline std::vector<Position> resolve_points(const std::string& inline_text, const std::string& file, const char* what) {
  if (!inline_text.empty() && !file.empty()) throw Error(ErrorKind::Config, std::string("give ") + what + " inline or as a file, not both");
  if (!file.empty()) return read_points_file(file);
  if (!inline_text.empty()) return parse_points(inline_text);
  throw Error(ErrorKind::Config, std::string("no ") + what + " given");
}

inline void report_header(Report& r, const char* command, const Common& c) {
  r.add("command", command);
  r.add("seed", std::to_string(c.seed));
  r.add("threads", std::to_string(c.threads));
}

// --- simulate -----------------------------------------------------------------

struct SimulateOptions {
  std::string anchors, anchors_file;
  std::string positions, positions_file;  // explicit targets
  std::size_t position_count = 32;        // random targets when none are explicit
  std::size_t samples = 10;
  double sigma_p = 2.0;
  double sigma_a = 0.0;
  RadioOptions radio;
  std::string output;
};

/// Rows are grouped by position, `samples` rows each.
inline Report cmd_simulate(const SimulateOptions& o, const Common& c) {
  if (o.output.empty()) throw Error(ErrorKind::Config, "simulate needs --output");
  if (o.samples < 1) throw Error(ErrorKind::Config, "samples must be >= 1");
  const auto anchor_points = resolve_points(o.anchors, o.anchors_file, "anchors");
  const Scene scene = make_scene(anchor_points, o.sigma_a, o.sigma_p);
  validate_scene(scene);
  const PathLossParams params = o.radio.params(o.sigma_p);

  std::vector<Position> targets;
  if (!o.positions.empty() || !o.positions_file.empty()) {
    targets = resolve_points(o.positions, o.positions_file, "positions");
  } else {
    if (o.position_count < 1) throw Error(ErrorKind::Config, "positions must be >= 1");
    Rng rng(c.seed, 0x706F73ULL);
    for (std::size_t i = 0; i < o.position_count; ++i) {
      const double x = rng.uniform(scene.bounds.min_x, scene.bounds.max_x);
      const double y = rng.uniform(scene.bounds.min_y, scene.bounds.max_y);
      targets.push_back({x, y, 0.0});
    }
  }

  RegressionDataset ds;
  const auto m = static_cast<Eigen::Index>(anchor_points.size());
  ds.features.resize(static_cast<Eigen::Index>(targets.size() * o.samples), m);
  ds.targets.resize(ds.features.rows(), 2);
  Eigen::Index row = 0;
  for (std::size_t p = 0; p < targets.size(); ++p) {
    NoiseSpec noise{o.sigma_a, o.sigma_p, Rng(c.seed, 0x7472ULL + p).next()};
    const auto trials = synthesize_measurements(scene, targets[p], params, noise, o.samples, c.threads);
    for (const auto& t : trials) {
      for (Eigen::Index a = 0; a < m; ++a) ds.features(row, a) = *t.measurements.rssi[static_cast<std::size_t>(a)];
      ds.targets(row, 0) = targets[p].x;
      ds.targets(row, 1) = targets[p].y;
      ++row;
    }
  }
  write_csv(ds, o.output);

  Report r;
  report_header(r, "simulate", c);
  r.add("anchors", std::to_string(anchor_points.size()));
  r.add("positions", std::to_string(targets.size()));
  r.add("samples", std::to_string(o.samples));
  r.add("rows", std::to_string(ds.rows()));
  r.add("sigma_p", o.sigma_p);
  r.add("sigma_a", o.sigma_a);
  r.add("p0", params.p0);
  r.add("eta", params.eta);
  return r;
}

// --- filter -------------------------------------------------------------------

struct FilterOptions {
  std::string input, output;
  std::string filter;
  std::size_t window = 5;       // moving average
  std::size_t half_width = 2;   // median
  double sigma = 1.0;           // gaussian
  double kalman_p0 = 1.0;
  double kalman_q = 1e-4;
  std::optional<double> kalman_r;
};

/// RSSI<k> and beacon (b<digits>) columns.
inline bool is_signal_column(const std::string& name) {
  if (rssi_column_index(name)) return true;
  return name.size() > 1 && name[0] == 'b' && name.find_first_not_of("0123456789", 1) == std::string::npos;
}

inline Report cmd_filter(const FilterOptions& o, const Common& c) {
  if (o.input.empty() || o.output.empty()) throw Error(ErrorKind::Config, "filter needs --input and --output");
  if (o.filter != "ma" && o.filter != "median" && o.filter != "gaussian" && o.filter != "kalman") {
    throw Error(ErrorKind::Config, "unknown filter '" + o.filter + "' (ma, median, gaussian, kalman)");
  }
  CsvTable table = read_csv(o.input);
  std::size_t filtered = 0;
  for (std::size_t col = 0; col < table.header.size(); ++col) {
    if (!is_signal_column(table.header[col])) continue;
    std::vector<double> signal;
    for (std::size_t r = 0; r < table.rows.size(); ++r) signal.push_back(cell_number(table, r, col));
    if (signal.empty()) continue;
    std::vector<double> out;
    if (o.filter == "ma") out = moving_average(signal, o.window);
    else if (o.filter == "median") out = median_filter(signal, o.half_width);
    else if (o.filter == "gaussian") out = gaussian_filter(signal, o.sigma);
    else out = kalman_filter(signal, KalmanOptions{o.kalman_p0, o.kalman_q, o.kalman_r});
    for (std::size_t r = 0; r < out.size(); ++r) table.rows[r][col] = format_double(out[r]);
    ++filtered;
  }
  if (filtered == 0) throw Error(ErrorKind::MissingColumn, "no RSSI columns to filter");
  write_csv(table, o.output);

  Report r;
  report_header(r, "filter", c);
  r.add("filter", o.filter);
  r.add("columns", std::to_string(filtered));
  r.add("rows", std::to_string(table.rows.size()));
  return r;
}

// --- locate -------------------------------------------------------------------

struct LocateOptions {
  std::string input, output, report;
  std::string anchors, anchors_file;
  std::string solver = "wls-bc";
  double sigma_p = 2.0;
  double sigma_a = 0.0;
  bool cross_term = false;
  RadioOptions radio;
};

inline void write_predictions(const Eigen::MatrixXd& pred, const std::optional<Eigen::MatrixXd>& actual, const fs::path& path) {
  CsvTable t;
  t.header = {"X_Pred", "Y_Pred"};
  if (actual) t.header.insert(t.header.end(), {"X_Actual", "Y_Actual"});
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    std::vector<std::string> row{format_double(pred(i, 0)), format_double(pred(i, 1))};
    if (actual) {
      row.push_back(format_double((*actual)(i, 0)));
      row.push_back(format_double((*actual)(i, 1)));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

inline void add_position_metrics(Report& r, const Eigen::MatrixXd& actual, const Eigen::MatrixXd& pred, const std::string& prefix = "") {
  add_metrics(r, prefix + "x_", regression_metrics(Eigen::MatrixXd(actual.col(0)), Eigen::MatrixXd(pred.col(0))));
  add_metrics(r, prefix + "y_", regression_metrics(Eigen::MatrixXd(actual.col(1)), Eigen::MatrixXd(pred.col(1))));
  add_metrics(r, prefix + "position_", regression_metrics(actual, pred));
}

inline Report cmd_locate(const LocateOptions& o, const Common& c) {
  if (o.input.empty() || o.output.empty()) throw Error(ErrorKind::Config, "locate needs --input and --output");
  const SolverKind kind = parse_solver(o.solver);
  const auto anchor_points = resolve_points(o.anchors, o.anchors_file, "anchors");
  validate_scene(make_scene(anchor_points));
  const PathLossParams params = o.radio.params(o.sigma_p);

  const CsvTable table = read_csv(o.input);
  const auto cols = rssi_columns(table);
  if (cols.size() != anchor_points.size()) {
    throw Error(ErrorKind::ShapeMismatch, "input has " + std::to_string(cols.size()) + " RSSI columns for " +
                                              std::to_string(anchor_points.size()) + " anchors");
  }
  const auto xc = table.column("X_Actual");
  const auto yc = table.column("Y_Actual");
  const bool has_truth = xc && yc;

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "input has no rows");
  Eigen::MatrixXd pred(n, 2);
  Eigen::MatrixXd actual(has_truth ? n : 0, 2);
  std::vector<char> fell_back(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<double>> rssi(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (auto col : cols) rssi[r].push_back(cell_number(table, r, col));
    if (has_truth) {
      actual(static_cast<Eigen::Index>(r), 0) = cell_number(table, r, *xc);
      actual(static_cast<Eigen::Index>(r), 1) = cell_number(table, r, *yc);
    }
  }
  parallel_for(static_cast<std::size_t>(n), c.threads, [&](std::size_t r) {
    const auto meas = MeasurementSet::from_raw(rssi[r]);
    std::vector<Position> anchors;
    std::vector<double> dist, sa, sp;
    for (std::size_t a = 0; a < meas.rssi.size(); ++a) {
      if (!meas.rssi[a]) continue;
      anchors.push_back(anchor_points[a]);
      dist.push_back(distance_from_rssi(*meas.rssi[a], params));
      sa.push_back(o.sigma_a);
      sp.push_back(o.sigma_p);
    }
    if (anchors.size() < 3) {
      throw Error(ErrorKind::TooFewAnchors, "row " + std::to_string(r + 1) + " has fewer than 3 in-range anchors");
    }
    const auto res = locate(kind, SolverInput{anchors, dist, sa, sp, params.eta, o.cross_term});
    pred(static_cast<Eigen::Index>(r), 0) = res.position.x;
    pred(static_cast<Eigen::Index>(r), 1) = res.position.y;
    fell_back[r] = res.fell_back ? 1 : 0;
  });
  write_predictions(pred, has_truth ? std::optional<Eigen::MatrixXd>(actual) : std::nullopt, o.output);

  Report r;
  report_header(r, "locate", c);
  r.add("solver", std::string(to_string(kind)));
  r.add("rows", std::to_string(n));
  r.add("fallbacks", std::to_string(std::count(fell_back.begin(), fell_back.end(), 1)));
  r.add("sigma_p", o.sigma_p);
  r.add("sigma_a", o.sigma_a);
  if (has_truth) add_position_metrics(r, actual, pred);
  return r;
}

// --- fit / predict --------------------------------------------------------------

struct FitOptions {
  std::string input, output, report, predictions;
  std::string model = "treeloc";
  std::string zones;  // zone mapping; switches to the iBeacon format
  double test_size = 0.2;
  std::size_t degree = 2;
  bool cross_terms = false;
  std::optional<std::size_t> depth;
  std::size_t trees = 100;
  std::size_t min_leaf = 1;
  std::size_t k = 5;
  std::size_t epochs = 100;
  double lr = 0.01;
  std::size_t batch_size = 10;
  bool standardize = false;
  bool fixed_paper = false;
  bool combiner_holdout = false;
  bool shuffle = false;
};

inline bool is_classifier_kind(const std::string& kind) { return kind == "knn" || kind == "mlp"; }

inline void add_combiner(Report& r, const TreeLocModel& m) {
  r.add("combiner_mode", std::string(to_string(m.mode)));
  const char* names[4] = {"intercept", "etr", "dtr", "rfr"};
  for (std::size_t i = 0; i < 4; ++i) r.add(std::string("combiner_x_") + names[i], m.combiner_x[i]);
  for (std::size_t i = 0; i < 4; ++i) r.add(std::string("combiner_y_") + names[i], m.combiner_y[i]);
}

inline Eigen::MatrixXd predict_positions(const SavedModel& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), 2);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TreeLocModel>) {
          out = treeloc_predict(v, x);
        } else if constexpr (std::is_same_v<T, KnnModel> || std::is_same_v<T, MlpModel>) {
          throw Error(ErrorKind::Config, "model '" + m.kind + "' is a zone classifier");
        } else {
          out.col(0) = predict(v.axes[0], x);
          out.col(1) = predict(v.axes[1], x);
        }
      },
      m.model);
  return out;
}

inline std::vector<std::size_t> predict_zones(const SavedModel& m, const Eigen::MatrixXd& x) {
  if (const auto* knn = std::get_if<KnnModel>(&m.model)) return knn_predict(knn->train, x, knn->k);
  if (const auto* mlp = std::get_if<MlpModel>(&m.model)) return mlp_predict(*mlp, x);
  throw Error(ErrorKind::Config, "model '" + m.kind + "' is not a zone classifier");
}

inline SavedModel fit_regressor(const FitOptions& o, const Common& c, const RegressionDataset& train) {
  SavedModel m;
  m.kind = o.model;
  m.hyperparameters["seed"] = c.seed;
  const Eigen::MatrixXd& x = train.features;
  if (o.model == "linear" || o.model == "polynomial") {
    const std::size_t degree = o.model == "linear" ? 1 : o.degree;
    if (degree < 1) throw Error(ErrorKind::Config, "degree must be >= 1");
    m.hyperparameters["degree"] = degree;
    m.hyperparameters["cross_terms"] = o.cross_terms;
    m.model = AxisModels<PolynomialModel>{{fit_polynomial(x, train.targets.col(0), degree, o.cross_terms),
                                           fit_polynomial(x, train.targets.col(1), degree, o.cross_terms)}};
  } else if (o.model == "tree") {
    const TreeOptions t{o.depth, o.min_leaf, SplitMode::Exhaustive, c.seed};
    m.hyperparameters["max_depth"] = io::depth_json(o.depth);
    m.hyperparameters["min_leaf"] = o.min_leaf;
    m.model = AxisModels<RegressionTree>{{fit_tree(x, train.targets.col(0), t), fit_tree(x, train.targets.col(1), t)}};
  } else if (o.model == "random-forest" || o.model == "extra-trees") {
    ForestOptions f = o.model == "random-forest" ? ForestOptions::random_forest(o.trees, o.depth)
                                                 : ForestOptions::extra_trees(o.trees, o.depth ? o.depth : std::optional<std::size_t>(25));
    f.min_leaf = o.min_leaf;
    f.threads = c.threads;
    m.hyperparameters["trees"] = o.trees;
    m.hyperparameters["max_depth"] = io::depth_json(f.max_depth);
    m.hyperparameters["min_leaf"] = o.min_leaf;
    ForestOptions fx = f, fy = f;
    fx.seed = c.seed;
    fy.seed = c.seed + 1;
    m.model = AxisModels<Forest>{{fit_forest(x, train.targets.col(0), fx), fit_forest(x, train.targets.col(1), fy)}};
  } else if (o.model == "treeloc") {
    TreeLocOptions t;
    t.etr_trees = o.trees;
    t.rfr_trees = o.trees;
    if (o.depth) t.etr_depth = t.dtr_depth = o.depth;
    t.mode = o.fixed_paper ? CombinerMode::FixedPaper : CombinerMode::Fitted;
    t.shuffle = o.shuffle;
    t.combiner_holdout = o.combiner_holdout;
    t.seed = c.seed;
    t.threads = c.threads;
    m.hyperparameters["trees"] = o.trees;
    m.hyperparameters["etr_depth"] = io::depth_json(t.etr_depth);
    m.hyperparameters["dtr_depth"] = io::depth_json(t.dtr_depth);
    m.hyperparameters["rfr_depth"] = io::depth_json(t.rfr_depth);
    m.hyperparameters["combiner"] = std::string(to_string(t.mode));
    m.hyperparameters["combiner_holdout"] = t.combiner_holdout;
    m.hyperparameters["shuffle"] = t.shuffle;
    m.model = treeloc_fit(train, t);
  } else {
    throw Error(ErrorKind::Config, "unknown regression model '" + o.model +
                                       "' (linear, polynomial, tree, random-forest, extra-trees, treeloc)");
  }
  return m;
}

inline SavedModel fit_classifier(const FitOptions& o, const Common& c, const ClassificationDataset& train) {
  SavedModel m;
  m.kind = o.model;
  m.hyperparameters["seed"] = c.seed;
  if (o.model == "knn") {
    if (o.k < 1 || o.k > train.rows()) throw Error(ErrorKind::KTooLarge, "k must be in [1, " + std::to_string(train.rows()) + "]");
    m.hyperparameters["k"] = o.k;
    m.model = KnnModel{train, o.k};
  } else {
    MlpTrainOptions t{o.lr, o.batch_size, o.epochs, c.seed, o.standardize};
    m.hyperparameters["sizes"] = kZoneNetworkSizes;
    m.hyperparameters["lr"] = o.lr;
    m.hyperparameters["batch_size"] = o.batch_size;
    m.hyperparameters["epochs"] = o.epochs;
    m.hyperparameters["standardize"] = o.standardize;
    auto sizes = kZoneNetworkSizes;
    sizes.front() = static_cast<std::size_t>(train.features.cols());
    sizes.back() = train.class_count;
    m.model = mlp_train(make_mlp(sizes, c.seed), train, t).model;
  }
  return m;
}

inline void write_zone_predictions(const std::vector<std::size_t>& pred, const std::vector<std::string>& locations,
                                   const std::vector<std::size_t>* actual, const fs::path& path) {
  CsvTable t;
  t.header = {"location", "zone_pred", "A", "B", "C", "D"};
  if (actual) t.header.emplace_back("zone");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::vector<std::string> row{i < locations.size() ? locations[i] : std::string(), std::string(1, zone_letter(pred[i]))};
    for (std::size_t z = 0; z < kZoneCount; ++z) row.emplace_back(pred[i] == z ? "1" : "0");
    if (actual) row.emplace_back(1, zone_letter((*actual)[i]));
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

inline Report cmd_fit(const FitOptions& o, const Common& c) {
  if (o.input.empty() || o.output.empty()) throw Error(ErrorKind::Config, "fit needs --input and --output (model file)");
  const bool classifier = is_classifier_kind(o.model);
  if (classifier && o.zones.empty()) throw Error(ErrorKind::Config, "model '" + o.model + "' needs --zones");
  if (o.fixed_paper && o.model != "treeloc") throw Error(ErrorKind::Config, "--fixed-paper applies to treeloc only");

  Report r;
  report_header(r, "fit", c);
  r.add("model", o.model);
  r.add("test_size", o.test_size);

  if (classifier) {
    const auto ds = load_ibeacon_csv(o.input, load_zone_mapping(o.zones));
    const auto split = train_test_split(ds.rows(), o.test_size, c.seed);
    const auto train = ds.subset(split.train);
    const auto test = ds.subset(split.test);
    const SavedModel m = fit_classifier(o, c, train);
    const auto pred = predict_zones(m, test.features);
    r.add("train_rows", std::to_string(train.rows()));
    r.add("test_rows", std::to_string(test.rows()));
    add_metrics(r, classification_metrics(ConfusionMatrix::from_labels(test.labels, pred, ds.class_count)));
    save_model(m, o.output);
    if (!o.predictions.empty()) write_zone_predictions(pred, test.locations, &test.labels, o.predictions);
    return r;
  }

  const auto ds = load_regression_csv(o.input);
  const auto split = train_test_split(ds.rows(), o.test_size, c.seed);
  const auto train = ds.subset(split.train);
  const auto test = ds.subset(split.test);
  const SavedModel m = fit_regressor(o, c, train);
  r.add("train_rows", std::to_string(train.rows()));
  r.add("test_rows", std::to_string(test.rows()));
  if (const auto* t = std::get_if<TreeLocModel>(&m.model)) add_combiner(r, *t);
  const Eigen::MatrixXd pred = predict_positions(m, test.features);
  add_position_metrics(r, test.targets, pred);
  save_model(m, o.output);
  if (!o.predictions.empty()) write_predictions(pred, test.targets, o.predictions);
  return r;
}

struct PredictOptions {
  std::string model, input, output;
};

inline Report cmd_predict(const PredictOptions& o, const Common& c) {
  if (o.model.empty() || o.input.empty() || o.output.empty()) throw Error(ErrorKind::Config, "predict needs --model, --input and --output");
  const SavedModel m = load_model(o.model);
  Report r;
  report_header(r, "predict", c);
  r.add("model", m.kind);
  if (m.is_classifier()) {
    const CsvTable table = read_csv(o.input);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(kBeaconCount));
    for (std::size_t b = 0; b < kBeaconCount; ++b) {
      const auto col = table.require_column(beacon_column(b));
      for (std::size_t i = 0; i < table.rows.size(); ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = cell_number(table, i, col);
    }
    std::vector<std::string> locations;
    if (auto loc = table.column("location")) {
      for (const auto& row : table.rows) locations.push_back(row[*loc]);
    }
    write_zone_predictions(predict_zones(m, x), locations, nullptr, o.output);
    r.add("rows", std::to_string(x.rows()));
    return r;
  }
  const CsvTable table = read_csv(o.input);
  const auto cols = rssi_columns(table);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t f = 0; f < cols.size(); ++f) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = cell_number(table, i, cols[f]);
  }
  const Eigen::MatrixXd pred = predict_positions(m, x);
  const auto xc = table.column("X_Actual");
  const auto yc = table.column("Y_Actual");
  std::optional<Eigen::MatrixXd> actual;
  if (xc && yc) {
    actual = Eigen::MatrixXd(x.rows(), 2);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      (*actual)(static_cast<Eigen::Index>(i), 0) = cell_number(table, i, *xc);
      (*actual)(static_cast<Eigen::Index>(i), 1) = cell_number(table, i, *yc);
    }
  }
  write_predictions(pred, actual, o.output);
  r.add("rows", std::to_string(x.rows()));
  if (actual) add_position_metrics(r, *actual, pred);
  return r;
}

// --- evaluate -----------------------------------------------------------------

struct EvaluateOptions {
  std::string actual, predicted;
};

/// Predicted columns are X_Pred/Y_Pred (zone_pred) when present, else the
/// same names as the actual file, so a file scored against itself works.
inline Report cmd_evaluate(const EvaluateOptions& o, const Common& c) {
  if (o.actual.empty() || o.predicted.empty()) throw Error(ErrorKind::Config, "evaluate needs --actual and --predicted");
  const CsvTable a = read_csv(o.actual);
  const CsvTable p = read_csv(o.predicted);
  if (a.rows.size() != p.rows.size()) {
    throw Error(ErrorKind::LengthMismatch, "actual has " + std::to_string(a.rows.size()) + " rows, predicted has " + std::to_string(p.rows.size()));
  }
  Report r;
  report_header(r, "evaluate", c);
  r.add("rows", std::to_string(a.rows.size()));
  if (a.column("zone")) {
    const auto ac = a.require_column("zone");
    const auto pc = p.column("zone_pred") ? *p.column("zone_pred") : p.require_column("zone");
    std::vector<std::size_t> truth, pred;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      truth.push_back(parse_zone(a.rows[i][ac]));
      pred.push_back(parse_zone(p.rows[i][pc]));
    }
    add_metrics(r, classification_metrics(ConfusionMatrix::from_labels(truth, pred, kZoneCount)));
    return r;
  }
  const auto ax = a.require_column("X_Actual");
  const auto ay = a.require_column("Y_Actual");
  const bool has_pred_cols = p.column("X_Pred") && p.column("Y_Pred");
  const auto px = has_pred_cols ? *p.column("X_Pred") : p.require_column("X_Actual");
  const auto py = has_pred_cols ? *p.column("Y_Pred") : p.require_column("Y_Actual");
  const auto n = static_cast<Eigen::Index>(a.rows.size());
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "nothing to evaluate");
  Eigen::MatrixXd actual(n, 2), pred(n, 2);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    actual(ii, 0) = cell_number(a, i, ax);
    actual(ii, 1) = cell_number(a, i, ay);
    pred(ii, 0) = cell_number(p, i, px);
    pred(ii, 1) = cell_number(p, i, py);
  }
  add_position_metrics(r, actual, pred);
  return r;
}

// --- treeloc ------------------------------------------------------------------

struct TreeLocCliOptions {
  std::string input, output, report, model;
  std::size_t trees = 100;
  std::optional<std::size_t> depth;
  bool fixed_paper = false;
  bool combiner_holdout = false;
  bool shuffle = false;
};

/// In-sample TreeLoc fit with component and ensemble metrics per coordinate.
inline Report cmd_treeloc(const TreeLocCliOptions& o, const Common& c) {
  if (o.input.empty()) throw Error(ErrorKind::Config, "treeloc needs --input");
  const auto ds = load_regression_csv(o.input);
  TreeLocOptions t;
  t.etr_trees = t.rfr_trees = o.trees;
  if (o.depth) t.etr_depth = t.dtr_depth = o.depth;
  t.mode = o.fixed_paper ? CombinerMode::FixedPaper : CombinerMode::Fitted;
  t.combiner_holdout = o.combiner_holdout;
  t.shuffle = o.shuffle;
  t.seed = c.seed;
  t.threads = c.threads;
  const TreeLocModel model = treeloc_fit(ds, t);

  Report r;
  report_header(r, "treeloc", c);
  r.add("rows", std::to_string(ds.rows()));
  r.add("trees", std::to_string(o.trees));
  add_combiner(r, model);
  const Eigen::MatrixXd pred = treeloc_predict(model, ds.features);
  const char* names[3] = {"etr", "dtr", "rfr"};
  for (std::size_t axis = 0; axis < 2; ++axis) {
    const auto col = static_cast<Eigen::Index>(axis);
    const Eigen::MatrixXd comp = component_predictions(model.components[axis], ds.features);
    const std::string axis_name = axis == 0 ? "x" : "y";
    for (Eigen::Index k = 0; k < 3; ++k) {
      const auto m = regression_metrics(Eigen::MatrixXd(ds.targets.col(col)), Eigen::MatrixXd(comp.col(k)));
      r.add(std::string(names[k]) + "_" + axis_name + "_rmse", m.rmse);
    }
  }
  add_position_metrics(r, ds.targets, pred, "treeloc_");
  if (!o.output.empty()) write_predictions(pred, ds.targets, o.output);
  if (!o.model.empty()) {
    SavedModel saved;
    saved.kind = "treeloc";
    saved.hyperparameters = {{"seed", c.seed}, {"trees", o.trees}, {"combiner", std::string(to_string(t.mode))}};
    saved.model = model;
    save_model(saved, o.model);
  }
  return r;
}

}  // namespace rssiloc::cli
