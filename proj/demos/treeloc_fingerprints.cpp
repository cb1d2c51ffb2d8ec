// Fits TreeLoc on simulated fingerprints and compares it to its components
// on a held-out split.

#include <cstdio>

#include "rssiloc/rssiloc.hpp"

using namespace rssiloc;

int main() {
  const std::vector<Position> anchors{{0, 0}, {600, 0}, {600, 600}, {0, 600}};
  const Scene scene = make_scene(anchors);
  const PathLossParams params{-40.0, 100.0, 2.0, 2.0};
  Rng rng(7);
  RegressionDataset ds;
  ds.features.resize(1000, 4);
  ds.targets.resize(1000, 2);
  Eigen::Index row = 0;
  for (int p = 0; p < 100; ++p) {
    const Position truth{rng.uniform(20, 580), rng.uniform(20, 580)};
    for (const auto& t : synthesize_measurements(scene, truth, params, NoiseSpec{0.0, 2.0, rng.next()}, 10)) {
      for (Eigen::Index a = 0; a < 4; ++a) ds.features(row, a) = *t.measurements.rssi[static_cast<std::size_t>(a)];
      ds.targets.row(row++) << truth.x, truth.y;
    }
  }
  const auto split = train_test_split(ds.rows(), 0.3, 1);
  const auto train = ds.subset(split.train), test = ds.subset(split.test);
  TreeLocOptions o;
  o.shuffle = true;
  const auto model = treeloc_fit(train, o);

  Eigen::MatrixXd comp[3] = {Eigen::MatrixXd(test.features.rows(), 2), Eigen::MatrixXd(test.features.rows(), 2),
                             Eigen::MatrixXd(test.features.rows(), 2)};
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::MatrixXd c = component_predictions(model.components[static_cast<std::size_t>(axis)], test.features);
    for (int k = 0; k < 3; ++k) comp[k].col(axis) = c.col(k);
  }
  const char* names[3] = {"extra-trees", "tree", "random-forest"};
  std::printf("%-14s %8s %8s\n", "model", "RMSE cm", "MAE cm");
  for (int k = 0; k < 3; ++k) {
    const auto m = regression_metrics(test.targets, comp[k]);
    std::printf("%-14s %8.2f %8.2f\n", names[k], m.rmse, m.mae);
  }
  const auto m = regression_metrics(test.targets, treeloc_predict(model, test.features));
  std::printf("%-14s %8.2f %8.2f\n", "treeloc", m.rmse, m.mae);
  std::printf("combiner x: %.4f %.4f %.4f %.4f\n", model.combiner_x[0], model.combiner_x[1], model.combiner_x[2],
              model.combiner_x[3]);
}
