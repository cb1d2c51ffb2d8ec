// Monte Carlo comparison of the geometric solvers over a grid of targets.
// Usage: solver_bias [trials] [sigma_p_dB]

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "rssiloc/rssiloc.hpp"

using namespace rssiloc;

int main(int argc, char** argv) {
  const std::size_t trials = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1000;
  const double sigma_p = argc > 2 ? std::strtod(argv[2], nullptr) : 2.0;
  const std::vector<Position> anchors{{0, 0}, {400, 0}, {400, 400}, {0, 400}, {200, 200}};
  const Scene scene = make_scene(anchors);
  const PathLossParams params{-40.0, 100.0, 2.0, sigma_p};
  const std::vector<double> sa(anchors.size(), 0.0), sp(anchors.size(), sigma_p);

  std::printf("%-13s %10s %10s\n", "solver", "|bias| cm", "RMSE cm");
  for (auto kind : kAllSolvers) {
    double bias = 0, rmse = 0;
    std::size_t targets = 0, fallbacks = 0;
    for (double x = 50; x < 400; x += 100) {
      for (double y = 50; y < 400; y += 100) {
        const Position truth{x, y};
        Position mean;
        double sq = 0;
        for (const auto& t : synthesize_measurements(scene, truth, params, NoiseSpec{0.0, sigma_p, 42 + targets}, trials)) {
          std::vector<double> d;
          for (const auto& r : t.measurements.rssi) d.push_back(distance_from_rssi(*r, params));
          const auto res = locate(kind, SolverInput{t.anchors, d, sa, sp, params.eta});
          fallbacks += res.fell_back;
          mean = mean + (1.0 / static_cast<double>(trials)) * res.position;
          sq += std::pow(position_error(res.position, truth), 2);
        }
        bias += position_error(mean, truth);
        rmse += std::sqrt(sq / static_cast<double>(trials));
        ++targets;
      }
    }
    std::printf("%-13s %10.2f %10.2f", std::string(to_string(kind)).c_str(), bias / static_cast<double>(targets),
                rmse / static_cast<double>(targets));
    if (fallbacks) std::printf("  (%zu fallbacks)", fallbacks);
    std::printf("\n");
  }
}
