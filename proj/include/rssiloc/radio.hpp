#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rssiloc/core.hpp"
#include "rssiloc/error.hpp"
#include "rssiloc/parallel.hpp"
#include "rssiloc/rng.hpp"

namespace rssiloc {

/// Mean RSSI (dBm) at distance d (cm). No shadowing is added.
inline double rssi_from_distance(double d, const PathLossParams& params) {
  if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDistance, "distance must be positive, got " + std::to_string(d));
  return params.p0 - 10.0 * params.eta * std::log10(d / params.d0);
}

/// Inverse of rssi_from_distance: d = d0 * 10^((p0 - rssi) / (10 eta)).
inline double distance_from_rssi(double rssi, const PathLossParams& params) {
  return params.d0 * std::pow(10.0, (params.p0 - rssi) / (10.0 * params.eta));
}

/// Constant u = ln10 / (5 sqrt2 eta); noisy squared distances satisfy
/// d_hat^2 = d^2 exp(-sqrt2 u n) for shadowing noise n (dB).
inline double squared_distance_noise_constant(double eta) {
  return std::log(10.0) / (5.0 * std::sqrt(2.0) * eta);
}

/// E[d_hat^2] / d^2 = exp(u^2 sigma_p^2) for log-normal shadowing of std sigma_p (dB).
inline double squared_distance_inflation(double sigma_p, double eta) {
  const double u = squared_distance_noise_constant(eta);
  return std::exp(u * u * sigma_p * sigma_p);
}

struct NoiseSpec {
  double sigma_a = 0.0;  // cm, per axis
  double sigma_p = 2.0;  // dB
  std::uint64_t seed = 42;
};

struct SyntheticTrial {
  std::vector<Position> anchors;  // perturbed anchor coordinates
  MeasurementSet measurements;
};

/// One synthetic observation of `target` from every anchor.
///
/// Trial i draws from substream (seed, i), in the order n_x, n_y, n_p per
/// anchor, so output is identical for any thread count.
inline std::vector<SyntheticTrial> synthesize_measurements(const Scene& scene, Position target,
                                                           const PathLossParams& params, const NoiseSpec& noise,
                                                           std::size_t trials, unsigned threads = 1) {
  validate_scene(scene);
  params.validate();
  if (trials < 1) throw Error(ErrorKind::Config, "trials must be >= 1");
  if (!(noise.sigma_a >= 0.0) || !(noise.sigma_p >= 0.0)) {
    throw Error(ErrorKind::Config, "noise standard deviations must be >= 0");
  }
  std::vector<double> mean_rssi;
  mean_rssi.reserve(scene.anchors.size());
  for (const auto& a : scene.anchors) mean_rssi.push_back(rssi_from_distance(distance(a.position, target), params));

  std::vector<SyntheticTrial> out(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng rng(noise.seed, t);
    SyntheticTrial trial;
    trial.anchors.reserve(scene.anchors.size());
    trial.measurements.rssi.reserve(scene.anchors.size());
    trial.measurements.timestamp = t;
    for (std::size_t i = 0; i < scene.anchors.size(); ++i) {
      const Position& p = scene.anchors[i].position;
      const double nx = rng.normal(0.0, noise.sigma_a);
      const double ny = rng.normal(0.0, noise.sigma_a);
      const double np = rng.normal(0.0, noise.sigma_p);
      trial.anchors.push_back(Position{p.x + nx, p.y + ny, p.z});
      trial.measurements.rssi.emplace_back(mean_rssi[i] + np);
    }
    out[t] = std::move(trial);
  });
  return out;
}

}  // namespace rssiloc
