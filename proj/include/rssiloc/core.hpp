#pragma once

// Domain types shared by every module. Lengths are centimeters throughout;
// RSSI values are dBm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rssiloc/error.hpp"

namespace rssiloc {

inline constexpr double kCentimetersPerMeter = 100.0;

constexpr double meters_to_cm(double meters) { return meters * kCentimetersPerMeter; }
constexpr double cm_to_meters(double cm) { return cm / kCentimetersPerMeter; }

/// RSSI value that marks an out-of-range beacon in the iBeacon exports.
inline constexpr double kOutOfRangeRssi = -200.0;

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Position operator*(double s, Position a) { return {s * a.x, s * a.y, s * a.z}; }

inline double dot(Position a, Position b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Position a) { return std::sqrt(dot(a, a)); }
inline Position cross(Position a, Position b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double distance(Position a, Position b) { return norm(a - b); }

struct Anchor {
  std::string id;
  Position position;
  double sigma_a = 0.0;  // anchor coordinate noise std, cm
  double sigma_p = 0.0;  // shadowing std, dB
};

/// Log-distance path loss: RSSI(d) = p0 - 10 eta log10(d / d0).
struct PathLossParams {
  double p0 = -40.0;          // dBm at d0
  double d0 = 100.0;          // cm
  double eta = 2.0;           // path-loss exponent
  double sigma_shadow = 2.0;  // dB

  /// Adapter for the "RSSI = -(10 n log10(d) + A)" convention, d in meters.
  static PathLossParams from_offset_form(double a, double n, double sigma_shadow = 0.0) {
    return PathLossParams{-a, kCentimetersPerMeter, n, sigma_shadow};
  }

  void validate() const {
    if (!(eta > 0.0) || !(d0 > 0.0) || !(sigma_shadow >= 0.0) || !std::isfinite(p0)) {
      throw Error(ErrorKind::Config, "path-loss parameters require eta > 0, d0 > 0, sigma_shadow >= 0");
    }
  }
};

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

struct Scene {
  std::vector<Anchor> anchors;
  Bounds bounds;

  std::vector<Position> anchor_positions() const {
    std::vector<Position> out;
    out.reserve(anchors.size());
    for (const auto& a : anchors) out.push_back(a.position);
    return out;
  }
};

/// Builds a scene from bare coordinates, bounds set to the anchors' bounding box.
inline Scene make_scene(std::span<const Position> positions, double sigma_a = 0.0, double sigma_p = 0.0) {
  Scene scene;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    scene.anchors.push_back(Anchor{"A" + std::to_string(i + 1), positions[i], sigma_a, sigma_p});
  }
  if (!positions.empty()) {
    scene.bounds = {positions[0].x, positions[0].y, positions[0].x, positions[0].y};
    for (const auto& p : positions) {
      scene.bounds.min_x = std::min(scene.bounds.min_x, p.x);
      scene.bounds.min_y = std::min(scene.bounds.min_y, p.y);
      scene.bounds.max_x = std::max(scene.bounds.max_x, p.x);
      scene.bounds.max_y = std::max(scene.bounds.max_y, p.y);
    }
  }
  return scene;
}

/// Per-anchor RSSI readings; nullopt marks an out-of-range anchor.
struct MeasurementSet {
  std::vector<std::optional<double>> rssi;
  std::optional<std::size_t> timestamp;

  static MeasurementSet from_raw(std::span<const double> values, double sentinel = kOutOfRangeRssi) {
    MeasurementSet m;
    m.rssi.reserve(values.size());
    for (double v : values) {
      if (v == sentinel || !std::isfinite(v)) {
        m.rssi.emplace_back(std::nullopt);
      } else {
        m.rssi.emplace_back(v);
      }
    }
    return m;
  }

  std::size_t in_range_count() const {
    return static_cast<std::size_t>(std::count_if(rssi.begin(), rssi.end(), [](const auto& v) { return v.has_value(); }));
  }
};

/// Smallest singular value of the centered M x 2 anchor coordinate matrix.
inline double planar_spread(std::span<const Position> points) {
  const double m = static_cast<double>(points.size());
  double xc = 0.0, yc = 0.0;
  for (const auto& p : points) {
    xc += p.x;
    yc += p.y;
  }
  xc /= m;
  yc /= m;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - xc, dy = p.y - yc;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  // eigenvalues of the 2x2 scatter matrix
  const double half_trace = 0.5 * (sxx + syy);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy));
  const double lambda_min = std::max(0.0, half_trace - disc);
  return std::sqrt(lambda_min);
}

inline double diameter(std::span<const Position> points) {
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) d = std::max(d, distance(points[i], points[j]));
  }
  return d;
}

/// Returns the scene unchanged when it has at least three anchors spanning
/// the plane. The collinearity tolerance is 1e-6 times the scene diameter.
inline const Scene& validate_scene(const Scene& scene) {
  if (scene.anchors.size() < 3) {
    throw Error(ErrorKind::TooFewAnchors,
                "need at least 3 anchors, got " + std::to_string(scene.anchors.size()));
  }
  std::unordered_set<std::string> ids;
  for (const auto& a : scene.anchors) {
    if (!ids.insert(a.id).second) throw Error(ErrorKind::Config, "duplicate anchor id '" + a.id + "'");
    if (!(a.sigma_a >= 0.0) || !(a.sigma_p >= 0.0)) {
      throw Error(ErrorKind::Config, "anchor '" + a.id + "' has a negative noise std");
    }
    const auto& p = a.position;
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw Error(ErrorKind::Config, "anchor '" + a.id + "' has non-finite coordinates");
    }
  }
  const auto positions = scene.anchor_positions();
  const double tol = 1e-6 * diameter(positions);
  if (!(planar_spread(positions) > tol)) {
    throw Error(ErrorKind::DegenerateGeometry, "anchors are collinear");
  }
  return scene;
}

/// Euclidean position error in the plane.
inline double position_error(Position predicted, Position actual) {
  return std::hypot(predicted.x - actual.x, predicted.y - actual.y);
}

}  // namespace rssiloc
