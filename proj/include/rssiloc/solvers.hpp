#pragma once

// Closed-form position estimators from anchor coordinates and (RSSI-derived)
// distances:
//
//   trilaterate             three-sphere intersection in a canonical frame
//   linearize + lls_solve   pseudo-linear system 2 A s = b, ordinary LS
//   wls_solve               LS weighted by the covariance of b
//   bias_compensated_solve  WLS with the noise-induced bias terms removed
//   hyperbolic_solve        differences against the first anchor, optionally
//                           weighted by the log-normal covariance of C
//
// All solvers operate in the plane except trilaterate.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rssiloc/core.hpp"
#include "rssiloc/error.hpp"
#include "rssiloc/linalg.hpp"
#include "rssiloc/radio.hpp"

namespace rssiloc {

using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Centroids {
  double xc = 0.0;
  double yc = 0.0;
  double dc = 0.0;  // mean of squared distances
  double kc = 0.0;  // mean of x^2 + y^2
};

/// 2 A s = b with A rows (x_i - x_c, y_i - y_c) and b_i = d_c - d_i^2 + k_i - k_c.
struct LinearSystem {
  DesignMatrix design;
  Eigen::VectorXd rhs;
  Centroids centroids;
};

struct SolveResult {
  Position position;
  bool fell_back_to_lls = false;  // weights were numerically zero
};

struct TrilaterationResult {
  Position first;   // z >= 0 in the canonical frame
  Position second;  // mirror candidate (equal to first when z = 0)
};

// ---------------------------------------------------------------------------
// Trilateration

/// Intersects three spheres. The anchors are moved to a frame with anchor 1
/// at the origin, anchor 2 on +x and anchor 3 in the xy-plane, where
///   x = (r1^2 - r2^2 + d^2) / 2d
///   y = (r1^2 - r3^2 + i^2 + j^2 - 2 i x) / 2j
///   z = +-sqrt(r1^2 - x^2 - y^2)
/// Slightly negative z^2 (within 1e-9 of the squared scene scale) is clamped.
inline TrilaterationResult trilaterate(const std::array<Position, 3>& anchors, const std::array<double, 3>& radii) {
  for (double r : radii) {
    if (!(r >= 0.0)) throw Error(ErrorKind::NonPositiveDistance, "radii must be >= 0");
  }
  const Position p1 = anchors[0];
  const Position v12 = anchors[1] - p1;
  const Position v13 = anchors[2] - p1;
  const double d = norm(v12);
  const double scale = std::max(d, norm(v13));
  if (!(d > 0.0)) throw Error(ErrorKind::CollinearAnchors, "anchors 1 and 2 coincide");
  const Position ex = (1.0 / d) * v12;
  const double i = dot(ex, v13);
  const Position ey_raw = v13 - i * ex;
  const double j = norm(ey_raw);
  if (!(j > 1e-9 * scale)) throw Error(ErrorKind::CollinearAnchors, "anchors are collinear");
  const Position ey = (1.0 / j) * ey_raw;
  const Position ez = cross(ex, ey);

  const double r1 = radii[0], r2 = radii[1], r3 = radii[2];
  const double x = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double y = (r1 * r1 - r3 * r3 + i * i + j * j - 2.0 * i * x) / (2.0 * j);
  double z2 = r1 * r1 - x * x - y * y;
  const double tol = 1e-9 * std::max(r1 * r1, scale * scale);
  if (z2 < -tol) throw Error(ErrorKind::NoIntersection, "spheres do not intersect");
  z2 = std::max(0.0, z2);
  const double z = std::sqrt(z2);
  const Position base = p1 + x * ex + y * ey;
  return {base + z * ez, base - z * ez};
}

/// Planar variant for noisy ranges: the in-plane intersection point of the
/// first two circles' radical line with the third, no z feasibility check.
inline Position trilaterate_plane(const std::array<Position, 3>& anchors, const std::array<double, 3>& radii) {
  std::array<Position, 3> flat;
  for (std::size_t k = 0; k < 3; ++k) flat[k] = {anchors[k].x, anchors[k].y, 0.0};
  const Position p1 = flat[0];
  const Position v12 = flat[1] - p1;
  const Position v13 = flat[2] - p1;
  const double d = norm(v12);
  const double scale = std::max(d, norm(v13));
  if (!(d > 0.0)) throw Error(ErrorKind::CollinearAnchors, "anchors 1 and 2 coincide");
  const Position ex = (1.0 / d) * v12;
  const double i = dot(ex, v13);
  const Position ey_raw = v13 - i * ex;
  const double j = norm(ey_raw);
  if (!(j > 1e-9 * scale)) throw Error(ErrorKind::CollinearAnchors, "anchors are collinear");
  const Position ey = (1.0 / j) * ey_raw;
  const double r1 = radii[0], r2 = radii[1], r3 = radii[2];
  const double x = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
  const double y = (r1 * r1 - r3 * r3 + i * i + j * j - 2.0 * i * x) / (2.0 * j);
  const Position out = p1 + x * ex + y * ey;
  return {out.x, out.y, 0.0};
}

// ---------------------------------------------------------------------------
// Pseudo-linear system

namespace detail {
inline void require_same_size(std::size_t anchors, std::size_t values, const char* what) {
  if (anchors != values) {
    throw Error(ErrorKind::LengthMismatch, std::string(what) + ": expected " + std::to_string(anchors) +
                                               " values, got " + std::to_string(values));
  }
}
}  // namespace detail

inline LinearSystem linearize(std::span<const Position> anchors, std::span<const double> distances) {
  const std::size_t m = anchors.size();
  if (m < 3) throw Error(ErrorKind::TooFewAnchors, "need at least 3 anchors, got " + std::to_string(m));
  detail::require_same_size(m, distances.size(), "distances");
  LinearSystem sys;
  auto& c = sys.centroids;
  std::vector<double> k(m);
  for (std::size_t i = 0; i < m; ++i) {
    c.xc += anchors[i].x;
    c.yc += anchors[i].y;
    c.dc += distances[i] * distances[i];
    k[i] = anchors[i].x * anchors[i].x + anchors[i].y * anchors[i].y;
    c.kc += k[i];
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  c.xc *= inv_m;
  c.yc *= inv_m;
  c.dc *= inv_m;
  c.kc *= inv_m;
  sys.design.resize(static_cast<Eigen::Index>(m), 2);
  sys.rhs.resize(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    sys.design(r, 0) = anchors[i].x - c.xc;
    sys.design(r, 1) = anchors[i].y - c.yc;
    sys.rhs(r) = c.dc - distances[i] * distances[i] + k[i] - c.kc;
  }
  return sys;
}

namespace detail {
/// s = 1/2 N^-1 v for a 2x2 normal matrix N.
inline Position solve_normal(const Eigen::Matrix2d& normal, const Eigen::Vector2d& v) {
  if (linalg::is_rank_deficient(normal)) throw Error(ErrorKind::RankDeficient, "normal matrix is singular (collinear anchors?)");
  const Eigen::Vector2d s = 0.5 * normal.inverse() * v;
  return {s(0), s(1), 0.0};
}
}  // namespace detail

/// Minimizer of ||b - 2 A s||^2.
inline Position lls_solve(const LinearSystem& sys) {
  const Eigen::Matrix2d normal = sys.design.transpose() * sys.design;
  const Eigen::Vector2d v = sys.design.transpose() * sys.rhs;
  return detail::solve_normal(normal, v);
}

// ---------------------------------------------------------------------------
// Weighted least squares

/// Covariance of b used as the WLS weight matrix: W = P Cov(b1) P.
struct WeightModel {
  Eigen::MatrixXd w;
  double regularization = 1e-10;  // relative eigenvalue cutoff for the pseudo-inverse

  /// W^+ or nullopt when W is numerically zero.
  std::optional<Eigen::MatrixXd> pseudo_inverse() const { return linalg::symmetric_pinv(w, regularization); }
};

/// Var(k_i) = 4 sa^2 (sa^2 + x_i^2 + y_i^2).
inline double anchor_norm_variance(Position anchor, double sigma_a) {
  const double s2 = sigma_a * sigma_a;
  return 4.0 * s2 * (s2 + anchor.x * anchor.x + anchor.y * anchor.y);
}

/// Log-normal std of the distance: (ln10 / (10 eta)) sigma_p.
inline double log_distance_sigma(double sigma_p, double eta) { return std::log(10.0) / (10.0 * eta) * sigma_p; }

/// Var(d^2) = exp(4 ln d) (exp(8 s^2) - exp(4 s^2)), s the log-distance sigma.
inline double squared_distance_variance(double d, double sigma_p, double eta) {
  if (!(d > 0.0)) throw Error(ErrorKind::NonPositiveDistance, "distance must be positive");
  const double s = log_distance_sigma(sigma_p, eta);
  return std::exp(4.0 * std::log(d)) * (std::exp(8.0 * s * s) - std::exp(4.0 * s * s));
}

inline WeightModel build_weights(std::span<const Position> anchors, std::span<const double> distances,
                                 std::span<const double> sigmas_a, std::span<const double> sigmas_p, double eta) {
  const std::size_t m = anchors.size();
  detail::require_same_size(m, distances.size(), "distances");
  detail::require_same_size(m, sigmas_a.size(), "sigmas_a");
  detail::require_same_size(m, sigmas_p.size(), "sigmas_p");
  if (!(eta > 0.0)) throw Error(ErrorKind::Config, "eta must be > 0");
  Eigen::VectorXd cov = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    cov(static_cast<Eigen::Index>(i)) =
        anchor_norm_variance(anchors[i], sigmas_a[i]) + squared_distance_variance(distances[i], sigmas_p[i], eta);
  }
  const Eigen::MatrixXd p = linalg::centering_projector(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd w = p * cov.asDiagonal() * p;
  w = 0.5 * (w + w.transpose());
  return WeightModel{std::move(w)};
}

namespace detail {
struct WeightedNormal {
  Eigen::Matrix2d normal;  // A^T W^+ A
  Eigen::MatrixXd at_winv; // A^T W^+
  bool fell_back = false;
};

inline WeightedNormal weighted_normal(const LinearSystem& sys, const WeightModel& w) {
  detail::require_same_size(static_cast<std::size_t>(sys.design.rows()), static_cast<std::size_t>(w.w.rows()), "weights");
  WeightedNormal out;
  if (auto winv = w.pseudo_inverse()) {
    out.at_winv = sys.design.transpose() * (*winv);
  } else {
    out.at_winv = sys.design.transpose();
    out.fell_back = true;
  }
  out.normal = out.at_winv * sys.design;
  out.normal = 0.5 * (out.normal + out.normal.transpose()).eval();
  return out;
}
}  // namespace detail

/// s = 1/2 (A^T W^+ A)^-1 A^T W^+ b. A numerically zero W falls back to
/// ordinary least squares and sets the flag.
inline SolveResult wls_solve(const LinearSystem& sys, const WeightModel& w) {
  const auto wn = detail::weighted_normal(sys, w);
  const Eigen::Vector2d v = wn.at_winv * sys.rhs;
  return {detail::solve_normal(wn.normal, v), wn.fell_back};
}

// ---------------------------------------------------------------------------
// Bias compensation

/// Expected bias contributions of noisy anchors and log-normal distances.
///   l = E[N^T W^+ N]          (noise in the design matrix)
///   t = E[b] - b              (non-zero mean of the squared-distance noise)
///   g = E[N^T W^+ b]          (correlation between design and rhs noise)
struct BiasTerms {
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  Eigen::VectorXd t;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  double u = 0.0;
};

/// Consolidated exact expectations. With N = P N1 and Q = P W^+ P:
///   l = diag(sum_i Q_ii sa_i^2, sum_i Q_ii sa_i^2)
///   g = (2 sum_i Q_ii x_i sa_i^2, 2 sum_i Q_ii y_i sa_i^2)
///   t_i = -c_i d_i^2 + mean_j(c_j d_j^2) + 2 (sa_i^2 - mean_j sa_j^2)
/// where c_i = u^2 sp_i^2 + u^4 sp_i^4 / 2 is the second-order expansion of
/// exp(u^2 sp_i^2) - 1 and sp_i is the shadowing std in dB. Measured (noisy)
/// coordinates and distances stand in for the unknown true ones.
inline BiasTerms compute_bias_terms(std::span<const Position> anchors, std::span<const double> distances,
                                    std::span<const double> sigmas_a, std::span<const double> sigmas_p, double eta,
                                    const WeightModel& w) {
  const std::size_t m = anchors.size();
  detail::require_same_size(m, distances.size(), "distances");
  detail::require_same_size(m, sigmas_a.size(), "sigmas_a");
  detail::require_same_size(m, sigmas_p.size(), "sigmas_p");
  detail::require_same_size(m, static_cast<std::size_t>(w.w.rows()), "weights");
  if (!(eta > 0.0)) throw Error(ErrorKind::Config, "eta must be > 0");
  const auto mi = static_cast<Eigen::Index>(m);
  const double inv_m = 1.0 / static_cast<double>(m);

  BiasTerms bias;
  bias.u = squared_distance_noise_constant(eta);
  const double u2 = bias.u * bias.u;

  Eigen::VectorXd c_d2(mi);
  double mean_c_d2 = 0.0, mean_sa2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double s2 = sigmas_p[i] * sigmas_p[i];
    const double c = u2 * s2 + 0.5 * u2 * u2 * s2 * s2;
    c_d2(static_cast<Eigen::Index>(i)) = c * distances[i] * distances[i];
    mean_c_d2 += c_d2(static_cast<Eigen::Index>(i));
    mean_sa2 += sigmas_a[i] * sigmas_a[i];
  }
  mean_c_d2 *= inv_m;
  mean_sa2 *= inv_m;
  bias.t.resize(mi);
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    bias.t(r) = -c_d2(r) + mean_c_d2 + 2.0 * (sigmas_a[i] * sigmas_a[i] - mean_sa2);
  }

  if (auto winv = w.pseudo_inverse()) {
    const Eigen::MatrixXd p = linalg::centering_projector(mi);
    const Eigen::MatrixXd q = p * (*winv) * p;
    double lx = 0.0, gx = 0.0, gy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double s2 = sigmas_a[i] * sigmas_a[i];
      lx += q(r, r) * s2;
      gx += 2.0 * q(r, r) * anchors[i].x * s2;
      gy += 2.0 * q(r, r) * anchors[i].y * s2;
    }
    bias.l = Eigen::Matrix2d{{lx, 0.0}, {0.0, lx}};
    bias.g = Eigen::Vector2d{gx, gy};
  }
  return bias;
}

/// s_bc = 1/2 (A^T W^+ A - L)^-1 { A^T W^+ (b - t) - [g] }, the g term only
/// when include_cross_term is set. Throws NotPositiveDefinite when the
/// correction removes more information than the data carries; callers
/// typically fall back to wls_solve.
inline SolveResult bias_compensated_solve(const LinearSystem& sys, const WeightModel& w, const BiasTerms& bias,
                                          bool include_cross_term = false) {
  detail::require_same_size(static_cast<std::size_t>(sys.rhs.size()), static_cast<std::size_t>(bias.t.size()), "bias t");
  const auto wn = detail::weighted_normal(sys, w);
  const Eigen::Matrix2d corrected = wn.normal - bias.l;
  if (!linalg::is_positive_definite(corrected)) {
    if (linalg::is_rank_deficient(wn.normal)) throw Error(ErrorKind::RankDeficient, "normal matrix is singular");
    throw Error(ErrorKind::NotPositiveDefinite, "A^T W^-1 A - L is not positive definite");
  }
  Eigen::Vector2d v = wn.at_winv * (sys.rhs - bias.t);
  if (include_cross_term) v -= bias.g;
  return {detail::solve_normal(corrected, v), wn.fell_back};
}

// ---------------------------------------------------------------------------
// Hyperbolic

/// Var(p^2) for a log-normal distance p with dB shadowing std sigma.
inline double hyperbolic_distance_variance(double p, double sigma, double eta) {
  return squared_distance_variance(p, sigma, eta);
}

/// Rows [2 a_n, 2 b_n] and C_n = a_n^2 + b_n^2 - p_n^2 + p_1^2 (n = 2..M)
/// in the frame centered on anchor 1. The weighted variant uses
/// R = Var(p_1^2) 1 1^T + diag(Var(p_2^2), ..., Var(p_M^2)); when any
/// variance falls below 1e-12 of the largest, R is replaced by I.
inline Position hyperbolic_solve(std::span<const Position> anchors, std::span<const double> distances, double sigma,
                                 double eta, bool weighted) {
  const std::size_t m = anchors.size();
  if (m < 3) throw Error(ErrorKind::TooFewAnchors, "need at least 3 anchors, got " + std::to_string(m));
  detail::require_same_size(m, distances.size(), "distances");
  const Position origin = anchors[0];
  const auto rows = static_cast<Eigen::Index>(m - 1);
  DesignMatrix design(rows, 2);
  Eigen::VectorXd c(rows);
  const double p1 = distances[0];
  for (std::size_t n = 1; n < m; ++n) {
    const auto r = static_cast<Eigen::Index>(n - 1);
    const double a = anchors[n].x - origin.x;
    const double b = anchors[n].y - origin.y;
    design(r, 0) = 2.0 * a;
    design(r, 1) = 2.0 * b;
    c(r) = a * a + b * b - distances[n] * distances[n] + p1 * p1;
  }

  Eigen::Matrix2d normal;
  Eigen::Vector2d v;
  bool use_identity = !weighted;
  Eigen::MatrixXd r_inv;
  if (weighted) {
    if (!(eta > 0.0)) throw Error(ErrorKind::Config, "eta must be > 0");
    std::vector<double> var(m);
    double var_max = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
      var[n] = hyperbolic_distance_variance(distances[n], sigma, eta);
      var_max = std::max(var_max, var[n]);
    }
    const double floor = 1e-12 * var_max;
    use_identity = !(var_max > 0.0) || std::any_of(var.begin(), var.end(), [&](double x) { return !(x >= floor) || x == 0.0; });
    if (!use_identity) {
      Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(rows, rows, var[0]);
      for (Eigen::Index r = 0; r < rows; ++r) cov(r, r) += var[static_cast<std::size_t>(r + 1)];
      r_inv = cov.llt().solve(Eigen::MatrixXd::Identity(rows, rows));
    }
  }
  if (use_identity) {
    normal = design.transpose() * design;
    v = design.transpose() * c;
  } else {
    const Eigen::MatrixXd mt_rinv = design.transpose() * r_inv;
    normal = mt_rinv * design;
    normal = 0.5 * (normal + normal.transpose()).eval();
    v = mt_rinv * c;
  }
  if (linalg::is_rank_deficient(normal)) throw Error(ErrorKind::RankDeficient, "anchors are collinear");
  const Eigen::Vector2d s = normal.inverse() * v;
  return {s(0) + origin.x, s(1) + origin.y, 0.0};
}

// ---------------------------------------------------------------------------
// Solver selection

enum class SolverKind { Trilateration, Lls, Wls, WlsBc, Hyperbolic, HyperbolicWeighted };

inline constexpr std::array<SolverKind, 6> kAllSolvers = {SolverKind::Trilateration, SolverKind::Lls,
                                                         SolverKind::Wls,           SolverKind::WlsBc,
                                                         SolverKind::Hyperbolic,    SolverKind::HyperbolicWeighted};

constexpr std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Trilateration: return "trilateration";
    case SolverKind::Lls: return "lls";
    case SolverKind::Wls: return "wls";
    case SolverKind::WlsBc: return "wls-bc";
    case SolverKind::Hyperbolic: return "hyperbolic";
    case SolverKind::HyperbolicWeighted: return "hyperbolic-w";
  }
  return "?";
}

inline SolverKind parse_solver(std::string_view name) {
  for (auto kind : kAllSolvers) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::Config, "unknown solver '" + std::string(name) + "'");
}

/// Everything a solver may need for one measurement row.
struct SolverInput {
  std::span<const Position> anchors;
  std::span<const double> distances;
  std::span<const double> sigmas_a;  // per anchor, cm
  std::span<const double> sigmas_p;  // per anchor, dB
  double eta = 2.0;
  bool include_cross_term = false;
};

struct LocateResult {
  Position position;
  bool fell_back = false;  // weights degenerate or bias correction not positive definite
};

/// Dispatches to the named solver. Trilateration uses the first three
/// anchors in the plane; the bias-compensated solver falls back to plain WLS
/// on NotPositiveDefinite.
inline LocateResult locate(SolverKind kind, const SolverInput& in) {
  switch (kind) {
    case SolverKind::Trilateration: {
      if (in.anchors.size() < 3) throw Error(ErrorKind::TooFewAnchors, "trilateration needs 3 anchors");
      detail::require_same_size(in.anchors.size(), in.distances.size(), "distances");
      return {trilaterate_plane({in.anchors[0], in.anchors[1], in.anchors[2]},
                                {in.distances[0], in.distances[1], in.distances[2]}),
              false};
    }
    case SolverKind::Lls:
      return {lls_solve(linearize(in.anchors, in.distances)), false};
    case SolverKind::Wls: {
      const auto sys = linearize(in.anchors, in.distances);
      const auto w = build_weights(in.anchors, in.distances, in.sigmas_a, in.sigmas_p, in.eta);
      const auto res = wls_solve(sys, w);
      return {res.position, res.fell_back_to_lls};
    }
    case SolverKind::WlsBc: {
      const auto sys = linearize(in.anchors, in.distances);
      const auto w = build_weights(in.anchors, in.distances, in.sigmas_a, in.sigmas_p, in.eta);
      const auto bias = compute_bias_terms(in.anchors, in.distances, in.sigmas_a, in.sigmas_p, in.eta, w);
      try {
        const auto res = bias_compensated_solve(sys, w, bias, in.include_cross_term);
        return {res.position, res.fell_back_to_lls};
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
        return {wls_solve(sys, w).position, true};
      }
    }
    case SolverKind::Hyperbolic:
    case SolverKind::HyperbolicWeighted: {
      const double sigma = in.sigmas_p.empty() ? 0.0 : in.sigmas_p[0];
      return {hyperbolic_solve(in.anchors, in.distances, sigma, in.eta, kind == SolverKind::HyperbolicWeighted), false};
    }
  }
  throw Error(ErrorKind::Config, "unknown solver");
}

}  // namespace rssiloc
