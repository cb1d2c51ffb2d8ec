#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rssiloc/radio.hpp"
#include "rssiloc/rng.hpp"
#include "rssiloc/solvers.hpp"

using namespace rssiloc;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Config;
}

std::vector<double> exact_distances(const std::vector<Position>& anchors, Position target) {
  std::vector<double> d;
  for (const auto& a : anchors) d.push_back(distance(a, target));
  return d;
}

/// Random scene with anchors spread well over a square, target inside it.
std::vector<Position> random_anchors(Rng& rng, std::size_t m, double span) {
  while (true) {
    std::vector<Position> pts;
    for (std::size_t i = 0; i < m; ++i) pts.push_back({rng.uniform(0, span), rng.uniform(0, span)});
    if (planar_spread(pts) > 0.1 * span) return pts;
  }
}

Position apply_rotation(Position p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

const std::vector<Position> kTriangle{{0, 0}, {4, 0}, {0, 3}};
const std::vector<double> kTriangleDistances{std::sqrt(2.0), std::sqrt(10.0), std::sqrt(5.0)};

}  // namespace

// --- trilateration -----------------------------------------------------------

TEST(Trilaterate, WorkedExample) {
  const auto r = trilaterate({Position{0, 0, 0}, {4, 0, 0}, {1, 3, 0}}, {std::sqrt(2.0), std::sqrt(10.0), 2.0});
  EXPECT_NEAR(r.first.x, 1.0, 1e-12);
  EXPECT_NEAR(r.first.y, 1.0, 1e-12);
  EXPECT_NEAR(r.first.z, 0.0, 1e-6);
  EXPECT_NEAR(r.second.x, 1.0, 1e-12);
}

TEST(Trilaterate, TargetOnFirstAnchor) {
  const auto r = trilaterate({Position{0, 0, 0}, {4, 0, 0}, {1, 3, 0}}, {0.0, 4.0, std::sqrt(10.0)});
  EXPECT_NEAR(norm(r.first), 0.0, 1e-9);
}

TEST(Trilaterate, Random3dTargets) {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<Position, 3> a;
    for (auto& p : a) p = {rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-300, 300)};
    if (norm(cross(a[1] - a[0], a[2] - a[0])) < 1e3) continue;
    const Position t{rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-300, 300)};
    const auto r = trilaterate(a, {distance(a[0], t), distance(a[1], t), distance(a[2], t)});
    const double err = std::min(distance(r.first, t), distance(r.second, t));
    EXPECT_LT(err, 1e-9 * 300 * 10) << "trial " << trial;
    // both candidates reproduce the radii
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(distance(r.second, a[k]), distance(t, a[k]), 1e-6);
  }
}

TEST(Trilaterate, Errors) {
  EXPECT_EQ(kind_of([] { trilaterate({Position{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {1.0, 1.0, 1.0}); }), ErrorKind::CollinearAnchors);
  EXPECT_EQ(kind_of([] { trilaterate({Position{0, 0, 0}, {10, 0, 0}, {0, 10, 0}}, {1.0, 1.0, 1.0}); }), ErrorKind::NoIntersection);
}

// --- linearization -----------------------------------------------------------

TEST(Linearize, WorkedExample) {
  const auto sys = linearize(kTriangle, kTriangleDistances);
  const double a[3][2] = {{-4.0 / 3, -1}, {8.0 / 3, -1}, {-4.0 / 3, 2}};
  const double b[3] = {-14.0 / 3, 10.0 / 3, 4.0 / 3};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(sys.design(i, 0), a[i][0], 1e-14);
    EXPECT_NEAR(sys.design(i, 1), a[i][1], 1e-14);
    EXPECT_NEAR(sys.rhs(i), b[i], 1e-13);
  }
  EXPECT_NEAR(sys.centroids.dc, 17.0 / 3, 1e-14);
  const Eigen::VectorXd lhs = 2.0 * sys.design * Eigen::Vector2d(1, 1);
  EXPECT_LT((lhs - sys.rhs).norm(), 1e-13);
  // centering identity
  EXPECT_LT(sys.design.colwise().sum().norm(), 1e-14);
}

TEST(Linearize, TranslationInvariantDesign) {
  std::vector<Position> moved;
  for (auto p : kTriangle) moved.push_back({p.x + 37.5, p.y - 12.0});
  const auto a = linearize(kTriangle, kTriangleDistances);
  const auto b = linearize(moved, kTriangleDistances);
  EXPECT_LT((a.design - b.design).norm(), 1e-12);
}

TEST(Linearize, TooFewAnchors) {
  const std::vector<Position> two{{0, 0}, {4, 0}};
  const std::vector<double> d{1, 1};
  EXPECT_EQ(kind_of([&] { linearize(two, d); }), ErrorKind::TooFewAnchors);
}

TEST(Lls, WorkedExampleAndCollinear) {
  const Position s = lls_solve(linearize(kTriangle, kTriangleDistances));
  EXPECT_NEAR(s.x, 1.0, 1e-12);
  EXPECT_NEAR(s.y, 1.0, 1e-12);
  const std::vector<Position> line{{0, 0}, {1, 0}, {2, 0}};
  const std::vector<double> d{1, 1, 1};
  EXPECT_EQ(kind_of([&] { lls_solve(linearize(line, d)); }), ErrorKind::RankDeficient);
}

// --- weights -----------------------------------------------------------------

TEST(Weights, ZeroNoiseGivesZeroMatrix) {
  const std::vector<double> z(3, 0.0);
  const auto w = build_weights(kTriangle, kTriangleDistances, z, z, 2.0);
  EXPECT_EQ(w.w.norm(), 0.0);
  EXPECT_FALSE(w.pseudo_inverse().has_value());
}

TEST(Weights, EqualVariancesGiveScaledProjector) {
  // anchors on a circle about the origin, target at the origin: equal k_i and d_i
  const std::vector<Position> a{{50, 0}, {-25, 43.30127018922193}, {-25, -43.30127018922193}};
  const std::vector<double> d{50, 50, 50};
  const std::vector<double> sa{1.5, 1.5, 1.5}, sp{2, 2, 2};
  const auto w = build_weights(a, d, sa, sp, 2.0);
  const double v = anchor_norm_variance(a[0], 1.5) + squared_distance_variance(50, 2, 2.0);
  Eigen::Matrix3d p = Eigen::Matrix3d::Identity() - Eigen::Matrix3d::Constant(1.0 / 3.0);
  EXPECT_LT((w.w - v * p).norm(), 1e-9 * v);
}

TEST(Weights, VarianceFormulas) {
  // Var(k) with k = (x + n)^2 + (y + n')^2: 4 s^2 (x^2 + y^2) + 2 * 2 s^4
  EXPECT_DOUBLE_EQ(anchor_norm_variance({3, 4}, 2.0), 4 * 4 * 25 + 4 * 16);
  // lognormal: d^2 = exp(2 (ln d + s Z)) has variance d^4 (exp(8 s^2) - exp(4 s^2))
  const double s = std::log(10.0) / 20.0 * 3.0;
  EXPECT_NEAR(squared_distance_variance(120.0, 3.0, 2.0), std::pow(120.0, 4) * (std::exp(8 * s * s) - std::exp(4 * s * s)), 1e-6);
}

TEST(Weights, SymmetricWithZeroRowSums) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_anchors(rng, 6, 500);
    std::vector<double> d, sa, sp;
    for (int i = 0; i < 6; ++i) {
      d.push_back(rng.uniform(10, 600));
      sa.push_back(rng.uniform(0, 5));
      sp.push_back(rng.uniform(0, 4));
    }
    const auto w = build_weights(a, d, sa, sp, 2.5);
    EXPECT_LT((w.w - w.w.transpose()).norm(), 1e-12 * w.w.norm());
    EXPECT_LT(w.w.rowwise().sum().norm(), 1e-9 * w.w.norm());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.w);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * es.eigenvalues().maxCoeff());
  }
}

// --- WLS ---------------------------------------------------------------------

TEST(Wls, IdentityWeightsEqualLls) {
  Rng rng(2);
  const auto a = random_anchors(rng, 5, 400);
  std::vector<double> d;
  for (int i = 0; i < 5; ++i) d.push_back(rng.uniform(50, 500));
  const auto sys = linearize(a, d);
  const auto r = wls_solve(sys, WeightModel{Eigen::MatrixXd::Identity(5, 5)});
  const Position l = lls_solve(sys);
  EXPECT_NEAR(r.position.x, l.x, 1e-9);
  EXPECT_NEAR(r.position.y, l.y, 1e-9);
  EXPECT_FALSE(r.fell_back_to_lls);
}

TEST(Wls, ZeroWeightsFallBack) {
  const std::vector<double> z(3, 0.0);
  const auto sys = linearize(kTriangle, kTriangleDistances);
  const auto r = wls_solve(sys, build_weights(kTriangle, kTriangleDistances, z, z, 2.0));
  EXPECT_TRUE(r.fell_back_to_lls);
  EXPECT_NEAR(r.position.x, 1.0, 1e-12);
}

TEST(Wls, ScaleInvariance) {
  Rng rng(3);
  const auto a = random_anchors(rng, 6, 400);
  std::vector<double> d;
  for (int i = 0; i < 6; ++i) d.push_back(rng.uniform(50, 500));
  const auto sys = linearize(a, d);
  const Eigen::MatrixXd p = linalg::centering_projector(6);
  Eigen::VectorXd diag(6);
  for (int i = 0; i < 6; ++i) diag(i) = rng.uniform(1, 100);
  const Eigen::MatrixXd w = p * diag.asDiagonal() * p;
  const auto r1 = wls_solve(sys, WeightModel{w});
  const auto r2 = wls_solve(sys, WeightModel{37.0 * w});
  EXPECT_NEAR(r1.position.x, r2.position.x, 1e-9);
  EXPECT_NEAR(r1.position.y, r2.position.y, 1e-9);
  const auto r3 = wls_solve(sys, WeightModel{p});
  const auto r4 = wls_solve(sys, WeightModel{5.0 * p});
  EXPECT_NEAR(r3.position.x, r4.position.x, 1e-9);
}

// --- bias compensation --------------------------------------------------------

namespace {

/// E[N^T W' N] and E[N^T W' b] by direct summation over the noise terms,
/// where N = P N1, N1 rows (n_xi, n_yi) independent with variances s_i^2 and
/// the rhs noise correlated with N through k_i = (x_i + n_xi)^2 + (y_i + n_yi)^2.
void expected_design_terms(const std::vector<Position>& a, const std::vector<double>& sa, const Eigen::MatrixXd& wp,
                           Eigen::Matrix2d& l, Eigen::Vector2d& g) {
  const auto m = static_cast<Eigen::Index>(a.size());
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  l.setZero();
  g.setZero();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        const double s2 = sa[static_cast<std::size_t>(k)] * sa[static_cast<std::size_t>(k)];
        // E[N_ia N_jb] = delta_ab sum_k P_ik P_jk s_k^2
        const double e = wp(i, j) * p(i, k) * p(j, k) * s2;
        l(0, 0) += e;
        l(1, 1) += e;
        // b_j noise (linear part) = sum_k P_jk 2 x_k n_xk + ...
        g(0) += e * 2.0 * a[static_cast<std::size_t>(k)].x;
        g(1) += e * 2.0 * a[static_cast<std::size_t>(k)].y;
      }
    }
  }
}

}  // namespace

TEST(Bias, ConsolidatedFormsMatchDirectExpectation) {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_anchors(rng, 5, 400);
    std::vector<double> d, sa, sp;
    for (int i = 0; i < 5; ++i) {
      d.push_back(rng.uniform(30, 500));
      sa.push_back(rng.uniform(0.5, 6));
      sp.push_back(rng.uniform(0.5, 3));
    }
    const auto w = build_weights(a, d, sa, sp, 2.0);
    const auto bias = compute_bias_terms(a, d, sa, sp, 2.0, w);
    Eigen::Matrix2d l;
    Eigen::Vector2d g;
    expected_design_terms(a, sa, *w.pseudo_inverse(), l, g);
    EXPECT_LT((bias.l - l).norm(), 1e-9 * l.norm());
    EXPECT_LT((bias.g - g).norm(), 1e-9 * g.norm());
  }
}

TEST(Bias, DesignNoiseMonteCarlo) {
  // E[N^T W' N] sampled directly from perturbed anchors
  const std::vector<Position> a{{0, 0}, {400, 0}, {400, 400}, {0, 400}, {200, 120}};
  const std::vector<double> sa{3, 5, 2, 4, 6};
  const std::vector<double> d{150, 260, 310, 220, 90};
  const std::vector<double> sp(5, 2.0);
  const auto w = build_weights(a, d, sa, sp, 2.0);
  const Eigen::MatrixXd wp = *w.pseudo_inverse();
  const auto bias = compute_bias_terms(a, d, sa, sp, 2.0, w);
  const auto clean = linearize(a, d);
  Rng rng(77);
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    std::vector<Position> noisy = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
      noisy[i].x += rng.normal(0, sa[i]);
      noisy[i].y += rng.normal(0, sa[i]);
    }
    const Eigen::MatrixXd nm = linearize(noisy, d).design - clean.design;
    acc += nm.transpose() * wp * nm;
  }
  acc /= n;
  EXPECT_NEAR(acc(0, 0), bias.l(0, 0), 0.02 * bias.l(0, 0));
  EXPECT_NEAR(acc(1, 1), bias.l(1, 1), 0.02 * bias.l(1, 1));
  EXPECT_NEAR(acc(0, 1), 0.0, 0.02 * bias.l(0, 0));
}

TEST(Bias, HomoscedasticOffsetReduces) {
  const std::vector<Position> a{{0, 0}, {400, 0}, {400, 400}, {0, 400}};
  const std::vector<double> d{120, 300, 410, 250};
  const std::vector<double> sa(4, 0.0), sp(4, 2.0);
  const double eta = 2.0;
  const auto w = build_weights(a, d, sa, sp, eta);
  const auto bias = compute_bias_terms(a, d, sa, sp, eta, w);
  const double u = std::log(10.0) / (5.0 * std::sqrt(2.0) * eta);
  const double c = u * u * 4.0 + std::pow(u, 4) * 16.0 / 2.0;
  double dc = 0.0;
  for (double x : d) dc += x * x / 4.0;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(bias.t(i), c * (dc - d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)]), 1e-9);
  EXPECT_DOUBLE_EQ(bias.u, u);
  EXPECT_EQ(bias.l.norm(), 0.0);
  EXPECT_EQ(bias.g.norm(), 0.0);
}

TEST(Bias, OffsetMatchesExpectedRhsShift) {
  // second-order expansion of E[b] - b against the exact lognormal mean
  const std::vector<Position> a{{0, 0}, {400, 0}, {400, 400}};
  const std::vector<double> d{150, 260, 310};
  const std::vector<double> sa(3, 0.0), sp(3, 1.0);
  const auto w = build_weights(a, d, sa, sp, 2.0);
  const auto bias = compute_bias_terms(a, d, sa, sp, 2.0, w);
  const double infl = squared_distance_inflation(1.0, 2.0) - 1.0;
  double dc = 0.0;
  for (double x : d) dc += x * x / 3.0;
  for (int i = 0; i < 3; ++i) {
    const double exact = infl * (dc - d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(bias.t(i), exact, 1e-3 * std::abs(exact));
  }
}

TEST(Bias, ZeroTermsEqualWls) {
  Rng rng(4);
  const auto a = random_anchors(rng, 5, 400);
  std::vector<double> d, sa(5, 1.0), sp(5, 2.0);
  for (int i = 0; i < 5; ++i) d.push_back(rng.uniform(50, 500));
  const auto sys = linearize(a, d);
  const auto w = build_weights(a, d, sa, sp, 2.0);
  BiasTerms zero;
  zero.t = Eigen::VectorXd::Zero(5);
  const auto bc = bias_compensated_solve(sys, w, zero, true);
  const auto wl = wls_solve(sys, w);
  EXPECT_EQ(bc.position.x, wl.position.x);
  EXPECT_EQ(bc.position.y, wl.position.y);
}

TEST(Bias, NoiselessEqualsWls) {
  const std::vector<double> z(3, 0.0);
  const auto sys = linearize(kTriangle, kTriangleDistances);
  const auto w = build_weights(kTriangle, kTriangleDistances, z, z, 2.0);
  const auto bias = compute_bias_terms(kTriangle, kTriangleDistances, z, z, 2.0, w);
  EXPECT_EQ(bias.t.norm(), 0.0);
  const auto bc = bias_compensated_solve(sys, w, bias, true);
  EXPECT_EQ(bc.position.x, wls_solve(sys, w).position.x);
}

TEST(Bias, ExcessiveCorrectionIsNotPositiveDefinite) {
  const std::vector<double> sa(3, 1.0), sp(3, 1.0);
  const auto sys = linearize(kTriangle, kTriangleDistances);
  const auto w = build_weights(kTriangle, kTriangleDistances, sa, sp, 2.0);
  auto bias = compute_bias_terms(kTriangle, kTriangleDistances, sa, sp, 2.0, w);
  bias.l *= 1e6;
  EXPECT_EQ(kind_of([&] { bias_compensated_solve(sys, w, bias); }), ErrorKind::NotPositiveDefinite);
  // the dispatcher falls back to WLS
  const SolverInput in{kTriangle, kTriangleDistances, std::vector<double>(3, 200.0), sp, 2.0, false};
  EXPECT_NO_THROW(locate(SolverKind::WlsBc, in));
}

// --- hyperbolic -----------------------------------------------------------------

TEST(Hyperbolic, WorkedExample) {
  const Position s = hyperbolic_solve(kTriangle, kTriangleDistances, 0.0, 2.0, false);
  EXPECT_NEAR(s.x, 1.0, 1e-12);
  EXPECT_NEAR(s.y, 1.0, 1e-12);
}

TEST(Hyperbolic, TranslationEquivariance) {
  std::vector<Position> moved;
  for (auto p : kTriangle) moved.push_back({p.x + 7, p.y - 2});
  for (bool weighted : {false, true}) {
    const Position s = hyperbolic_solve(moved, kTriangleDistances, 2.0, 2.0, weighted);
    EXPECT_NEAR(s.x, 8.0, 1e-12);
    EXPECT_NEAR(s.y, -1.0, 1e-12);
  }
}

TEST(Hyperbolic, ZeroSigmaWeightedEqualsUnweighted) {
  Rng rng(6);
  const auto a = random_anchors(rng, 6, 400);
  std::vector<double> d;
  for (int i = 0; i < 6; ++i) d.push_back(rng.uniform(50, 500));
  const Position u = hyperbolic_solve(a, d, 0.0, 2.0, false);
  const Position w = hyperbolic_solve(a, d, 0.0, 2.0, true);
  EXPECT_EQ(u.x, w.x);
  EXPECT_EQ(u.y, w.y);
}

TEST(Hyperbolic, WeightedMatchesExplicitGls) {
  Rng rng(9);
  const auto a = random_anchors(rng, 5, 400);
  std::vector<double> d;
  for (int i = 0; i < 5; ++i) d.push_back(rng.uniform(50, 500));
  const double sigma = 2.0, eta = 2.0;
  const Position s = hyperbolic_solve(a, d, sigma, eta, true);
  // independent GLS with Eigen's generic solver
  const double sl = std::log(10.0) * sigma / (10.0 * eta);
  auto var = [&](double p) { return std::pow(p, 4) * (std::exp(8 * sl * sl) - std::exp(4 * sl * sl)); };
  Eigen::MatrixXd m(4, 2);
  Eigen::VectorXd c(4);
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(4, 4, var(d[0]));
  for (int n = 1; n < 5; ++n) {
    const double an = a[static_cast<std::size_t>(n)].x - a[0].x, bn = a[static_cast<std::size_t>(n)].y - a[0].y;
    m.row(n - 1) << 2 * an, 2 * bn;
    c(n - 1) = an * an + bn * bn - d[static_cast<std::size_t>(n)] * d[static_cast<std::size_t>(n)] + d[0] * d[0];
    r(n - 1, n - 1) += var(d[static_cast<std::size_t>(n)]);
  }
  const Eigen::MatrixXd ri = r.inverse();
  const Eigen::Vector2d sol = (m.transpose() * ri * m).ldlt().solve(m.transpose() * ri * c);
  EXPECT_NEAR(s.x, sol(0) + a[0].x, 1e-8);
  EXPECT_NEAR(s.y, sol(1) + a[0].y, 1e-8);
}

TEST(Hyperbolic, CollinearIsRankDeficient) {
  const std::vector<Position> line{{0, 0}, {1, 0}, {2, 0}};
  const std::vector<double> d{1, 1, 1};
  EXPECT_EQ(kind_of([&] { hyperbolic_solve(line, d, 0.0, 2.0, false); }), ErrorKind::RankDeficient);
}

// --- properties across all solvers -------------------------------------------------

TEST(Solvers, NoiselessConsistency) {
  Rng rng(2024);
  for (int scene = 0; scene < 500; ++scene) {
    const std::size_t m = 3 + static_cast<std::size_t>(scene % 3);
    const auto a = random_anchors(rng, m, 500);
    const Position t{rng.uniform(0, 500), rng.uniform(0, 500)};
    const auto d = exact_distances(a, t);
    const std::vector<double> sa(m, 1.0), sp(m, 2.0);
    for (auto kind : kAllSolvers) {
      const auto r = locate(kind, SolverInput{a, d, sa, sp, 2.0, false});
      // bias-compensated output is a corrected estimate, not a consistent one, unless noise is zero
      if (kind == SolverKind::WlsBc) continue;
      EXPECT_LT(position_error(r.position, t), 1e-9 * 500) << to_string(kind) << " scene " << scene;
    }
    const std::vector<double> z(m, 0.0);
    const auto bc = locate(SolverKind::WlsBc, SolverInput{a, d, z, z, 2.0, true});
    EXPECT_LT(position_error(bc.position, t), 1e-9 * 500);
  }
}

TEST(Solvers, TranslationEquivariance) {
  Rng rng(31);
  for (int scene = 0; scene < 50; ++scene) {
    const auto a = random_anchors(rng, 5, 400);
    std::vector<double> d, sa(5, 0.5), sp(5, 2.0);
    for (int i = 0; i < 5; ++i) d.push_back(rng.uniform(50, 500));
    const Position shift{rng.uniform(-1000, 1000), rng.uniform(-1000, 1000)};
    std::vector<Position> moved;
    for (auto p : a) moved.push_back(p + shift);
    for (auto kind : kAllSolvers) {
      if (kind == SolverKind::Trilateration) continue;  // needs consistent radii; covered below
      // wls and wls-bc weights depend on absolute coordinates through Var(k_i); use sa = 0 for them
      const std::vector<double> sa_used = (kind == SolverKind::Wls || kind == SolverKind::WlsBc) ? std::vector<double>(5, 0.0) : sa;
      const auto r0 = locate(kind, SolverInput{a, d, sa_used, sp, 2.0, false});
      const auto r1 = locate(kind, SolverInput{moved, d, sa_used, sp, 2.0, false});
      EXPECT_LT(position_error(r1.position, r0.position + shift), 1e-7) << to_string(kind);
    }
    const Position t{rng.uniform(0, 400), rng.uniform(0, 400)};
    const auto e0 = exact_distances(a, t);
    const auto r = locate(SolverKind::Trilateration, SolverInput{moved, e0, sa, sp});
    EXPECT_LT(position_error(r.position, t + shift), 1e-7);
  }
}

TEST(Solvers, RotationEquivariance) {
  Rng rng(32);
  for (int scene = 0; scene < 50; ++scene) {
    const auto a = random_anchors(rng, 4, 400);
    std::vector<double> d;
    for (int i = 0; i < 4; ++i) d.push_back(rng.uniform(50, 500));
    const double angle = rng.uniform(0, 6.283185307179586);
    std::vector<Position> rotated;
    for (auto p : a) rotated.push_back(apply_rotation(p, angle));
    const Position l0 = lls_solve(linearize(a, d));
    const Position l1 = lls_solve(linearize(rotated, d));
    EXPECT_LT(position_error(l1, apply_rotation(l0, angle)), 1e-9 * 500);

    const Position t{rng.uniform(0, 400), rng.uniform(0, 400)};
    const auto e = exact_distances(a, t);
    const auto tr = trilaterate({rotated[0], rotated[1], rotated[2]}, {e[0], e[1], e[2]});
    EXPECT_LT(position_error(tr.first, apply_rotation(t, angle)), 1e-9 * 500);
  }
}

TEST(Solvers, Names) {
  for (auto kind : kAllSolvers) EXPECT_EQ(parse_solver(to_string(kind)), kind);
  EXPECT_EQ(kind_of([] { parse_solver("newton"); }), ErrorKind::Config);
}

TEST(Solvers, LengthMismatch) {
  const std::vector<double> d{1, 2};
  EXPECT_EQ(kind_of([&] { linearize(kTriangle, d); }), ErrorKind::LengthMismatch);
}
