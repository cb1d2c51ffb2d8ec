#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "rssiloc/core.hpp"
#include "rssiloc/filters.hpp"
#include "rssiloc/parallel.hpp"
#include "rssiloc/radio.hpp"
#include "rssiloc/rng.hpp"

using namespace rssiloc;

namespace {

Scene scene_of(std::vector<Position> pts) { return make_scene(pts); }

double sample_variance(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Scene, AcceptsTriangle) { EXPECT_NO_THROW(validate_scene(scene_of({{0, 0}, {4, 0}, {0, 3}}))); }

TEST(Scene, RejectsCollinear) {
  try {
    validate_scene(scene_of({{0, 0}, {1, 0}, {2, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateGeometry);
  }
}

TEST(Scene, RejectsTwoAnchors) {
  try {
    validate_scene(scene_of({{0, 0}, {4, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewAnchors);
  }
}

TEST(Scene, ScaleInvariantTolerance) {
  // a 1e-5 relative kink is accepted at every scale
  for (double s : {1e-3, 1.0, 1e6}) {
    EXPECT_NO_THROW(validate_scene(scene_of({{0, 0}, {s, 0}, {2 * s, 2e-5 * s}})));
    EXPECT_THROW(validate_scene(scene_of({{0, 0}, {s, 0}, {2 * s, 1e-9 * s}})), Error);
  }
}

TEST(Scene, AnyPositiveAreaTriangleWithExtraPointsIsValid) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Position> pts;
    for (int i = 0; i < 3; ++i) pts.push_back({rng.uniform(-500, 500), rng.uniform(-500, 500)});
    const double area = 0.5 * std::abs((pts[1].x - pts[0].x) * (pts[2].y - pts[0].y) - (pts[2].x - pts[0].x) * (pts[1].y - pts[0].y));
    if (area < 1.0) continue;
    pts.push_back(pts[0]);  // a repeated point does not remove the spread
    pts[3].x += 1.0;
    EXPECT_NO_THROW(validate_scene(scene_of(pts)));
  }
}

TEST(PositionError, Examples) {
  EXPECT_DOUBLE_EQ(position_error({0.5, 0}, {0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(position_error({3, 4}, {0, 0}), 5.0);
  EXPECT_DOUBLE_EQ(position_error({1.25, -7}, {1.25, -7}), 0.0);
}

TEST(PositionError, MetricAxioms) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Position a{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    const Position b{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    const Position c{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    EXPECT_EQ(position_error(a, b), position_error(b, a));
    EXPECT_GE(position_error(a, b), 0.0);
    EXPECT_LE(position_error(a, c), position_error(a, b) + position_error(b, c) + 1e-12);
  }
}

TEST(Units, MetersAndCentimeters) {
  EXPECT_DOUBLE_EQ(meters_to_cm(3.7), 370.0);
  EXPECT_DOUBLE_EQ(cm_to_meters(250.0), 2.5);
}

TEST(Measurements, SentinelMasksAnchor) {
  const std::vector<double> raw{-60.0, kOutOfRangeRssi, -71.5};
  const auto m = MeasurementSet::from_raw(raw);
  ASSERT_EQ(m.rssi.size(), 3u);
  EXPECT_FALSE(m.rssi[1].has_value());
  EXPECT_EQ(m.in_range_count(), 2u);
}

// --- RNG ---------------------------------------------------------------------

TEST(Rng, SeedsAndSubstreamsAreReproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(42, 3), d(42, 3), e(42, 4);
  EXPECT_EQ(c.next(), d.next());
  EXPECT_NE(Rng(42, 3).next(), e.next());
}

TEST(Rng, SplitMixReferenceValue) {
  // reference value of SplitMix64 from state 0
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, NormalMoments) {
  Rng rng(5);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, BelowIsInRangeAndShuffleIsPermutation) {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  shuffle(v.begin(), v.end(), rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(Parallel, SameResultAnyThreadCount) {
  auto run = [](unsigned threads) {
    std::vector<double> out(97);
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = Rng(3, i).uniform(); });
    return out;
  };
  EXPECT_EQ(run(1), run(4));
  EXPECT_EQ(run(1), run(200));
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorKind::Config, "boom");
               }),
               Error);
}

// --- radio -------------------------------------------------------------------

TEST(Radio, RssiFromDistanceExamples) {
  const PathLossParams p{-40.0, 100.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(rssi_from_distance(meters_to_cm(1), p), -40.0);
  EXPECT_DOUBLE_EQ(rssi_from_distance(meters_to_cm(10), p), -60.0);
  EXPECT_DOUBLE_EQ(rssi_from_distance(meters_to_cm(100), p), -80.0);
  try {
    rssi_from_distance(0.0, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveDistance);
  }
}

TEST(Radio, DistanceFromRssiExamples) {
  const PathLossParams p{-40.0, 100.0, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(distance_from_rssi(-40.0, p), meters_to_cm(1));
  EXPECT_NEAR(distance_from_rssi(-60.0, p), meters_to_cm(10), 1e-9);
  const PathLossParams q{-40.0, 100.0, 2.2, 2.0};
  EXPECT_NEAR(distance_from_rssi(rssi_from_distance(meters_to_cm(3.7), q), q), meters_to_cm(3.7), 1e-9);
}

TEST(Radio, OffsetFormAdapter) {
  // RSSI = -(10 n log10(d_m) + A)
  const auto p = PathLossParams::from_offset_form(45.0, 2.5);
  for (double dm : {0.5, 1.0, 3.0, 12.0}) {
    EXPECT_NEAR(rssi_from_distance(meters_to_cm(dm), p), -(10.0 * 2.5 * std::log10(dm) + 45.0), 1e-12);
  }
}

TEST(Radio, InverseAndMonotoneProperty) {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const PathLossParams p{rng.uniform(-70, -20), rng.uniform(10, 200), rng.uniform(1.5, 4.5), 0.0};
    const double d1 = rng.uniform(1, 5000), d2 = d1 * rng.uniform(1.001, 3.0);
    EXPECT_GT(rssi_from_distance(d1, p), rssi_from_distance(d2, p));
    EXPECT_NEAR(distance_from_rssi(rssi_from_distance(d1, p), p), d1, 1e-9 * d1);
    const double r = rng.uniform(-100, -20);
    EXPECT_GT(distance_from_rssi(r, p), distance_from_rssi(r + 1.0, p));
  }
}

TEST(Radio, NoiselessSynthesisMatchesModel) {
  const Scene s = scene_of({{0, 0}, {400, 0}, {0, 400}});
  const PathLossParams p{};
  const Position target{120, 80};
  const auto trials = synthesize_measurements(s, target, p, NoiseSpec{0.0, 0.0, 1}, 5);
  for (const auto& t : trials) {
    for (std::size_t a = 0; a < 3; ++a) {
      EXPECT_EQ(*t.measurements.rssi[a], rssi_from_distance(distance(s.anchors[a].position, target), p));
      EXPECT_EQ(t.anchors[a].x, s.anchors[a].position.x);
    }
  }
}

TEST(Radio, ShadowingMeanWithinCltBound) {
  const Scene s = scene_of({{0, 0}, {400, 0}, {0, 400}});
  const PathLossParams p{};
  const Position target{150, 150};
  const std::size_t n = 100000;
  const auto trials = synthesize_measurements(s, target, p, NoiseSpec{0.0, 2.0, 3}, n, 4);
  double sum = 0.0;
  for (const auto& t : trials) sum += *t.measurements.rssi[0];
  const double model = rssi_from_distance(distance(s.anchors[0].position, target), p);
  EXPECT_NEAR(sum / static_cast<double>(n), model, 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Radio, SynthesisDeterministicAcrossThreads) {
  const Scene s = scene_of({{0, 0}, {400, 0}, {0, 400}, {400, 400}});
  const NoiseSpec noise{1.5, 2.0, 99};
  const auto a = synthesize_measurements(s, {100, 300}, PathLossParams{}, noise, 300, 1);
  const auto b = synthesize_measurements(s, {100, 300}, PathLossParams{}, noise, 300, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].measurements.rssi, b[i].measurements.rssi);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(a[i].anchors[k].x, b[i].anchors[k].x);
  }
}

TEST(Radio, SquaredDistanceInflation) {
  // E[d_hat^2] = d^2 exp(u^2 sigma^2) for d_hat = d 10^(n/(10 eta)), n ~ N(0, sigma^2)
  const Scene s = scene_of({{0, 0}, {400, 0}, {0, 400}});
  const PathLossParams p{-40.0, 100.0, 2.0, 3.0};
  const Position target{300, 200};
  const std::size_t n = 200000;
  const auto trials = synthesize_measurements(s, target, p, NoiseSpec{0.0, 3.0, 17}, n);
  const double d = distance(s.anchors[0].position, target);
  std::vector<double> sq;
  sq.reserve(n);
  for (const auto& t : trials) sq.push_back(std::pow(distance_from_rssi(*t.measurements.rssi[0], p), 2));
  const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(n);
  const double se = std::sqrt(sample_variance(sq) / static_cast<double>(n));
  // independent closed form of the lognormal mean: s = ln10 sigma / (10 eta), E = d^2 exp(2 s^2)
  const double sl = std::log(10.0) * 3.0 / 20.0;
  const double expected = d * d * std::exp(2.0 * sl * sl);
  EXPECT_NEAR(squared_distance_inflation(3.0, 2.0), std::exp(2.0 * sl * sl), 1e-12);
  EXPECT_NEAR(mean, expected, 4.0 * se);
}

// --- filters -----------------------------------------------------------------

TEST(MovingAverage, Examples) {
  EXPECT_DOUBLE_EQ(moving_average(std::vector<double>{-60, -62, -64}, 3)[2], -62.0);
  EXPECT_EQ(moving_average(std::vector<double>(5, -50.0), 4), std::vector<double>(5, -50.0));
  EXPECT_EQ(moving_average(std::vector<double>{-60, -70}, 3), (std::vector<double>{-60, -65}));
}

TEST(MovingAverage, Errors) {
  try {
    moving_average(std::vector<double>{}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySignal);
  }
  try {
    moving_average(std::vector<double>{1.0}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroWindow);
  }
}

TEST(Median, Examples) {
  EXPECT_DOUBLE_EQ(median_filter(std::vector<double>{-60, -90, -62}, 1)[1], -62.0);
  EXPECT_EQ(median_filter(std::vector<double>(6, -48.0), 2), std::vector<double>(6, -48.0));
  EXPECT_EQ(median_filter(std::vector<double>{-50, -50, -200, -50, -50}, 1), std::vector<double>(5, -50.0));
  // even-count edge window averages the two central values
  EXPECT_DOUBLE_EQ(median_filter(std::vector<double>{-60, -70, -65}, 1)[0], -65.0);
}

TEST(Median, OddWindowsReturnMembers) {
  Rng rng(4);
  std::vector<double> sig(200);
  for (auto& v : sig) v = std::round(rng.uniform(-90, -40));
  const auto out = median_filter(sig, 3);
  for (std::size_t i = 3; i + 3 < sig.size(); ++i) {
    EXPECT_NE(std::find(sig.begin() + static_cast<long>(i) - 3, sig.begin() + static_cast<long>(i) + 4, out[i]),
              sig.begin() + static_cast<long>(i) + 4);
  }
}

TEST(Gaussian, KernelAndIdentities) {
  const auto k = gaussian_kernel(1.0, 1);
  const double e = std::exp(-0.5);
  EXPECT_NEAR(k[0], e / (1 + 2 * e), 1e-15);
  EXPECT_NEAR(k[0], 0.27406, 1e-4);
  EXPECT_NEAR(k[1], 0.45186, 1e-4);
  EXPECT_DOUBLE_EQ(k[0], k[2]);

  const std::vector<double> flat(20, -55.0);
  const auto out = gaussian_filter(flat, 1.3);
  for (double v : out) EXPECT_NEAR(v, -55.0, 1e-12);

  std::vector<double> impulse(21, 0.0);
  impulse[10] = 1.0;
  const auto resp = gaussian_filter(impulse, 1.0);
  const auto full = gaussian_kernel(1.0, gaussian_radius(1.0));
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(resp[7 + i], full[i], 1e-15);

  try {
    gaussian_filter(flat, 0.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::NonPositiveSigma);
  }
}

TEST(Filters, LengthPreservingAndIdempotentOnConstants) {
  const std::vector<double> c(33, -61.5);
  EXPECT_EQ(moving_average(c, 5), c);
  EXPECT_EQ(median_filter(c, 2), c);
  EXPECT_EQ(kalman_filter(c).size(), c.size());
  for (double v : kalman_filter(c)) EXPECT_DOUBLE_EQ(v, -61.5);
  EXPECT_EQ(gaussian_filter(c, 2.0).size(), c.size());
}

TEST(Kalman, GainSequenceHarmonic) {
  KalmanState s{0.0, 1.0, 0.0, 1.0};
  for (int t = 1; t <= 50; ++t) {
    s = kalman_step(s, 3.0);
    EXPECT_NEAR(s.gain, 1.0 / (t + 1), 1e-12);
  }
}

TEST(Kalman, Examples) {
  KalmanState s{-50.0, 1.0, 0.0, 1.0};
  for (int i = 0; i < 20; ++i) s = kalman_step(s, -50.0);
  EXPECT_DOUBLE_EQ(s.x_hat, -50.0);

  KalmanState exact{0.0, 1.0, 1e-4, 0.0};
  exact = kalman_step(exact, -63.0);
  EXPECT_DOUBLE_EQ(exact.gain, 1.0);
  EXPECT_DOUBLE_EQ(exact.x_hat, -63.0);
}

TEST(Kalman, InvariantsAndRunningMean) {
  Rng rng(8);
  KalmanState s{0.0, 1e8, 0.0, 2.0};
  double sum = 0.0;
  double prev_p = s.p;
  for (int t = 1; t <= 200; ++t) {
    const double z = rng.normal(-60.0, 2.0);
    sum += z;
    s = kalman_step(s, z);
    EXPECT_GE(s.gain, 0.0);
    EXPECT_LE(s.gain, 1.0);
    EXPECT_LE(s.p, prev_p);
    prev_p = s.p;
    EXPECT_NEAR(s.gain, 1.0 / t, 1e-6);
    EXPECT_NEAR(s.x_hat, sum / t, 1e-5);
  }
}

TEST(Kalman, MeasurementVarianceDefault) {
  const std::vector<double> sig{-60, -62, -61, -59, -60, -58, -63, -60, -61, -62, -100};
  const std::vector<double> first(sig.begin(), sig.begin() + 10);
  EXPECT_DOUBLE_EQ(estimate_measurement_variance(sig), sample_variance(first));
  EXPECT_DOUBLE_EQ(estimate_measurement_variance(std::vector<double>{-60}), 4.0);
  EXPECT_DOUBLE_EQ(estimate_measurement_variance(std::vector<double>(5, -60.0)), 4.0);
}

TEST(Filters, ReduceVarianceOfNoisyConstant) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::vector<double> sig(10000);
    for (auto& v : sig) v = rng.normal(-60.0, 3.0);
    const double in = sample_variance(sig);
    EXPECT_LT(sample_variance(moving_average(sig, 5)), in);
    EXPECT_LT(sample_variance(median_filter(sig, 2)), in);
    EXPECT_LT(sample_variance(gaussian_filter(sig, 1.0)), in);
    EXPECT_LT(sample_variance(kalman_filter(sig)), in);
  }
}
