#pragma once

// 1-D RSSI conditioning. Every filter returns a sequence of the same length
// as its input.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rssiloc/error.hpp"

namespace rssiloc {

namespace detail {
inline void require_signal(std::span<const double> signal) {
  if (signal.empty()) throw Error(ErrorKind::EmptySignal, "signal is empty");
}
}  // namespace detail

/// Causal moving average. The first N-1 outputs average the samples seen so far.
inline std::vector<double> moving_average(std::span<const double> signal, std::size_t window) {
  detail::require_signal(signal);
  if (window == 0) throw Error(ErrorKind::ZeroWindow, "moving-average window must be >= 1");
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t k = first; k <= i; ++k) sum += signal[k];
    out[i] = sum / static_cast<double>(i + 1 - first);
  }
  return out;
}

/// Median over signal[n-T .. n+T], window clamped at the boundaries. Even
/// sized (clamped) windows return the mean of the two middle values.
inline std::vector<double> median_filter(std::span<const double> signal, std::size_t half_width) {
  detail::require_signal(signal);
  const std::size_t n = signal.size();
  std::vector<double> out(n);
  std::vector<double> window;
  window.reserve(2 * half_width + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n - 1, i + half_width);
    window.assign(signal.begin() + static_cast<std::ptrdiff_t>(lo), signal.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const std::size_t mid = window.size() / 2;
    std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid), window.end());
    double median = window[mid];
    if (window.size() % 2 == 0) {
      const double lower = *std::max_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(mid));
      median = 0.5 * (lower + median);
    }
    out[i] = median;
  }
  return out;
}

/// Normalized discrete Gaussian taps G(k) for k in [-r, r], r = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma, std::size_t radius) {
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (std::size_t j = 0; j < taps.size(); ++j) {
    const double k = static_cast<double>(j) - static_cast<double>(radius);
    taps[j] = std::exp(-k * k / (2.0 * sigma * sigma));
    total += taps[j];
  }
  for (auto& w : taps) w /= total;
  return taps;
}

inline std::size_t gaussian_radius(double sigma) { return static_cast<std::size_t>(std::ceil(3.0 * sigma)); }

/// Gaussian smoothing. Taps that fall outside the signal are dropped and the
/// remaining weights renormalized.
inline std::vector<double> gaussian_filter(std::span<const double> signal, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::NonPositiveSigma, "gaussian sigma must be > 0");
  detail::require_signal(signal);
  const std::size_t radius = gaussian_radius(sigma);
  const auto taps = gaussian_kernel(sigma, radius);
  const auto n = static_cast<std::ptrdiff_t>(signal.size());
  const auto r = static_cast<std::ptrdiff_t>(radius);
  std::vector<double> out(signal.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0, weight = 0.0;
    for (std::ptrdiff_t k = -r; k <= r; ++k) {
      const std::ptrdiff_t idx = i + k;
      if (idx < 0 || idx >= n) continue;
      const double w = taps[static_cast<std::size_t>(k + r)];
      acc += w * signal[static_cast<std::size_t>(idx)];
      weight += w;
    }
    out[static_cast<std::size_t>(i)] = acc / weight;
  }
  return out;
}

/// Scalar Kalman filter state with A = H = 1.
struct KalmanState {
  double x_hat = 0.0;  // dBm
  double p = 1.0;      // error variance
  double q = 1e-4;     // process noise variance
  double r = 4.0;      // measurement noise variance
  double gain = 0.0;   // gain used by the most recent step

  void validate() const {
    if (!(p >= 0.0) || !(q >= 0.0) || !(r >= 0.0) || (q == 0.0 && r == 0.0)) {
      throw Error(ErrorKind::Config, "Kalman state requires p, q, r >= 0 and not q = r = 0");
    }
  }
};

inline KalmanState kalman_step(KalmanState state, double z) {
  const double p_prior = state.p + state.q;
  const double denom = p_prior + state.r;
  const double k = denom > 0.0 ? p_prior / denom : 1.0;
  state.x_hat += k * (z - state.x_hat);
  state.p = (1.0 - k) * p_prior;
  state.gain = k;
  return state;
}

struct KalmanOptions {
  double p0 = 1.0;
  double q = 1e-4;
  std::optional<double> r;  // default: sample variance of the first 10 readings
};

inline constexpr double kKalmanFallbackR = 4.0;

/// Measurement noise estimate: unbiased sample variance of the first (up to)
/// 10 readings; 4.0 dB^2 when fewer than two readings or zero spread.
inline double estimate_measurement_variance(std::span<const double> signal) {
  const std::size_t n = std::min<std::size_t>(10, signal.size());
  if (n < 2) return kKalmanFallbackR;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += signal[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (signal[i] - mean) * (signal[i] - mean);
  const double var = ss / static_cast<double>(n - 1);
  return var > 0.0 ? var : kKalmanFallbackR;
}

/// Runs the scalar Kalman filter over a signal, seeded with x0 = signal[0].
inline std::vector<double> kalman_filter(std::span<const double> signal, const KalmanOptions& options = {}) {
  detail::require_signal(signal);
  KalmanState state{signal[0], options.p0, options.q, options.r.value_or(estimate_measurement_variance(signal))};
  state.validate();
  std::vector<double> out;
  out.reserve(signal.size());
  for (double z : signal) {
    state = kalman_step(state, z);
    out.push_back(state.x_hat);
  }
  return out;
}

}  // namespace rssiloc
