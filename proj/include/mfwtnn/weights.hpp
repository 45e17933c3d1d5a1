#pragma once

// Adaptive frequency weights and the default regularization parameters.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/tensor3.hpp"

namespace mfwtnn {

inline constexpr double kDefaultDelta = 1e-6;
/// Lower bound on log(||slice||_F^2) so raw weights stay positive and bounded.
inline constexpr double kLogEnergyFloor = 1e-2;
inline constexpr double kDefaultC1 = 0.6;
inline constexpr double kDefaultC2 = 0.6;
inline constexpr double kDefaultLambdaS = 0.011;
inline constexpr double kDefaultTauN = 1e-4;
inline constexpr double kDefaultAlpha3 = 0.2;

/// Mode weights alpha_p, nonnegative and summing to one.
struct ModalWeights {
  std::array<double, 3> alpha{1.0 / 2.2, 1.0 / 2.2, 0.2 / 2.2};

  /// (a1, a2, a3) scaled to sum to one.
  static ModalWeights normalized(double a1, double a2, double a3) {
    if (a1 < 0.0 || a2 < 0.0 || a3 < 0.0 || !(a1 + a2 + a3 > 0.0)) {
      throw ArgumentError("modal weights must be nonnegative with a positive sum");
    }
    const double s = a1 + a2 + a3;
    return ModalWeights{{a1 / s, a2 / s, a3 / s}};
  }

  /// The two spatial modes share weight 1: alpha = (1, 1, alpha3) / (2 + alpha3).
  static ModalWeights spatial_equal(double alpha3) { return normalized(1.0, 1.0, alpha3); }

  double operator[](int p) const { return alpha[static_cast<std::size_t>(p - 1)]; }

  void validate() const {
    double s = 0.0;
    for (double a : alpha) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw ArgumentError("modal weights must be nonnegative");
      s += a;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ArgumentError("modal weights must sum to 1");
  }
};

/// h_k = 1 / (max(log ||slice k||_F^2, floor) + delta).
inline std::vector<double> raw_weights(const FreqCube& xf, double delta = kDefaultDelta) {
  if (!(delta > 0.0)) throw ArgumentError("raw_weights: delta must be positive");
  std::vector<double> h = slice_energies(xf);
  for (double& v : h) {
    const double lg = v > 0.0 ? std::log(v) : -HUGE_VAL;
    v = 1.0 / (std::max(lg, kLogEnergyFloor) + delta);
  }
  return h;
}

/// w_k = c1 * h_k / max_j h_j + c2.
inline std::vector<double> schedule_weights(std::span<const double> h, double c1, double c2) {
  if (h.empty()) throw ArgumentError("schedule_weights: empty h");
  if (c1 < 0.0 || c2 < 0.0) throw ArgumentError("schedule_weights: c1, c2 must be nonnegative");
  const double top = *std::max_element(h.begin(), h.end());
  if (!(top > 0.0)) throw ArgumentError("schedule_weights: h must have a positive entry");
  std::vector<double> w(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0)) throw ArgumentError("schedule_weights: h must be positive");
    w[k] = c1 * (h[k] / top) + c2;
  }
  return w;
}

/// Per-mode raw and active frequency weights owned by the solver.
struct WeightState {
  std::array<std::vector<double>, 3> h;
  std::array<std::vector<double>, 3> w;
  double c1 = kDefaultC1;
  double c2 = kDefaultC2;
  double delta = kDefaultDelta;

  /// Recomputes mode p's weights from the spectrum of X_p.
  void update(int p, const FreqCube& xpf) {
    check_mode(p);
    const auto idx = static_cast<std::size_t>(p - 1);
    h[idx] = raw_weights(xpf, delta);
    w[idx] = schedule_weights(h[idx], c1, c2);
  }

  std::span<const double> weights(int p) const { return w[static_cast<std::size_t>(p - 1)]; }
};

/// lambda = lambda_s * (a1 / sqrt(max(n2,n3) n1) + a2 / sqrt(max(n3,n1) n2)
///                      + a3 / sqrt(max(n1,n2) n3)).
inline double default_lambda(const Dims& d, double lambda_s = kDefaultLambdaS,
                             const ModalWeights& alpha = {}) {
  if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0) throw ArgumentError("default_lambda: dims must be positive");
  const auto n1 = static_cast<double>(d.n1);
  const auto n2 = static_cast<double>(d.n2);
  const auto n3 = static_cast<double>(d.n3);
  return lambda_s * (alpha[1] / std::sqrt(std::max(n2, n3) * n1) +
                     alpha[2] / std::sqrt(std::max(n3, n1) * n2) +
                     alpha[3] / std::sqrt(std::max(n1, n2) * n3));
}

/// tau = tau_n / sigma for Gaussian noise level sigma.
inline double default_tau(double sigma, double tau_n = kDefaultTauN) {
  if (!(sigma > 0.0)) throw ArgumentError("default_tau: sigma must be positive");
  return tau_n / sigma;
}

}  // namespace mfwtnn
