#pragma once

// Proximal operators: elementwise soft-thresholding, matrix SVT, and the two
// frequency-weighted tensor shrinkages used by the Z-subproblems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/parallel.hpp"
#include "mfwtnn/tensor3.hpp"

namespace mfwtnn {

/// Full (thin) SVD of one frequency slice: m = u * diag(s) * v^H with
/// s nonincreasing and r = min(rows, cols) columns in u and v.
struct SliceSvd {
  Eigen::MatrixXcd u;
  Eigen::VectorXd s;
  Eigen::MatrixXcd v;
};

inline SliceSvd slice_svd(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

inline Eigen::MatrixXcd reconstruct(const SliceSvd& f, const Eigen::VectorXd& s) {
  return f.u * s.cast<Complex>().asDiagonal() * f.v.adjoint();
}

inline double soft_threshold(double v, double t) {
  const double mag = std::abs(v) - t;
  if (mag <= 0.0) return 0.0;
  return v > 0.0 ? mag : -mag;
}

/// Elementwise sign(x) * max(|x| - t, 0).
inline Cube soft_threshold(const Cube& x, double t) {
  if (!(t >= 0.0)) throw ArgumentError("soft_threshold: threshold must be nonnegative");
  Cube out = x;
  for (auto& v : out.data()) v = soft_threshold(v, t);
  return out;
}

/// Singular value thresholding: u * diag(max(s - t, 0)) * v^H.
inline Eigen::MatrixXcd svt_slice(const Eigen::MatrixXcd& m, double t) {
  if (!(t >= 0.0)) throw ArgumentError("svt_slice: threshold must be nonnegative");
  const SliceSvd f = slice_svd(m);
  const Eigen::VectorXd s = (f.s.array() - t).max(0.0).matrix();
  return reconstruct(f, s);
}

/// Local minimizer of tau * log(|x| + eps) + (x - y)^2 / 2, valid when
/// 0 < eps < min(sqrt(tau), tau / |y|).
inline double log_shrink_scalar(double y, double tau, double eps) {
  if (!(tau > 0.0)) throw ArgumentError("log_shrink_scalar: tau must be positive");
  const double a = std::abs(y);
  const double c1 = a - eps;
  const double c2 = c1 * c1 - 4.0 * (tau - eps * a);
  if (c2 <= 0.0) return 0.0;
  const double mag = (c1 + std::sqrt(c2)) / 2.0;
  return y < 0.0 ? -mag : mag;
}

/// eps if it satisfies the local-minimizer bound for (tau, sigma), else
/// 0.9 * min(sqrt(tau), tau / sigma).
inline double clipped_log_eps(double tau, double sigma, double eps) {
  const double bound = sigma > 0.0 ? std::min(std::sqrt(tau), tau / sigma) : std::sqrt(tau);
  return (eps > 0.0 && eps < bound) ? eps : 0.9 * bound;
}

/// Output of a tensor prox together with diagnostics.
struct ProxResult {
  Cube value;
  /// Largest imaginary magnitude dropped by the inverse FFT.
  double imag_residual = 0.0;
  /// sum_k w_k * sum_i g(sigma_i) over all n3 output slices, with g(s) = s
  /// for FW and g(s) = log(s + eps) for DW.
  double weighted_norm = 0.0;
};

namespace detail {

inline void check_weights(std::span<const double> w, std::size_t n3) {
  if (w.size() != n3) {
    throw ArgumentError("weight vector length " + std::to_string(w.size()) + " != n3 = " +
                        std::to_string(n3));
  }
  for (std::size_t k = 0; k < n3; ++k) {
    if (!(w[k] > 0.0) || !std::isfinite(w[k])) {
      throw ArgumentError("weight " + std::to_string(k) + " must be positive and finite");
    }
    const double pair = w[conjugate_slice(k, n3)];
    if (std::abs(w[k] - pair) > 1e-9 * std::max(w[k], pair)) {
      throw ArgumentError("weights violate conjugate pairing at slice " + std::to_string(k));
    }
  }
}

/// Shared driver: FFT, per-slice SVD of the independent half, singular value
/// map shrink(sigma, tau_k) with tau_k = tau * w_k * n3, conjugate fill, IFFT.
template <typename Shrink, typename Penalty>
ProxResult weighted_slice_prox(const Cube& y, std::span<const double> w, double tau,
                               Shrink&& shrink, Penalty&& penalty) {
  const std::size_t n3 = y.dims().n3;
  check_weights(w, n3);
  FreqCube yf = fft_mode3(y);
  const std::size_t half = independent_slices(n3);
  std::vector<double> slice_penalty(half, 0.0);
  parallel_for(half, [&](std::size_t k) {
    const double tau_k = tau * w[k] * static_cast<double>(n3);
    SliceSvd f;
    try {
      f = slice_svd(frontal_slice(yf, k));
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at frequency slice " + std::to_string(k));
    }
    Eigen::VectorXd s = f.s;
    double pen = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s(i) = shrink(f.s(i), tau_k);
      pen += penalty(s(i));
    }
    slice_penalty[k] = w[k] * pen;
    const Eigen::MatrixXcd m = reconstruct(f, s);
    set_frontal_slice(yf, k, m);
    const std::size_t c = conjugate_slice(k, n3);
    if (c != k) set_frontal_slice(yf, c, m.conjugate());
  });
  ProxResult out;
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t c = conjugate_slice(k, n3);
    out.weighted_norm += (c != k ? 2.0 : 1.0) * slice_penalty[k];
  }
  InverseFft inv = ifft_mode3_detailed(yf);
  if (inv.max_imag > kImagTolerance * std::max(inv.norm, 1e-300)) {
    throw SymmetryError("prox output has non-negligible imaginary residual");
  }
  out.value = std::move(inv.real);
  out.imag_residual = inv.max_imag;
  return out;
}

}  // namespace detail

/// Minimizer of tau * sum_k w_k ||fft slice k||_* + ||X - Y||_F^2 / 2:
/// singular value thresholding of slice k at tau * w_k * n3.
inline ProxResult fw_prox_detailed(const Cube& y, std::span<const double> w, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("fw_prox: tau must be nonnegative");
  return detail::weighted_slice_prox(
      y, w, tau, [](double s, double t) { return std::max(s - t, 0.0); },
      [](double s) { return s; });
}

inline Cube fw_prox(const Cube& y, std::span<const double> w, double tau) {
  return fw_prox_detailed(y, w, tau).value;
}

/// Double-weighted log shrinkage: each singular value sigma of slice k maps
/// to log_shrink_scalar(sigma, tau * w_k * n3, eps'), where eps' is eps
/// clipped into the local-minimizer bound for that (tau_k, sigma).
inline ProxResult dw_prox_detailed(const Cube& y, std::span<const double> w, double tau, double eps) {
  if (!(tau >= 0.0)) throw ArgumentError("dw_prox: tau must be nonnegative");
  if (!(eps > 0.0)) throw ArgumentError("dw_prox: eps must be positive");
  return detail::weighted_slice_prox(
      y, w, tau,
      [eps](double s, double t) {
        if (t <= 0.0) return s;
        if (s <= 0.0) return 0.0;
        return log_shrink_scalar(s, t, clipped_log_eps(t, s, eps));
      },
      [eps](double s) { return std::log(s + eps); });
}

inline Cube dw_prox(const Cube& y, std::span<const double> w, double tau, double eps) {
  return dw_prox_detailed(y, w, tau, eps).value;
}

}  // namespace mfwtnn
