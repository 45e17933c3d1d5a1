#pragma once

// Dense third-order tensors.
//
// Layout: entry (i, j, k) of an n1 x n2 x n3 tensor lives at
// data[(i * n2 + j) * n3 + k], so every mode-3 tube x(i, j, :) is contiguous.
// Indices are zero-based in code; mode indices p are 1, 2, 3.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/parallel.hpp"

namespace mfwtnn {

using Complex = std::complex<double>;

struct Dims {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;

  std::size_t size() const { return n1 * n2 * n3; }
  bool operator==(const Dims&) const = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.n1) + "x" + std::to_string(d.n2) + "x" + std::to_string(d.n3);
}

template <typename T>
class Tensor3 {
 public:
  using value_type = T;

  Tensor3() = default;

  explicit Tensor3(Dims dims, T fill = T{}) : dims_(check(dims)), data_(dims.size(), fill) {}

  Tensor3(Dims dims, std::vector<T> data) : dims_(check(dims)), data_(std::move(data)) {
    if (data_.size() != dims_.size()) {
      throw ArgumentError("tensor data length " + std::to_string(data_.size()) +
                          " does not match dims " + to_string(dims_));
    }
  }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * dims_.n2 + j) * dims_.n3 + k;
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[index(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[index(i, j, k)];
  }

  T& operator[](std::size_t n) { return data_[n]; }
  const T& operator[](std::size_t n) const { return data_[n]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  std::span<T> tube(std::size_t i, std::size_t j) {
    return std::span<T>(data_).subspan(index(i, j, 0), dims_.n3);
  }
  std::span<const T> tube(std::size_t i, std::size_t j) const {
    return std::span<const T>(data_).subspan(index(i, j, 0), dims_.n3);
  }

  Tensor3& operator+=(const Tensor3& o) {
    require_same(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  Tensor3& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, T s) { return a *= s; }
  friend Tensor3 operator*(T s, Tensor3 a) { return a *= s; }

  bool operator==(const Tensor3&) const = default;

  void require_same(const Tensor3& o) const {
    if (o.dims_ != dims_) {
      throw ArgumentError("dimension mismatch: " + to_string(dims_) + " vs " + to_string(o.dims_));
    }
  }

 private:
  static Dims check(Dims d) {
    if (d.n1 == 0 || d.n2 == 0 || d.n3 == 0) {
      throw ArgumentError("tensor dims must be positive, got " + to_string(d));
    }
    return d;
  }

  Dims dims_;
  std::vector<T> data_;
};

/// Real data cube (spatial x spatial x spectral).
using Cube = Tensor3<double>;

/// Mode-3 spectrum of a cube. `origin` records the mode permutation the
/// source cube came from (3 = unpermuted).
class FreqCube : public Tensor3<Complex> {
 public:
  FreqCube() = default;
  explicit FreqCube(Dims dims, int origin = 3) : Tensor3<Complex>(dims), origin_(origin) {}
  FreqCube(Dims dims, std::vector<Complex> data, int origin = 3)
      : Tensor3<Complex>(dims, std::move(data)), origin_(origin) {}

  int origin() const { return origin_; }

 private:
  int origin_ = 3;
};

inline void check_mode(int p) {
  if (p < 1 || p > 3) throw ArgumentError("mode index must be 1, 2 or 3, got " + std::to_string(p));
}

/// Dims of permute(x, p).
inline Dims permuted_dims(const Dims& d, int p) {
  check_mode(p);
  switch (p) {
    case 1: return {d.n2, d.n3, d.n1};
    case 2: return {d.n3, d.n1, d.n2};
    default: return d;
  }
}

/// Mode-p permutation: X(i,j,k) = X1(j,k,i) = X2(k,i,j) = X3(i,j,k).
inline Cube permute(const Cube& x, int p) {
  check_mode(p);
  if (p == 3) return x;
  const Dims d = x.dims();
  Cube out(permuted_dims(d, p));
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      for (std::size_t k = 0; k < d.n3; ++k) {
        if (p == 1) {
          out(j, k, i) = x(i, j, k);
        } else {
          out(k, i, j) = x(i, j, k);
        }
      }
    }
  }
  return out;
}

inline Cube ipermute(const Cube& xp, int p) {
  check_mode(p);
  if (p == 3) return xp;
  const Dims dp = xp.dims();
  // p = 1: xp is (n2, n3, n1); p = 2: xp is (n3, n1, n2).
  const Dims d = p == 1 ? Dims{dp.n3, dp.n1, dp.n2} : Dims{dp.n2, dp.n3, dp.n1};
  Cube out(d);
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      for (std::size_t k = 0; k < d.n3; ++k) {
        out(i, j, k) = p == 1 ? xp(j, k, i) : xp(k, i, j);
      }
    }
  }
  return out;
}

/// Unnormalized forward DFT along every mode-3 tube.
inline FreqCube fft_mode3(const Cube& x, int origin = 3) {
  check_mode(origin);
  const Dims d = x.dims();
  FreqCube out(d, origin);
  const std::size_t tubes = d.n1 * d.n2;
  parallel_for_range(tubes, [&](std::size_t begin, std::size_t end) {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(d.n3);
    std::vector<Complex> spec(d.n3);
    for (std::size_t t = begin; t < end; ++t) {
      const double* src = x.data().data() + t * d.n3;
      for (std::size_t k = 0; k < d.n3; ++k) in[k] = Complex(src[k], 0.0);
      // kissfft cannot plan length 1; that transform is the identity.
      if (d.n3 == 1) spec = in;
      else fft.fwd(spec, in);
      std::copy(spec.begin(), spec.end(), out.data().begin() + static_cast<std::ptrdiff_t>(t * d.n3));
    }
  });
  return out;
}

/// Inverse mode-3 DFT (scaled by 1/n3) that also reports the largest
/// imaginary magnitude it discarded.
struct InverseFft {
  Cube real;
  double max_imag = 0.0;
  double norm = 0.0;  ///< Frobenius norm of the complex inverse
};

inline InverseFft ifft_mode3_detailed(const FreqCube& xf) {
  const Dims d = xf.dims();
  InverseFft result{Cube(d), 0.0, 0.0};
  const std::size_t tubes = d.n1 * d.n2;
  std::vector<double> tube_imag(tubes, 0.0);
  std::vector<double> tube_sq(tubes, 0.0);
  parallel_for_range(tubes, [&](std::size_t begin, std::size_t end) {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(d.n3);
    std::vector<Complex> time(d.n3);
    for (std::size_t t = begin; t < end; ++t) {
      const Complex* src = xf.data().data() + t * d.n3;
      std::copy(src, src + d.n3, in.begin());
      if (d.n3 == 1) time = in;
      else fft.inv(time, in);
      double* dst = result.real.data().data() + t * d.n3;
      double imag = 0.0;
      double sq = 0.0;
      for (std::size_t k = 0; k < d.n3; ++k) {
        dst[k] = time[k].real();
        imag = std::max(imag, std::abs(time[k].imag()));
        sq += std::norm(time[k]);
      }
      tube_imag[t] = imag;
      tube_sq[t] = sq;
    }
  });
  double sq = 0.0;
  for (std::size_t t = 0; t < tubes; ++t) {
    result.max_imag = std::max(result.max_imag, tube_imag[t]);
    sq += tube_sq[t];
  }
  result.norm = std::sqrt(sq);
  return result;
}

/// Relative imaginary residual above which ifft_mode3 rejects its input.
inline constexpr double kImagTolerance = 1e-8;

/// Inverse of fft_mode3. Throws SymmetryError when the discarded imaginary
/// part exceeds 1e-8 times the Frobenius norm of the result.
inline Cube ifft_mode3(const FreqCube& xf) {
  InverseFft inv = ifft_mode3_detailed(xf);
  if (inv.max_imag > kImagTolerance * inv.norm) {
    throw SymmetryError("inverse FFT has imaginary residual " + std::to_string(inv.max_imag) +
                        " (norm " + std::to_string(inv.norm) + "); spectrum is not conjugate-symmetric");
  }
  return std::move(inv.real);
}

/// Index (zero-based) of the slice conjugate to slice k: (n3 - k) mod n3.
inline std::size_t conjugate_slice(std::size_t k, std::size_t n3) { return k == 0 ? 0 : n3 - k; }

/// Number of slices that determine a real cube's spectrum: ceil((n3 + 1) / 2).
inline std::size_t independent_slices(std::size_t n3) { return n3 / 2 + 1; }

/// Slice 0 is real and slice k is the conjugate of slice n3 - k, within tol
/// relative to the Frobenius norm of xf.
inline bool is_conjugate_symmetric(const FreqCube& xf, double tol = 1e-12) {
  const Dims d = xf.dims();
  double sq = 0.0;
  for (const auto& v : xf.data()) sq += std::norm(v);
  const double bound = tol * std::max(std::sqrt(sq), 1.0);
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      if (std::abs(xf(i, j, 0).imag()) > bound) return false;
      for (std::size_t k = 1; k < d.n3; ++k) {
        if (std::abs(std::conj(xf(i, j, k)) - xf(i, j, conjugate_slice(k, d.n3))) > bound) return false;
      }
    }
  }
  return true;
}

template <typename T>
double frobenius_norm(const Tensor3<T>& x) {
  double sq = 0.0;
  for (const auto& v : x.data()) sq += std::norm(v);
  return std::sqrt(sq);
}

inline double l1_norm(const Cube& x) {
  double s = 0.0;
  for (double v : x.data()) s += std::abs(v);
  return s;
}

inline double inner(const Cube& x, const Cube& y) {
  x.require_same(y);
  double s = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) s += x[n] * y[n];
  return s;
}

inline bool all_finite(const Cube& x) {
  return std::all_of(x.data().begin(), x.data().end(), [](double v) { return std::isfinite(v); });
}

/// Frontal slice k as a dense n1 x n2 matrix.
inline Eigen::MatrixXcd frontal_slice(const FreqCube& xf, std::size_t k) {
  const Dims d = xf.dims();
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(d.n1), static_cast<Eigen::Index>(d.n2));
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xf(i, j, k);
    }
  }
  return m;
}

inline void set_frontal_slice(FreqCube& xf, std::size_t k, const Eigen::MatrixXcd& m) {
  const Dims d = xf.dims();
  if (static_cast<std::size_t>(m.rows()) != d.n1 || static_cast<std::size_t>(m.cols()) != d.n2) {
    throw ArgumentError("frontal slice shape mismatch");
  }
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      xf(i, j, k) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
}

/// Squared Frobenius norm of every frontal slice of xf.
inline std::vector<double> slice_energies(const FreqCube& xf) {
  const Dims d = xf.dims();
  std::vector<double> e(d.n3, 0.0);
  for (std::size_t t = 0; t < d.n1 * d.n2; ++t) {
    for (std::size_t k = 0; k < d.n3; ++k) e[k] += std::norm(xf[t * d.n3 + k]);
  }
  return e;
}

}  // namespace mfwtnn
