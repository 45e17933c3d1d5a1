#pragma once

// Full-reference quality indices for [0,1]-scaled cubes: band-mean PSNR and
// SSIM, volumetric ERGAS and mean spectral angle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/format.hpp"
#include "mfwtnn/tensor3.hpp"

namespace mfwtnn {

inline constexpr double kPsnrCap = 100.0;

namespace ssim_params {
inline constexpr std::size_t kWindow = 11;
inline constexpr double kSigma = 1.5;
inline constexpr double kK1 = 0.01;
inline constexpr double kK2 = 0.03;
inline constexpr double kDynamicRange = 1.0;
}  // namespace ssim_params

/// PSNR per band with peak 1, capped at 100 dB.
inline std::vector<double> band_psnr(const Cube& ref, const Cube& est) {
  ref.require_same(est);
  const Dims d = ref.dims();
  std::vector<double> mse(d.n3, 0.0);
  for (std::size_t t = 0; t < d.n1 * d.n2; ++t) {
    for (std::size_t k = 0; k < d.n3; ++k) {
      const double e = ref[t * d.n3 + k] - est[t * d.n3 + k];
      mse[k] += e * e;
    }
  }
  std::vector<double> psnr(d.n3);
  for (std::size_t k = 0; k < d.n3; ++k) {
    const double m = mse[k] / static_cast<double>(d.n1 * d.n2);
    psnr[k] = m > 0.0 ? std::min(kPsnrCap, 10.0 * std::log10(1.0 / m)) : kPsnrCap;
  }
  return psnr;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double mpsnr(const Cube& ref, const Cube& est) { return mean_of(band_psnr(ref, est)); }

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
inline std::vector<double> gaussian_taps(std::size_t size = ssim_params::kWindow,
                                         double sigma = ssim_params::kSigma) {
  std::vector<double> g(size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  double s = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double u = static_cast<double>(i) - c;
    g[i] = std::exp(-u * u / (2.0 * sigma * sigma));
    s += g[i];
  }
  for (double& v : g) v /= s;
  return g;
}

namespace detail {

/// 'valid' separable filtering of an n1 x n2 row-major image.
inline std::vector<double> filter_valid(const std::vector<double>& img, std::size_t n1, std::size_t n2,
                                        const std::vector<double>& g) {
  const std::size_t w = g.size();
  const std::size_t m1 = n1 - w + 1;
  const std::size_t m2 = n2 - w + 1;
  std::vector<double> rows(n1 * m2, 0.0);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < m2; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < w; ++t) s += g[t] * img[i * n2 + j + t];
      rows[i * m2 + j] = s;
    }
  }
  std::vector<double> out(m1 * m2, 0.0);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < m2; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < w; ++t) s += g[t] * rows[(i + t) * m2 + j];
      out[i * m2 + j] = s;
    }
  }
  return out;
}

inline std::vector<double> band_image(const Cube& x, std::size_t k) {
  const Dims d = x.dims();
  std::vector<double> img(d.n1 * d.n2);
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) img[i * d.n2 + j] = x(i, j, k);
  }
  return img;
}

}  // namespace detail

/// Single-scale SSIM of one band: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 1, averaged over valid positions.
inline double ssim_band(const Cube& ref, const Cube& est, std::size_t k) {
  using namespace ssim_params;
  const Dims d = ref.dims();
  const auto g = gaussian_taps();
  const std::vector<double> a = detail::band_image(ref, k);
  const std::vector<double> b = detail::band_image(est, k);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    aa[n] = a[n] * a[n];
    bb[n] = b[n] * b[n];
    ab[n] = a[n] * b[n];
  }
  const auto mu_a = detail::filter_valid(a, d.n1, d.n2, g);
  const auto mu_b = detail::filter_valid(b, d.n1, d.n2, g);
  const auto e_aa = detail::filter_valid(aa, d.n1, d.n2, g);
  const auto e_bb = detail::filter_valid(bb, d.n1, d.n2, g);
  const auto e_ab = detail::filter_valid(ab, d.n1, d.n2, g);
  const double c1 = (kK1 * kDynamicRange) * (kK1 * kDynamicRange);
  const double c2 = (kK2 * kDynamicRange) * (kK2 * kDynamicRange);
  double s = 0.0;
  for (std::size_t n = 0; n < mu_a.size(); ++n) {
    const double va = e_aa[n] - mu_a[n] * mu_a[n];
    const double vb = e_bb[n] - mu_b[n] * mu_b[n];
    const double cov = e_ab[n] - mu_a[n] * mu_b[n];
    s += ((2.0 * mu_a[n] * mu_b[n] + c1) * (2.0 * cov + c2)) /
         ((mu_a[n] * mu_a[n] + mu_b[n] * mu_b[n] + c1) * (va + vb + c2));
  }
  return s / static_cast<double>(mu_a.size());
}

inline std::vector<double> band_ssim(const Cube& ref, const Cube& est) {
  ref.require_same(est);
  const Dims d = ref.dims();
  if (d.n1 < ssim_params::kWindow || d.n2 < ssim_params::kWindow) {
    throw ArgumentError("SSIM needs bands of at least 11x11 pixels, got " + std::to_string(d.n1) + "x" +
                        std::to_string(d.n2));
  }
  std::vector<double> out(d.n3);
  for (std::size_t k = 0; k < d.n3; ++k) out[k] = ssim_band(ref, est, k);
  return out;
}

inline double mssim(const Cube& ref, const Cube& est) { return mean_of(band_ssim(ref, est)); }

/// 100 * sqrt(mean_b RMSE_b^2 / mean_b^2), resolution ratio 1. Bands whose
/// reference mean is zero are skipped and reported through `warnings`.
inline double ergas(const Cube& ref, const Cube& est, std::vector<std::string>* warnings = nullptr) {
  ref.require_same(est);
  const Dims d = ref.dims();
  const auto pixels = static_cast<double>(d.n1 * d.n2);
  std::vector<double> sq(d.n3, 0.0), mean(d.n3, 0.0);
  for (std::size_t t = 0; t < d.n1 * d.n2; ++t) {
    for (std::size_t k = 0; k < d.n3; ++k) {
      const double r = ref[t * d.n3 + k];
      const double e = r - est[t * d.n3 + k];
      sq[k] += e * e;
      mean[k] += r;
    }
  }
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < d.n3; ++k) {
    const double m = mean[k] / pixels;
    if (m == 0.0) {
      if (warnings) warnings->push_back("ERGAS: band " + std::to_string(k + 1) + " has zero mean, skipped");
      continue;
    }
    acc += (sq[k] / pixels) / (m * m);
    ++used;
  }
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * std::sqrt(acc / static_cast<double>(used));
}

/// Mean spectral angle in degrees over pixels; zero-norm spectra skipped.
inline double msam(const Cube& ref, const Cube& est, std::vector<std::string>* warnings = nullptr) {
  ref.require_same(est);
  const Dims d = ref.dims();
  double acc = 0.0;
  std::size_t used = 0, skipped = 0;
  std::vector<double> a(d.n3), b(d.n3);
  for (std::size_t i = 0; i < d.n1; ++i) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      const auto r = ref.tube(i, j);
      const auto e = est.tube(i, j);
      double nr = 0.0, ne = 0.0;
      for (std::size_t k = 0; k < d.n3; ++k) {
        nr += r[k] * r[k];
        ne += e[k] * e[k];
      }
      if (nr == 0.0 || ne == 0.0) {
        ++skipped;
        continue;
      }
      nr = std::sqrt(nr);
      ne = std::sqrt(ne);
      // angle = 2 atan2(|a - b|, |a + b|) for unit a, b; exact zero for equal spectra.
      double diff = 0.0, sum = 0.0;
      for (std::size_t k = 0; k < d.n3; ++k) {
        const double ua = r[k] / nr;
        const double ub = e[k] / ne;
        diff += (ua - ub) * (ua - ub);
        sum += (ua + ub) * (ua + ub);
      }
      acc += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
      ++used;
    }
  }
  if (skipped > 0 && warnings) {
    warnings->push_back("SAM: " + std::to_string(skipped) + " zero-norm spectra skipped");
  }
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return acc / static_cast<double>(used) * 180.0 / std::numbers::pi;
}

struct MetricsReport {
  double mpsnr = 0.0;
  double mssim = 0.0;
  double ergas = 0.0;
  double msam = 0.0;
  std::vector<double> band_psnr;
  std::vector<double> band_ssim;
  std::vector<std::string> warnings;
};

/// All four indices. SSIM is reported as NaN (with a warning) when bands
/// are smaller than the window.
inline MetricsReport evaluate(const Cube& ref, const Cube& est) {
  ref.require_same(est);
  MetricsReport r;
  r.band_psnr = band_psnr(ref, est);
  r.mpsnr = mean_of(r.band_psnr);
  const Dims d = ref.dims();
  if (d.n1 >= ssim_params::kWindow && d.n2 >= ssim_params::kWindow) {
    r.band_ssim = band_ssim(ref, est);
    r.mssim = mean_of(r.band_ssim);
  } else {
    r.mssim = std::numeric_limits<double>::quiet_NaN();
    r.warnings.push_back("SSIM skipped: bands smaller than 11x11");
  }
  r.ergas = ergas(ref, est, &r.warnings);
  r.msam = msam(ref, est, &r.warnings);
  return r;
}

inline void write_metrics_csv(std::ostream& os, const MetricsReport& r) {
  os << "mpsnr,mssim,ergas,msam\n"
     << format_double(r.mpsnr) << ',' << format_double(r.mssim) << ',' << format_double(r.ergas) << ','
     << format_double(r.msam) << '\n';
}

/// band,psnr,ssim with 1-based band numbers.
inline void write_band_csv(std::ostream& os, const MetricsReport& r) {
  os << "band,psnr,ssim\n";
  for (std::size_t k = 0; k < r.band_psnr.size(); ++k) {
    os << (k + 1) << ',' << format_double(r.band_psnr[k]) << ','
       << (k < r.band_ssim.size() ? format_double(r.band_ssim[k]) : std::string("nan")) << '\n';
  }
}

inline void write_metrics_text(std::ostream& os, const MetricsReport& r) {
  os << "MPSNR  " << format_double(r.mpsnr) << " dB\n"
     << "MSSIM  " << format_double(r.mssim) << '\n'
     << "ERGAS  " << format_double(r.ergas) << '\n'
     << "MSAM   " << format_double(r.msam) << " deg\n";
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
}

}  // namespace mfwtnn
