#pragma once

// Mixed-noise degradation: Gaussian, salt-and-pepper and column stripes,
// plus the eight composite benchmark cases.
//
// Every band draws from its own RNG substream seeded by (seed, kind, band),
// so results do not depend on band processing order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/tensor3.hpp"

namespace mfwtnn {

/// A fixed level (lo == hi) or a per-band uniform range [lo, hi].
struct LevelRange {
  double lo = 0.0;
  double hi = 0.0;

  static LevelRange fixed(double v) { return {v, v}; }
  bool ranged() const { return hi > lo; }
  bool operator==(const LevelRange&) const = default;
};

/// Constant additive offsets on a random subset of columns of bands
/// band_first..band_last (1-based, inclusive).
struct StripeSpec {
  std::size_t band_first = 1;
  std::size_t band_last = 1;
  double column_fraction = 0.1;
  double offset_lo = -0.25;
  double offset_hi = 0.25;

  bool operator==(const StripeSpec&) const = default;
};

struct NoiseSpec {
  /// Gaussian standard deviation.
  LevelRange gaussian;
  /// Fraction of pixels per band replaced by 0 or 1.
  LevelRange impulse;
  std::optional<StripeSpec> stripes;
  std::uint64_t seed = 0;

  void validate(std::size_t n3) const {
    if (gaussian.lo < 0.0 || gaussian.hi < gaussian.lo) throw ArgumentError("invalid Gaussian level range");
    if (impulse.lo < 0.0 || impulse.hi < impulse.lo || impulse.hi >= 1.0) {
      throw ArgumentError("impulse fraction must satisfy 0 <= P < 1");
    }
    if (stripes) {
      if (stripes->band_first < 1 || stripes->band_last < stripes->band_first || stripes->band_last > n3) {
        throw ArgumentError("stripe band range must lie within [1, n3]");
      }
      if (stripes->column_fraction < 0.0 || stripes->column_fraction > 1.0) {
        throw ArgumentError("stripe column fraction must be in [0, 1]");
      }
      if (stripes->offset_hi < stripes->offset_lo) throw ArgumentError("invalid stripe offset range");
    }
  }

  bool operator==(const NoiseSpec&) const = default;
};

namespace detail {

enum class Stream : std::uint32_t { kGaussian = 1, kImpulse = 2, kStripeColumns = 3, kStripeOffsets = 4 };

inline std::mt19937_64 substream(std::uint64_t seed, Stream kind, std::size_t band) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(band),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(band) >> 32)};
  return std::mt19937_64(seq);
}

inline double draw_level(const LevelRange& r, std::mt19937_64& eng) {
  if (!r.ranged()) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(eng);
}

/// First `count` entries of a uniform random permutation of 0..n-1.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                           std::mt19937_64& eng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(eng)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace detail

/// Sum of `rank` outer products a_r o b_r o c_r with U(0,1) factors,
/// min-max normalized to [0,1]. Tubal rank is at most `rank`.
inline Cube low_rank_cube(const Dims& dims, std::size_t rank, std::uint64_t seed) {
  if (rank == 0) throw ArgumentError("rank must be positive");
  Cube x(dims);
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t r = 0; r < rank; ++r) {
    std::vector<double> a(dims.n1), b(dims.n2), c(dims.n3);
    for (double& v : a) v = u(eng);
    for (double& v : b) v = u(eng);
    for (double& v : c) v = u(eng);
    for (std::size_t i = 0; i < dims.n1; ++i) {
      for (std::size_t j = 0; j < dims.n2; ++j) {
        for (std::size_t k = 0; k < dims.n3; ++k) x(i, j, k) += a[i] * b[j] * c[k];
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(x.data().begin(), x.data().end());
  const double base = *lo;
  const double span = *hi - *lo;
  for (double& v : x.data()) v = span > 0.0 ? (v - base) / span : 0.0;
  return x;
}

/// Adds i.i.d. zero-mean Gaussian noise with standard deviation g (drawn
/// per band when g is a range).
inline Cube add_gaussian(const Cube& x, const LevelRange& g, std::uint64_t seed) {
  if (g.lo < 0.0 || g.hi < g.lo) throw ArgumentError("invalid Gaussian level range");
  Cube y = x;
  const Dims d = x.dims();
  for (std::size_t b = 0; b < d.n3; ++b) {
    auto eng = detail::substream(seed, detail::Stream::kGaussian, b);
    const double level = detail::draw_level(g, eng);
    if (level == 0.0) continue;
    std::normal_distribution<double> normal(0.0, level);
    for (std::size_t i = 0; i < d.n1; ++i) {
      for (std::size_t j = 0; j < d.n2; ++j) y(i, j, b) += normal(eng);
    }
  }
  return y;
}

inline Cube add_gaussian(const Cube& x, double g, std::uint64_t seed) {
  return add_gaussian(x, LevelRange::fixed(g), seed);
}

/// In every band, round(p * n1 * n2) pixels chosen without replacement are
/// set to 0 or 1 with equal probability.
inline Cube add_impulse(const Cube& x, const LevelRange& p, std::uint64_t seed) {
  if (p.lo < 0.0 || p.hi < p.lo || p.hi >= 1.0) throw ArgumentError("impulse fraction must satisfy 0 <= P < 1");
  Cube y = x;
  const Dims d = x.dims();
  const std::size_t pixels = d.n1 * d.n2;
  for (std::size_t b = 0; b < d.n3; ++b) {
    auto eng = detail::substream(seed, detail::Stream::kImpulse, b);
    const double frac = detail::draw_level(p, eng);
    const auto count = static_cast<std::size_t>(std::llround(frac * static_cast<double>(pixels)));
    std::bernoulli_distribution salt(0.5);
    for (std::size_t n : detail::sample_without_replacement(pixels, count, eng)) {
      y(n / d.n2, n % d.n2, b) = salt(eng) ? 1.0 : 0.0;
    }
  }
  return y;
}

inline Cube add_impulse(const Cube& x, double p, std::uint64_t seed) {
  return add_impulse(x, LevelRange::fixed(p), seed);
}

/// One set of round(column_fraction * n2) columns is drawn for the whole band
/// range; in each affected band every chosen column gets its own constant
/// offset drawn from [offset_lo, offset_hi].
inline Cube add_stripes(const Cube& x, const StripeSpec& spec, std::uint64_t seed) {
  const Dims d = x.dims();
  if (spec.band_first < 1 || spec.band_last < spec.band_first || spec.band_last > d.n3) {
    throw ArgumentError("stripe band range must lie within [1, n3]");
  }
  if (spec.offset_hi < spec.offset_lo) throw ArgumentError("invalid stripe offset range");
  Cube y = x;
  const auto count = static_cast<std::size_t>(std::llround(spec.column_fraction * static_cast<double>(d.n2)));
  if (count == 0) return y;
  auto col_eng = detail::substream(seed, detail::Stream::kStripeColumns, 0);
  const std::vector<std::size_t> cols = detail::sample_without_replacement(d.n2, std::min(count, d.n2), col_eng);
  for (std::size_t b = spec.band_first - 1; b < spec.band_last; ++b) {
    auto eng = detail::substream(seed, detail::Stream::kStripeOffsets, b);
    for (std::size_t j : cols) {
      const double offset = detail::draw_level({spec.offset_lo, spec.offset_hi}, eng);
      for (std::size_t i = 0; i < d.n1; ++i) y(i, j, b) += offset;
    }
  }
  return y;
}

/// Gaussian, then impulse (overwrites), then stripes. No clipping.
inline Cube apply_noise(const Cube& x, const NoiseSpec& spec) {
  spec.validate(x.dims().n3);
  Cube y = add_gaussian(x, spec.gaussian, spec.seed);
  y = add_impulse(y, spec.impulse, spec.seed);
  if (spec.stripes) y = add_stripes(y, *spec.stripes, spec.seed);
  return y;
}

struct BandRange {
  std::size_t first = 1;
  std::size_t last = 1;
};

/// Stripe bands used for the 80-band Pavia City Center crop.
inline constexpr BandRange kPaviaStripeBands{54, 64};
/// Stripe bands used for the 191-band Washington DC Mall crop.
inline constexpr BandRange kDcMallStripeBands{70, 100};

/// Default stripe bands for an n3-band cube: the Pavia bands 54-64 of 80,
/// rescaled to n3.
inline BandRange default_stripe_bands(std::size_t n3) {
  const auto scale = [n3](double b) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(b * static_cast<double>(n3) / 80.0)), 1, n3);
  };
  const std::size_t first = scale(54.0);
  return {first, std::max(first, scale(64.0))};
}

/// Noise recipe for benchmark case 1..8.
inline NoiseSpec case_spec(int case_id, std::uint64_t seed, std::size_t n3,
                           std::optional<BandRange> stripe_bands = std::nullopt) {
  NoiseSpec s;
  s.seed = seed;
  switch (case_id) {
    case 1: s.gaussian = LevelRange::fixed(0.1); s.impulse = LevelRange::fixed(0.2); break;
    case 2: s.gaussian = LevelRange::fixed(0.1); s.impulse = LevelRange::fixed(0.3); break;
    case 3: s.gaussian = LevelRange::fixed(0.1); s.impulse = LevelRange::fixed(0.4); break;
    case 4: s.gaussian = LevelRange::fixed(0.15); s.impulse = LevelRange::fixed(0.2); break;
    case 5: s.gaussian = LevelRange::fixed(0.2); s.impulse = LevelRange::fixed(0.2); break;
    case 6: s.gaussian = LevelRange::fixed(0.1); s.impulse = {0.2, 0.4}; break;
    case 7: s.gaussian = {0.1, 0.3}; s.impulse = LevelRange::fixed(0.2); break;
    case 8: {
      s.gaussian = {0.1, 0.3};
      s.impulse = {0.1, 0.3};
      const BandRange bands = stripe_bands.value_or(default_stripe_bands(n3));
      s.stripes = StripeSpec{bands.first, bands.last};
      break;
    }
    default: throw ArgumentError("noise case must be in 1..8, got " + std::to_string(case_id));
  }
  return s;
}

inline std::pair<Cube, NoiseSpec> make_case(const Cube& x, int case_id, std::uint64_t seed,
                                            std::optional<BandRange> stripe_bands = std::nullopt) {
  NoiseSpec spec = case_spec(case_id, seed, x.dims().n3, stripe_bands);
  Cube y = apply_noise(x, spec);
  return {std::move(y), std::move(spec)};
}

}  // namespace mfwtnn
