#pragma once

// Cube container files, key-value experiment configs and CSV histories.
//
// Cube file: an ASCII header of newline-terminated lines followed by the raw
// little-endian payload in the in-memory (tube-contiguous) order:
//
//   MFWCUBE 1
//   dims <n1> <n2> <n3>
//   width <32|64>
//   byteorder little
//   layout ijk
//   end
//   <n1*n2*n3 scalars>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/format.hpp"
#include "mfwtnn/noise.hpp"
#include "mfwtnn/solver.hpp"
#include "mfwtnn/tensor3.hpp"

namespace mfwtnn {

inline constexpr std::string_view kCubeMagic = "MFWCUBE 1";
inline constexpr std::size_t kMaxHeaderBytes = 4096;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

/// Parsed cube header.
struct CubeHeader {
  Dims dims;
  int width = 64;
};

namespace detail {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      r = static_cast<U>((r << 8) | ((v >> (8 * b)) & 0xFF));
    }
    return r;
  } else {
    return v;
  }
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::size_t parse_dim(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (...) {
    throw IoError("cube header: bad dimension '" + s + "'");
  }
  if (pos != s.size() || v == 0) throw IoError("cube header: bad dimension '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Reads and validates the header, leaving `in` positioned at the payload.
inline CubeHeader read_cube_header(std::istream& in) {
  CubeHeader h;
  bool have_dims = false, have_width = false, have_order = false, have_layout = false;
  std::size_t consumed = 0;
  std::string line;
  bool first = true;
  while (true) {
    if (!std::getline(in, line)) throw IoError("cube header: unexpected end of file");
    consumed += line.size() + 1;
    if (consumed > kMaxHeaderBytes) throw IoError("cube header: too long");
    if (first) {
      if (line != kCubeMagic) throw IoError("not a cube file (bad magic line)");
      first = false;
      continue;
    }
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end" && tok.size() == 1) break;
    if (tok[0] == "dims" && tok.size() == 4) {
      h.dims = {detail::parse_dim(tok[1]), detail::parse_dim(tok[2]), detail::parse_dim(tok[3])};
      have_dims = true;
    } else if (tok[0] == "width" && tok.size() == 2) {
      if (tok[1] != "32" && tok[1] != "64") throw IoError("cube header: width must be 32 or 64");
      h.width = tok[1] == "32" ? 32 : 64;
      have_width = true;
    } else if (tok[0] == "byteorder" && tok.size() == 2) {
      if (tok[1] != "little") throw IoError("cube header: unsupported byte order '" + tok[1] + "'");
      have_order = true;
    } else if (tok[0] == "layout" && tok.size() == 2) {
      if (tok[1] != "ijk") throw IoError("cube header: unsupported layout '" + tok[1] + "'");
      have_layout = true;
    } else {
      throw IoError("cube header: unrecognized line '" + line + "'");
    }
  }
  if (!have_dims || !have_width || !have_order || !have_layout) {
    throw IoError("cube header: missing dims, width, byteorder or layout");
  }
  return h;
}

/// Min-max maps the whole cube onto [0, 1]; a constant cube maps to zeros.
inline Cube normalize_unit(const Cube& x) {
  const auto [lo, hi] = std::minmax_element(x.data().begin(), x.data().end());
  const double a = *lo;
  const double span = *hi - *lo;
  Cube out = x;
  for (double& v : out.data()) v = span > 0.0 ? (v - a) / span : 0.0;
  return out;
}

struct LoadOptions {
  bool normalize = false;
};

inline Cube read_cube(std::istream& in, const LoadOptions& opt = {}) {
  const CubeHeader h = read_cube_header(in);
  const std::size_t count = h.dims.size();
  const std::size_t bytes = count * static_cast<std::size_t>(h.width / 8);
  std::vector<char> raw(bytes);
  in.read(raw.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw IoError("cube payload too short: expected " + std::to_string(bytes) + " bytes, got " +
                  std::to_string(in.gcount()));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("cube payload longer than header declares");
  std::vector<double> data(count);
  for (std::size_t n = 0; n < count; ++n) {
    if (h.width == 64) {
      std::uint64_t u;
      std::memcpy(&u, raw.data() + n * 8, 8);
      data[n] = std::bit_cast<double>(detail::to_little(u));
    } else {
      std::uint32_t u;
      std::memcpy(&u, raw.data() + n * 4, 4);
      data[n] = static_cast<double>(std::bit_cast<float>(detail::to_little(u)));
    }
    if (!std::isfinite(data[n])) throw IoError("cube payload contains a non-finite value at index " + std::to_string(n));
  }
  Cube cube(h.dims, std::move(data));
  return opt.normalize ? normalize_unit(cube) : cube;
}

inline Cube load_cube(const std::filesystem::path& path, const LoadOptions& opt = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cube file " + path.string());
  try {
    return read_cube(in, opt);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_cube(std::ostream& out, const Cube& cube, int width = 64) {
  if (cube.empty()) throw ArgumentError("cannot write an empty cube");
  if (width != 32 && width != 64) throw ArgumentError("cube width must be 32 or 64");
  const Dims d = cube.dims();
  out << kCubeMagic << '\n'
      << "dims " << d.n1 << ' ' << d.n2 << ' ' << d.n3 << '\n'
      << "width " << width << '\n'
      << "byteorder little\n"
      << "layout ijk\n"
      << "end\n";
  std::vector<char> raw(cube.size() * static_cast<std::size_t>(width / 8));
  for (std::size_t n = 0; n < cube.size(); ++n) {
    if (width == 64) {
      const auto u = detail::to_little(std::bit_cast<std::uint64_t>(cube[n]));
      std::memcpy(raw.data() + n * 8, &u, 8);
    } else {
      const auto u = detail::to_little(std::bit_cast<std::uint32_t>(static_cast<float>(cube[n])));
      std::memcpy(raw.data() + n * 4, &u, 4);
    }
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

struct SaveOptions {
  int width = 64;
  /// Replace an existing file; otherwise saving onto an existing path fails.
  bool overwrite = false;
};

inline void save_cube(const Cube& cube, const std::filesystem::path& path, const SaveOptions& opt = {}) {
  if (cube.empty()) throw ArgumentError("cannot save an empty cube");
  if (!opt.overwrite && std::filesystem::exists(path)) {
    throw IoError(path.string() + " exists (pass overwrite to replace it)");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_cube(out, cube, opt.width);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Key-value configs: one `key = value` per line, '#' starts a comment.
// Solver keys are bare; noise keys carry a `noise.` prefix.

struct ConfigFile {
  SolverConfig solver;
  std::optional<NoiseSpec> noise;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double config_number(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(v, out)) throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

/// "x" or "lo:hi".
inline LevelRange config_range(const std::string& key, const std::string& v) {
  const auto c = v.find(':');
  if (c == std::string::npos) return LevelRange::fixed(config_number(key, v));
  return {config_number(key, trim(v.substr(0, c))), config_number(key, trim(v.substr(c + 1)))};
}

inline std::string range_text(const LevelRange& r) {
  return r.ranged() ? format_double(r.lo) + ":" + format_double(r.hi) : format_double(r.lo);
}

}  // namespace detail

inline ConfigFile parse_config(std::string_view text) {
  ConfigFile cfg;
  NoiseSpec noise;
  bool any_noise = false;
  std::optional<StripeSpec> stripes;
  std::istringstream is{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    const auto num = [&] { return detail::config_number(key, val); };
    try {
      SolverConfig& s = cfg.solver;
      if (key == "model") {
        s.model = parse_model(val);
      } else if (key == "alpha") {
        std::vector<double> a;
        std::istringstream parts(val);
        std::string part;
        while (std::getline(parts, part, ',')) a.push_back(detail::config_number(key, detail::trim(part)));
        if (a.size() != 3) throw ConfigError("key 'alpha': expected three comma-separated numbers");
        const double sum = a[0] + a[1] + a[2];
        s.alpha = std::abs(sum - 1.0) <= 1e-12 ? ModalWeights{{a[0], a[1], a[2]}}
                                               : ModalWeights::normalized(a[0], a[1], a[2]);
      } else if (key == "alpha3") {
        s.alpha = ModalWeights::spatial_equal(num());
      } else if (key == "lambda") {
        s.lambda = val == "auto" ? std::nullopt : std::optional<double>(num());
      } else if (key == "lambda_s") {
        s.lambda_s = num();
      } else if (key == "tau") {
        s.tau = val == "auto" ? std::nullopt : std::optional<double>(num());
      } else if (key == "tau_n") {
        s.tau_n = num();
      } else if (key == "noise_sigma") {
        s.noise_sigma = num();
      } else if (key == "c1") {
        s.c1 = num();
      } else if (key == "c2") {
        s.c2 = num();
      } else if (key == "eps_log") {
        s.eps_log = num();
      } else if (key == "delta") {
        s.delta = num();
      } else if (key == "mu0") {
        s.mu0 = num();
      } else if (key == "beta0") {
        s.beta0 = num();
      } else if (key == "rho") {
        s.rho = num();
      } else if (key == "mu_max") {
        s.mu_max = num();
      } else if (key == "tol") {
        s.tol = num();
      } else if (key == "max_iters") {
        const double v = num();
        if (v != std::floor(v) || v < 1 || v > 1e9) throw ConfigError("key 'max_iters': expected a positive integer");
        s.max_iters = static_cast<int>(v);
      } else if (key.starts_with("noise.")) {
        any_noise = true;
        const std::string k = key.substr(6);
        if (k == "gaussian") {
          noise.gaussian = detail::config_range(key, val);
        } else if (k == "impulse") {
          noise.impulse = detail::config_range(key, val);
        } else if (k == "seed") {
          std::size_t pos = 0;
          unsigned long long v = 0;
          try {
            v = std::stoull(val, &pos);
          } catch (...) {
            pos = 0;
          }
          if (pos != val.size() || val.empty() || val[0] == '-') throw ConfigError("key 'noise.seed': expected an unsigned integer");
          noise.seed = v;
        } else if (k == "stripes") {
          if (val == "none") {
            stripes.reset();
          } else {
            const LevelRange r = detail::config_range(key, val);
            if (r.lo < 1 || r.lo != std::floor(r.lo) || r.hi != std::floor(r.hi)) {
              throw ConfigError("key 'noise.stripes': expected none or first:last band numbers");
            }
            if (!stripes) stripes = StripeSpec{};
            stripes->band_first = static_cast<std::size_t>(r.lo);
            stripes->band_last = static_cast<std::size_t>(r.hi);
          }
        } else if (k == "stripe_fraction") {
          if (!stripes) stripes = StripeSpec{};
          stripes->column_fraction = num();
        } else if (k == "stripe_offset") {
          if (!stripes) stripes = StripeSpec{};
          const LevelRange r = detail::config_range(key, val);
          stripes->offset_lo = r.lo;
          stripes->offset_hi = r.hi;
        } else {
          throw ConfigError("unknown key '" + key + "'");
        }
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ArgumentError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (any_noise) {
    noise.stripes = stripes;
    cfg.noise = noise;
  }
  try {
    cfg.solver.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid solver config: ") + e.what());
  }
  return cfg;
}

inline ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// Writes every solver field, so the text fully determines the run.
inline void write_solver_config(std::ostream& os, const SolverConfig& c) {
  os << "model = " << to_string(c.model) << '\n'
     << "alpha = " << format_double(c.alpha.alpha[0]) << ',' << format_double(c.alpha.alpha[1]) << ','
     << format_double(c.alpha.alpha[2]) << '\n'
     << "lambda = " << (c.lambda ? format_double(*c.lambda) : std::string("auto")) << '\n'
     << "lambda_s = " << format_double(c.lambda_s) << '\n'
     << "tau = " << (c.tau ? format_double(*c.tau) : std::string("auto")) << '\n'
     << "tau_n = " << format_double(c.tau_n) << '\n'
     << "noise_sigma = " << format_double(c.noise_sigma) << '\n'
     << "c1 = " << format_double(c.c1) << '\n'
     << "c2 = " << format_double(c.c2) << '\n'
     << "eps_log = " << format_double(c.eps_log) << '\n'
     << "delta = " << format_double(c.delta) << '\n'
     << "mu0 = " << format_double(c.mu0) << '\n'
     << "beta0 = " << format_double(c.beta0) << '\n'
     << "rho = " << format_double(c.rho) << '\n'
     << "mu_max = " << format_double(c.mu_max) << '\n'
     << "tol = " << format_double(c.tol) << '\n'
     << "max_iters = " << c.max_iters << '\n';
}

inline void write_noise_spec(std::ostream& os, const NoiseSpec& n) {
  os << "noise.gaussian = " << detail::range_text(n.gaussian) << '\n'
     << "noise.impulse = " << detail::range_text(n.impulse) << '\n'
     << "noise.seed = " << n.seed << '\n';
  if (n.stripes) {
    os << "noise.stripes = " << n.stripes->band_first << ':' << n.stripes->band_last << '\n'
       << "noise.stripe_fraction = " << format_double(n.stripes->column_fraction) << '\n'
       << "noise.stripe_offset = " << format_double(n.stripes->offset_lo) << ':'
       << format_double(n.stripes->offset_hi) << '\n';
  } else {
    os << "noise.stripes = none\n";
  }
}

inline void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "iter,rel_change,residual,objective\n";
  for (const auto& r : history) {
    os << r.iter << ',' << format_double(r.rel_change) << ',' << format_double(r.residual) << ','
       << format_double(r.objective) << '\n';
  }
}

}  // namespace mfwtnn
