#pragma once

// ADMM solver for
//   min sum_p alpha_p R(Z_p) + lambda ||S||_1 + tau ||N||_F^2
//   s.t. Y = X + S + N, Z_p = permute(X, p),
// where R is the frequency-weighted TNN (MFWTNN) or its log surrogate
// (NonMFWTNN). Each iteration updates Z_p, X, S, N, then the multipliers,
// the penalties and the frequency weights, in that order.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfwtnn/errors.hpp"
#include "mfwtnn/shrinkage.hpp"
#include "mfwtnn/tensor3.hpp"
#include "mfwtnn/weights.hpp"

namespace mfwtnn {

enum class Model {
  kMfwtnn,       ///< convex frequency-weighted prox
  kNonMfwtnn,    ///< log (double-weighted) prox
  kTnnBaseline,  ///< convex prox, uniform weights scaled by c2
};

inline std::string to_string(Model m) {
  switch (m) {
    case Model::kMfwtnn: return "mfwtnn";
    case Model::kNonMfwtnn: return "nonmfwtnn";
    case Model::kTnnBaseline: return "tnn";
  }
  return "?";
}

inline Model parse_model(const std::string& s) {
  if (s == "mfwtnn") return Model::kMfwtnn;
  if (s == "nonmfwtnn") return Model::kNonMfwtnn;
  if (s == "tnn") return Model::kTnnBaseline;
  throw ArgumentError("unknown model '" + s + "' (expected mfwtnn, nonmfwtnn or tnn)");
}

struct SolverConfig {
  Model model = Model::kNonMfwtnn;
  ModalWeights alpha;
  /// Fixed sparse-noise weight; derived from lambda_s and the dims if unset.
  std::optional<double> lambda;
  double lambda_s = kDefaultLambdaS;
  /// Fixed Gaussian-noise weight; tau_n / noise_sigma if unset.
  std::optional<double> tau;
  double tau_n = kDefaultTauN;
  double noise_sigma = 0.1;
  double c1 = kDefaultC1;
  double c2 = kDefaultC2;
  double eps_log = 0.1;
  double delta = kDefaultDelta;
  double mu0 = 1e-3;
  double beta0 = 1e-3;
  double rho = 1.2;
  double mu_max = 1e10;
  double tol = 1e-5;
  int max_iters = 100;

  void validate() const {
    alpha.validate();
    if (!(rho > 1.0)) throw ArgumentError("rho must be > 1");
    if (!(mu0 > 0.0) || !(beta0 > 0.0)) throw ArgumentError("mu0 and beta0 must be positive");
    if (mu0 > mu_max || beta0 > mu_max) throw ArgumentError("mu0 and beta0 must not exceed mu_max");
    if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
    if (max_iters <= 0) throw ArgumentError("max_iters must be positive");
    if (c1 < 0.0 || c2 < 0.0) throw ArgumentError("c1 and c2 must be nonnegative");
    if (model == Model::kTnnBaseline ? !(c2 > 0.0) : !(c1 + c2 > 0.0)) {
      throw ArgumentError("frequency weights would be zero (c1 + c2 = 0)");
    }
    if (!(eps_log > 0.0)) throw ArgumentError("eps_log must be positive");
    if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
    if (lambda && !(*lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
    if (tau && !(*tau >= 0.0)) throw ArgumentError("tau must be nonnegative");
  }

  double resolved_lambda(const Dims& d) const { return lambda ? *lambda : default_lambda(d, lambda_s, alpha); }
  double resolved_tau() const { return tau ? *tau : default_tau(noise_sigma, tau_n); }
  bool active(int p) const { return alpha[p] > 0.0; }
};

struct IterationRecord {
  int iter = 0;
  /// ||X^{n+1} - X^n||_F / max(||X^n||_F, 1)
  double rel_change = 0.0;
  /// ||Y - X - S - N||_F / ||Y||_F
  double residual = 0.0;
  /// sum_p alpha_p R(Z_p) + lambda ||S||_1 + tau ||N||_F^2 (monitoring only)
  double objective = 0.0;
};

struct SolverState {
  Cube x;
  Cube s;
  Cube nn;
  /// Z_p in permuted orientation; empty for inactive modes (alpha_p = 0).
  std::array<Cube, 3> z;
  std::array<Cube, 3> gamma;
  Cube lam;
  std::array<double, 3> mu{};
  double beta = 0.0;
  WeightState weights;
  double lambda = 0.0;
  double tau = 0.0;
  int iter = 0;
  std::vector<IterationRecord> history;
  /// alpha_p * R(Z_p) from the latest Z-update.
  std::array<double, 3> reg_value{};
};

struct DenoiseResult {
  Cube x_hat;
  Cube s_hat;
  Cube n_hat;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::size_t mode_index(int p) { return static_cast<std::size_t>(p - 1); }

inline void refresh_weights(SolverState& st, const SolverConfig& cfg, int p) {
  if (cfg.model == Model::kTnnBaseline) {
    const std::size_t n3 = st.z[mode_index(p)].dims().n3;
    st.weights.h[mode_index(p)].assign(n3, 1.0);
    st.weights.w[mode_index(p)].assign(n3, 1.0);
    return;
  }
  st.weights.update(p, fft_mode3(permute(st.x, p), p));
}

}  // namespace detail

/// Starting point: X = Y, Z_p = permute(Y, p), S = N = 0, zero multipliers,
/// mu_p = mu0, beta = beta0, weights computed from Y.
inline SolverState init_state(const Cube& y, const SolverConfig& cfg) {
  cfg.validate();
  SolverState st;
  st.x = y;
  st.s = Cube(y.dims());
  st.nn = Cube(y.dims());
  st.lam = Cube(y.dims());
  st.beta = cfg.beta0;
  st.lambda = cfg.resolved_lambda(y.dims());
  st.tau = cfg.resolved_tau();
  st.weights.c1 = cfg.c1;
  st.weights.c2 = cfg.c2;
  st.weights.delta = cfg.delta;
  for (int p = 1; p <= 3; ++p) {
    const std::size_t i = detail::mode_index(p);
    st.mu[i] = cfg.mu0;
    if (!cfg.active(p)) continue;
    st.z[i] = permute(y, p);
    st.gamma[i] = Cube(st.z[i].dims());
    detail::refresh_weights(st, cfg, p);
  }
  return st;
}

/// Z-subproblem for mode p: prox of (alpha_p / mu_p) R at X_p + Gamma_p / mu_p.
/// Returns the new Z_p and its regularizer value alpha_p R(Z_p).
inline std::pair<Cube, double> update_z_detailed(const SolverState& st, const SolverConfig& cfg, int p) {
  check_mode(p);
  const std::size_t i = detail::mode_index(p);
  Cube arg = permute(st.x, p);
  if (!st.gamma[i].empty()) arg += st.gamma[i] * (1.0 / st.mu[i]);
  const double a = cfg.alpha[p];
  if (a == 0.0) return {std::move(arg), 0.0};
  const double t = a / st.mu[i];
  switch (cfg.model) {
    case Model::kMfwtnn: {
      ProxResult r = fw_prox_detailed(arg, st.weights.weights(p), t);
      return {std::move(r.value), a * r.weighted_norm};
    }
    case Model::kNonMfwtnn: {
      ProxResult r = dw_prox_detailed(arg, st.weights.weights(p), t, cfg.eps_log);
      return {std::move(r.value), a * r.weighted_norm};
    }
    case Model::kTnnBaseline: {
      const std::vector<double> ones(arg.dims().n3, 1.0);
      ProxResult r = fw_prox_detailed(arg, ones, cfg.c2 * t);
      return {std::move(r.value), a * cfg.c2 * r.weighted_norm};
    }
  }
  throw std::logic_error("unhandled model");
}

inline Cube update_z(const SolverState& st, const SolverConfig& cfg, int p) {
  return update_z_detailed(st, cfg, p).first;
}

/// X = [sum_p mu_p ipermute(Z_p - Gamma_p / mu_p) + beta (Y - S - N + Lambda / beta)]
///     / (sum_p mu_p + beta), summing over active modes.
inline Cube update_x(const SolverState& st, const SolverConfig& cfg, const Cube& y) {
  Cube num = (y - st.s - st.nn) * st.beta + st.lam;
  double den = st.beta;
  for (int p = 1; p <= 3; ++p) {
    if (!cfg.active(p)) continue;
    const std::size_t i = detail::mode_index(p);
    num += ipermute(st.z[i] * st.mu[i] - st.gamma[i], p);
    den += st.mu[i];
  }
  return num * (1.0 / den);
}

/// S = shrink(Y - X - N + Lambda / beta, lambda / beta) with the previous N.
inline Cube update_s(const SolverState& st, const SolverConfig&, const Cube& y) {
  Cube arg = y - st.x - st.nn + st.lam * (1.0 / st.beta);
  return soft_threshold(arg, st.lambda / st.beta);
}

/// N = beta (Y - X - S + Lambda / beta) / (2 tau + beta) with the new S.
inline Cube update_n(const SolverState& st, const SolverConfig&, const Cube& y) {
  Cube arg = y - st.x - st.s + st.lam * (1.0 / st.beta);
  return arg * (st.beta / (2.0 * st.tau + st.beta));
}

/// Multiplier ascent, penalty growth (capped at mu_max) and weight refresh.
inline SolverState update_multipliers_and_penalties(SolverState st, const SolverConfig& cfg, const Cube& y) {
  for (int p = 1; p <= 3; ++p) {
    if (!cfg.active(p)) continue;
    const std::size_t i = detail::mode_index(p);
    st.gamma[i] += (permute(st.x, p) - st.z[i]) * st.mu[i];
  }
  st.lam += (y - st.x - st.s - st.nn) * st.beta;
  for (int p = 1; p <= 3; ++p) {
    const std::size_t i = detail::mode_index(p);
    st.mu[i] = std::min(cfg.rho * st.mu[i], cfg.mu_max);
  }
  st.beta = std::min(cfg.rho * st.beta, cfg.mu_max);
  for (int p = 1; p <= 3; ++p) {
    if (cfg.active(p)) detail::refresh_weights(st, cfg, p);
  }
  return st;
}

/// One full iteration; appends and returns its history record.
inline IterationRecord iterate(SolverState& st, const SolverConfig& cfg, const Cube& y) {
  for (int p = 1; p <= 3; ++p) {
    if (!cfg.active(p)) continue;
    auto [z, reg] = update_z_detailed(st, cfg, p);
    st.z[detail::mode_index(p)] = std::move(z);
    st.reg_value[detail::mode_index(p)] = reg;
  }
  const Cube x_prev = st.x;
  st.x = update_x(st, cfg, y);
  st.s = update_s(st, cfg, y);
  st.nn = update_n(st, cfg, y);
  st = update_multipliers_and_penalties(std::move(st), cfg, y);
  ++st.iter;

  IterationRecord rec;
  rec.iter = st.iter;
  rec.rel_change = frobenius_norm(st.x - x_prev) / std::max(frobenius_norm(x_prev), 1.0);
  const double ynorm = frobenius_norm(y);
  rec.residual = frobenius_norm(y - st.x - st.s - st.nn) / (ynorm > 0.0 ? ynorm : 1.0);
  const double nn = frobenius_norm(st.nn);
  rec.objective = st.reg_value[0] + st.reg_value[1] + st.reg_value[2] + st.lambda * l1_norm(st.s) +
                  st.tau * nn * nn;
  if (!all_finite(st.x)) throw NumericalError("solver produced non-finite values at iteration " +
                                              std::to_string(st.iter));
  st.history.push_back(rec);
  return rec;
}

using IterationObserver = std::function<void(const SolverState&, const IterationRecord&)>;

/// Runs the ADMM iterations until both the relative change of X and the
/// feasibility residual drop to cfg.tol, or cfg.max_iters is reached.
inline DenoiseResult denoise(const Cube& y, const SolverConfig& cfg, const IterationObserver& observer = {}) {
  if (y.empty()) throw ArgumentError("denoise: empty input cube");
  if (!all_finite(y)) throw ArgumentError("denoise: input contains non-finite values");
  DenoiseResult result;
  const auto [lo, hi] = std::minmax_element(y.data().begin(), y.data().end());
  if (*lo < 0.0 || *hi > 1.0) {
    result.warnings.push_back("input values outside [0,1] (min " + std::to_string(*lo) + ", max " +
                              std::to_string(*hi) + "); parameters assume normalized data");
  }
  SolverState st = init_state(y, cfg);
  while (st.iter < cfg.max_iters) {
    const IterationRecord rec = iterate(st, cfg, y);
    if (observer) observer(st, rec);
    if (rec.rel_change <= cfg.tol && rec.residual <= cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.x_hat = std::move(st.x);
  result.s_hat = std::move(st.s);
  result.n_hat = std::move(st.nn);
  result.iterations = st.iter;
  result.history = std::move(st.history);
  return result;
}

}  // namespace mfwtnn
