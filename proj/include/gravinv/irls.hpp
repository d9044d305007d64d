#pragma once

// Iteratively reweighted L1 (or minimum-support) focusing inversion. Each
// iteration transforms the weighted problem to standard Tikhonov form, solves
// it on a low-dimensional subspace with filter factors, updates the model by
// the resulting increment, projects onto the density bounds and reweights.

#include "gravinv/forward.hpp"
#include "gravinv/randsvd.hpp"
#include "gravinv/regparam.hpp"
#include "gravinv/system.hpp"
#include "gravinv/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gravinv {

enum class Solver { Rsvd, Fsvd, Lsqr };
enum class Stabilizer { L1, MinimumSupport };
enum class Termination { NoiseLevel, MaxIterations, Stagnation };

/// Which model the focusing weight compares against. The iteration box uses
/// the previous iterate; the objective's text uses the a-priori model.
enum class ReweightReference { PreviousIterate, APriori };

/// First-iteration alpha: factor * sigma_1, or (n/m)^exponent * sigma_1 / mean(sigma).
enum class Alpha1Rule { ScaledSigma1, Spectral };
enum class TupreRule { RitzConverged, Threshold };

inline const char* to_string(TupreRule r) { return r == TupreRule::RitzConverged ? "ritz" : "threshold"; }
inline const char* to_string(Alpha1Rule r) { return r == Alpha1Rule::ScaledSigma1 ? "sigma1" : "spectral"; }

inline const char* to_string(Solver s) {
  switch (s) {
    case Solver::Rsvd: return "rsvd";
    case Solver::Fsvd: return "fsvd";
    case Solver::Lsqr: return "lsqr";
  }
  return "?";
}

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::NoiseLevel: return "noise-level";
    case Termination::MaxIterations: return "k-max";
    case Termination::Stagnation: return "stagnation";
  }
  return "?";
}

inline const char* to_string(Stabilizer s) {
  return s == Stabilizer::L1 ? "l1" : "ms";
}

struct InversionConfig {
  double epsilon = 1e-4;  // focusing parameter, g/cm^3
  double rho_min = 0.0;
  double rho_max = 1.0;
  Index k_max = 50;
  Stabilizer stabilizer = Stabilizer::L1;
  Solver solver = Solver::Rsvd;
  Index q = 100;  // RSVD target rank
  Index p = 10;   // RSVD oversampling
  Index t = 100;  // GKB subspace size
  std::uint64_t seed = 0;
  Alpha1Rule alpha1_rule = Alpha1Rule::ScaledSigma1;
  double alpha1_factor = 50.0;
  double alpha1_exponent = 3.5;
  AlphaSearch search{};
  TupreRule tupre_rule = TupreRule::RitzConverged;
  double tupre_ritz_tolerance = 1e-2;
  double tupre_threshold = 1e-3;
  std::optional<double> fixed_alpha;  // bypasses parameter selection (tests)
  // Called once per iteration with the standard-form system and its subspace
  // SVD, before alpha is chosen. Visits it makes are not recorded.
  std::function<void(Index k, WeightedSystem& system, const SvdTriple& svd)> inspect;
  double stagnation_tolerance = 1e-6;
  BasisApplication basis = BasisApplication::Factored;
  SmallSvdRoute route = SmallSvdRoute::EigenBtB;
  bool reorthogonalize = true;
  ReweightReference reweight = ReweightReference::PreviousIterate;
  bool keep_upre_curves = false;

  void validate() const {
    detail::require(epsilon > 0.0, "inversion config: epsilon must be > 0");
    detail::require(rho_min < rho_max, "inversion config: rho_min must be < rho_max");
    detail::require(k_max >= 1, "inversion config: k_max must be >= 1");
    detail::require(q >= 1 && p >= 0 && t >= 1, "inversion config: need q >= 1, p >= 0, t >= 1");
    detail::require(alpha1_factor > 0.0, "inversion config: alpha1 factor must be > 0");
    detail::require(tupre_ritz_tolerance >= 0.0 && tupre_threshold >= 0.0,
                    "inversion config: TUPRE tolerances must be >= 0");
    detail::require(alpha1_exponent >= 0.0, "inversion config: alpha1 exponent must be >= 0");
    detail::require(stagnation_tolerance >= 0.0, "inversion config: stagnation tolerance must be >= 0");
    detail::require(search.grid_size >= 2, "inversion config: alpha grid needs at least 2 points");
    if (fixed_alpha) detail::require(*fixed_alpha >= 0.0, "inversion config: fixed alpha must be >= 0");
  }
};

/// Everything the driver needs besides configuration. G is referenced, not copied.
struct InversionProblem {
  const Matrix* G = nullptr;
  Vector d_obs;
  Vector wd;     // 1 / noise standard deviation
  Vector m_apr;  // a-priori model (also the starting model)
  Vector wh;     // hard-constraint weights
  Vector wz;     // depth weights
  std::optional<Vector> m_exact;

  void validate() const {
    detail::require(G != nullptr, "inversion: no kernel matrix");
    const Index m = G->rows(), n = G->cols();
    auto check = [](bool ok, const char* what, Index got, Index want) {
      if (!ok)
        throw Error(std::string("inversion: ") + what + " has " + std::to_string(got) +
                    " entries, expected " + std::to_string(want));
    };
    check(d_obs.size() == m, "d_obs", d_obs.size(), m);
    detail::require(d_obs.allFinite(), "inversion: d_obs has non-finite entries");
    check(wd.size() == m, "Wd", wd.size(), m);
    check(m_apr.size() == n, "m_apr", m_apr.size(), n);
    check(wh.size() == n, "Wh", wh.size(), n);
    check(wz.size() == n, "Wz", wz.size(), n);
    if (m_exact) check(m_exact->size() == n, "m_exact", m_exact->size(), n);
    detail::require((wd.array() > 0.0).all() && wd.allFinite(), "inversion: Wd entries must be positive");
    detail::require((wh.array() > 0.0).all() && wh.allFinite(), "inversion: Wh entries must be positive");
    detail::require((wz.array() > 0.0).all() && wz.allFinite(), "inversion: Wz entries must be positive");
  }
};

struct IterationRecord {
  Index k = 0;
  double alpha = 0.0;
  double chi2 = 0.0;
  double relative_error = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;  // wall time since the start of the inversion
  Index subspace_rank = 0;
  Index upre_terms = 0;  // spectrum entries the UPRE saw (< rank when truncated)
  VisitCounter visits;  // system-matrix visits made by the factorization
  bool alpha_at_boundary = false;
  std::optional<UpreMinimum> upre;
};

struct InversionResult {
  Vector model;
  std::vector<IterationRecord> iterations;
  Termination termination = Termination::MaxIterations;

  Index iterations_run() const { return static_cast<Index>(iterations.size()); }
  double final_alpha() const { return iterations.empty() ? 0.0 : iterations.back().alpha; }
};

/// h = sum_i sigma_i^2/(sigma_i^2 + alpha^2) * (u_i^T r / sigma_i) * v_i.
/// alpha = 0 gives the pseudo-inverse solution on the subspace.
inline Vector filtered_solve(const SvdTriple& svd, const Vector& r, double alpha) {
  detail::require(alpha >= 0.0, "filtered_solve: alpha must be >= 0");
  detail::require(svd.U.rows() == r.size(),
                  "filtered_solve: residual length " + std::to_string(r.size()) +
                      " does not match U rows " + std::to_string(svd.U.rows()));
  const Vector beta = svd.U.transpose() * r;
  const Vector s2 = svd.sigma.array().square().matrix();
  const Vector coeff =
      (s2.array() / (s2.array() + alpha * alpha) * beta.array() / svd.sigma.array()).matrix();
  return svd.V * coeff;
}

/// Focusing weights: L1 ((dm^2 + eps^2)^(-1/4)), MS ((dm^2 + eps^2)^(-1/2)).
inline Vector update_l1_weights(const Vector& m_k, const Vector& m_ref, double epsilon,
                                Stabilizer stabilizer = Stabilizer::L1) {
  detail::require(epsilon > 0.0, "update_l1_weights: epsilon must be > 0");
  detail::require(m_k.size() == m_ref.size(), "update_l1_weights: length mismatch");
  const double exponent = stabilizer == Stabilizer::L1 ? -0.25 : -0.5;
  const Vector dm = m_k - m_ref;
  return (dm.array().square() + epsilon * epsilon).pow(exponent).matrix();
}

inline Vector project_bounds(Vector m, double rho_min, double rho_max) {
  detail::require(rho_min < rho_max, "project_bounds: rho_min must be < rho_max");
  return m.cwiseMax(rho_min).cwiseMin(rho_max);
}

inline double chi2_threshold(Index m) {
  return static_cast<double>(m) + std::sqrt(2.0 * static_cast<double>(m));
}

struct ChiSquared {
  double value = 0.0;
  bool satisfied = false;
};

inline ChiSquared chi_squared_from_residual(const Vector& weighted_residual) {
  const double v = weighted_residual.squaredNorm();
  return {v, v <= chi2_threshold(weighted_residual.size())};
}

/// ||Wd (d_obs - G m)||^2 against the noise level m + sqrt(2m).
inline ChiSquared chi_squared(const Vector& wd, const Vector& d_obs, const Matrix& G, const Vector& m) {
  detail::require(wd.size() == d_obs.size() && G.rows() == d_obs.size() && G.cols() == m.size(),
                  "chi_squared: dimension mismatch");
  return chi_squared_from_residual(wd.cwiseProduct(d_obs - G * m));
}

inline double relative_error(const Vector& m_exact, const Vector& m) {
  detail::require(m_exact.size() == m.size(), "relative_error: length mismatch");
  const double denom = m_exact.norm();
  detail::require(denom > 0.0, "relative_error: exact model is zero");
  return (m_exact - m).norm() / denom;
}

/// Per-iteration subspace factorization handed to the driver.
struct SubspaceFactorization {
  SvdTriple triple;
  Index upre_terms = 0;  // leading spectrum entries used to choose alpha
};

namespace detail {

inline std::uint64_t iteration_seed(std::uint64_t seed, Index k) {
  return seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k);
}

/// Shared iteration loop. `factorize(system, residual, k)` returns the
/// subspace factorization of the current standard-form matrix.
template <class Factorize>
InversionResult run_irls(const InversionProblem& prob, const InversionConfig& cfg, Factorize&& factorize) {
  prob.validate();
  cfg.validate();
  const Matrix& G = *prob.G;
  const auto start = std::chrono::steady_clock::now();

  const Vector w_base = prob.wz.cwiseProduct(prob.wh);  // W^(1)
  Vector w_focus = Vector::Ones(G.cols());              // W_L1^(1) = I
  Vector m_prev = prob.m_apr;
  Vector residual = prob.wd.cwiseProduct(prob.d_obs - G * m_prev);

  InversionResult result;
  for (Index k = 1;; ++k) {
    const Vector w_inv = w_focus.cwiseProduct(w_base).cwiseInverse();
    WeightedSystem system(G, prob.wd, w_inv);

    SubspaceFactorization fac;
    try {
      fac = factorize(system, residual, k);
    } catch (const RankDeficiencyError& e) {
      throw RankDeficiencyError("iteration " + std::to_string(k) + ": " + e.what(),
                                e.achievable_rank());
    }
    const SvdTriple& svd = fac.triple;

    IterationRecord rec;
    rec.k = k;
    rec.subspace_rank = svd.rank();
    rec.upre_terms = fac.upre_terms;
    rec.visits = system.visits();
    if (cfg.inspect) cfg.inspect(k, system, svd);

    if (cfg.fixed_alpha) {
      rec.alpha = *cfg.fixed_alpha;
    } else if (k == 1) {
      rec.alpha = cfg.alpha1_rule == Alpha1Rule::ScaledSigma1
                      ? initial_alpha(svd.sigma, cfg.alpha1_factor)
                      : initial_alpha_spectral(svd.sigma, G.cols(), G.rows(), cfg.alpha1_exponent);
    } else {
      const Vector beta = svd.U.transpose() * residual;
      const UpreInput in{svd.sigma, beta};
      UpreMinimum best = fac.upre_terms < svd.rank() ? truncated_upre(in, fac.upre_terms, cfg.search)
                                                     : minimize_upre(in, cfg.search);
      rec.alpha = best.alpha;
      rec.alpha_at_boundary = best.at_boundary;
      if (cfg.keep_upre_curves) rec.upre = std::move(best);
    }

    const Vector h = filtered_solve(svd, residual, rec.alpha);
    Vector m_new = m_prev + w_inv.cwiseProduct(h);
    m_new = project_bounds(std::move(m_new), cfg.rho_min, cfg.rho_max);
    if (!m_new.allFinite())
      throw Error("inversion: non-finite model entries at iteration " + std::to_string(k) +
                  " (alpha=" + std::to_string(rec.alpha) + ", rank " + std::to_string(svd.rank()) + ")");

    const Vector r_new = prob.wd.cwiseProduct(prob.d_obs - G * m_new);
    const ChiSquared chi = chi_squared_from_residual(r_new);
    rec.chi2 = chi.value;
    if (prob.m_exact) rec.relative_error = relative_error(*prob.m_exact, m_new);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.iterations.push_back(std::move(rec));

    const double prev_norm = m_prev.norm();
    const bool stagnated =
        prev_norm > 0.0 && (m_new - m_prev).norm() / prev_norm < cfg.stagnation_tolerance;

    if (chi.satisfied) {
      result.termination = Termination::NoiseLevel;
    } else if (stagnated) {
      result.termination = Termination::Stagnation;
    } else if (k >= cfg.k_max) {
      result.termination = Termination::MaxIterations;
    } else {
      residual = r_new;
      const Vector& ref = cfg.reweight == ReweightReference::PreviousIterate ? m_prev : prob.m_apr;
      w_focus = update_l1_weights(m_new, ref, cfg.epsilon, cfg.stabilizer);
      m_prev = std::move(m_new);
      continue;
    }
    result.model = std::move(m_new);
    return result;
  }
}

}  // namespace detail

/// Focusing inversion with the randomized SVD (solver = Rsvd) or the full
/// SVD of the standard-form matrix (solver = Fsvd).
inline InversionResult invert(const InversionProblem& prob, const InversionConfig& cfg,
                              const MemoryPolicy& memory = {}) {
  if (cfg.solver == Solver::Lsqr)
    throw Error("invert: the LSQR path lives in lsqr_invert (gravinv/lsqr.hpp)");
  if (cfg.solver == Solver::Rsvd) {
    return detail::run_irls(prob, cfg, [&](WeightedSystem& A, const Vector&, Index k) {
      RsvdConfig rc;
      rc.q = cfg.q;
      rc.p = cfg.p;
      rc.seed = detail::iteration_seed(cfg.seed, k);
      rc.basis = cfg.basis;
      rc.route = cfg.route;
      SubspaceFactorization f{rsvd(A, rc), 0};
      f.upre_terms = f.triple.rank();
      return f;
    });
  }
  return detail::run_irls(prob, cfg, [&](WeightedSystem& A, const Vector&, Index) {
    check_memory(A.rows(), A.cols(), memory, "fsvd");
    SubspaceFactorization f{dense_svd_underdetermined(A.dense()), 0};
    f.upre_terms = f.triple.rank();
    return f;
  });
}

}  // namespace gravinv
