#pragma once

// Regularization parameter selection on a projected spectrum: the unbiased
// predictive risk estimator (UPRE), its grid minimization, the truncated
// variant used with Krylov subspaces, and the first-iteration rule.

#include "gravinv/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace gravinv {

/// Projected spectrum: singular values and coefficients beta_i = u_i^T r.
struct UpreInput {
  Vector sigma;  // positive, descending
  Vector beta;

  Index size() const { return sigma.size(); }

  void validate() const {
    detail::require(sigma.size() == beta.size(),
                    "upre: sigma and beta lengths differ (" + std::to_string(sigma.size()) +
                        " vs " + std::to_string(beta.size()) + ")");
    detail::require(sigma.size() >= 1, "upre: empty spectrum");
    for (Index i = 0; i < sigma.size(); ++i) {
      detail::require(sigma(i) > 0.0, "upre: singular values must be positive");
      if (i > 0)
        detail::require(sigma(i) <= sigma(i - 1), "upre: singular values must be descending");
    }
  }

  UpreInput head(Index count) const { return {sigma.head(count), beta.head(count)}; }
};

struct AlphaSearch {
  Index grid_size = 100;
  double refine_tolerance = 1e-3;  // relative; <= 0 disables golden-section refinement
};

struct UpreMinimum {
  double alpha = 0.0;
  double value = 0.0;
  Index grid_index = 0;     // argmin on the coarse grid
  bool at_boundary = false;  // coarse argmin at a grid endpoint
  bool degenerate = false;   // all grid values equal
  std::vector<double> grid_alpha;
  std::vector<double> grid_value;
};

/// U(alpha) = sum (1/(s^2/alpha^2 + 1))^2 beta^2 + 2 sum s^2/(s^2 + alpha^2) - q.
inline double upre_value(double alpha, const UpreInput& in) {
  detail::require(alpha > 0.0, "upre_value: alpha must be > 0");
  const double a2 = alpha * alpha;
  double residual = 0.0;
  double trace = 0.0;
  for (Index i = 0; i < in.sigma.size(); ++i) {
    const double s2 = in.sigma(i) * in.sigma(i);
    const double damp = 1.0 / (s2 / a2 + 1.0);
    residual += damp * damp * in.beta(i) * in.beta(i);
    trace += s2 / (s2 + a2);
  }
  return residual + 2.0 * trace - static_cast<double>(in.sigma.size());
}

/// log-spaced grid on [lo, hi], ascending.
inline std::vector<double> log_grid(double lo, double hi, Index count) {
  detail::require(count >= 2, "alpha grid needs at least two points");
  detail::require(lo > 0.0 && hi > 0.0, "alpha grid endpoints must be positive");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (Index i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

namespace detail {

// Golden-section search on log(alpha) in [lo, hi].
template <class F>
double golden_section_log(F&& f, double lo, double hi, double rel_tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  // relative tolerance on alpha ~ absolute tolerance on log(alpha)
  const double tol = std::log1p(rel_tol);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace detail

/// Minimizes U(alpha) over a log-spaced grid on [sigma_min, sigma_max],
/// optionally refining an interior argmin by golden-section search between
/// its grid neighbours. Ties go to the larger alpha.
inline UpreMinimum minimize_upre(const UpreInput& in, const AlphaSearch& search = {}) {
  in.validate();
  const double lo = in.sigma.minCoeff();
  const double hi = in.sigma.maxCoeff();

  UpreMinimum out;
  out.grid_alpha = log_grid(lo, hi, search.grid_size);
  out.grid_value.resize(out.grid_alpha.size());
  for (std::size_t i = 0; i < out.grid_alpha.size(); ++i)
    out.grid_value[i] = upre_value(out.grid_alpha[i], in);

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.grid_value.size(); ++i)
    if (out.grid_value[i] <= out.grid_value[best]) best = i;

  const auto [vmin, vmax] = std::minmax_element(out.grid_value.begin(), out.grid_value.end());
  if (*vmin == *vmax) {
    out.degenerate = true;
    out.at_boundary = true;
    out.grid_index = static_cast<Index>(out.grid_alpha.size() - 1);
    out.alpha = out.grid_alpha.back();
    out.value = out.grid_value.back();
    return out;
  }

  out.grid_index = static_cast<Index>(best);
  out.alpha = out.grid_alpha[best];
  out.value = out.grid_value[best];
  out.at_boundary = (best == 0 || best + 1 == out.grid_alpha.size());

  if (!out.at_boundary && search.refine_tolerance > 0.0) {
    auto f = [&](double a) { return upre_value(a, in); };
    const double refined = detail::golden_section_log(f, out.grid_alpha[best - 1],
                                                      out.grid_alpha[best + 1],
                                                      search.refine_tolerance);
    const double fr = f(refined);
    if (fr <= out.value) {
      out.alpha = refined;
      out.value = fr;
    }
  }
  return out;
}

/// First-iteration parameter: factor * sigma_1.
inline double initial_alpha(const Vector& sigma, double factor = 50.0) {
  detail::require(sigma.size() >= 1, "initial_alpha: empty spectrum");
  detail::require(factor > 0.0, "initial_alpha: factor must be > 0");
  return factor * sigma.maxCoeff();
}

/// Spectrum-shape rule: (n/m)^exponent * sigma_1 / mean(sigma). Grows with the
/// subspace size because the mean drops as smaller values enter.
inline double initial_alpha_spectral(const Vector& sigma, Index n, Index m, double exponent = 3.5) {
  detail::require(sigma.size() >= 1, "initial_alpha: empty spectrum");
  detail::require(n >= 1 && m >= 1, "initial_alpha: problem dimensions must be positive");
  const double mean = sigma.mean();
  detail::require(mean > 0.0, "initial_alpha: spectrum has zero mean");
  return std::pow(static_cast<double>(n) / static_cast<double>(m), exponent) * sigma.maxCoeff() / mean;
}

/// Default truncation: count of leading singular values >= threshold * sigma_1,
/// i.e. the first index whose value falls below the threshold. A threshold of
/// zero keeps the whole spectrum.
inline Index tupre_truncation_index(const Vector& sigma, double threshold = 1e-3) {
  detail::require(sigma.size() >= 1, "tupre: empty spectrum");
  if (threshold <= 0.0) return sigma.size();
  const double cut = threshold * sigma(0);
  Index k = 0;
  while (k < sigma.size() && sigma(k) >= cut) ++k;
  return std::max<Index>(k, 1);
}

/// Truncation from Ritz convergence: the leading run of projected singular
/// values whose relative residual bound is at most `tol`. Each kept value is
/// then within tol * sigma_i of a singular value of the full matrix.
inline Index tupre_converged_index(const Vector& relative_residual, double tol = 1e-2) {
  detail::require(relative_residual.size() >= 1, "tupre: empty spectrum");
  detail::require(tol >= 0.0, "tupre: tolerance must be >= 0");
  Index k = 0;
  while (k < relative_residual.size() && relative_residual(k) <= tol) ++k;
  return std::max<Index>(k, 1);
}

/// UPRE minimized over the leading `trunc` entries of the spectrum only.
inline UpreMinimum truncated_upre(const UpreInput& in, Index trunc, const AlphaSearch& search = {}) {
  detail::require(trunc >= 1 && trunc <= in.size(),
                  "truncated_upre: truncation index " + std::to_string(trunc) +
                      " outside [1, " + std::to_string(in.size()) + "]");
  return minimize_upre(in.head(trunc), search);
}

}  // namespace gravinv
