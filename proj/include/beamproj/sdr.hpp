#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "beamproj/linalg.hpp"
#include "beamproj/problem.hpp"

namespace beamproj {

struct SdrOptions {
  double tol = 1e-6;       // relative primal and dual residual
  int max_iters = 20000;
  double rho = 1.0;        // initial penalty
  bool adaptive_rho = true;
};

struct SdrResult {
  HermitianMat w_star;      // PSD
  double lower_bound = 0.0;  // trace(w_star)
  int solver_iters = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  // Certified dual lower bound and |trace - dual| / trace at the last check.
  double dual_bound = 0.0;
  double duality_gap = 0.0;

  // Filled by gaussian randomization.
  std::optional<BeamVector> best_w;
  std::optional<double> upper_bound;
  std::size_t randomization_samples = 0;
};

// Relaxation  min tr(W)  s.t.  h_i^H W h_i >= gamma_i sigma_i^2,  W PSD,
// solved by ADMM over x = (W, s) in the affine set {A(W) - s = b} and
// z = (Z, t) in PSD x R^M_+. The affine step is an exact projection through
// the Gram system (G + I) nu = r, G_ij = |h_i^H h_j|^2; the cone step is
// psd_project plus clamping. Converged when the relative primal and dual
// residuals, the worst relative constraint shortfall of w_star and the gap to
// the dual certificate are all within tol. Non-convergence is reported
// through `converged`; see require_converged.
SdrResult solve_sdr(const ProblemInstance& inst, const SdrOptions& opts = {});

// Throws SdrNotConverged carrying the final residuals.
void require_converged(const SdrResult& result);

struct RandomizationResult {
  BeamVector best_w;        // always-projected, feasible
  double upper_bound = 0.0;  // ||best_w||^2
  std::size_t best_index = 0;
  std::size_t degenerate_samples = 0;
};

constexpr std::size_t kDefaultRandomizations = 100000;

// Draws w = U sqrt(Lambda) z with z circularly-symmetric complex normal,
// rescales each sample with scale_always and keeps the least power (ties to
// the lowest sample index). Sample k uses the stream (seed, Randomization, k).
RandomizationResult gaussian_randomize(const ProblemInstance& inst, const HermitianMat& w_star,
                                       std::size_t count = kDefaultRandomizations,
                                       std::uint64_t seed = 0);

// solve_sdr followed by gaussian_randomize, filling the optional fields.
SdrResult solve_sdr_randomized(const ProblemInstance& inst, const SdrOptions& opts,
                               std::size_t count, std::uint64_t seed);

}  // namespace beamproj
