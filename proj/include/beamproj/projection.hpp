#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "beamproj/problem.hpp"

namespace beamproj {

// Both projections rescale w by
//   t = max_i sqrt(gamma_i sigma_i^2 / |h_i^H w|^2).
// IfInfeasible keeps t = 1 when w already satisfies every constraint; Always
// applies t unconditionally, landing on the boundary of the feasible set.
enum class ProjectionMode { IfInfeasible, Always };

struct ProjectionResult {
  double t = 1.0;
  BeamVector projected;
  // Constraint attaining the max; empty when IfInfeasible left w untouched.
  std::optional<std::size_t> active_index;
  ProjectionMode mode = ProjectionMode::Always;
};

ProjectionResult scale_if_infeasible(const ProblemInstance& inst, const BeamVector& w);
ProjectionResult scale_always(const ProblemInstance& inst, const BeamVector& w);
ProjectionResult project(const ProblemInstance& inst, const BeamVector& w, ProjectionMode mode);

// ||t w||^2 = max_i gamma_i sigma_i^2 ||w||^2 / |h_i^H w|^2. Invariant to any
// nonzero complex rescaling of w.
double projected_objective(const ProblemInstance& inst, const BeamVector& w);

struct ObjectiveGradient {
  double value = 0.0;
  std::vector<double> grad;  // length 2N, [d/d re(w); d/d im(w)]
  std::size_t active_index = 0;
  // Top two ratios within 1e-9 relative: grad is the smallest-index branch.
  bool tie = false;
};

// Gradient of projected_objective in the real parametrization,
//   grad = g_k (2x / q_k - ||w||^2 * 2 [re(H_k w); im(H_k w)] / q_k^2),
// with q_k = w^H H_k w, g_k = gamma_k sigma_k^2 and k the argmax.
ObjectiveGradient grad_projected_objective(const ProblemInstance& inst, const BeamVector& w);

// Loss ||t w||^2 under the IfInfeasible projection. The scale t is treated as
// a constant: gradient 2x when w is feasible, 2 t^2 x otherwise.
ObjectiveGradient grad_if_infeasible_objective(const ProblemInstance& inst, const BeamVector& w);

}  // namespace beamproj
