#include "beamproj/projection.hpp"

#include <cmath>
#include <string>

#include "beamproj/errors.hpp"

namespace beamproj {

namespace {

constexpr double kTieGap = 1e-9;

struct RatioScan {
  std::vector<cplx> inner;  // h_i^H w
  std::vector<double> gain;  // |h_i^H w|^2
  std::size_t argmax = 0;
  double max_ratio = 0.0;
  double second_ratio = 0.0;
  bool feasible = true;  // gain_i >= gamma_i sigma_i^2 for all i
};

RatioScan scan(const ProblemInstance& inst, const BeamVector& w) {
  if (w.size() != inst.n_antennas()) throw UsageError("projection: beam vector length != N");
  const std::size_t m = inst.n_users();
  RatioScan s;
  s.inner.resize(m);
  s.gain.resize(m);
  bool have_second = false;
  for (std::size_t i = 0; i < m; ++i) {
    s.inner[i] = inner(inst.channel(i), w.vec());
    s.gain[i] = std::norm(s.inner[i]);
    const double ratio = inst.required_gain(i) / s.gain[i];
    if (s.gain[i] == 0.0 || !std::isfinite(ratio)) {
      throw DegenerateDirection(
          "projection undefined: h_" + std::to_string(i) + "^H w = 0", i);
    }
    if (s.gain[i] < inst.required_gain(i)) s.feasible = false;
    if (i == 0 || ratio > s.max_ratio) {
      if (i > 0) {
        s.second_ratio = s.max_ratio;
        have_second = true;
      }
      s.max_ratio = ratio;
      s.argmax = i;
    } else if (!have_second || ratio > s.second_ratio) {
      s.second_ratio = ratio;
      have_second = true;
    }
  }
  if (!have_second) s.second_ratio = -1.0;
  return s;
}

}  // namespace

ProjectionResult scale_if_infeasible(const ProblemInstance& inst, const BeamVector& w) {
  const RatioScan s = scan(inst, w);
  ProjectionResult r;
  r.mode = ProjectionMode::IfInfeasible;
  if (s.feasible) {
    r.t = 1.0;
    r.projected = w;
  } else {
    r.t = std::sqrt(s.max_ratio);
    r.projected = w.scaled(r.t);
    r.active_index = s.argmax;
  }
  return r;
}

ProjectionResult scale_always(const ProblemInstance& inst, const BeamVector& w) {
  const RatioScan s = scan(inst, w);
  ProjectionResult r;
  r.mode = ProjectionMode::Always;
  r.t = std::sqrt(s.max_ratio);
  r.projected = w.scaled(r.t);
  r.active_index = s.argmax;
  return r;
}

ProjectionResult project(const ProblemInstance& inst, const BeamVector& w, ProjectionMode mode) {
  return mode == ProjectionMode::Always ? scale_always(inst, w) : scale_if_infeasible(inst, w);
}

double projected_objective(const ProblemInstance& inst, const BeamVector& w) {
  return scan(inst, w).max_ratio * objective(w);
}

ObjectiveGradient grad_projected_objective(const ProblemInstance& inst, const BeamVector& w) {
  const RatioScan s = scan(inst, w);
  const std::size_t n = inst.n_antennas();
  const std::size_t k = s.argmax;
  const double q = s.gain[k];
  const double g = inst.required_gain(k);
  const double w2 = objective(w);

  ObjectiveGradient out;
  out.value = s.max_ratio * w2;
  out.active_index = k;
  out.tie = s.second_ratio >= 0.0 && (s.max_ratio - s.second_ratio) <= kTieGap * s.max_ratio;
  out.grad.resize(2 * n);

  // H_k w = h_k (h_k^H w)
  const ComplexVec& h = inst.channel(k);
  const cplx hw = s.inner[k];
  const auto x = w.real_params();
  const double a = 2.0 * g / q;
  const double b = 2.0 * g * w2 / (q * q);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx hkw = h[j] * hw;
    out.grad[j] = a * x[j] - b * hkw.real();
    out.grad[n + j] = a * x[n + j] - b * hkw.imag();
  }
  return out;
}

ObjectiveGradient grad_if_infeasible_objective(const ProblemInstance& inst, const BeamVector& w) {
  const RatioScan s = scan(inst, w);
  const double t2 = s.feasible ? 1.0 : s.max_ratio;
  ObjectiveGradient out;
  out.value = t2 * objective(w);
  out.active_index = s.argmax;
  out.tie = s.second_ratio >= 0.0 && (s.max_ratio - s.second_ratio) <= kTieGap * s.max_ratio;
  const auto x = w.real_params();
  out.grad.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out.grad[j] = 2.0 * t2 * x[j];
  return out;
}

}  // namespace beamproj
