#include "beamproj/problem.hpp"

#include <cmath>
#include <string>

#include "beamproj/errors.hpp"

namespace beamproj {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

ProblemInstance::ProblemInstance(std::vector<ComplexVec> channels, std::vector<double> noise_vars,
                                 std::vector<double> snr_targets)
    : channels_(std::move(channels)),
      noise_vars_(std::move(noise_vars)),
      snr_targets_(std::move(snr_targets)) {
  if (channels_.empty()) throw UsageError("ProblemInstance: need at least one user");
  if (noise_vars_.size() != channels_.size() || snr_targets_.size() != channels_.size()) {
    throw UsageError("ProblemInstance: per-user arrays must all have length M");
  }
  n_ = channels_.front().size();
  if (n_ == 0) throw UsageError("ProblemInstance: need at least one antenna");
  required_.resize(channels_.size());
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const std::string who = "user " + std::to_string(i);
    if (channels_[i].size() != n_) {
      throw UsageError("ProblemInstance: channel length mismatch for " + who);
    }
    if (!channels_[i].all_finite()) throw UsageError("ProblemInstance: non-finite channel, " + who);
    if (norm_sq(channels_[i]) <= 0.0) {
      throw UsageError("ProblemInstance: zero channel makes the problem infeasible, " + who);
    }
    if (!(noise_vars_[i] > 0.0) || !std::isfinite(noise_vars_[i])) {
      throw UsageError("ProblemInstance: noise variance must be positive, " + who);
    }
    if (!(snr_targets_[i] > 0.0) || !std::isfinite(snr_targets_[i])) {
      throw UsageError("ProblemInstance: SNR target must be positive, " + who);
    }
    required_[i] = snr_targets_[i] * noise_vars_[i];
  }
}

double channel_gain(const ProblemInstance& inst, std::size_t i, const BeamVector& w) {
  if (i >= inst.n_users()) throw UsageError("user index out of range");
  if (w.size() != inst.n_antennas()) throw UsageError("beam vector length != N");
  return std::norm(inner(inst.channel(i), w.vec()));
}

double snr(const ProblemInstance& inst, std::size_t i, const BeamVector& w) {
  return channel_gain(inst, i, w) / inst.noise_var(i);
}

double objective(const BeamVector& w) { return norm_sq(w.vec()); }

bool is_feasible(const ProblemInstance& inst, const BeamVector& w, double tol) {
  if (tol < 0.0) throw UsageError("is_feasible: tolerance must be non-negative");
  for (std::size_t i = 0; i < inst.n_users(); ++i) {
    if (!(snr(inst, i, w) >= inst.snr_target(i) * (1.0 - tol))) return false;
  }
  return true;
}

std::vector<std::size_t> active_constraints(const ProblemInstance& inst, const BeamVector& w,
                                            double tol) {
  if (!is_feasible(inst, w, tol)) throw UsageError("active_constraints: w is infeasible");
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < inst.n_users(); ++i) {
    const double gamma = inst.snr_target(i);
    if (std::abs(snr(inst, i, w) - gamma) <= tol * gamma) active.push_back(i);
  }
  return active;
}

SingleUserOptimum single_user_optimum(const ProblemInstance& inst) {
  if (inst.n_users() != 1) throw UsageError("single_user_optimum: requires exactly one user");
  const ComplexVec& h = inst.channel(0);
  const double h2 = norm_sq(h);
  const double scale = std::sqrt(inst.required_gain(0)) / h2;
  return {BeamVector(h.scaled(scale)), inst.required_gain(0) / h2};
}

std::vector<double> channel_features(const ProblemInstance& inst) {
  const std::size_t n = inst.n_antennas();
  std::vector<double> x;
  x.reserve(2 * n * inst.n_users());
  for (const ComplexVec& h : inst.channels()) {
    x.insert(x.end(), h.re().begin(), h.re().end());
    x.insert(x.end(), h.im().begin(), h.im().end());
  }
  return x;
}

}  // namespace beamproj
