#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "beamproj/linalg.hpp"

namespace beamproj {

constexpr double kDefaultFeasibilityTol = 1e-9;

// Linear SNR target from a value in dB.
double db_to_linear(double db);

// One QoS-constrained power-minimization problem:
//   min ||w||^2  s.t.  |h_i^H w|^2 / sigma_i^2 >= gamma_i  for every user i.
// Immutable after construction. Users are indexed from 0.
class ProblemInstance {
 public:
  ProblemInstance(std::vector<ComplexVec> channels, std::vector<double> noise_vars,
                  std::vector<double> snr_targets);

  std::size_t n_antennas() const noexcept { return n_; }
  std::size_t n_users() const noexcept { return channels_.size(); }
  const ComplexVec& channel(std::size_t i) const { return channels_.at(i); }
  const std::vector<ComplexVec>& channels() const noexcept { return channels_; }
  double noise_var(std::size_t i) const { return noise_vars_.at(i); }
  double snr_target(std::size_t i) const { return snr_targets_.at(i); }
  std::span<const double> noise_vars() const noexcept { return noise_vars_; }
  std::span<const double> snr_targets() const noexcept { return snr_targets_; }
  // gamma_i * sigma_i^2, the minimum received power |h_i^H w|^2 for user i.
  double required_gain(std::size_t i) const { return required_.at(i); }

  friend bool operator==(const ProblemInstance& a, const ProblemInstance& b) {
    return a.channels_ == b.channels_ && a.noise_vars_ == b.noise_vars_ &&
           a.snr_targets_ == b.snr_targets_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<ComplexVec> channels_;
  std::vector<double> noise_vars_;
  std::vector<double> snr_targets_;
  std::vector<double> required_;
};

// Candidate beamformer. vec's [re; im] buffer is the real parametrization.
class BeamVector {
 public:
  BeamVector() = default;
  explicit BeamVector(ComplexVec v) : vec_(std::move(v)) {}
  static BeamVector from_real_params(std::span<const double> params) {
    return BeamVector(ComplexVec::from_params(params));
  }

  const ComplexVec& vec() const noexcept { return vec_; }
  ComplexVec& vec() noexcept { return vec_; }
  std::span<const double> real_params() const noexcept { return vec_.params(); }
  std::span<double> real_params() noexcept { return vec_.params(); }
  std::size_t size() const noexcept { return vec_.size(); }

  BeamVector scaled(double t) const { return BeamVector(vec_.scaled(t)); }

  friend bool operator==(const BeamVector&, const BeamVector&) = default;

 private:
  ComplexVec vec_;
};

// |h_i^H w|^2
double channel_gain(const ProblemInstance& inst, std::size_t i, const BeamVector& w);
// |h_i^H w|^2 / sigma_i^2
double snr(const ProblemInstance& inst, std::size_t i, const BeamVector& w);
// ||w||^2
double objective(const BeamVector& w);

// snr_i >= gamma_i (1 - tol) for all i.
bool is_feasible(const ProblemInstance& inst, const BeamVector& w,
                 double tol = kDefaultFeasibilityTol);

// Users with |snr_i - gamma_i| <= tol * gamma_i. Throws UsageError if w is
// infeasible.
std::vector<std::size_t> active_constraints(const ProblemInstance& inst, const BeamVector& w,
                                            double tol = kDefaultFeasibilityTol);

struct SingleUserOptimum {
  BeamVector w;
  double power = 0.0;
};

// Matched filter w* = sqrt(gamma sigma^2) / ||h||^2 * h. Requires M = 1.
SingleUserOptimum single_user_optimum(const ProblemInstance& inst);

// Network input layout: [re(h_1); im(h_1); ...; re(h_M); im(h_M)].
std::vector<double> channel_features(const ProblemInstance& inst);

}  // namespace beamproj
