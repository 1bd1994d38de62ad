#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "beamproj/problem.hpp"
#include "beamproj/rng.hpp"

namespace beamproj::testing {

inline ComplexVec real_vec(std::initializer_list<double> xs) {
  ComplexVec v(xs.size());
  std::size_t i = 0;
  for (double x : xs) v.set(i++, x);
  return v;
}

inline BeamVector real_beam(std::initializer_list<double> xs) { return BeamVector(real_vec(xs)); }

// Users share sigma^2 and gamma.
inline ProblemInstance make_instance(std::vector<ComplexVec> channels, double sigma_sq,
                                     double gamma) {
  const std::size_t m = channels.size();
  return ProblemInstance(std::move(channels), std::vector<double>(m, sigma_sq),
                         std::vector<double>(m, gamma));
}

inline ComplexVec random_vec(RandomStream& rng, std::size_t n) {
  ComplexVec v(n);
  for (std::size_t j = 0; j < n; ++j) v.set(j, rng.complex_normal());
  return v;
}

// Random sizes, gains and targets spread over 0-20 dB.
inline ProblemInstance random_instance(RandomStream& rng, std::size_t n, std::size_t m) {
  std::vector<ComplexVec> h;
  std::vector<double> sigma, gamma;
  for (std::size_t i = 0; i < m; ++i) {
    h.push_back(random_vec(rng, n));
    sigma.push_back(0.5 + rng.uniform());
    gamma.push_back(db_to_linear(20.0 * rng.uniform()));
  }
  return ProblemInstance(std::move(h), std::move(sigma), std::move(gamma));
}

inline BeamVector random_beam(RandomStream& rng, std::size_t n, double scale = 1.0) {
  return BeamVector(random_vec(rng, n).scaled(scale));
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// max_j |a_j - b_j| / max(max_j |b_j|, floor)
inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                          double floor = 1e-12) {
  double num = 0.0, den = floor;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num = std::max(num, std::abs(a[j] - b[j]));
    den = std::max(den, std::abs(b[j]));
  }
  return num / den;
}

}  // namespace beamproj::testing
