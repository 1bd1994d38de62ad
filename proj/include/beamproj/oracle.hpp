#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "beamproj/problem.hpp"

namespace beamproj {

// Central differences, one coordinate at a time. Throws Error if f is not
// finite at a probe point.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double step = 1e-6);

struct OracleReport {
  std::string method;
  std::string instance_digest;
  double best_power = 0.0;
  BeamVector best_w;        // feasible
  std::size_t samples = 0;  // directions or grid points evaluated
  double resolution = 0.0;  // grid step (grid methods only)
  // Largest change of the objective across the grid cells next to the
  // minimizer; bounds how far best_power can sit above the true minimum.
  double slack = 0.0;
  double wall_seconds = 0.0;
};

// Uniform unit directions on the complex sphere, each rescaled by
// scale_always; reports the least power. Direction k comes from the stream
// (seed, Directions, k), so results do not depend on the channels' scale.
OracleReport random_direction_search(const ProblemInstance& inst, std::size_t n_samples,
                                     std::uint64_t seed);

constexpr double kDefaultGridResolution = 3.14159265358979323846 / 1e6;

// N = 2, real channels: sweeps w = (cos a, sin a) for a in [0, pi) with the
// given step and minimizes the scale-invariant projected objective.
OracleReport brute_force_min(const ProblemInstance& inst,
                             double grid_resolution = kDefaultGridResolution);

// N = 2, real channels, real w: exact minimum of the constrained problem by
// enumerating candidate active sets. A single active constraint i gives
// w = +-sqrt(g_i) h_i / ||h_i||^2; two active constraints give the
// intersection of the lines h_i . w = +-sqrt(g_i), h_j . w = +-sqrt(g_j).
OracleReport enumerate_active_sets(const ProblemInstance& inst);

// True if every channel has zero imaginary part.
bool has_real_channels(const ProblemInstance& inst);

}  // namespace beamproj
