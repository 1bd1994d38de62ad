#include "beamproj/oracle.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "beamproj/data_io.hpp"
#include "beamproj/errors.hpp"
#include "beamproj/parallel.hpp"
#include "beamproj/projection.hpp"
#include "beamproj/rng.hpp"

namespace beamproj {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_two_antenna_real(const ProblemInstance& inst, const char* who) {
  if (inst.n_antennas() != 2) throw UsageError(std::string(who) + ": requires N = 2");
  if (!has_real_channels(inst)) throw UsageError(std::string(who) + ": requires real channels");
}

// Projected objective of a real 2-vector; +inf when some h_i . w = 0.
double real2_projected(const ProblemInstance& inst, double c, double s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.n_users(); ++i) {
    const auto h = inst.channel(i).re();
    const double d = h[0] * c + h[1] * s;
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, inst.required_gain(i) / (d * d));
  }
  return worst * (c * c + s * s);
}

BeamVector real2_vector(double a, double b) {
  ComplexVec v(2);
  v.set(0, a);
  v.set(1, b);
  return BeamVector(std::move(v));
}

}  // namespace

bool has_real_channels(const ProblemInstance& inst) {
  for (const ComplexVec& h : inst.channels()) {
    for (double v : h.im()) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double step) {
  if (!(step > 0.0)) throw UsageError("finite_diff_grad: step must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + step;
    const double fp = f(probe);
    probe[j] = x[j] - step;
    const double fm = f(probe);
    probe[j] = x[j];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error("finite_diff_grad: non-finite evaluation at coordinate " + std::to_string(j));
    }
    g[j] = (fp - fm) / (2.0 * step);
  }
  return g;
}

OracleReport random_direction_search(const ProblemInstance& inst, std::size_t n_samples,
                                     std::uint64_t seed) {
  if (n_samples == 0) throw UsageError("random_direction_search: need at least one sample");
  const auto t0 = Clock::now();
  const std::size_t n = inst.n_antennas();

  struct Best {
    double power = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
  };
  constexpr std::size_t kChunks = 16;
  std::vector<Best> best(kChunks);
  const std::size_t chunk_len = (n_samples + kChunks - 1) / kChunks;

  auto direction = [&](std::size_t k) {
    RandomStream rng(seed, StreamDomain::Directions, k);
    ComplexVec d(n);
    for (std::size_t j = 0; j < n; ++j) d.set(j, rng.complex_normal());
    const double norm = std::sqrt(norm_sq(d));
    return BeamVector(d.scaled(1.0 / norm));
  };

  parallel_for(kChunks, [&](std::size_t c) {
    const std::size_t lo = std::min(n_samples, c * chunk_len);
    const std::size_t hi = std::min(n_samples, lo + chunk_len);
    for (std::size_t k = lo; k < hi; ++k) {
      double power;
      try {
        power = projected_objective(inst, direction(k));
      } catch (const DegenerateDirection&) {
        continue;
      }
      if (power < best[c].power) best[c] = {power, k};
    }
  });
  Best overall;
  for (const Best& b : best) {
    if (b.power < overall.power) overall = b;
  }
  if (!std::isfinite(overall.power)) throw Error("random_direction_search: all samples degenerate");

  OracleReport r;
  r.method = "random-direction";
  r.instance_digest = instance_digest(inst);
  r.best_w = scale_always(inst, direction(overall.index)).projected;
  r.best_power = objective(r.best_w);
  r.samples = n_samples;
  r.wall_seconds = elapsed(t0);
  return r;
}

OracleReport brute_force_min(const ProblemInstance& inst, double grid_resolution) {
  if (!(grid_resolution > 0.0)) throw UsageError("brute_force_min: resolution must be positive");
  require_two_antenna_real(inst, "brute_force_min");
  const auto t0 = Clock::now();
  const auto steps = static_cast<std::size_t>(std::ceil(std::numbers::pi / grid_resolution));

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  auto value = [&](std::size_t k) {
    const double a = static_cast<double>(k) * grid_resolution;
    return real2_projected(inst, std::cos(a), std::sin(a));
  };
  for (std::size_t k = 0; k < steps; ++k) {
    const double v = value(k);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  if (!std::isfinite(best)) throw Error("brute_force_min: every grid direction degenerate");

  // The direction grid wraps: angle pi is the same line as angle 0.
  const double left = value(best_k == 0 ? steps - 1 : best_k - 1);
  const double right = value(best_k + 1 == steps ? 0 : best_k + 1);
  double slack = 0.0;
  if (std::isfinite(left)) slack = std::max(slack, left - best);
  if (std::isfinite(right)) slack = std::max(slack, right - best);

  const double a = static_cast<double>(best_k) * grid_resolution;
  OracleReport r;
  r.method = "brute-force-grid";
  r.instance_digest = instance_digest(inst);
  r.best_w = scale_always(inst, real2_vector(std::cos(a), std::sin(a))).projected;
  r.best_power = objective(r.best_w);
  r.samples = steps;
  r.resolution = grid_resolution;
  r.slack = slack;
  r.wall_seconds = elapsed(t0);
  return r;
}

OracleReport enumerate_active_sets(const ProblemInstance& inst) {
  require_two_antenna_real(inst, "enumerate_active_sets");
  const auto t0 = Clock::now();
  const std::size_t m = inst.n_users();

  double best = std::numeric_limits<double>::infinity();
  double best_a = 0.0, best_b = 0.0;
  std::size_t candidates = 0;
  auto consider = [&](double a, double b) {
    ++candidates;
    const BeamVector w = real2_vector(a, b);
    if (!is_feasible(inst, w)) return;
    const double p = a * a + b * b;
    if (p < best) {
      best = p;
      best_a = a;
      best_b = b;
    }
  };

  for (std::size_t i = 0; i < m; ++i) {
    const auto h = inst.channel(i).re();
    const double h2 = h[0] * h[0] + h[1] * h[1];
    const double scale = std::sqrt(inst.required_gain(i)) / h2;
    consider(scale * h[0], scale * h[1]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto hi = inst.channel(i).re();
      const auto hj = inst.channel(j).re();
      const double det = hi[0] * hj[1] - hi[1] * hj[0];
      if (std::abs(det) <= 1e-14 * std::sqrt((hi[0] * hi[0] + hi[1] * hi[1]) *
                                             (hj[0] * hj[0] + hj[1] * hj[1]))) {
        continue;
      }
      const double ri = std::sqrt(inst.required_gain(i));
      const double rj = std::sqrt(inst.required_gain(j));
      // (w, -w) give equal power, so one sign of the first right-hand side suffices.
      for (double sj : {1.0, -1.0}) {
        const double bi = ri, bj = sj * rj;
        const double a = (bi * hj[1] - hi[1] * bj) / det;
        const double b = (hi[0] * bj - bi * hj[0]) / det;
        // Exact intersections can miss feasibility by rounding; nudge outward.
        const double fix = std::max(1.0, std::sqrt(std::max(
                                             {inst.required_gain(i) / std::pow(hi[0] * a + hi[1] * b, 2),
                                              inst.required_gain(j) / std::pow(hj[0] * a + hj[1] * b, 2)})));
        consider(fix * a, fix * b);
      }
    }
  }
  if (!std::isfinite(best)) throw Error("enumerate_active_sets: no feasible candidate");

  OracleReport r;
  r.method = "active-set-enumeration";
  r.instance_digest = instance_digest(inst);
  r.best_w = real2_vector(best_a, best_b);
  r.best_power = best;
  r.samples = candidates;
  r.wall_seconds = elapsed(t0);
  return r;
}

}  // namespace beamproj
