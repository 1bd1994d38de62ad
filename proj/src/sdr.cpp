#include "beamproj/sdr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "beamproj/errors.hpp"
#include "beamproj/parallel.hpp"
#include "beamproj/projection.hpp"
#include "beamproj/rng.hpp"

namespace beamproj {

namespace {

constexpr int kRhoInterval = 20;
constexpr int kRhoHorizon = 2000;

// h^H W h
double lifted_gain(const HermitianMat& w, const ComplexVec& h) {
  const std::size_t n = w.dim();
  cplx acc{};
  for (std::size_t i = 0; i < n; ++i) {
    cplx row{};
    for (std::size_t j = 0; j < n; ++j) row += w(i, j) * h[j];
    acc += std::conj(h[i]) * row;
  }
  return acc.real();
}

double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Dual of the scaled relaxation: max beta^T lambda s.t.
// sum_i lambda_i g_i g_i^H <= I, lambda >= 0. The slack multipliers give
// lambda = -rho * us; dividing by the largest eigenvalue of the weighted sum
// makes them dual feasible, so the result is a valid lower bound.
double certified_bound(const std::vector<ComplexVec>& g, const std::vector<double>& beta,
                       double rho, const std::vector<double>& us) {
  HermitianMat s(g.front().size());
  double value = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lambda = std::max(0.0, -rho * us[i]);
    s.add_outer(g[i], lambda);
    value += lambda * beta[i];
  }
  const double top = eigh(s).values.front();
  return top > 0.0 ? value / std::max(1.0, top) : 0.0;
}

}  // namespace

SdrResult solve_sdr(const ProblemInstance& inst, const SdrOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_iters < 1 || !(opts.rho > 0.0)) {
    throw UsageError("solve_sdr: invalid options");
  }
  const std::size_t n = inst.n_antennas();
  const std::size_t m = inst.n_users();

  // Solve for V = W / c with c = max_i b_i / ||h_i||^2, the largest
  // single-user bound, and unit-norm constraint rows:
  //   g_i^H V g_i >= beta_i,  g_i = h_i / ||h_i||,  beta_i = b_i / (c ||h_i||^2).
  // The scaled optimum is O(1), every beta_i lies in (0, 1] and the Gram
  // matrix below has unit diagonal before the identity shift.
  double c = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    c = std::max(c, inst.required_gain(i) / norm_sq(inst.channel(i)));
  }
  std::vector<ComplexVec> g;
  std::vector<double> beta;
  for (std::size_t i = 0; i < m; ++i) {
    const double h2 = norm_sq(inst.channel(i));
    g.push_back(inst.channel(i).scaled(1.0 / std::sqrt(h2)));
    beta.push_back(inst.required_gain(i) / (c * h2));
  }
  Eigen::MatrixXd gram(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double gij = std::norm(inner(g[i], g[j]));
      gram(i, j) = gij;
      gram(j, i) = gij;
    }
    gram(i, i) += 1.0;
  }
  const Eigen::LLT<Eigen::MatrixXd> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) throw Error("solve_sdr: Gram factorization failed");

  double rho = opts.rho;
  HermitianMat z(n), u(n);
  std::vector<double> t(m, 0.0), us(m, 0.0);
  const HermitianMat eye = HermitianMat::identity(n);
  Eigen::VectorXd r(m);

  SdrResult result;
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    // Affine step: project (Z - U - I/rho, t - us) onto {A(W) - s = b}.
    HermitianMat w = z - u - (1.0 / rho) * eye;
    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = t[i] - us[i];
      r(static_cast<Eigen::Index>(i)) = lifted_gain(w, g[i]) - s[i] - beta[i];
    }
    const Eigen::VectorXd nu = gram_llt.solve(r);
    for (std::size_t i = 0; i < m; ++i) {
      const double v = nu(static_cast<Eigen::Index>(i));
      w.add_outer(g[i], -v);
      s[i] += v;
    }

    // Cone step.
    const HermitianMat z_prev = z;
    const std::vector<double> t_prev = t;
    z = psd_project(w + u);
    for (std::size_t i = 0; i < m; ++i) t[i] = std::max(s[i] + us[i], 0.0);

    // Dual update and residuals.
    const HermitianMat gap = w - z;
    u += gap;
    std::vector<double> gap_s(m), dz_s(m);
    for (std::size_t i = 0; i < m; ++i) {
      gap_s[i] = s[i] - t[i];
      us[i] += gap_s[i];
      dz_s[i] = t[i] - t_prev[i];
    }
    const double primal = std::sqrt(std::pow(gap.frobenius_norm(), 2) + sq_norm(gap_s));
    const double dual =
        rho * std::sqrt(std::pow((z - z_prev).frobenius_norm(), 2) + sq_norm(dz_s));
    const double x_norm = std::sqrt(std::pow(w.frobenius_norm(), 2) + sq_norm(s));
    const double z_norm = std::sqrt(std::pow(z.frobenius_norm(), 2) + sq_norm(t));
    const double y_norm = rho * std::sqrt(std::pow(u.frobenius_norm(), 2) + sq_norm(us));

    result.solver_iters = iter;
    result.primal_residual = primal / std::max({1.0, x_norm, z_norm});
    result.dual_residual = dual / std::max(1.0, y_norm);
    if (result.primal_residual <= opts.tol && result.dual_residual <= opts.tol) {
      // Residuals alone can leave Z a few tol short of the constraints, so
      // also require near-feasibility and a matching dual certificate.
      const double lb = certified_bound(g, beta, rho, us);
      double violation = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        violation = std::max(violation, (beta[i] - lifted_gain(z, g[i])) / beta[i]);
      }
      const double tr = z.trace();
      result.dual_bound = c * lb;
      result.duality_gap = std::abs(tr - lb) / std::max(tr, 1e-300);
      if (violation <= opts.tol && result.duality_gap <= opts.tol) {
        result.converged = true;
        break;
      }
    }

    // Rebalancing every iteration makes the iterates oscillate; adapt
    // occasionally and then leave rho fixed so convergence is not disturbed.
    if (opts.adaptive_rho && iter % kRhoInterval == 0 && iter <= kRhoHorizon) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u *= 0.5;
        for (double& v : us) v *= 0.5;
      } else if (dual > 10.0 * primal) {
        rho *= 0.5;
        u *= 2.0;
        for (double& v : us) v *= 2.0;
      }
    }
  }

  z *= c;
  result.lower_bound = z.trace();
  result.w_star = std::move(z);
  return result;
}

void require_converged(const SdrResult& result) {
  if (!result.converged) {
    throw SdrNotConverged("SDR solver did not reach the residual tolerance",
                          result.primal_residual, result.dual_residual);
  }
}

RandomizationResult gaussian_randomize(const ProblemInstance& inst, const HermitianMat& w_star,
                                       std::size_t count, std::uint64_t seed) {
  const std::size_t n = inst.n_antennas();
  const std::size_t m = inst.n_users();
  if (w_star.dim() != n) throw UsageError("gaussian_randomize: W has wrong dimension");
  if (count == 0) throw UsageError("gaussian_randomize: count must be positive");

  const EigenDecomposition eig = eigh(w_star);
  if (eig.values.front() <= 0.0) throw UsageError("gaussian_randomize: W has no positive part");
  if (eig.values.back() < -1e-7 * std::max(1.0, eig.values.front())) {
    throw UsageError("gaussian_randomize: W is not PSD");
  }
  // Columns sqrt(lambda_j) u_j for the numerically nonzero spectrum.
  std::vector<ComplexVec> factor;
  for (std::size_t j = 0; j < n; ++j) {
    if (eig.values[j] <= 1e-12 * eig.values.front()) break;
    factor.push_back(eig.column(j).scaled(std::sqrt(eig.values[j])));
  }

  struct ChunkBest {
    double power = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    std::size_t degenerate = 0;
  };
  constexpr std::size_t kChunks = 16;
  std::vector<ChunkBest> best(kChunks);
  const std::size_t chunk_len = (count + kChunks - 1) / kChunks;

  auto sample = [&](std::size_t k, std::vector<cplx>& w) {
    RandomStream rng(seed, StreamDomain::Randomization, k);
    std::fill(w.begin(), w.end(), cplx{});
    for (const ComplexVec& col : factor) {
      const cplx zk = rng.complex_normal();
      for (std::size_t i = 0; i < n; ++i) w[i] += zk * col[i];
    }
  };

  parallel_for(kChunks, [&](std::size_t c) {
    std::vector<cplx> w(n);
    const std::size_t lo = std::min(count, c * chunk_len);
    const std::size_t hi = std::min(count, lo + chunk_len);
    for (std::size_t k = lo; k < hi; ++k) {
      sample(k, w);
      double w2 = 0.0;
      for (const cplx& v : w) w2 += std::norm(v);
      double worst = 0.0;
      bool degenerate = false;
      for (std::size_t i = 0; i < m; ++i) {
        const ComplexVec& h = inst.channel(i);
        cplx s{};
        for (std::size_t j = 0; j < n; ++j) s += std::conj(h[j]) * w[j];
        const double g = std::norm(s);
        if (g == 0.0) {
          degenerate = true;
          break;
        }
        worst = std::max(worst, inst.required_gain(i) / g);
      }
      if (degenerate || !std::isfinite(worst)) {
        ++best[c].degenerate;
        continue;
      }
      const double power = worst * w2;
      if (power < best[c].power) best[c] = {power, k, best[c].degenerate};
    }
  });

  ChunkBest overall;
  std::size_t degenerate = 0;
  for (const ChunkBest& cb : best) {
    degenerate += cb.degenerate;
    if (cb.power < overall.power) overall = cb;
  }
  if (!std::isfinite(overall.power)) throw Error("gaussian_randomize: every sample degenerate");

  std::vector<cplx> w(n);
  sample(overall.index, w);
  ComplexVec wv(n);
  for (std::size_t i = 0; i < n; ++i) wv.set(i, w[i]);
  ProjectionResult p = scale_always(inst, BeamVector(std::move(wv)));

  RandomizationResult out;
  out.upper_bound = objective(p.projected);
  out.best_w = std::move(p.projected);
  out.best_index = overall.index;
  out.degenerate_samples = degenerate;
  return out;
}

SdrResult solve_sdr_randomized(const ProblemInstance& inst, const SdrOptions& opts,
                               std::size_t count, std::uint64_t seed) {
  SdrResult result = solve_sdr(inst, opts);
  RandomizationResult rnd = gaussian_randomize(inst, result.w_star, count, seed);
  result.best_w = std::move(rnd.best_w);
  result.upper_bound = rnd.upper_bound;
  result.randomization_samples = count;
  return result;
}

}  // namespace beamproj
