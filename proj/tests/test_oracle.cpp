#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beamproj/data_io.hpp"
#include "beamproj/errors.hpp"
#include "beamproj/oracle.hpp"
#include "beamproj/projection.hpp"
#include "support.hpp"

using namespace beamproj;
using namespace beamproj::testing;
using doctest::Approx;

TEST_CASE("finite_diff_grad examples") {
  const auto sq = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const auto g = finite_diff_grad(sq, std::vector<double>{1, 2});
  CHECK(std::abs(g[0] - 2.0) < 1e-8);
  CHECK(std::abs(g[1] - 4.0) < 1e-8);
  const auto c = finite_diff_grad([](std::span<const double>) { return 3.0; }, std::vector<double>{1, 2, 3});
  CHECK(c == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(finite_diff_grad(sq, std::vector<double>{1}, 0.0), UsageError);
  CHECK_THROWS_AS(
      finite_diff_grad([](std::span<const double> x) { return x[0] > 0.0 ? std::nan("") : 0.0; },
                       std::vector<double>{0.0}),
      Error);
}

TEST_CASE("finite differences match grad_projected_objective") {
  RandomStream rng(1, StreamDomain::Perturbation, 0);
  const ProblemInstance inst = random_instance(rng, 4, 1);
  const BeamVector w = random_beam(rng, 4);
  const std::vector<double> x(w.real_params().begin(), w.real_params().end());
  const auto fd = finite_diff_grad(
      [&](std::span<const double> p) { return projected_objective(inst, BeamVector::from_real_params(p)); },
      x);
  CHECK(max_rel_err(grad_projected_objective(inst, w).grad, fd) <= 1e-5);
}

TEST_CASE("random_direction_search") {
  RandomStream rng(2, StreamDomain::Perturbation, 0);
  SUBCASE("single user approaches the matched filter") {
    for (int trial = 0; trial < 3; ++trial) {
      const std::size_t n = 2 + rng.below(3);
      const ProblemInstance inst = random_instance(rng, n, 1);
      const OracleReport r = random_direction_search(inst, 100000, 4);
      const double opt = single_user_optimum(inst).power;
      CHECK(r.best_power >= opt * (1.0 - 1e-9));
      CHECK(r.best_power <= 1.10 * opt);
      CHECK(is_feasible(inst, r.best_w));
      CHECK(r.best_power == objective(r.best_w));
      CHECK(r.method == "random-direction");
      CHECK(r.instance_digest == instance_digest(inst));
    }
  }
  SUBCASE("monotone in samples and seeded") {
    const ProblemInstance inst = random_instance(rng, 3, 4);
    const OracleReport one = random_direction_search(inst, 1, 8);
    const OracleReport many = random_direction_search(inst, 1000, 8);
    CHECK(many.best_power <= one.best_power);
    CHECK(random_direction_search(inst, 1000, 8).best_w == many.best_w);
    CHECK_THROWS_AS(random_direction_search(inst, 0, 8), UsageError);
  }
  SUBCASE("scaling channels by c scales the power by 1/c^2") {
    const ProblemInstance inst = random_instance(rng, 3, 3);
    std::vector<ComplexVec> scaled;
    for (const ComplexVec& h : inst.channels()) scaled.push_back(h.scaled(2.0));
    const ProblemInstance big(scaled, {inst.noise_vars().begin(), inst.noise_vars().end()},
                              {inst.snr_targets().begin(), inst.snr_targets().end()});
    const double a = random_direction_search(inst, 500, 3).best_power;
    const double b = random_direction_search(big, 500, 3).best_power;
    CHECK(b == a / 4.0);
  }
}

TEST_CASE("brute_force_min examples") {
  SUBCASE("single user along (1, 1)") {
    const OracleReport r = brute_force_min(make_instance({real_vec({1, 1})}, 1, 1));
    CHECK(r.best_power == Approx(0.5).epsilon(1e-9));
    const double angle = std::atan2(r.best_w.vec()[1].real(), r.best_w.vec()[0].real());
    CHECK(std::abs(std::remainder(angle - std::numbers::pi / 4, std::numbers::pi)) < 1e-5);
  }
  SUBCASE("two orthogonal users meet at pi/4 with power 2") {
    const ProblemInstance inst = make_instance({real_vec({1, 0}), real_vec({0, 1})}, 1, 1);
    const OracleReport r = brute_force_min(inst);
    CHECK(r.best_power == Approx(2.0).epsilon(1e-9));
    CHECK(active_constraints(inst, r.best_w).size() >= 1);
    // A coarse grid through the near-degenerate angles 0 and pi/2 still finds it.
    const OracleReport coarse = brute_force_min(inst, std::numbers::pi / 4);
    CHECK(coarse.best_power == Approx(2.0));
  }
  SUBCASE("errors") {
    const ProblemInstance inst = make_instance({real_vec({1, 1})}, 1, 1);
    CHECK_THROWS_AS(brute_force_min(inst, 0.0), UsageError);
    CHECK_THROWS_AS(brute_force_min(make_instance({real_vec({1, 1, 1})}, 1, 1)), UsageError);
    CHECK_THROWS_AS(brute_force_min(make_instance({ComplexVec{{1, 1}, {0, 0}}}, 1, 1)), UsageError);
  }
}

TEST_CASE("grid minimum agrees with exact active-set enumeration") {
  DatasetSpec s;
  s.n_antennas = 2;
  s.n_users = 5;
  s.channel_model = ChannelModel::AbsGaussian;
  s.seed = 5;
  for (std::size_t k = 0; k < 10; ++k) {
    const ProblemInstance inst = gen_instance(s, k);
    const OracleReport grid = brute_force_min(inst);
    const OracleReport exact = enumerate_active_sets(inst);
    CHECK(is_feasible(inst, exact.best_w));
    CHECK(is_feasible(inst, grid.best_w));
    CHECK(grid.best_power >= exact.best_power * (1.0 - 1e-9));
    CHECK(grid.best_power <= exact.best_power + grid.slack + 1e-12 * exact.best_power);
  }
}
