#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beamproj/errors.hpp"
#include "beamproj/problem.hpp"
#include "support.hpp"

using namespace beamproj;
using namespace beamproj::testing;
using doctest::Approx;

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(make_instance({}, 1, 1), UsageError);
  CHECK_THROWS_AS(make_instance({real_vec({0, 0})}, 1, 1), UsageError);
  CHECK_THROWS_AS(make_instance({real_vec({1})}, 0, 1), UsageError);
  CHECK_THROWS_AS(make_instance({real_vec({1})}, 1, -1), UsageError);
  CHECK_THROWS_AS(make_instance({real_vec({1}), real_vec({1, 2})}, 1, 1), UsageError);
  CHECK_THROWS_AS(ProblemInstance({real_vec({1})}, {1, 1}, {1}), UsageError);
  const ProblemInstance inst = make_instance({real_vec({1, 2}), real_vec({0, 1})}, 2, 3);
  CHECK(inst.n_antennas() == 2);
  CHECK(inst.n_users() == 2);
  CHECK(inst.required_gain(1) == 6.0);
}

TEST_CASE("db_to_linear") {
  CHECK(db_to_linear(10.0) == Approx(10.0));
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(db_to_linear(20.0) == Approx(100.0));
}

TEST_CASE("snr examples") {
  CHECK(snr(make_instance({real_vec({1})}, 1, 1), 0, real_beam({2})) == Approx(4.0));
  CHECK(snr(make_instance({real_vec({1, 0})}, 1, 1), 0, real_beam({0, 1})) == 0.0);
  CHECK(snr(make_instance({real_vec({1, 1})}, 2, 1), 0, real_beam({1, 1})) == Approx(2.0));
  const ProblemInstance inst = make_instance({real_vec({1})}, 1, 1);
  CHECK_THROWS_AS(snr(inst, 1, real_beam({1})), UsageError);
  CHECK_THROWS_AS(snr(inst, 0, real_beam({1, 1})), UsageError);
}

TEST_CASE("objective examples") {
  CHECK(objective(real_beam({0, 0})) == 0.0);
  CHECK(objective(BeamVector(ComplexVec{{1, 0}, {0, 1}})) == 2.0);
  CHECK(objective(BeamVector(ComplexVec{{3, 4}})) == 25.0);
}

TEST_CASE("is_feasible examples") {
  const ProblemInstance inst = make_instance({real_vec({1})}, 1, 4);
  CHECK(is_feasible(inst, real_beam({2})));
  CHECK_FALSE(is_feasible(inst, real_beam({1})));
  CHECK(is_feasible(inst, real_beam({3})));
  CHECK(is_feasible(inst, real_beam({2.0 * (1.0 - 1e-10)})));
  CHECK_FALSE(is_feasible(inst, real_beam({2.0 * (1.0 - 1e-8)})));
  CHECK_THROWS_AS(is_feasible(inst, real_beam({2}), -1.0), UsageError);
}

TEST_CASE("active_constraints examples") {
  const ProblemInstance one = make_instance({real_vec({1})}, 1, 4);
  CHECK(active_constraints(one, real_beam({2})) == std::vector<std::size_t>{0});
  CHECK(active_constraints(one, real_beam({10})).empty());
  const ProblemInstance two = make_instance({real_vec({1}), real_vec({2})}, 1, 1);
  CHECK(active_constraints(two, real_beam({1})) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(active_constraints(one, real_beam({1})), UsageError);
}

TEST_CASE("single_user_optimum examples") {
  SUBCASE("h = [1, 1]") {
    const SingleUserOptimum o = single_user_optimum(make_instance({real_vec({1, 1})}, 1, 1));
    CHECK(o.power == Approx(0.5));
    CHECK(o.w.vec()[0].real() == Approx(0.5));
    CHECK(o.w.vec()[1].real() == Approx(0.5));
  }
  SUBCASE("h = [2], gamma 4") {
    const SingleUserOptimum o = single_user_optimum(make_instance({real_vec({2})}, 1, 4));
    CHECK(o.power == Approx(1.0));
    CHECK(o.w.vec()[0].real() == Approx(1.0));
  }
  SUBCASE("h = [1]") {
    const SingleUserOptimum o = single_user_optimum(make_instance({real_vec({1})}, 1, 1));
    CHECK(o.power == Approx(1.0));
  }
  CHECK_THROWS_AS(single_user_optimum(make_instance({real_vec({1}), real_vec({2})}, 1, 1)),
                  UsageError);
}

TEST_CASE("single_user_optimum is active and never beaten by random feasible points") {
  RandomStream rng(9, StreamDomain::Perturbation, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    const ProblemInstance inst = random_instance(rng, n, 1);
    const SingleUserOptimum o = single_user_optimum(inst);
    CHECK(active_constraints(inst, o.w) == std::vector<std::size_t>{0});
    int feasible = 0;
    for (int k = 0; k < 1000; ++k) {
      const BeamVector w = random_beam(rng, n, 3.0 * std::sqrt(o.power));
      if (!is_feasible(inst, w)) continue;
      ++feasible;
      CHECK(objective(w) >= o.power - 1e-9);
    }
    CHECK(feasible > 0);
  }
}

TEST_CASE("snr is homogeneous of degree two") {
  RandomStream rng(10, StreamDomain::Perturbation, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(6), m = 1 + rng.below(4);
    const ProblemInstance inst = random_instance(rng, n, m);
    const BeamVector w = random_beam(rng, n);
    const cplx c = rng.complex_normal() * 3.0;
    const BeamVector cw(w.vec().scaled(c));
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(rel_err(snr(inst, i, cw), std::norm(c) * snr(inst, i, w)) < 1e-12);
    }
  }
}

TEST_CASE("BeamVector views share storage") {
  BeamVector w(ComplexVec{{1, 2}, {3, 4}});
  w.real_params()[1] = 7.0;
  CHECK(w.vec()[1] == cplx(7, 4));  // params are [re; im]
  CHECK(BeamVector::from_real_params(w.real_params()) == w);
}

TEST_CASE("channel_features layout") {
  const ProblemInstance inst =
      make_instance({ComplexVec{{1, 2}, {3, 4}}, ComplexVec{{5, 6}, {7, 8}}}, 1, 1);
  CHECK(channel_features(inst) == std::vector<double>{1, 3, 2, 4, 5, 7, 6, 8});
}
