#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beamproj/data_io.hpp"
#include "beamproj/errors.hpp"
#include "beamproj/oracle.hpp"
#include "beamproj/trainer.hpp"
#include "support.hpp"

using namespace beamproj;
using namespace beamproj::testing;
using doctest::Approx;

namespace {

TrainConfig quick(Variant v, int epochs = 300) {
  TrainConfig c;
  c.variant = v;
  c.max_epochs = epochs;
  c.pretrain_epochs = std::min(100, epochs / 3);
  c.hidden = 64;
  c.early_stop_patience = 0;
  return c;
}

// Model whose output is exactly h1 (M = 1): one linear layer selecting the
// channel coordinates from the features.
MlpModel matched_filter_model(std::size_t n) {
  MlpModel m = MlpModel::init({2 * n, 2 * n}, 0);
  DenseLayer& l = m.mutable_layer(0);
  std::fill(l.weight.begin(), l.weight.end(), 0.0);
  for (std::size_t j = 0; j < 2 * n; ++j) l.weight[j * 2 * n + j] = 1.0;
  return m;
}

}  // namespace

TEST_CASE("variant names") {
  for (Variant v : {Variant::ProjUnfeasible, Variant::ProjAll, Variant::ProjPretrain}) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK(to_string(Variant::ProjUnfeasible) == "proj-unfeasible");
  CHECK_THROWS_AS(variant_from_string("proj-some"), UsageError);
}

TEST_CASE("config defaults and validation") {
  const TrainConfig c;
  CHECK(c.learning_rate == 5e-4);
  CHECK(c.max_epochs == 1000);
  CHECK(c.pretrain_epochs == 100);
  CHECK(c.penalty_coeff == 0.2);
  CHECK(c.batch_size == 500);
  CHECK(c.early_stop_eps == 1e-3);
  CHECK(c.early_stop_patience == 10);
  CHECK(TrainConfig::dataset_defaults().learning_rate == 1e-3);

  TrainConfig bad = c;
  bad.variant = Variant::ProjPretrain;
  bad.pretrain_epochs = 1000;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = c;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = c;
  bad.split_ratio = 1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("penalty_loss examples") {
  const ProblemInstance inst = make_instance({real_vec({1})}, 1, 4);
  CHECK(penalty_loss(inst, real_beam({3}), 0.2).loss == Approx(9.0));
  const LossAndGrad lg = penalty_loss(inst, real_beam({1}), 0.2);
  CHECK(lg.loss == Approx(1.6));
  // d/dw [w^2 + 0.2 (4 - w^2)] = 2w - 0.4w at w = 1
  CHECK(lg.grad_w[0] == Approx(1.6));
  CHECK(penalty_loss(inst, real_beam({0}), 0.2).loss == Approx(0.8));

  const ProblemInstance two = make_instance({real_vec({1}), real_vec({2})}, 1, 5);
  CHECK(penalty_loss(two, real_beam({0}), 0.2).loss == Approx(0.2 * 10.0));
}

TEST_CASE("penalty gradient matches finite differences off the kink") {
  RandomStream rng(4, StreamDomain::Perturbation, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const ProblemInstance inst = random_instance(rng, 3, 4);
    const BeamVector w = random_beam(rng, 3);
    const LossAndGrad lg = penalty_loss(inst, w, 0.2);
    const std::vector<double> x(w.real_params().begin(), w.real_params().end());
    const auto fd = finite_diff_grad(
        [&](std::span<const double> p) { return penalty_loss(inst, BeamVector::from_real_params(p), 0.2).loss; },
        x);
    CHECK(max_rel_err(lg.grad_w, fd) <= 1e-6);
  }
}

TEST_CASE("unsupervised_loss examples") {
  SUBCASE("one antenna, one user: always gamma sigma^2 / h^2") {
    const ProblemInstance inst = make_instance({real_vec({1})}, 1, 4);
    for (std::uint64_t seed : {0, 1, 2}) {
      CHECK(unsupervised_loss(inst, MlpModel::init({2, 8, 2}, seed)).loss == Approx(4.0));
    }
  }
  SUBCASE("output along h is optimal") {
    RandomStream rng(1, StreamDomain::Perturbation, 0);
    const ProblemInstance inst = random_instance(rng, 3, 1);
    CHECK(unsupervised_loss(inst, matched_filter_model(3)).loss ==
          Approx(single_user_optimum(inst).power).epsilon(1e-12));
  }
  SUBCASE("scaling the output layer by 3 changes nothing") {
    RandomStream rng(2, StreamDomain::Perturbation, 0);
    const ProblemInstance inst = random_instance(rng, 3, 4);
    MlpModel m = MlpModel::init(default_layer_dims(3, 4, 32), 6);
    const double before = unsupervised_loss(inst, m).loss;
    DenseLayer& out = m.mutable_layer(m.n_layers() - 1);
    for (double& v : out.weight) v *= 3.0;
    for (double& v : out.bias) v *= 3.0;
    CHECK(unsupervised_loss(inst, m).loss == Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("repair_degenerate nudges orthogonal outputs") {
  const ProblemInstance inst = make_instance({real_vec({1, 0}), real_vec({1, 1})}, 1, 1);
  BeamVector w = real_beam({0, 1});
  CHECK(repair_degenerate(inst, w) == 1);
  CHECK(w.vec()[0].real() == Approx(1e-6));
  CHECK_NOTHROW(scale_always(inst, w));
  BeamVector ok = real_beam({1, 1});
  CHECK(repair_degenerate(inst, ok) == 0);
  CHECK(ok == real_beam({1, 1}));
}

TEST_CASE("train_single reaches the single-user optimum") {
  const TrainConfig cfg = quick(Variant::ProjAll, 1000);
  RandomStream rng(3, StreamDomain::Perturbation, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const ProblemInstance inst = random_instance(rng, 4, 1);
    const TrainOutcome out = train_single(inst, cfg);
    const double opt = single_user_optimum(inst).power;
    CHECK(out.report.final_mean_power <= 1.05 * opt);
    CHECK(out.report.final_mean_power >= opt * (1.0 - 1e-9));
    CHECK(out.report.feasibility_rate == 1.0);
  }
}

TEST_CASE("train_single on a one-antenna two-user instance finds power 1") {
  const ProblemInstance inst = make_instance({real_vec({1}), real_vec({2})}, 1, 1);
  const TrainOutcome out = train_single(inst, quick(Variant::ProjAll, 50));
  CHECK(out.report.final_mean_power == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("train_single is deterministic") {
  RandomStream rng(5, StreamDomain::Perturbation, 0);
  const ProblemInstance inst = random_instance(rng, 3, 3);
  for (Variant v : {Variant::ProjUnfeasible, Variant::ProjAll, Variant::ProjPretrain}) {
    const TrainOutcome a = train_single(inst, quick(v, 60));
    const TrainOutcome b = train_single(inst, quick(v, 60));
    CHECK(a.report.train_loss == b.report.train_loss);
    CHECK(a.report.test_loss == b.report.test_loss);
    CHECK(a.report.final_mean_power == b.report.final_mean_power);
  }
}

TEST_CASE("pretraining schedule is honored exactly") {
  RandomStream rng(6, StreamDomain::Perturbation, 0);
  const ProblemInstance inst = random_instance(rng, 2, 2);
  TrainConfig cfg = quick(Variant::ProjPretrain, 1000);
  cfg.pretrain_epochs = 100;
  cfg.hidden = 16;
  const TrainOutcome out = train_single(inst, cfg);
  CHECK(out.report.pretrain_epochs_run == 100);
  CHECK(out.report.epochs_run == 1000);
  CHECK(out.report.train_loss.size() == 1000);
  CHECK(out.report.stop_reason == StopReason::MaxEpochs);
  // Pretraining epochs report the penalty loss, the rest the projected power.
  CHECK(out.report.train_loss[500] == Approx(out.report.test_loss[500]).epsilon(1e-12));
}

TEST_CASE("early stop fires exactly when the rule holds") {
  RandomStream rng(7, StreamDomain::Perturbation, 0);
  const ProblemInstance inst = random_instance(rng, 3, 2);
  TrainConfig cfg = quick(Variant::ProjAll, 200);
  cfg.early_stop_patience = 3;
  cfg.early_stop_eps = 1e300;  // every change qualifies
  TrainOutcome out = train_single(inst, cfg);
  CHECK(out.report.stop_reason == StopReason::EarlyStop);
  CHECK(out.report.epochs_run == 4);

  cfg.early_stop_eps = 1e-300;  // no change qualifies
  out = train_single(inst, cfg);
  CHECK(out.report.stop_reason == StopReason::MaxEpochs);
  CHECK(out.report.epochs_run == 200);

  // Pretraining epochs never count toward the streak.
  cfg.variant = Variant::ProjPretrain;
  cfg.pretrain_epochs = 20;
  cfg.early_stop_eps = 1e300;
  out = train_single(inst, cfg);
  CHECK(out.report.epochs_run == 24);
}

TEST_CASE("divergence returns a partial report") {
  RandomStream rng(8, StreamDomain::Perturbation, 0);
  const ProblemInstance inst = random_instance(rng, 2, 2);
  TrainConfig cfg = quick(Variant::ProjAll, 50);
  cfg.learning_rate = 1e300;
  const TrainOutcome out = train_single(inst, cfg);
  CHECK(out.report.stop_reason == StopReason::Diverged);
  CHECK_FALSE(out.report.error.empty());
  CHECK(out.report.epochs_run >= 1);
  CHECK(out.report.epochs_run < 50);
}

TEST_CASE("train_dataset") {
  DatasetSpec spec;
  spec.n_instances = 100;
  spec.n_antennas = 4;
  spec.n_users = 3;
  spec.seed = 12;
  const Dataset data = gen_dataset(spec);
  TrainConfig cfg = TrainConfig::dataset_defaults();
  cfg.max_epochs = 150;
  cfg.hidden = 64;
  cfg.batch_size = 20;
  cfg.early_stop_patience = 0;

  const TrainOutcome a = train_dataset(data.instances, cfg);
  CHECK(a.report.n_train == 80);
  CHECK(a.report.n_test == 20);
  CHECK(a.report.feasibility_rate == 1.0);
  CHECK(a.report.test_loss.size() == 150);

  SUBCASE("same seed and order reproduce exactly; shuffling changes the path") {
    TrainConfig short_cfg = cfg;
    short_cfg.max_epochs = 10;
    const TrainOutcome x = train_dataset(data.instances, short_cfg);
    const TrainOutcome y = train_dataset(data.instances, short_cfg);
    CHECK(x.report.train_loss == y.report.train_loss);
    short_cfg.shuffle = false;
    const TrainOutcome z = train_dataset(data.instances, short_cfg);
    const TrainOutcome z2 = train_dataset(data.instances, short_cfg);
    CHECK(z.report.train_loss == z2.report.train_loss);
    CHECK(z.report.train_loss != x.report.train_loss);
  }

  SUBCASE("mixed shapes are rejected") {
    std::vector<ProblemInstance> mixed = data.instances;
    spec.n_users = 2;
    mixed.push_back(gen_instance(spec, 0));
    CHECK_THROWS_AS(train_dataset(mixed, cfg), UsageError);
  }
}

TEST_CASE("train_dataset beats the random-direction baseline on the test split") {
  // Real nonnegative channels, as in the reference experiment. Complex
  // Gaussian channels give a heavy-tailed mean test power (E 1/|h^H w|^2
  // diverges for any fixed w), so that comparison is not meaningful there.
  DatasetSpec spec;
  spec.n_instances = 1000;
  spec.n_antennas = 4;
  spec.n_users = 3;
  spec.channel_model = ChannelModel::AbsGaussian;
  spec.seed = 12;
  const Dataset data = gen_dataset(spec);
  TrainConfig cfg = TrainConfig::dataset_defaults();
  cfg.max_epochs = 100;
  cfg.hidden = 64;
  cfg.batch_size = 100;
  cfg.early_stop_patience = 0;
  const TrainOutcome a = train_dataset(data.instances, cfg);

  const DatasetSplit parts = split(data.instances.size(), cfg.split_ratio, cfg.seed);
  double baseline = 0.0;
  for (std::size_t i : parts.test) {
    baseline += random_direction_search(data.instances[i], 10, 99).best_power;
  }
  baseline /= static_cast<double>(parts.test.size());
  CHECK(a.report.feasibility_rate == 1.0);
  CHECK(a.report.final_mean_power <= baseline);
}
