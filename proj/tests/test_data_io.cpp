#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "beamproj/data_io.hpp"
#include "beamproj/errors.hpp"
#include "beamproj/mlp.hpp"
#include "support.hpp"

using namespace beamproj;
using namespace beamproj::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "beamproj_test_data_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("channel model names") {
  CHECK(channel_model_from_string("complex-gaussian") == ChannelModel::ComplexGaussian);
  CHECK(channel_model_from_string(to_string(ChannelModel::AbsGaussian)) == ChannelModel::AbsGaussian);
  CHECK_THROWS_AS(channel_model_from_string("rayleigh"), UsageError);
}

TEST_CASE("spec validation") {
  DatasetSpec s;
  CHECK_NOTHROW(s.validate());
  s.n_instances = 0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = {};
  s.split_ratio = 0.0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s = {};
  s.n_users = 3;
  s.gamma_db = {1, 2};
  CHECK_THROWS_AS(s.validate(), UsageError);
  s.gamma_db = {1, 2, 3};
  CHECK_NOTHROW(s.validate());
  s.sigma_sq = {-1};
  CHECK_THROWS_AS(s.validate(), UsageError);
}

TEST_CASE("gen_instance") {
  DatasetSpec s;
  s.n_antennas = 3;
  s.n_users = 4;
  s.seed = 7;
  s.gamma_db = {10};
  CHECK(gen_instance(s, 0) == gen_instance(s, 0));
  CHECK_FALSE(gen_instance(s, 0) == gen_instance(s, 1));
  CHECK(gen_instance(s, 0).snr_target(2) == db_to_linear(10));
  CHECK(gen_instance(s, 0).noise_var(1) == 1.0);

  SUBCASE("per-user targets") {
    s.gamma_db = {0, 10, 20, 30};
    const ProblemInstance inst = gen_instance(s, 0);
    CHECK(inst.snr_target(0) == 1.0);
    CHECK(inst.snr_target(3) == doctest::Approx(1000.0));
  }
  SUBCASE("abs-gaussian is real and non-negative") {
    s.channel_model = ChannelModel::AbsGaussian;
    const ProblemInstance inst = gen_instance(s, 3);
    for (const ComplexVec& h : inst.channels()) {
      for (double v : h.re()) CHECK(v >= 0.0);
      for (double v : h.im()) CHECK(v == 0.0);
    }
  }
  SUBCASE("complex-gaussian has unit mean gain") {
    s.n_antennas = 100;
    s.n_users = 1000;
    const ProblemInstance inst = gen_instance(s, 0);
    double sum = 0.0;
    for (const ComplexVec& h : inst.channels()) sum += norm_sq(h);
    CHECK(std::abs(sum / 1e5 - 1.0) < 0.02);
  }
}

TEST_CASE("split") {
  const DatasetSplit a = split(10, 0.8, 3);
  CHECK(a.train.size() == 8);
  CHECK(a.test.size() == 2);
  const DatasetSplit b = split(10, 0.8, 3);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(10);
  std::iota(want.begin(), want.end(), 0);
  CHECK(all == want);
  CHECK(split(2, 0.99, 0).test.size() == 1);
  CHECK(split(2, 0.01, 0).train.size() == 1);
  CHECK_THROWS_AS(split(10, 1.0, 0), UsageError);
}

TEST_CASE("dataset round trip is bit-exact") {
  DatasetSpec s;
  s.n_instances = 5;
  s.n_antennas = 3;
  s.n_users = 2;
  s.gamma_db = {7.5, 12.25};
  s.sigma_sq = {0.3, 1.0 / 3.0};
  s.seed = 99;
  const Dataset d = gen_dataset(s);
  const fs::path p = scratch("round_trip.json");
  save_dataset(p, d);
  const Dataset back = load_dataset(p);
  REQUIRE(back.instances.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(back.instances[k] == d.instances[k]);
  REQUIRE(back.spec.has_value());
  CHECK(back.spec->seed == 99);
  CHECK(back.spec->sigma_sq == s.sigma_sq);
  CHECK(dataset_to_json(back) == dataset_to_json(d));

  SUBCASE("hand-built dataset without a spec") {
    Dataset h;
    h.instances.push_back(make_instance({ComplexVec{{0.1, -0.2}, {1e-300, 3.0}}}, 1, 2));
    const Dataset hb = dataset_from_json(dataset_to_json(h));
    CHECK_FALSE(hb.spec.has_value());
    CHECK(hb.instances[0] == h.instances[0]);
  }
}

TEST_CASE("dataset errors") {
  Dataset d;
  d.instances.push_back(make_instance({real_vec({1, 2})}, 1, 1));
  const std::string text = dataset_to_json(d);
  CHECK_THROWS_AS(dataset_from_json(text.substr(0, text.size() / 2)), MalformedDataset);
  CHECK_THROWS_AS(dataset_from_json("{}"), MalformedDataset);
  CHECK_THROWS_AS(dataset_from_json("[1, 2]"), MalformedDataset);

  std::string v2 = text;
  const auto at = v2.find("\"schema_version\": 1");
  REQUIRE(at != std::string::npos);
  v2.replace(at, std::string("\"schema_version\": 1").size(), "\"schema_version\": 2");
  CHECK_THROWS_AS(dataset_from_json(v2), VersionMismatch);

  const std::string zero = R"({"format":"beamproj-dataset","schema_version":1,"spec":null,"instances":[{"channels":[{"re":[0,0],"im":[0,0]}],"noise_vars":[1],"snr_targets":[1]}]})";
  CHECK_THROWS_AS(dataset_from_json(zero), MalformedDataset);

  const fs::path p = scratch("truncated.json");
  write_text_file(p, text.substr(0, 40));
  CHECK_THROWS_AS(load_dataset(p), MalformedDataset);
  CHECK_THROWS_AS(load_dataset(scratch("missing.json")), UsageError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  MlpModel m = MlpModel::init({6, 5, 4}, 77);
  m.set_parameter(3, 1.0 / 3.0);
  m.set_parameter(4, -5e-310);
  const fs::path p = scratch("model.json");
  save_checkpoint(p, m);
  const MlpModel back = load_checkpoint(p);
  CHECK(back.layer_dims() == m.layer_dims());
  CHECK(back.seed() == 77);
  for (std::size_t k = 0; k < m.parameter_count(); ++k) CHECK(back.parameter(k) == m.parameter(k));
  CHECK(checkpoint_to_json(back) == checkpoint_to_json(m));

  const std::string text = checkpoint_to_json(m);
  CHECK_THROWS_AS(checkpoint_from_json(text.substr(0, 30)), MalformedDataset);
  std::string v9 = text;
  const auto at = v9.find("\"schema_version\":1");
  REQUIRE(at != std::string::npos);
  v9.replace(at, std::string("\"schema_version\":1").size(), "\"schema_version\":9");
  CHECK_THROWS_AS(checkpoint_from_json(v9), VersionMismatch);
  CHECK_THROWS_AS(checkpoint_from_json(dataset_to_json(Dataset{std::nullopt,
                                                               {make_instance({real_vec({1})}, 1, 1)}})),
                  MalformedDataset);
}

TEST_CASE("format_double and digests") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  const ProblemInstance a = make_instance({real_vec({1, 2})}, 1, 1);
  const ProblemInstance b = make_instance({real_vec({1, 2.0000000000000004})}, 1, 1);
  CHECK(instance_digest(a) == instance_digest(a));
  CHECK(instance_digest(a) != instance_digest(b));
  CHECK(instance_digest(a).size() == 16);
}
