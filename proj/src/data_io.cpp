#include "beamproj/data_io.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "beamproj/errors.hpp"
#include "beamproj/mlp.hpp"
#include "beamproj/rng.hpp"

namespace beamproj {

using json = nlohmann::json;

std::string to_string(ChannelModel m) {
  return m == ChannelModel::ComplexGaussian ? "complex-gaussian" : "abs-gaussian";
}

ChannelModel channel_model_from_string(const std::string& s) {
  if (s == "complex-gaussian") return ChannelModel::ComplexGaussian;
  if (s == "abs-gaussian") return ChannelModel::AbsGaussian;
  throw UsageError("unknown channel model '" + s + "' (expected complex-gaussian, abs-gaussian)");
}

void DatasetSpec::validate() const {
  if (n_instances < 1) throw UsageError("DatasetSpec: n_instances must be >= 1");
  if (n_antennas < 1 || n_users < 1) throw UsageError("DatasetSpec: N and M must be >= 1");
  auto per_user_ok = [&](const std::vector<double>& v) {
    return v.size() == 1 || v.size() == n_users;
  };
  if (!per_user_ok(gamma_db)) throw UsageError("DatasetSpec: gamma_db needs 1 or M values");
  if (!per_user_ok(sigma_sq)) throw UsageError("DatasetSpec: sigma_sq needs 1 or M values");
  for (double s : sigma_sq) {
    if (!(s > 0.0)) throw UsageError("DatasetSpec: sigma_sq must be positive");
  }
  for (double g : gamma_db) {
    if (!std::isfinite(g)) throw UsageError("DatasetSpec: gamma_db must be finite");
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw UsageError("DatasetSpec: split_ratio must lie in (0, 1)");
  }
}

ProblemInstance gen_instance(const DatasetSpec& spec, std::size_t index) {
  spec.validate();
  const std::size_t n = spec.n_antennas, m = spec.n_users;
  RandomStream rng(spec.seed, StreamDomain::Channels, index);
  std::vector<ComplexVec> channels;
  channels.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    ComplexVec h(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (spec.channel_model == ChannelModel::ComplexGaussian) {
        h.set(j, rng.complex_normal());
      } else {
        h.set(j, std::abs(rng.normal()));
      }
    }
    channels.push_back(std::move(h));
  }
  std::vector<double> noise(m), gamma(m);
  for (std::size_t i = 0; i < m; ++i) {
    noise[i] = spec.sigma_sq.size() == 1 ? spec.sigma_sq[0] : spec.sigma_sq[i];
    gamma[i] = db_to_linear(spec.gamma_db.size() == 1 ? spec.gamma_db[0] : spec.gamma_db[i]);
  }
  return ProblemInstance(std::move(channels), std::move(noise), std::move(gamma));
}

Dataset gen_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset d;
  d.spec = spec;
  d.instances.reserve(spec.n_instances);
  for (std::size_t k = 0; k < spec.n_instances; ++k) d.instances.push_back(gen_instance(spec, k));
  return d;
}

DatasetSplit split(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split: ratio must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RandomStream rng(seed, StreamDomain::Split, 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  DatasetSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

namespace {

constexpr const char* kDatasetFormat = "beamproj-dataset";
constexpr const char* kCheckpointFormat = "beamproj-checkpoint";

void check_header(const json& doc, const char* format, const std::string& what) {
  if (!doc.is_object() || !doc.contains("format") || !doc.contains("schema_version")) {
    throw MalformedDataset(what + ": missing format header");
  }
  if (doc.at("format") != format) throw MalformedDataset(what + ": wrong format tag");
  const json& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw VersionMismatch(what + ": unsupported schema_version " + v.dump() + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
  }
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedDataset(what + ": " + e.what());
  }
}

json spec_to_json(const DatasetSpec& s) {
  return {{"n_instances", s.n_instances}, {"n_antennas", s.n_antennas},
          {"n_users", s.n_users},         {"gamma_db", s.gamma_db},
          {"sigma_sq", s.sigma_sq},       {"channel_model", to_string(s.channel_model)},
          {"seed", s.seed},               {"split_ratio", s.split_ratio}};
}

DatasetSpec spec_from_json(const json& j) {
  DatasetSpec s;
  s.n_instances = j.at("n_instances").get<std::size_t>();
  s.n_antennas = j.at("n_antennas").get<std::size_t>();
  s.n_users = j.at("n_users").get<std::size_t>();
  s.gamma_db = j.at("gamma_db").get<std::vector<double>>();
  s.sigma_sq = j.at("sigma_sq").get<std::vector<double>>();
  s.channel_model = channel_model_from_string(j.at("channel_model").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.split_ratio = j.at("split_ratio").get<double>();
  return s;
}

json instance_to_json(const ProblemInstance& inst) {
  json channels = json::array();
  for (const ComplexVec& h : inst.channels()) {
    channels.push_back({{"re", std::vector<double>(h.re().begin(), h.re().end())},
                        {"im", std::vector<double>(h.im().begin(), h.im().end())}});
  }
  return {{"channels", channels},
          {"noise_vars", std::vector<double>(inst.noise_vars().begin(), inst.noise_vars().end())},
          {"snr_targets",
           std::vector<double>(inst.snr_targets().begin(), inst.snr_targets().end())}};
}

ProblemInstance instance_from_json(const json& j) {
  std::vector<ComplexVec> channels;
  for (const json& h : j.at("channels")) {
    const auto re = h.at("re").get<std::vector<double>>();
    const auto im = h.at("im").get<std::vector<double>>();
    channels.emplace_back(re, im);
  }
  return ProblemInstance(std::move(channels), j.at("noise_vars").get<std::vector<double>>(),
                         j.at("snr_targets").get<std::vector<double>>());
}

}  // namespace

std::string dataset_to_json(const Dataset& dataset) {
  json doc;
  doc["format"] = kDatasetFormat;
  doc["schema_version"] = kSchemaVersion;
  doc["spec"] = dataset.spec ? spec_to_json(*dataset.spec) : json(nullptr);
  json instances = json::array();
  for (const ProblemInstance& inst : dataset.instances) instances.push_back(instance_to_json(inst));
  doc["instances"] = std::move(instances);
  return doc.dump(1) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
  const json doc = parse(text, "dataset");
  check_header(doc, kDatasetFormat, "dataset");
  try {
    Dataset d;
    if (doc.contains("spec") && !doc.at("spec").is_null()) d.spec = spec_from_json(doc.at("spec"));
    for (const json& j : doc.at("instances")) d.instances.push_back(instance_from_json(j));
    if (d.instances.empty()) throw MalformedDataset("dataset: no instances");
    return d;
  } catch (const json::exception& e) {
    throw MalformedDataset(std::string("dataset: ") + e.what());
  } catch (const UsageError& e) {
    throw MalformedDataset(std::string("dataset: invalid instance: ") + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  write_text_file(path, dataset_to_json(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_text_file(path));
}

std::string checkpoint_to_json(const MlpModel& model) {
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["schema_version"] = kSchemaVersion;
  doc["layer_dims"] = model.layer_dims();
  doc["seed"] = model.seed();
  doc["activation"] = "relu-hidden-linear-output";
  json layers = json::array();
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    layers.push_back({{"weights", model.layer(l).weight}, {"bias", model.layer(l).bias}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump() + "\n";
}

MlpModel checkpoint_from_json(const std::string& text) {
  const json doc = parse(text, "checkpoint");
  check_header(doc, kCheckpointFormat, "checkpoint");
  try {
    auto dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
    std::vector<DenseLayer> layers;
    const json& jl = doc.at("layers");
    for (std::size_t l = 0; l < jl.size(); ++l) {
      if (l + 1 >= dims.size()) throw MalformedDataset("checkpoint: too many layers");
      DenseLayer layer;
      layer.in = dims[l];
      layer.out = dims[l + 1];
      layer.weight = jl[l].at("weights").get<std::vector<double>>();
      layer.bias = jl[l].at("bias").get<std::vector<double>>();
      layers.push_back(std::move(layer));
    }
    return MlpModel(std::move(dims), std::move(layers), doc.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw MalformedDataset(std::string("checkpoint: ") + e.what());
  } catch (const UsageError& e) {
    throw MalformedDataset(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
  write_text_file(path, checkpoint_to_json(model));
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string instance_digest(const ProblemInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(static_cast<double>(inst.n_antennas()));
  mix(static_cast<double>(inst.n_users()));
  for (const ComplexVec& c : inst.channels()) {
    for (double v : c.params()) mix(v);
  }
  for (double v : inst.noise_vars()) mix(v);
  for (double v : inst.snr_targets()) mix(v);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace beamproj
