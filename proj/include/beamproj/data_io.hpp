#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamproj/problem.hpp"

namespace beamproj {

class MlpModel;

// ComplexGaussian: real and imaginary parts independent N(0, 1/2).
// AbsGaussian: |x| with x ~ N(0, 1), zero imaginary part.
enum class ChannelModel { ComplexGaussian, AbsGaussian };
std::string to_string(ChannelModel m);
ChannelModel channel_model_from_string(const std::string& s);  // "complex-gaussian", "abs-gaussian"

struct DatasetSpec {
  std::size_t n_instances = 1;
  std::size_t n_antennas = 1;
  std::size_t n_users = 1;
  std::vector<double> gamma_db{10.0};  // one value for all users, or one per user
  std::vector<double> sigma_sq{1.0};   // likewise
  ChannelModel channel_model = ChannelModel::ComplexGaussian;
  std::uint64_t seed = 0;
  double split_ratio = 0.8;

  void validate() const;
};

// Deterministic in (spec.seed, index): channel entries come from the
// Philox stream (seed, Channels, index), user-major then antenna.
ProblemInstance gen_instance(const DatasetSpec& spec, std::size_t index);

struct Dataset {
  std::optional<DatasetSpec> spec;  // absent for hand-built datasets
  std::vector<ProblemInstance> instances;
};

Dataset gen_dataset(const DatasetSpec& spec);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded Fisher-Yates shuffle of [0, n), first round(ratio * n) indices go to
// train (clamped so both sides are nonempty when n >= 2).
DatasetSplit split(std::size_t n, double ratio, std::uint64_t seed);

// Schema version written to and required from every document.
constexpr int kSchemaVersion = 1;

std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const std::string& text);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

std::string checkpoint_to_json(const MlpModel& model);
MlpModel checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_checkpoint(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// %.17g, the shortest printf form that round-trips every double.
std::string format_double(double x);

// Hex FNV-1a digest of an instance's defining bit patterns.
std::string instance_digest(const ProblemInstance& inst);

}  // namespace beamproj
