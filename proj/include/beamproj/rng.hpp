#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "beamproj/linalg.hpp"

namespace beamproj {

// Philox4x32-10 block function (Salmon et al., Random123 constants).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Independent stream identifiers. Each consumer draws from its own domain so
// adding draws in one place never shifts another.
enum class StreamDomain : std::uint32_t {
  Channels = 1,
  Init = 2,
  Shuffle = 3,
  Split = 4,
  Randomization = 5,
  Directions = 6,
  Perturbation = 7,
};

// Counter-based stream: key = seed, counter = (block, domain, index lo, index hi).
// The same (seed, domain, index) triple yields the same sequence everywhere.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamDomain domain, std::uint64_t index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // [0, 1) with 53 random bits
  double uniform();
  // uniform integer in [0, bound), unbiased
  std::uint64_t below(std::uint64_t bound);
  // standard normal via Box-Muller
  double normal();
  // circularly-symmetric complex normal, E|z|^2 = 1
  cplx complex_normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

}  // namespace beamproj
