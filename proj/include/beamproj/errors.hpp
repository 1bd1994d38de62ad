#pragma once

#include <stdexcept>
#include <string>

namespace beamproj {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad shape, index, option value).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Some h_i^H w vanished, so no finite scale factor exists.
class DegenerateDirection : public Error {
 public:
  DegenerateDirection(const std::string& what, std::size_t user)
      : Error(what), user_(user) {}
  std::size_t user() const noexcept { return user_; }

 private:
  std::size_t user_;
};

// NaN/Inf appeared in gradients or parameters.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

class SdrNotConverged : public Error {
 public:
  SdrNotConverged(const std::string& what, double primal, double dual)
      : Error(what), primal_residual(primal), dual_residual(dual) {}
  double primal_residual;
  double dual_residual;
};

class MalformedDataset : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace beamproj
