#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace beamproj {

using cplx = std::complex<double>;

// Complex vector stored as structure-of-arrays in one buffer: the first n
// doubles are real parts, the next n are imaginary parts. params() exposes
// that buffer as the 2n-real parametrization used by every gradient.
class ComplexVec {
 public:
  ComplexVec() = default;
  explicit ComplexVec(std::size_t n);
  ComplexVec(std::span<const double> re, std::span<const double> im);
  ComplexVec(std::initializer_list<cplx> values);

  // Builds from a [re; im] buffer of even length.
  static ComplexVec from_params(std::span<const double> params);

  std::size_t size() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }

  cplx operator[](std::size_t i) const { return {data_[i], data_[n_ + i]}; }
  void set(std::size_t i, cplx v) {
    data_[i] = v.real();
    data_[n_ + i] = v.imag();
  }

  std::span<const double> re() const noexcept { return {data_.data(), n_}; }
  std::span<const double> im() const noexcept { return {data_.data() + n_, n_}; }
  std::span<double> re() noexcept { return {data_.data(), n_}; }
  std::span<double> im() noexcept { return {data_.data() + n_, n_}; }
  std::span<const double> params() const noexcept { return data_; }
  std::span<double> params() noexcept { return data_; }

  bool all_finite() const noexcept;

  // Returns c * this.
  ComplexVec scaled(cplx c) const;

  friend bool operator==(const ComplexVec&, const ComplexVec&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// h^H w
cplx inner(const ComplexVec& h, const ComplexVec& w);
double norm_sq(const ComplexVec& v);

// Dense Hermitian matrix, row-major complex entries.
class HermitianMat {
 public:
  HermitianMat() = default;
  explicit HermitianMat(std::size_t n);  // zero matrix

  static HermitianMat identity(std::size_t n);
  static HermitianMat diagonal(std::span<const double> d);
  // Validates A = A^H entrywise within tol * max(1, max|a_ij|), then stores
  // the exactly Hermitian part (A + A^H) / 2.
  static HermitianMat from_entries(std::size_t n, std::span<const cplx> entries,
                                   double tol = 1e-12);

  std::size_t dim() const noexcept { return n_; }
  cplx operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  // Sets (i, j) and its mirror (j, i) = conj(v).
  void set(std::size_t i, std::size_t j, cplx v);
  std::span<const cplx> entries() const noexcept { return a_; }

  double trace() const;
  double frobenius_norm() const;
  // Real inner product Re tr(A^H B).
  double dot(const HermitianMat& other) const;

  HermitianMat& operator+=(const HermitianMat& other);
  HermitianMat& operator-=(const HermitianMat& other);
  HermitianMat& operator*=(double s);
  // this += s * h h^H
  void add_outer(const ComplexVec& h, double s);

  friend HermitianMat operator+(HermitianMat a, const HermitianMat& b) { return a += b; }
  friend HermitianMat operator-(HermitianMat a, const HermitianMat& b) { return a -= b; }
  friend HermitianMat operator*(double s, HermitianMat a) { return a *= s; }

 private:
  std::size_t n_ = 0;
  std::vector<cplx> a_;
};

HermitianMat herm_outer(const ComplexVec& h);

// w^H A w
double quad_form(const HermitianMat& a, const ComplexVec& w);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  std::size_t n = 0;
  std::vector<cplx> vectors;   // row-major n x n, column j pairs with values[j]

  cplx u(std::size_t i, std::size_t j) const { return vectors[i * n + j]; }
  ComplexVec column(std::size_t j) const;
  int sweeps = 0;
};

// Cyclic complex Jacobi. Stops when the off-diagonal Frobenius norm falls to
// 1e-12 * ||A||_F or after 100 sweeps.
EigenDecomposition eigh(const HermitianMat& a);

// U diag(values) U^H
HermitianMat reconstruct(const EigenDecomposition& eig, std::span<const double> values);

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped to 0).
HermitianMat psd_project(const HermitianMat& a);

}  // namespace beamproj
