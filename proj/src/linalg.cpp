#include "beamproj/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "beamproj/errors.hpp"

namespace beamproj {

ComplexVec::ComplexVec(std::size_t n) : n_(n), data_(2 * n, 0.0) {}

ComplexVec::ComplexVec(std::span<const double> re, std::span<const double> im)
    : n_(re.size()), data_(2 * re.size()) {
  if (re.size() != im.size()) {
    throw UsageError("ComplexVec: real and imaginary parts differ in length");
  }
  std::copy(re.begin(), re.end(), data_.begin());
  std::copy(im.begin(), im.end(), data_.begin() + static_cast<std::ptrdiff_t>(n_));
  if (!all_finite()) throw UsageError("ComplexVec: non-finite entry");
}

ComplexVec::ComplexVec(std::initializer_list<cplx> values)
    : n_(values.size()), data_(2 * values.size()) {
  std::size_t i = 0;
  for (const cplx& v : values) set(i++, v);
  if (!all_finite()) throw UsageError("ComplexVec: non-finite entry");
}

ComplexVec ComplexVec::from_params(std::span<const double> params) {
  if (params.size() % 2 != 0) {
    throw UsageError("ComplexVec: parameter buffer must have even length");
  }
  const std::size_t n = params.size() / 2;
  return ComplexVec(params.first(n), params.subspan(n));
}

bool ComplexVec::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

ComplexVec ComplexVec::scaled(cplx c) const {
  ComplexVec out(n_);
  for (std::size_t i = 0; i < n_; ++i) out.set(i, c * (*this)[i]);
  return out;
}

cplx inner(const ComplexVec& h, const ComplexVec& w) {
  if (h.size() != w.size()) throw UsageError("inner: dimension mismatch");
  const auto hr = h.re(), hi = h.im(), wr = w.re(), wi = w.im();
  double re = 0.0, im = 0.0;
  // conj(h) * w = (hr - i hi)(wr + i wi)
  for (std::size_t k = 0; k < h.size(); ++k) {
    re += hr[k] * wr[k] + hi[k] * wi[k];
    im += hr[k] * wi[k] - hi[k] * wr[k];
  }
  return {re, im};
}

double norm_sq(const ComplexVec& v) {
  const auto p = v.params();
  return std::inner_product(p.begin(), p.end(), p.begin(), 0.0);
}

HermitianMat::HermitianMat(std::size_t n) : n_(n), a_(n * n, cplx{}) {}

HermitianMat HermitianMat::identity(std::size_t n) {
  HermitianMat m(n);
  for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1.0;
  return m;
}

HermitianMat HermitianMat::diagonal(std::span<const double> d) {
  HermitianMat m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
  return m;
}

HermitianMat HermitianMat::from_entries(std::size_t n, std::span<const cplx> entries,
                                        double tol) {
  if (entries.size() != n * n) throw UsageError("HermitianMat: expected n*n entries");
  double scale = 1.0;
  for (const cplx& v : entries) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw UsageError("HermitianMat: non-finite entry");
    }
    scale = std::max(scale, std::abs(v));
  }
  HermitianMat m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const cplx aij = entries[i * n + j];
      const cplx aji = entries[j * n + i];
      if (std::abs(aij - std::conj(aji)) > tol * scale) {
        throw UsageError("HermitianMat: input is not Hermitian");
      }
      m.set(i, j, 0.5 * (aij + std::conj(aji)));
    }
  }
  return m;
}

void HermitianMat::set(std::size_t i, std::size_t j, cplx v) {
  if (i == j) {
    a_[i * n_ + i] = v.real();
  } else {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = std::conj(v);
  }
}

double HermitianMat::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += a_[i * n_ + i].real();
  return t;
}

double HermitianMat::frobenius_norm() const {
  double s = 0.0;
  for (const cplx& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double HermitianMat::dot(const HermitianMat& other) const {
  if (other.n_ != n_) throw UsageError("HermitianMat::dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a_.size(); ++k) {
    s += a_[k].real() * other.a_[k].real() + a_[k].imag() * other.a_[k].imag();
  }
  return s;
}

HermitianMat& HermitianMat::operator+=(const HermitianMat& other) {
  if (other.n_ != n_) throw UsageError("HermitianMat: dimension mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += other.a_[k];
  return *this;
}

HermitianMat& HermitianMat::operator-=(const HermitianMat& other) {
  if (other.n_ != n_) throw UsageError("HermitianMat: dimension mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= other.a_[k];
  return *this;
}

HermitianMat& HermitianMat::operator*=(double s) {
  for (cplx& v : a_) v *= s;
  return *this;
}

void HermitianMat::add_outer(const ComplexVec& h, double s) {
  if (h.size() != n_) throw UsageError("add_outer: dimension mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    const cplx hi = s * h[i];
    a_[i * n_ + i] += std::norm(h[i]) * s;
    for (std::size_t j = i + 1; j < n_; ++j) {
      const cplx v = hi * std::conj(h[j]);
      a_[i * n_ + j] += v;
      a_[j * n_ + i] += std::conj(v);
    }
  }
}

HermitianMat herm_outer(const ComplexVec& h) {
  if (h.empty()) throw UsageError("herm_outer: empty vector");
  HermitianMat m(h.size());
  m.add_outer(h, 1.0);
  return m;
}

double quad_form(const HermitianMat& a, const ComplexVec& w) {
  const std::size_t n = a.dim();
  if (w.size() != n) throw UsageError("quad_form: dimension mismatch");
  cplx acc{};
  for (std::size_t i = 0; i < n; ++i) {
    cplx row{};
    for (std::size_t j = 0; j < n; ++j) row += a(i, j) * w[j];
    acc += std::conj(w[i]) * row;
  }
  return acc.real();
}

ComplexVec EigenDecomposition::column(std::size_t j) const {
  ComplexVec v(n);
  for (std::size_t i = 0; i < n; ++i) v.set(i, u(i, j));
  return v;
}

namespace {

double off_diagonal_norm(const std::vector<cplx>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s += std::norm(a[i * n + j]);
    }
  }
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition eigh(const HermitianMat& input) {
  constexpr int kMaxSweeps = 100;
  constexpr double kRelTol = 1e-12;

  const std::size_t n = input.dim();
  if (n == 0) throw UsageError("eigh: empty matrix");
  std::vector<cplx> a(input.entries().begin(), input.entries().end());
  std::vector<cplx> v(n * n, cplx{});
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double scale = input.frobenius_norm();
  int sweep = 0;
  if (scale > 0.0) {
    for (; sweep < kMaxSweeps; ++sweep) {
      if (off_diagonal_norm(a, n) <= kRelTol * scale) break;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const cplx apq = a[p * n + q];
          const double b = std::abs(apq);
          if (b == 0.0) continue;
          // Phase-rotate the pair to a real symmetric 2x2 block, then apply a
          // real Jacobi rotation. Combined unitary:
          //   J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]],  A <- J^H A J.
          const cplx phase = std::conj(apq) / b;  // e^{-i phi}
          const double app = a[p * n + p].real();
          const double aqq = a[q * n + q].real();
          const double theta = (aqq - app) / (2.0 * b);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const cplx jpp = c, jpq = s, jqp = -s * phase, jqq = c * phase;

          for (std::size_t k = 0; k < n; ++k) {
            const cplx akp = a[k * n + p], akq = a[k * n + q];
            a[k * n + p] = akp * jpp + akq * jqp;
            a[k * n + q] = akp * jpq + akq * jqq;
            const cplx vkp = v[k * n + p], vkq = v[k * n + q];
            v[k * n + p] = vkp * jpp + vkq * jqp;
            v[k * n + q] = vkp * jpq + vkq * jqq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const cplx apk = a[p * n + k], aqk = a[q * n + k];
            a[p * n + k] = std::conj(jpp) * apk + std::conj(jqp) * aqk;
            a[q * n + k] = std::conj(jpq) * apk + std::conj(jqq) * aqk;
          }
          a[p * n + q] = 0.0;
          a[q * n + p] = 0.0;
          a[p * n + p] = a[p * n + p].real();
          a[q * n + q] = a[q * n + q].real();
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i].real() > a[j * n + j].real();
  });

  EigenDecomposition out;
  out.n = n;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]].real();
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + j] = v[i * n + order[j]];
  }
  return out;
}

HermitianMat reconstruct(const EigenDecomposition& eig, std::span<const double> values) {
  const std::size_t n = eig.n;
  if (values.size() != n) throw UsageError("reconstruct: eigenvalue count mismatch");
  HermitianMat out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < n; ++k) {
        if (values[k] != 0.0) s += values[k] * eig.u(i, k) * std::conj(eig.u(j, k));
      }
      out.set(i, j, s);
    }
  }
  return out;
}

HermitianMat psd_project(const HermitianMat& a) {
  EigenDecomposition eig = eigh(a);
  std::vector<double> clamped(eig.values);
  for (double& l : clamped) l = std::max(l, 0.0);
  return reconstruct(eig, clamped);
}

}  // namespace beamproj
