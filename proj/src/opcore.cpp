#include "ovmkit/opcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ovmkit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::SpaceMismatch: return "SpaceMismatch";
    case ErrorKind::DerivativeDoesNotExist: return "DerivativeDoesNotExist";
    case ErrorKind::NotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::AtomicObstruction: return "AtomicObstruction";
    case ErrorKind::TargetNotInHull: return "TargetNotInHull";
    case ErrorKind::SizeLimit: return "SizeLimit";
  }
  return "Unknown";
}

void require_finite(const ComplexMatrix& a, const char* what) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Complex z = a.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorKind::InvalidInput, std::string(what) + " has non-finite entries");
    }
  }
}

namespace {

double max_abs_entry(const ComplexMatrix& a) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a.data()[i]));
  return out;
}

bool exactly_hermitian(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i; j < a.cols(); ++j) {
      if (a(i, j) != std::conj(a(j, i))) return false;
    }
  }
  return true;
}

double singular_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

HermitianMatrix HermitianMatrix::trusted(ComplexMatrix m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = Complex(m(i, i).real(), 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = avg;
      m(j, i) = std::conj(avg);
    }
  }
  return HermitianMatrix(std::move(m));
}

HermitianMatrix HermitianMatrix::from(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::InvalidInput, "Hermitian matrix must be square");
  }
  require_finite(a, "Hermitian matrix");
  if (exactly_hermitian(a)) return HermitianMatrix(a);
  const double asym = max_abs_entry(a - a.adjoint());
  if (asym > kHermitianAsymmetryTol * singular_norm(a)) {
    throw Error(ErrorKind::InvalidInput,
                "matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  }
  return trusted(a);
}

HermitianMatrix HermitianMatrix::from_real(const Eigen::MatrixXd& a) {
  return from(a.cast<Complex>());
}

HermitianMatrix HermitianMatrix::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return HermitianMatrix(ComplexMatrix::Zero(n, n));
}

HermitianMatrix HermitianMatrix::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return HermitianMatrix(ComplexMatrix::Identity(n, n));
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> diag) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
  require_finite(m, "diagonal");
  return HermitianMatrix(std::move(m));
}

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, "Hermitian sum");
  return HermitianMatrix(a.m_ + b.m_);
}

HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, "Hermitian difference");
  return HermitianMatrix(a.m_ - b.m_);
}

HermitianMatrix operator*(double s, const HermitianMatrix& a) { return HermitianMatrix(s * a.m_); }

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  if (dim() != other.dim()) throw Error(ErrorKind::DimMismatch, "Hermitian sum");
  m_ += other.m_;
  return *this;
}

Eigensystem eigh(const HermitianMatrix& a) {
  if (a.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a.mat());
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidInput, "Hermitian eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

bool psd_check(const HermitianMatrix& a, double tol) {
  if (!(tol >= 0.0)) throw Error(ErrorKind::InvalidInput, "tolerance must be nonnegative");
  if (a.dim() == 0) return true;
  const RealVector ev = eigh(a).values;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol * std::max(1.0, norm);
}

HermitianMatrix psd_sqrt(const HermitianMatrix& a) {
  if (!psd_check(a, kTolPsd)) throw Error(ErrorKind::NotPositive, "psd_sqrt of non-PSD matrix");
  if (a.dim() == 0) return a;
  const Eigensystem es = eigh(a);
  const RealVector roots = es.values.cwiseMax(0.0).cwiseSqrt();
  ComplexMatrix b = es.vectors * roots.cast<Complex>().asDiagonal() * es.vectors.adjoint();
  return HermitianMatrix::from(b.eval() * 0.5 + b.adjoint().eval() * 0.5);
}

double op_norm(const HermitianMatrix& a) {
  if (a.dim() == 0) return 0.0;
  const RealVector ev = eigh(a).values;
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double op_norm(const ComplexMatrix& a) {
  require_finite(a, "op_norm input");
  if (exactly_hermitian(a)) return op_norm(HermitianMatrix::from(a));
  return singular_norm(a);
}

bool loewner_leq(const HermitianMatrix& a, const HermitianMatrix& b, double tol) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, "loewner_leq operands");
  return psd_check(b - a, tol);
}

RealVector herm_coords(const HermitianMatrix& a) {
  const auto d = static_cast<Eigen::Index>(a.dim());
  RealVector v(d * d);
  const double s = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) v(k++) = a.mat()(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v(k++) = s * a.mat()(i, j).real();
      v(k++) = s * a.mat()(i, j).imag();
    }
  }
  return v;
}

HermitianMatrix coords_to_herm(const RealVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) throw Error(ErrorKind::InvalidInput, "coordinate vector length is not a square");
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = v(k++);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const Complex z(s * v(k), s * v(k + 1));
      k += 2;
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  }
  return HermitianMatrix::from(m);
}

Complex trace_pair(const HermitianMatrix& rho, const ComplexMatrix& a) {
  if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != rho.dim()) {
    throw Error(ErrorKind::DimMismatch, "trace_pair operands");
  }
  Complex acc = 0.0;
  const Eigen::Index d = a.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) acc += rho.mat()(i, j) * a(j, i);
  }
  return acc;
}

Complex trace_pair(const State& rho, const ComplexMatrix& a) { return trace_pair(rho.matrix(), a); }

State State::from(const HermitianMatrix& rho) {
  if (rho.dim() == 0) throw Error(ErrorKind::InvalidInput, "state of dimension 0");
  if (std::abs(rho.trace() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidInput, "state trace " + std::to_string(rho.trace()) + " != 1");
  }
  const RealVector ev = eigh(rho).values;
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  if (ev(0) < -kTolPsd * std::max(1.0, norm)) {
    throw Error(ErrorKind::NotPositive, "state is not positive semidefinite");
  }
  return State(rho, ev(0) > kRankTol);
}

State State::maximally_mixed(std::size_t dim) {
  return from((1.0 / static_cast<double>(dim)) * HermitianMatrix::identity(dim));
}

State State::diagonal(std::span<const double> probs) { return from(HermitianMatrix::diagonal(probs)); }

State State::pure(const Eigen::VectorXcd& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-12) throw Error(ErrorKind::InvalidInput, "pure state must be normalized");
  return from(HermitianMatrix::from(psi * psi.adjoint()));
}

OperatorInterval OperatorInterval::make(HermitianMatrix lower, HermitianMatrix upper) {
  if (!loewner_leq(lower, upper, kTolPsd)) {
    throw Error(ErrorKind::InvalidInput, "operator interval with upper - lower not PSD");
  }
  return {std::move(lower), std::move(upper)};
}

bool OperatorInterval::contains(const HermitianMatrix& a, double tol) const {
  return loewner_leq(lower, a, tol) && loewner_leq(a, upper, tol);
}

ComplexMatrix direct_sum(std::span<const ComplexMatrix> blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    if (b.rows() != b.cols()) throw Error(ErrorKind::InvalidInput, "direct_sum block must be square");
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

HermitianMatrix direct_sum(std::span<const HermitianMatrix> blocks) {
  std::vector<ComplexMatrix> raw;
  raw.reserve(blocks.size());
  for (const auto& b : blocks) raw.push_back(b.mat());
  return HermitianMatrix::from(direct_sum(std::span<const ComplexMatrix>(raw)));
}

}  // namespace ovmkit
