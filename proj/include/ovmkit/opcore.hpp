#pragma once

// Dense complex linear algebra for small Hermitian operators.
//
// Everything here is a pure function over immutable values. The Hermitian
// eigendecomposition is the single kernel behind psd_check, psd_sqrt and the
// Hermitian branch of op_norm; non-Hermitian op_norm goes through an SVD.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ovmkit/error.hpp"

namespace ovmkit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTolPsd = 1e-9;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kHermitianAsymmetryTol = 1e-12;
inline constexpr double kZeroMassTol = 1e-12;

/// Square complex matrix whose (i,j) entry is exactly conj of the (j,i) entry.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  /// Symmetrizes (A + A^H)/2 when max|A - A^H| <= 1e-12 * ||A||, rejects
  /// larger asymmetry, non-square input and non-finite entries.
  static HermitianMatrix from(const ComplexMatrix& a);
  static HermitianMatrix from_real(const Eigen::MatrixXd& a);
  static HermitianMatrix zero(std::size_t dim);
  static HermitianMatrix identity(std::size_t dim);
  static HermitianMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& mat() const noexcept { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double trace() const noexcept { return m_.diagonal().real().sum(); }

  friend HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b);
  friend HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b);
  friend HermitianMatrix operator*(double s, const HermitianMatrix& a);
  HermitianMatrix& operator+=(const HermitianMatrix& other);

 private:
  explicit HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  static HermitianMatrix trusted(ComplexMatrix m);

  ComplexMatrix m_;
};

/// Density operator: PSD, unit trace.
class State {
 public:
  static State from(const HermitianMatrix& rho);
  static State maximally_mixed(std::size_t dim);
  static State diagonal(std::span<const double> probs);
  static State pure(const Eigen::VectorXcd& psi);

  const HermitianMatrix& matrix() const noexcept { return rho_; }
  std::size_t dim() const noexcept { return rho_.dim(); }
  /// min eigenvalue > kRankTol.
  bool full_rank() const noexcept { return full_rank_; }

 private:
  State(HermitianMatrix rho, bool full_rank) : rho_(std::move(rho)), full_rank_(full_rank) {}
  HermitianMatrix rho_;
  bool full_rank_ = false;
};

/// [lower, upper] in the Loewner order.
struct OperatorInterval {
  HermitianMatrix lower;
  HermitianMatrix upper;

  static OperatorInterval make(HermitianMatrix lower, HermitianMatrix upper);
  bool contains(const HermitianMatrix& a, double tol = kTolPsd) const;
};

struct Eigensystem {
  RealVector values;  // ascending
  ComplexMatrix vectors;
};

Eigensystem eigh(const HermitianMatrix& a);

bool psd_check(const HermitianMatrix& a, double tol);
HermitianMatrix psd_sqrt(const HermitianMatrix& a);
double op_norm(const ComplexMatrix& a);
double op_norm(const HermitianMatrix& a);
bool loewner_leq(const HermitianMatrix& a, const HermitianMatrix& b, double tol);

/// Orthonormal real coordinates for the d^2-dimensional space of Hermitian
/// matrices: d diagonal units, then for each i<j the pair
/// (e_ij + e_ji)/sqrt2, i(e_ij - e_ji)/sqrt2. Dot products equal tr(AB).
RealVector herm_coords(const HermitianMatrix& a);
HermitianMatrix coords_to_herm(const RealVector& v);

Complex trace_pair(const HermitianMatrix& rho, const ComplexMatrix& a);
Complex trace_pair(const State& rho, const ComplexMatrix& a);

/// Block-diagonal direct sum.
ComplexMatrix direct_sum(std::span<const ComplexMatrix> blocks);
HermitianMatrix direct_sum(std::span<const HermitianMatrix> blocks);

void require_finite(const ComplexMatrix& a, const char* what);

}  // namespace ovmkit
