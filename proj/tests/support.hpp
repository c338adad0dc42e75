#pragma once

// Oracles shared by the test suites. They avoid the library's eigensolver so
// a bug there cannot hide itself.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ovmkit/opcore.hpp"
#include "ovmkit/qintegrate.hpp"

namespace testsupport {

using Rational = boost::multiprecision::cpp_rational;

inline double max_abs(const ovmkit::ComplexMatrix& a) { return a.cwiseAbs().maxCoeff(); }

// Eigenvalues of a real symmetric 2x2 [[a, b], [b, c]] from the characteristic polynomial.
inline std::pair<double, double> eig2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {mean - rad, mean + rad};
}

// Frobenius norm bounds the operator norm from above; sqrt(max eig of A^H A)
// by power iteration gives an independent estimate from below.
inline double power_norm(const ovmkit::ComplexMatrix& a, int iters = 500) {
  const ovmkit::ComplexMatrix g = a.adjoint() * a;
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += ovmkit::Complex(0.01 * static_cast<double>(i), 0.003 * static_cast<double>(i * i));
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXcd w = g * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    lam = n / v.norm();
    v = w / n;
  }
  return std::sqrt(lam);
}

// Rank of a real matrix by exact Gaussian elimination over the rationals.
// Every double converts exactly, so the answer is the rank of the stored data.
inline std::size_t exact_rank(const Eigen::MatrixXd& m) {
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  std::vector<std::vector<Rational>> a(rows, std::vector<Rational>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = Rational(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t piv = rank;
    while (piv < rows && a[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[rank][col];
      for (std::size_t c = col; c < cols; ++c) a[r][c] -= f * a[rank][c];
    }
    ++rank;
  }
  return rank;
}

// Smallest eigenvalue of a Hermitian matrix via Sylvester-style check:
// returns true when every leading principal minor of (A + eps I) is positive
// (Cholesky succeeds), an independent PSD test.
inline bool cholesky_psd(const ovmkit::ComplexMatrix& a, double eps) {
  const ovmkit::ComplexMatrix shifted =
      a + eps * ovmkit::ComplexMatrix::Identity(a.rows(), a.cols());
  Eigen::LLT<ovmkit::ComplexMatrix> llt(shifted);
  return llt.info() == Eigen::Success;
}

// Oracle for ess_range: intersection over co-null cell sets E of the image f(E).
inline std::vector<ovmkit::ComplexMatrix> intersection_oracle(const ovmkit::QuantumRandomVariable& f, const ovmkit::OVM& nu) {
  const std::size_t m = f.cells().size();
  std::vector<ovmkit::ComplexMatrix> candidates = f.cells();
  std::vector<bool> keep(candidates.size(), true);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
    bool conull = true;
    for (std::size_t k = 0; k < m && conull; ++k) {
      if (!((bits >> k) & 1U) && !ovmkit::is_zero_mass(nu.cell_masses()[k])) conull = false;
    }
    if (!conull) continue;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      bool in_image = false;
      for (std::size_t k = 0; k < m && !in_image; ++k) {
        if (((bits >> k) & 1U) && ovmkit::op_norm(ovmkit::ComplexMatrix(candidates[c] - f.cells()[k])) <= ovmkit::kEssRangeDedupTol) in_image = true;
      }
      if (!in_image) keep[c] = false;
    }
  }
  std::vector<ovmkit::ComplexMatrix> out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!keep[c]) continue;
    bool dup = false;
    for (const auto& o : out) dup = dup || ovmkit::op_norm(ovmkit::ComplexMatrix(o - candidates[c])) <= ovmkit::kEssRangeDedupTol;
    if (!dup) out.push_back(candidates[c]);
  }
  return out;
}

inline bool same_set(const std::vector<ovmkit::ComplexMatrix>& a, const std::vector<ovmkit::ComplexMatrix>& b) {
  auto covered = [](const std::vector<ovmkit::ComplexMatrix>& x, const std::vector<ovmkit::ComplexMatrix>& y) {
    for (const auto& u : x) {
      bool hit = false;
      for (const auto& v : y) hit = hit || ovmkit::op_norm(ovmkit::ComplexMatrix(u - v)) <= ovmkit::kEssRangeDedupTol;
      if (!hit) return false;
    }
    return true;
  };
  return a.size() == b.size() && covered(a, b) && covered(b, a);
}

}  // namespace testsupport
