#include <limits>

#include "ovmkit/kernels.hpp"

namespace ovmkit::kernels::serial {

std::vector<HermitianMatrix> psd_roots(std::span<const HermitianMatrix> masses) {
  std::vector<HermitianMatrix> out;
  out.reserve(masses.size());
  for (const auto& m : masses) out.push_back(psd_sqrt(m));
  return out;
}

ComplexMatrix conjugated_sum(std::span<const HermitianMatrix> roots, std::span<const ComplexMatrix> values) {
  if (roots.size() != values.size()) throw Error(ErrorKind::ShapeMismatch, "conjugated_sum operands");
  if (roots.empty()) return {};
  const auto d = static_cast<Eigen::Index>(roots.front().dim());
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < roots.size(); ++k) {
    acc += roots[k].mat() * values[k] * roots[k].mat();
  }
  return acc;
}

NearestSubset nearest_subset(std::span<const HermitianMatrix> masses, const HermitianMatrix& target) {
  const std::size_t n = masses.size();
  if (n > kMaxEnumerationBits) throw Error(ErrorKind::SizeLimit, "enumeration limited to 22 masses");
  NearestSubset best{std::numeric_limits<double>::infinity(), 0};
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    HermitianMatrix sum = HermitianMatrix::zero(target.dim());
    for (std::size_t k = 0; k < n; ++k) {
      if ((bits >> k) & 1U) sum += masses[k];
    }
    const double dist = op_norm(sum - target);
    if (dist < best.distance) best = {dist, bits};
  }
  return best;
}

}  // namespace ovmkit::kernels::serial
