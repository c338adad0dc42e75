#include <omp.h>

#include <bit>
#include <limits>

#include "ovmkit/kernels.hpp"

namespace ovmkit::kernels::omp {

std::vector<HermitianMatrix> psd_roots(std::span<const HermitianMatrix> masses) {
  std::vector<HermitianMatrix> out(masses.size());
  const auto n = static_cast<std::int64_t>(masses.size());
  bool failed = false;
#pragma omp parallel for schedule(static) if (n > 16)
  for (std::int64_t k = 0; k < n; ++k) {
    if (!psd_check(masses[static_cast<std::size_t>(k)], kTolPsd)) {
#pragma omp atomic write
      failed = true;
      continue;
    }
    out[static_cast<std::size_t>(k)] = psd_sqrt(masses[static_cast<std::size_t>(k)]);
  }
  if (failed) throw Error(ErrorKind::NotPositive, "psd_sqrt of non-PSD matrix");
  return out;
}

ComplexMatrix conjugated_sum(std::span<const HermitianMatrix> roots, std::span<const ComplexMatrix> values) {
  if (roots.size() != values.size()) throw Error(ErrorKind::ShapeMismatch, "conjugated_sum operands");
  if (roots.empty()) return {};
  const auto d = static_cast<Eigen::Index>(roots.front().dim());
  const auto n = static_cast<std::int64_t>(roots.size());
  std::vector<ComplexMatrix> terms(roots.size());
#pragma omp parallel for schedule(static) if (n > 16)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    terms[i] = roots[i].mat() * values[i] * roots[i].mat();
  }
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (const auto& t : terms) acc += t;
  return acc;
}

NearestSubset nearest_subset(std::span<const HermitianMatrix> masses, const HermitianMatrix& target) {
  const std::size_t n = masses.size();
  if (n > kMaxEnumerationBits) throw Error(ErrorKind::SizeLimit, "enumeration limited to 22 masses");
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::uint64_t block = std::max<std::uint64_t>(1, std::min<std::uint64_t>(total, 1024));
  const auto blocks = static_cast<std::int64_t>((total + block - 1) / block);
  std::vector<NearestSubset> per_block(static_cast<std::size_t>(blocks));
  const ComplexMatrix neg_target = -target.mat();

#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::uint64_t lo = static_cast<std::uint64_t>(b) * block;
    const std::uint64_t hi = std::min(total, lo + block);
    // Walk g(i) = i ^ (i >> 1) for i in [lo, hi); start from a direct sum.
    std::uint64_t gray = lo ^ (lo >> 1);
    ComplexMatrix sum = neg_target;
    for (std::size_t k = 0; k < n; ++k) {
      if ((gray >> k) & 1U) sum += masses[k].mat();
    }
    NearestSubset best{std::numeric_limits<double>::infinity(), 0};
    for (std::uint64_t i = lo; i < hi; ++i) {
      if (i > lo) {
        const std::uint64_t next = i ^ (i >> 1);
        const std::uint64_t flipped = next ^ gray;
        const auto k = static_cast<std::size_t>(std::countr_zero(flipped));
        if (next & flipped) {
          sum += masses[k].mat();
        } else {
          sum -= masses[k].mat();
        }
        gray = next;
      }
      const double dist = op_norm(HermitianMatrix::from(sum));
      if (dist < best.distance || (dist == best.distance && gray < best.bits)) best = {dist, gray};
    }
    per_block[static_cast<std::size_t>(b)] = best;
  }
  NearestSubset best{std::numeric_limits<double>::infinity(), 0};
  for (const auto& cand : per_block) {
    if (cand.distance < best.distance || (cand.distance == best.distance && cand.bits < best.bits)) best = cand;
  }
  return best;
}

}  // namespace ovmkit::kernels::omp
