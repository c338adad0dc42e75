#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; the library calls the OpenMP versions, tests compare them
// against the references and the benchmark times both.
//
// Floating-point reductions are done as a parallel map into per-cell
// buffers followed by an in-order sum, so the OpenMP kernels are bitwise
// identical to the serial ones regardless of thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "ovmkit/opcore.hpp"

namespace ovmkit::kernels {

struct NearestSubset {
  double distance = 0.0;
  std::uint64_t bits = 0;  // bit k selects mass k; ties go to the smaller index
};

namespace serial {

std::vector<HermitianMatrix> psd_roots(std::span<const HermitianMatrix> masses);
/// sum_k roots_k * values_k * roots_k
ComplexMatrix conjugated_sum(std::span<const HermitianMatrix> roots, std::span<const ComplexMatrix> values);
/// min over all 2^n subsets S of ||sum_{k in S} masses_k - target||, each
/// subset summed from scratch.
NearestSubset nearest_subset(std::span<const HermitianMatrix> masses, const HermitianMatrix& target);

}  // namespace serial

namespace omp {

std::vector<HermitianMatrix> psd_roots(std::span<const HermitianMatrix> masses);
ComplexMatrix conjugated_sum(std::span<const HermitianMatrix> roots, std::span<const ComplexMatrix> values);
/// Gray-code walk over contiguous index blocks, one block per thread chunk.
NearestSubset nearest_subset(std::span<const HermitianMatrix> masses, const HermitianMatrix& target);

}  // namespace omp

inline constexpr std::size_t kMaxEnumerationBits = 22;

}  // namespace ovmkit::kernels
