#pragma once

// Constructive range attainment for nonatomic POVMs.
//
// A target A in the fractional hull {sum_k h_k M_k : h in [0,1]^m} is reached
// by a feasible h; purification then moves h along kernel directions c with
// sum_k c_k M_k = 0 until at most D = d^2 coordinates remain fractional, and
// each remaining fractional cell is realized by its leftmost sub-interval.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ovmkit/kernels.hpp"
#include "ovmkit/ovm.hpp"

namespace ovmkit {

inline constexpr double kFractionalSnap = 1e-12;

struct KernelWitness {
  std::vector<double> coefficients;  // one per cell, max |c_k| = 1, zero off support
  std::vector<std::size_t> support;  // cells with c_k != 0
};

/// Null-space witness for {herm_coords(M_k) : k in support}, or none when
/// those vectors are linearly independent (singular values above
/// 1e-10 * sigma_max). Among a degenerate null space the witness is the
/// orthogonal projection of the first unit vector e_j (j in support order)
/// that the null space does not annihilate, which fixes the sign so the first
/// nonzero coordinate is positive.
std::optional<KernelWitness> kernel_witness(const OVM& nu, std::span<const std::size_t> support);

struct PurifyResult {
  FractionalSet h;
  std::vector<std::size_t> fractional;  // cells with h in (snap, 1 - snap)
  std::vector<std::size_t> obstructed;  // fractional cells that are not divisible
  std::size_t iterations = 0;
  double target_residual = 0.0;  // ||sum h0 M - sum h M||
};

PurifyResult purify(const OVM& nu, const FractionalSet& h);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct AttainResult {
  std::vector<Interval> intervals;
  std::vector<std::size_t> atoms;
  HermitianMatrix achieved;  // measure of the realized set
  double residual = 0.0;     // ||achieved - target||
  std::size_t interval_count = 0;
  std::size_t split_cells = 0;     // cells realized by a proper sub-interval
  std::size_t iterations = 0;      // projection + purification steps
  std::size_t purify_iterations = 0;
  FractionalSet h;                 // purified fractional set that was realized
};

/// Measure of a union of disjoint intervals plus atom selections, computed
/// from interval overlaps with each cell.
HermitianMatrix evaluate_intervals(const OVM& nu, std::span<const Interval> intervals,
                                   std::span<const std::size_t> atom_indices);

AttainResult realize_intervals(const OVM& nu, const FractionalSet& h);

AttainResult convex_combine(const OVM& nu, const MeasurableSet& e1, const MeasurableSet& e2, double t);

struct AttainOptions {
  std::size_t max_iter = 100000;
  double tol = 1e-10;
  double give_up = 1e-6;
  std::size_t check_every = 20;
};

/// Feasible h with sum h_k M_k = A by Dykstra alternating projections onto
/// {h : C h = a} and [0,1]^m, then purify and realize. Atom selections are
/// enumerated (at most 12 atoms with nonzero mass).
AttainResult attain(const OVM& nu, const HermitianMatrix& target, const AttainOptions& opts = {});

/// One set E with nu_i(E) = A_i for every i, through the direct sum.
AttainResult joint_attain(std::span<const OVM> measures, std::span<const HermitianMatrix> targets,
                          const AttainOptions& opts = {});

/// Every selection of cells and atoms (m + atoms <= 22) with its value.
std::vector<std::pair<MeasurableSet, HermitianMatrix>> brute_force_range(const OVM& nu);
/// Nearest value of nu over the generated algebra to `target`.
kernels::NearestSubset brute_force_nearest(const OVM& nu, const HermitianMatrix& target);

struct CertificateTrial {
  MeasurableSet e1;
  MeasurableSet e2;
  double t = 0.0;
  bool failed = false;
  std::string reason;
  double residual = 0.0;
  std::size_t interval_count = 0;
};

struct ConvexityReport {
  std::size_t trials = 0;
  double max_residual = 0.0;
  std::size_t max_interval_count = 0;
  std::size_t failure_count = 0;
  std::vector<CertificateTrial> records;  // in trial order
};

inline constexpr double kCertificateFailResidual = 1e-6;

/// Trials run concurrently; trial i draws its inputs from Rng::stream(seed, i)
/// so the report does not depend on scheduling. When the space has atoms and
/// the two drawn sets agree on them, E2 flips atom (i mod atoms) so every
/// trial probes mixing across an atom.
ConvexityReport convexity_certificate(const OVM& nu, std::size_t trials, std::uint64_t seed);
/// Single-threaded reference run of the same trials.
ConvexityReport convexity_certificate_serial(const OVM& nu, std::size_t trials, std::uint64_t seed);

}  // namespace ovmkit
