#pragma once

// Named OVMs used by the demos, together with seeded random instances.

#include <cstddef>
#include <span>
#include <vector>

#include "ovmkit/ovm.hpp"
#include "ovmkit/qintegrate.hpp"
#include "ovmkit/rng.hpp"

namespace ovmkit::models {

/// Lebesgue measure times I_d on m equal cells of [0, 1).
OVM lebesgue_identity(std::size_t dim, std::size_t cells);

/// Scalar (d = 1) measure with the given per-cell masses on equal cells of [0, 1).
OVM scalar_grid(std::span<const double> masses, bool divisible = true);

/// Diagonal projection model on m equal, non-divisible cells: cell k has mass
/// e_kk (normalized, total I) or w_k e_kk.
OVM uhl(std::size_t cells, bool normalized = true);

/// Truncated diag(mu, mu_1, ..., mu_N, 0) on [1/(N+1), 1] with cells
/// I_n = [1/(n+1), 1/n). Cell index k holds I_n with n = N - k.
OVM truncated_diagonal(std::size_t levels);
/// diag(1/2, 1/4, ..., 1/2^{N+1}, 1/2^{N+1}).
State truncated_diagonal_state(std::size_t levels);
/// Level n (1-based) to cell index.
inline std::size_t truncated_diagonal_cell(std::size_t levels, std::size_t n) { return levels - n; }

/// n scalar probability measures, measure i uniform on its own block of
/// `cells_per_block` cells of [0, 1).
std::vector<OVM> mutually_singular(std::size_t n, std::size_t cells_per_block);

/// n scalar measures on m equal cells of [0, 1) with densities
/// (i + 1) x^i, i = 0..n-1 (all probability measures, overlapping supports).
std::vector<OVM> overlapping_scalar(std::size_t n, std::size_t cells);

/// d = 1, one cell of zero mass on [0, 1) and a single atom of the given mass at 1/2.
OVM single_atom(double mass = 1.0);

// Random instances.
HermitianMatrix random_hermitian(Rng& rng, std::size_t dim);
HermitianMatrix random_psd(Rng& rng, std::size_t dim);
ComplexMatrix random_complex(Rng& rng, std::size_t dim);
/// Full-rank state: 0.9 * G G^H / tr + 0.1 * I / d.
State random_state(Rng& rng, std::size_t dim);
/// Positive grid OVM on m equal divisible cells with Gram-matrix masses
/// scaled by the cell width; `probability` rescales to total mass I.
OVM random_grid_povm(Rng& rng, std::size_t dim, std::size_t cells, bool probability = false);
MeasurableSet random_set(Rng& rng, const SampleSpace& space);
FractionalSet random_fractional(Rng& rng, const SampleSpace& space);

enum class QrvKind { General, SelfAdjoint, Positive };
QuantumRandomVariable random_qrv(Rng& rng, const SampleSpace& space, std::size_t dim, QrvKind kind);

}  // namespace ovmkit::models
