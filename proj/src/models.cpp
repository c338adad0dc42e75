#include "ovmkit/models.hpp"

#include <cmath>

namespace ovmkit::models {

OVM lebesgue_identity(std::size_t dim, std::size_t cells) {
  SampleSpace space = SampleSpace::uniform(0.0, 1.0, cells);
  std::vector<HermitianMatrix> masses;
  for (std::size_t k = 0; k < cells; ++k) masses.push_back(space.width(k) * HermitianMatrix::identity(dim));
  return OVM::make(std::move(space), dim, std::move(masses));
}

OVM scalar_grid(std::span<const double> masses, bool divisible) {
  SampleSpace space = SampleSpace::uniform(0.0, 1.0, masses.size(), {}, divisible);
  std::vector<HermitianMatrix> cells;
  for (double w : masses) cells.push_back(HermitianMatrix::diagonal(std::span<const double>(&w, 1)));
  return OVM::make(std::move(space), 1, std::move(cells));
}

OVM uhl(std::size_t cells, bool normalized) {
  SampleSpace space = SampleSpace::uniform(0.0, 1.0, cells, {}, false);
  std::vector<HermitianMatrix> masses;
  for (std::size_t k = 0; k < cells; ++k) {
    std::vector<double> diag(cells, 0.0);
    diag[k] = normalized ? 1.0 : space.width(k);
    masses.push_back(HermitianMatrix::diagonal(diag));
  }
  return OVM::make(std::move(space), cells, std::move(masses));
}

OVM truncated_diagonal(std::size_t levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidInput, "truncated_diagonal needs at least one level");
  std::vector<double> bp;
  for (std::size_t n = levels + 1; n >= 1; --n) bp.push_back(1.0 / static_cast<double>(n));
  SampleSpace space = SampleSpace::make(std::move(bp));
  const std::size_t dim = levels + 2;
  std::vector<HermitianMatrix> masses;
  for (std::size_t k = 0; k < levels; ++k) {
    const std::size_t n = levels - k;
    std::vector<double> diag(dim, 0.0);
    diag[0] = space.width(k);
    diag[n] = space.width(k);
    masses.push_back(HermitianMatrix::diagonal(diag));
  }
  return OVM::make(std::move(space), dim, std::move(masses));
}

State truncated_diagonal_state(std::size_t levels) {
  std::vector<double> probs(levels + 2);
  for (std::size_t i = 0; i <= levels; ++i) probs[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
  probs[levels + 1] = std::ldexp(1.0, -static_cast<int>(levels + 1));
  return State::diagonal(probs);
}

std::vector<OVM> mutually_singular(std::size_t n, std::size_t cells_per_block) {
  if (n == 0 || cells_per_block == 0) throw Error(ErrorKind::InvalidInput, "mutually_singular needs n, cells >= 1");
  std::vector<OVM> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> masses(n * cells_per_block, 0.0);
    for (std::size_t c = 0; c < cells_per_block; ++c) {
      masses[i * cells_per_block + c] = 1.0 / static_cast<double>(cells_per_block);
    }
    out.push_back(scalar_grid(masses));
  }
  return out;
}

std::vector<OVM> overlapping_scalar(std::size_t n, std::size_t cells) {
  const SampleSpace space = SampleSpace::uniform(0.0, 1.0, cells);
  std::vector<OVM> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = static_cast<double>(i + 1);
    std::vector<HermitianMatrix> masses;
    for (std::size_t k = 0; k < cells; ++k) {
      const double w = std::pow(space.cell_hi(k), p) - std::pow(space.cell_lo(k), p);
      masses.push_back(HermitianMatrix::diagonal(std::span<const double>(&w, 1)));
    }
    out.push_back(OVM::make(space, 1, std::move(masses)));
  }
  return out;
}

OVM single_atom(double mass) {
  SampleSpace space = SampleSpace::make({0.0, 1.0}, {0.5});
  return OVM::make(std::move(space), 1, {}, {HermitianMatrix::diagonal(std::span<const double>(&mass, 1))});
}

ComplexMatrix random_complex(Rng& rng, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double re = rng.uniform(-1.0, 1.0);
      const double im = rng.uniform(-1.0, 1.0);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

HermitianMatrix random_hermitian(Rng& rng, std::size_t dim) {
  const ComplexMatrix g = random_complex(rng, dim);
  return HermitianMatrix::from(0.5 * (g + g.adjoint()));
}

HermitianMatrix random_psd(Rng& rng, std::size_t dim) {
  const ComplexMatrix g = random_complex(rng, dim);
  return HermitianMatrix::from(g * g.adjoint() / static_cast<double>(dim));
}

State random_state(Rng& rng, std::size_t dim) {
  const HermitianMatrix g = random_psd(rng, dim);
  const HermitianMatrix mixed = (0.9 / g.trace()) * g + (0.1 / static_cast<double>(dim)) * HermitianMatrix::identity(dim);
  return State::from((1.0 / mixed.trace()) * mixed);
}

OVM random_grid_povm(Rng& rng, std::size_t dim, std::size_t cells, bool probability) {
  SampleSpace space = SampleSpace::uniform(0.0, 1.0, cells);
  std::vector<HermitianMatrix> masses;
  for (std::size_t k = 0; k < cells; ++k) masses.push_back(space.width(k) * random_psd(rng, dim));
  if (probability) {
    HermitianMatrix total = HermitianMatrix::zero(dim);
    for (const auto& m : masses) total += m;
    const Eigensystem es = eigh(total);
    const ComplexMatrix inv_root =
        es.vectors * es.values.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * es.vectors.adjoint();
    for (auto& m : masses) {
      const ComplexMatrix scaled = inv_root * m.mat() * inv_root;
      m = HermitianMatrix::from(0.5 * (scaled + scaled.adjoint()));
    }
  }
  return OVM::make(std::move(space), dim, std::move(masses));
}

MeasurableSet random_set(Rng& rng, const SampleSpace& space) {
  MeasurableSet e = MeasurableSet::empty(space);
  for (std::size_t k = 0; k < e.cells.size(); ++k) e.cells[k] = rng.coin();
  for (std::size_t a = 0; a < e.atoms.size(); ++a) e.atoms[a] = rng.coin();
  return e;
}

FractionalSet random_fractional(Rng& rng, const SampleSpace& space) {
  std::vector<double> h(space.cell_count());
  for (double& x : h) x = rng.uniform();
  return FractionalSet::make(std::move(h), std::vector<bool>(space.atom_count(), false));
}

QuantumRandomVariable random_qrv(Rng& rng, const SampleSpace& space, std::size_t dim, QrvKind kind) {
  auto draw = [&]() -> ComplexMatrix {
    switch (kind) {
      case QrvKind::General: return random_complex(rng, dim);
      case QrvKind::SelfAdjoint: return random_hermitian(rng, dim).mat();
      case QrvKind::Positive: return random_psd(rng, dim).mat();
    }
    return {};
  };
  std::vector<ComplexMatrix> cells, atoms;
  for (std::size_t k = 0; k < space.cell_count(); ++k) cells.push_back(draw());
  for (std::size_t a = 0; a < space.atom_count(); ++a) atoms.push_back(draw());
  return QuantumRandomVariable::make(space, dim, std::move(cells), std::move(atoms));
}

}  // namespace ovmkit::models
