#include "ovmkit/rnderiv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ovmkit {

namespace {

bool derivative_defined(const HermitianMatrix& m, const State& rho, double& trace) {
  trace = trace_pair(rho, m.mat()).real();
  return trace > kRankTol * op_norm(m);
}

}  // namespace

RnExistence rn_exists(const OVM& nu, const State& rho) {
  if (rho.dim() != nu.dim()) throw Error(ErrorKind::DimMismatch, "state dimension differs from OVM dimension");
  RnExistence out;
  double tr = 0.0;
  for (std::size_t k = 0; k < nu.cell_masses().size(); ++k) {
    const auto& m = nu.cell_masses()[k];
    if (!is_zero_mass(m) && !derivative_defined(m, rho, tr)) out.failing_cells.push_back(k);
  }
  for (std::size_t a = 0; a < nu.atom_masses().size(); ++a) {
    const auto& m = nu.atom_masses()[a];
    if (!is_zero_mass(m) && !derivative_defined(m, rho, tr)) out.failing_atoms.push_back(a);
  }
  out.exists = out.failing_cells.empty() && out.failing_atoms.empty();
  return out;
}

StepDensity rn_derivative(const OVM& nu, const State& rho) {
  if (!nu.positive()) throw Error(ErrorKind::Unsupported, "Radon-Nikodym derivative requires a positive OVM");
  const RnExistence ex = rn_exists(nu, rho);
  if (!ex.exists) {
    std::string which = "nu_rho vanishes where nu does not, cells:";
    for (std::size_t k : ex.failing_cells) which += " " + std::to_string(k);
    if (!ex.failing_atoms.empty()) {
      which += "; atoms:";
      for (std::size_t a : ex.failing_atoms) which += " " + std::to_string(a);
    }
    throw Error(ErrorKind::DerivativeDoesNotExist, which, ex.failing_cells);
  }
  StepDensity out;
  out.reference = induced_measure(nu, rho);
  auto fill = [](const std::vector<HermitianMatrix>& masses, const std::vector<double>& traces,
                 std::vector<std::optional<HermitianMatrix>>& dst) {
    dst.reserve(masses.size());
    for (std::size_t k = 0; k < masses.size(); ++k) {
      if (is_zero_mass(masses[k]) || traces[k] <= 0.0) {
        dst.emplace_back(std::nullopt);
      } else {
        dst.emplace_back((1.0 / traces[k]) * masses[k]);
      }
    }
  };
  fill(nu.cell_masses(), out.reference.cells, out.cells);
  fill(nu.atom_masses(), out.reference.atoms, out.atoms);
  return out;
}

double rn_consistency(const OVM& nu, const State& rho, std::span<const MeasurableSet> sets) {
  const StepDensity r = rn_derivative(nu, rho);
  const auto d = static_cast<Eigen::Index>(nu.dim());
  double worst = 0.0;
  for (const auto& e : sets) {
    const HermitianMatrix direct = evaluate(nu, e);
    ComplexMatrix rebuilt = ComplexMatrix::Zero(d, d);
    for (std::size_t k = 0; k < e.cells.size(); ++k) {
      if (e.cells[k] && r.cells[k]) rebuilt += r.cells[k]->mat() * r.reference.cells[k];
    }
    for (std::size_t a = 0; a < e.atoms.size(); ++a) {
      if (e.atoms[a] && r.atoms[a]) rebuilt += r.atoms[a]->mat() * r.reference.atoms[a];
    }
    worst = std::max(worst, (direct.mat() - rebuilt).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace ovmkit
