#include "ovmkit/ovm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ovmkit {

const char* to_string(OvmVariant v) noexcept {
  switch (v) {
    case OvmVariant::Grid: return "grid";
    case OvmVariant::Atomic: return "atomic";
    case OvmVariant::Mixed: return "mixed";
    case OvmVariant::DirectSum: return "direct_sum";
  }
  return "grid";
}

SampleSpace SampleSpace::make(std::vector<double> breakpoints, std::vector<double> atom_sites,
                              std::vector<bool> divisible) {
  if (breakpoints.size() < 2) throw Error(ErrorKind::InvalidInput, "sample space needs at least one cell");
  for (double x : breakpoints) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "non-finite breakpoint");
  }
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      throw Error(ErrorKind::InvalidInput, "breakpoints must be strictly increasing", {k});
    }
  }
  const std::size_t m = breakpoints.size() - 1;
  if (divisible.empty()) divisible.assign(m, true);
  if (divisible.size() != m) throw Error(ErrorKind::ShapeMismatch, "one divisible flag per cell");
  std::vector<double> sorted = atom_sites;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!std::isfinite(sorted[i]) || sorted[i] < breakpoints.front() || sorted[i] > breakpoints.back()) {
      throw Error(ErrorKind::InvalidInput, "atom site outside [a, b]");
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) throw Error(ErrorKind::InvalidInput, "duplicate atom site");
  }
  SampleSpace s;
  s.breakpoints_ = std::move(breakpoints);
  s.atom_sites_ = std::move(atom_sites);
  s.divisible_ = std::move(divisible);
  return s;
}

SampleSpace SampleSpace::uniform(double a, double b, std::size_t cells, std::vector<double> atom_sites,
                                 bool divisible) {
  if (cells == 0) throw Error(ErrorKind::InvalidInput, "uniform space needs at least one cell");
  std::vector<double> bp(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) {
    bp[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(cells);
  }
  bp.back() = b;
  return make(std::move(bp), std::move(atom_sites), std::vector<bool>(cells, divisible));
}

MeasurableSet MeasurableSet::empty(const SampleSpace& space) {
  return {std::vector<bool>(space.cell_count(), false), std::vector<bool>(space.atom_count(), false)};
}

MeasurableSet MeasurableSet::full(const SampleSpace& space) {
  return {std::vector<bool>(space.cell_count(), true), std::vector<bool>(space.atom_count(), true)};
}

MeasurableSet MeasurableSet::from_bits(const SampleSpace& space, std::uint64_t bits) {
  const std::size_t m = space.cell_count();
  const std::size_t n = space.atom_count();
  if (m + n > 64) throw Error(ErrorKind::SizeLimit, "bit encoding holds at most 64 cells + atoms");
  MeasurableSet e = empty(space);
  for (std::size_t k = 0; k < m; ++k) e.cells[k] = (bits >> k) & 1U;
  for (std::size_t a = 0; a < n; ++a) e.atoms[a] = (bits >> (m + a)) & 1U;
  return e;
}

MeasurableSet MeasurableSet::from_indices(const SampleSpace& space, std::span<const std::size_t> cells,
                                          std::span<const std::size_t> atom_idx) {
  MeasurableSet e = empty(space);
  for (std::size_t k : cells) {
    if (k >= e.cells.size()) throw Error(ErrorKind::ShapeMismatch, "cell index out of range", {k});
    e.cells[k] = true;
  }
  for (std::size_t a : atom_idx) {
    if (a >= e.atoms.size()) throw Error(ErrorKind::ShapeMismatch, "atom index out of range", {a});
    e.atoms[a] = true;
  }
  return e;
}

bool MeasurableSet::matches(const SampleSpace& space) const noexcept {
  return cells.size() == space.cell_count() && atoms.size() == space.atom_count();
}

MeasurableSet MeasurableSet::complement() const {
  MeasurableSet out = *this;
  out.cells.flip();
  out.atoms.flip();
  return out;
}

MeasurableSet intersect(const MeasurableSet& e, const MeasurableSet& f) {
  if (e.cells.size() != f.cells.size() || e.atoms.size() != f.atoms.size()) {
    throw Error(ErrorKind::ShapeMismatch, "intersect operands");
  }
  MeasurableSet out = e;
  for (std::size_t k = 0; k < out.cells.size(); ++k) out.cells[k] = e.cells[k] && f.cells[k];
  for (std::size_t a = 0; a < out.atoms.size(); ++a) out.atoms[a] = e.atoms[a] && f.atoms[a];
  return out;
}

FractionalSet FractionalSet::make(std::vector<double> cells, std::vector<bool> atoms) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    double& h = cells[k];
    if (!std::isfinite(h) || h < -1e-12 || h > 1.0 + 1e-12) {
      throw Error(ErrorKind::InvalidInput, "fractional value outside [0,1]", {k});
    }
    h = std::clamp(h, 0.0, 1.0);
  }
  return {std::move(cells), std::move(atoms)};
}

FractionalSet FractionalSet::constant(const SampleSpace& space, double value) {
  return make(std::vector<double>(space.cell_count(), value), std::vector<bool>(space.atom_count(), false));
}

FractionalSet FractionalSet::from_set(const MeasurableSet& e) {
  std::vector<double> cells(e.cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = e.cells[k] ? 1.0 : 0.0;
  return {std::move(cells), e.atoms};
}

bool FractionalSet::matches(const SampleSpace& space) const noexcept {
  return cells.size() == space.cell_count() && atoms.size() == space.atom_count();
}

namespace {

HermitianMatrix sum_all(const std::vector<HermitianMatrix>& cells, const std::vector<HermitianMatrix>& atoms,
                        std::size_t dim) {
  HermitianMatrix total = HermitianMatrix::zero(dim);
  for (const auto& m : cells) total += m;
  for (const auto& m : atoms) total += m;
  return total;
}

bool all_psd(const std::vector<HermitianMatrix>& ms) {
  return std::all_of(ms.begin(), ms.end(), [](const HermitianMatrix& m) { return psd_check(m, kTolPsd); });
}

}  // namespace

OVM OVM::make(SampleSpace space, std::size_t dim, std::vector<HermitianMatrix> cell_masses,
              std::vector<HermitianMatrix> atom_masses) {
  if (dim == 0) throw Error(ErrorKind::InvalidInput, "OVM dimension must be positive");
  const bool has_cells = !cell_masses.empty();
  const bool has_atoms = !atom_masses.empty();
  if (has_cells && cell_masses.size() != space.cell_count()) {
    throw Error(ErrorKind::ShapeMismatch, "one cell mass per cell required");
  }
  if (has_atoms && atom_masses.size() != space.atom_count()) {
    throw Error(ErrorKind::ShapeMismatch, "one atom mass per atom site required");
  }
  if (!has_cells) cell_masses.assign(space.cell_count(), HermitianMatrix::zero(dim));
  if (!has_atoms) atom_masses.assign(space.atom_count(), HermitianMatrix::zero(dim));
  for (const auto* group : {&cell_masses, &atom_masses}) {
    for (const auto& m : *group) {
      if (m.dim() != dim) throw Error(ErrorKind::DimMismatch, "mass dimension differs from OVM dimension");
    }
  }
  OVM nu;
  nu.variant_ = has_cells && has_atoms ? OvmVariant::Mixed
                : has_atoms            ? OvmVariant::Atomic
                                       : OvmVariant::Grid;
  nu.space_ = std::move(space);
  nu.dim_ = dim;
  nu.positive_ = all_psd(cell_masses) && all_psd(atom_masses);
  nu.total_ = sum_all(cell_masses, atom_masses, dim);
  nu.cells_ = std::move(cell_masses);
  nu.atoms_ = std::move(atom_masses);
  return nu;
}

OVM OVM::direct_sum(std::span<const OVM> components) {
  if (components.empty()) throw Error(ErrorKind::InvalidInput, "direct sum of no components");
  const SampleSpace& space = components.front().space();
  std::size_t dim = 0;
  for (const auto& c : components) {
    if (!(c.space() == space)) throw Error(ErrorKind::SpaceMismatch, "direct sum components differ in space");
    dim += c.dim();
  }
  auto blocks = [&](auto member, std::size_t idx) {
    std::vector<HermitianMatrix> parts;
    parts.reserve(components.size());
    for (const auto& c : components) parts.push_back((c.*member)()[idx]);
    return ovmkit::direct_sum(std::span<const HermitianMatrix>(parts));
  };
  std::vector<HermitianMatrix> cells, atoms;
  for (std::size_t k = 0; k < space.cell_count(); ++k) cells.push_back(blocks(&OVM::cell_masses, k));
  for (std::size_t a = 0; a < space.atom_count(); ++a) atoms.push_back(blocks(&OVM::atom_masses, a));
  OVM nu;
  nu.space_ = space;
  nu.dim_ = dim;
  nu.variant_ = OvmVariant::DirectSum;
  nu.positive_ = std::all_of(components.begin(), components.end(), [](const OVM& c) { return c.positive(); });
  nu.total_ = sum_all(cells, atoms, dim);
  nu.cells_ = std::move(cells);
  nu.atoms_ = std::move(atoms);
  nu.components_.assign(components.begin(), components.end());
  return nu;
}

OVM direct_sum(std::span<const OVM> components) { return OVM::direct_sum(components); }

double InducedMeasure::total() const {
  double t = 0.0;
  for (double x : cells) t += x;
  for (double x : atoms) t += x;
  return t;
}

double InducedMeasure::evaluate(const MeasurableSet& e) const {
  if (e.cells.size() != cells.size() || e.atoms.size() != atoms.size()) {
    throw Error(ErrorKind::ShapeMismatch, "set does not match induced measure");
  }
  double t = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) t += e.cells[k] ? cells[k] : 0.0;
  for (std::size_t a = 0; a < atoms.size(); ++a) t += e.atoms[a] ? atoms[a] : 0.0;
  return t;
}

bool is_zero_mass(const HermitianMatrix& m) { return op_norm(m) <= kZeroMassTol; }

HermitianMatrix evaluate(const OVM& nu, const MeasurableSet& e) {
  if (!e.matches(nu.space())) throw Error(ErrorKind::ShapeMismatch, "set masks do not match the sample space");
  HermitianMatrix out = HermitianMatrix::zero(nu.dim());
  for (std::size_t k = 0; k < e.cells.size(); ++k) {
    if (e.cells[k]) out += nu.cell_masses()[k];
  }
  for (std::size_t a = 0; a < e.atoms.size(); ++a) {
    if (e.atoms[a]) out += nu.atom_masses()[a];
  }
  return out;
}

HermitianMatrix evaluate_fractional(const OVM& nu, const FractionalSet& h) {
  if (!h.matches(nu.space())) throw Error(ErrorKind::ShapeMismatch, "fractional set does not match the sample space");
  HermitianMatrix out = HermitianMatrix::zero(nu.dim());
  for (std::size_t k = 0; k < h.cells.size(); ++k) {
    if (h.cells[k] == 1.0) {
      out += nu.cell_masses()[k];
    } else if (h.cells[k] != 0.0) {
      out += h.cells[k] * nu.cell_masses()[k];
    }
  }
  for (std::size_t a = 0; a < h.atoms.size(); ++a) {
    if (h.atoms[a]) out += nu.atom_masses()[a];
  }
  return out;
}

InducedMeasure induced_measure(const OVM& nu, const State& rho) {
  if (rho.dim() != nu.dim()) throw Error(ErrorKind::DimMismatch, "state dimension differs from OVM dimension");
  InducedMeasure out{nu.space(), {}, {}};
  out.cells.reserve(nu.cell_masses().size());
  for (const auto& m : nu.cell_masses()) out.cells.push_back(trace_pair(rho, m.mat()).real());
  for (const auto& m : nu.atom_masses()) out.atoms.push_back(trace_pair(rho, m.mat()).real());
  return out;
}

EntryMeasure entry_measure(const OVM& nu, std::size_t i, std::size_t j) {
  if (i >= nu.dim() || j >= nu.dim()) throw Error(ErrorKind::InvalidInput, "entry index out of range");
  EntryMeasure out;
  for (const auto& m : nu.cell_masses()) out.cells.push_back(m(i, j));
  for (const auto& m : nu.atom_masses()) out.atoms.push_back(m(i, j));
  return out;
}

std::vector<Atom> atoms(const OVM& nu) {
  std::vector<Atom> out;
  for (std::size_t a = 0; a < nu.atom_masses().size(); ++a) {
    if (!is_zero_mass(nu.atom_masses()[a])) out.push_back({a, nu.space().atom_sites()[a], nu.atom_masses()[a]});
  }
  return out;
}

bool is_nonatomic(const OVM& nu) {
  if (!atoms(nu).empty()) return false;
  for (std::size_t k = 0; k < nu.cell_masses().size(); ++k) {
    if (!nu.space().divisible()[k] && !is_zero_mass(nu.cell_masses()[k])) return false;
  }
  return true;
}

OvmPropertyReport check_ovm_properties(const OVM& nu, std::span<const MeasurableSet> sample_sets) {
  OvmPropertyReport r;
  auto finite = [](const HermitianMatrix& m) { return m.mat().allFinite(); };
  auto hermitian = [](const HermitianMatrix& m) { return m.mat() == m.mat().adjoint(); };
  r.bounded = std::all_of(nu.cell_masses().begin(), nu.cell_masses().end(), finite) &&
              std::all_of(nu.atom_masses().begin(), nu.atom_masses().end(), finite);
  r.self_adjoint = std::all_of(nu.cell_masses().begin(), nu.cell_masses().end(), hermitian) &&
                   std::all_of(nu.atom_masses().begin(), nu.atom_masses().end(), hermitian);
  r.positive = all_psd(nu.cell_masses()) && all_psd(nu.atom_masses());

  const double total_norm = op_norm(nu.total());
  const double spectral_tol = 1e-9 * std::max(1.0, total_norm * total_norm);
  r.spectral = true;
  std::vector<HermitianMatrix> values;
  values.reserve(sample_sets.size());
  for (const auto& e : sample_sets) values.push_back(evaluate(nu, e));
  for (std::size_t p = 0; p < sample_sets.size(); ++p) {
    for (std::size_t q = p; q < sample_sets.size(); ++q) {
      const HermitianMatrix meet = evaluate(nu, intersect(sample_sets[p], sample_sets[q]));
      const double defect = op_norm(ComplexMatrix(meet.mat() - values[p].mat() * values[q].mat()));
      r.spectral_defect = std::max(r.spectral_defect, defect);
      if (defect > spectral_tol) r.spectral = false;
    }
  }
  r.probability_defect = op_norm(nu.total() - HermitianMatrix::identity(nu.dim()));
  r.probability = r.positive && r.probability_defect <= 1e-12;
  return r;
}

namespace {

struct NullPattern {
  const SampleSpace* space;
  std::vector<bool> cells;
  std::vector<bool> atoms;
};

NullPattern null_pattern(const OVM& nu) {
  NullPattern p{&nu.space(), {}, {}};
  for (const auto& m : nu.cell_masses()) p.cells.push_back(is_zero_mass(m));
  for (const auto& m : nu.atom_masses()) p.atoms.push_back(is_zero_mass(m));
  return p;
}

NullPattern null_pattern(const InducedMeasure& mu) {
  NullPattern p{&mu.space, {}, {}};
  for (double x : mu.cells) p.cells.push_back(std::abs(x) <= kZeroMassTol);
  for (double x : mu.atoms) p.atoms.push_back(std::abs(x) <= kZeroMassTol);
  return p;
}

bool dominated(const NullPattern& p1, const NullPattern& p2) {
  if (!(*p1.space == *p2.space)) throw Error(ErrorKind::SpaceMismatch, "absolute continuity across different spaces");
  for (std::size_t k = 0; k < p2.cells.size(); ++k) {
    if (p2.cells[k] && !p1.cells[k]) return false;
  }
  for (std::size_t a = 0; a < p2.atoms.size(); ++a) {
    if (p2.atoms[a] && !p1.atoms[a]) return false;
  }
  return true;
}

}  // namespace

bool abs_continuous(const OVM& nu1, const OVM& nu2) { return dominated(null_pattern(nu1), null_pattern(nu2)); }
bool abs_continuous(const InducedMeasure& nu1, const InducedMeasure& nu2) {
  return dominated(null_pattern(nu1), null_pattern(nu2));
}
bool abs_continuous(const OVM& nu1, const InducedMeasure& nu2) {
  return dominated(null_pattern(nu1), null_pattern(nu2));
}
bool abs_continuous(const InducedMeasure& nu1, const OVM& nu2) {
  return dominated(null_pattern(nu1), null_pattern(nu2));
}

std::vector<MeasurableSet> all_sets(const SampleSpace& space) {
  const std::size_t bits = space.cell_count() + space.atom_count();
  if (bits > 20) throw Error(ErrorKind::SizeLimit, "set algebra enumeration limited to 2^20 sets");
  std::vector<MeasurableSet> out;
  out.reserve(std::size_t{1} << bits);
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << bits); ++b) out.push_back(MeasurableSet::from_bits(space, b));
  return out;
}

}  // namespace ovmkit
