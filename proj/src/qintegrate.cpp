#include "ovmkit/qintegrate.hpp"

#include <algorithm>
#include <cmath>

#include "ovmkit/kernels.hpp"

namespace ovmkit {

namespace {

bool nearly_hermitian(const ComplexMatrix& a) {
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  return asym <= kHermitianAsymmetryTol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

void require_same_space(const QuantumRandomVariable& f, const OVM& nu) {
  if (f.dim() != nu.dim()) throw Error(ErrorKind::DimMismatch, "random variable and OVM differ in dimension");
  if (!(f.space() == nu.space())) throw Error(ErrorKind::ShapeMismatch, "random variable and OVM differ in space");
}

template <class Fn>
QuantumRandomVariable map_values(const QuantumRandomVariable& f, Fn fn) {
  std::vector<ComplexMatrix> cells, atoms;
  cells.reserve(f.cells().size());
  for (const auto& v : f.cells()) cells.push_back(fn(v));
  for (const auto& v : f.atoms()) atoms.push_back(fn(v));
  return QuantumRandomVariable::make(f.space(), f.dim(), std::move(cells), std::move(atoms));
}

}  // namespace

QuantumRandomVariable QuantumRandomVariable::make(const SampleSpace& space, std::size_t dim,
                                                  std::vector<ComplexMatrix> cells,
                                                  std::vector<ComplexMatrix> atoms) {
  if (dim == 0) throw Error(ErrorKind::InvalidInput, "random variable dimension must be positive");
  if (cells.size() != space.cell_count()) throw Error(ErrorKind::ShapeMismatch, "one value per cell required");
  const auto d = static_cast<Eigen::Index>(dim);
  if (atoms.empty()) atoms.assign(space.atom_count(), ComplexMatrix::Zero(d, d));
  if (atoms.size() != space.atom_count()) throw Error(ErrorKind::ShapeMismatch, "one value per atom site required");
  QuantumRandomVariable f;
  f.self_adjoint_ = true;
  f.positive_ = true;
  for (const auto* group : {&cells, &atoms}) {
    for (const auto& v : *group) {
      if (v.rows() != d || v.cols() != d) throw Error(ErrorKind::DimMismatch, "value has the wrong dimension");
      require_finite(v, "random variable value");
      const bool sa = nearly_hermitian(v);
      f.self_adjoint_ = f.self_adjoint_ && sa;
      f.positive_ = f.positive_ && sa && psd_check(HermitianMatrix::from(v), kTolPsd);
    }
  }
  f.space_ = space;
  f.dim_ = dim;
  f.cells_ = std::move(cells);
  f.atoms_ = std::move(atoms);
  return f;
}

QuantumRandomVariable QuantumRandomVariable::constant(const SampleSpace& space, const ComplexMatrix& value) {
  return make(space, static_cast<std::size_t>(value.rows()), std::vector<ComplexMatrix>(space.cell_count(), value),
              std::vector<ComplexMatrix>(space.atom_count(), value));
}

QuantumRandomVariable combine(Complex alpha, const QuantumRandomVariable& f, Complex beta,
                              const QuantumRandomVariable& g) {
  if (f.dim() != g.dim() || !(f.space() == g.space())) {
    throw Error(ErrorKind::ShapeMismatch, "combine operands differ in shape");
  }
  std::vector<ComplexMatrix> cells, atoms;
  for (std::size_t k = 0; k < f.cells().size(); ++k) cells.push_back(alpha * f.cells()[k] + beta * g.cells()[k]);
  for (std::size_t a = 0; a < f.atoms().size(); ++a) atoms.push_back(alpha * f.atoms()[a] + beta * g.atoms()[a]);
  return QuantumRandomVariable::make(f.space(), f.dim(), std::move(cells), std::move(atoms));
}

QuantumRandomVariable real_part(const QuantumRandomVariable& f) {
  return map_values(f, [](const ComplexMatrix& v) -> ComplexMatrix { return 0.5 * (v + v.adjoint()); });
}

QuantumRandomVariable imag_part(const QuantumRandomVariable& f) {
  const Complex half_inv_i(0.0, -0.5);
  return map_values(f, [&](const ComplexMatrix& v) -> ComplexMatrix { return half_inv_i * (v - v.adjoint()); });
}

QuantumRandomVariable indicator(const SampleSpace& space, std::size_t dim, const MeasurableSet& e) {
  if (!e.matches(space)) throw Error(ErrorKind::ShapeMismatch, "set does not match the sample space");
  const auto d = static_cast<Eigen::Index>(dim);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix zero = ComplexMatrix::Zero(d, d);
  std::vector<ComplexMatrix> cells, atoms;
  for (bool in : e.cells) cells.push_back(in ? id : zero);
  for (bool in : e.atoms) atoms.push_back(in ? id : zero);
  return QuantumRandomVariable::make(space, dim, std::move(cells), std::move(atoms));
}

QuantumRandomVariable scalar_lift(const SampleSpace& space, std::size_t dim, const FractionalSet& h) {
  if (!h.matches(space)) throw Error(ErrorKind::ShapeMismatch, "fractional set does not match the sample space");
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<ComplexMatrix> cells, atoms;
  for (double x : h.cells) cells.push_back(x * ComplexMatrix::Identity(d, d));
  for (bool in : h.atoms) atoms.push_back((in ? 1.0 : 0.0) * ComplexMatrix::Identity(d, d));
  return QuantumRandomVariable::make(space, dim, std::move(cells), std::move(atoms));
}

std::pair<QuantumRandomVariable, QuantumRandomVariable> pos_neg_parts(const QuantumRandomVariable& f) {
  if (!f.self_adjoint()) throw Error(ErrorKind::NotSelfAdjoint, "positive/negative parts need a self-adjoint f");
  auto split = [](const ComplexMatrix& v, bool positive_part) -> ComplexMatrix {
    const Eigensystem es = eigh(HermitianMatrix::from(0.5 * (v + v.adjoint())));
    const RealVector lam = positive_part ? RealVector(es.values.cwiseMax(0.0)) : RealVector((-es.values).cwiseMax(0.0));
    ComplexMatrix out = es.vectors * lam.cast<Complex>().asDiagonal() * es.vectors.adjoint();
    return 0.5 * (out + out.adjoint());
  };
  return {map_values(f, [&](const ComplexMatrix& v) { return split(v, true); }),
          map_values(f, [&](const ComplexMatrix& v) { return split(v, false); })};
}

ComplexMatrix integrate(const OVM& nu, const QuantumRandomVariable& f) {
  require_same_space(f, nu);
  if (!nu.positive()) throw Error(ErrorKind::Unsupported, "integration is defined against positive OVMs");
  ComplexMatrix out = kernels::omp::conjugated_sum(kernels::omp::psd_roots(nu.cell_masses()), f.cells());
  if (!nu.atom_masses().empty()) {
    out += kernels::omp::conjugated_sum(kernels::omp::psd_roots(nu.atom_masses()), f.atoms());
  }
  return out;
}

ComplexMatrix integrate_by_parts(const OVM& nu, const QuantumRandomVariable& f) {
  const auto [re_pos, re_neg] = pos_neg_parts(real_part(f));
  const auto [im_pos, im_neg] = pos_neg_parts(imag_part(f));
  const Complex i(0.0, 1.0);
  return integrate(nu, re_pos) - integrate(nu, re_neg) + i * integrate(nu, im_pos) - i * integrate(nu, im_neg);
}

ScalarStepFunction integrand_fs(const QuantumRandomVariable& f, const State& s, const OVM& nu, const State& rho) {
  require_same_space(f, nu);
  if (s.dim() != nu.dim()) throw Error(ErrorKind::DimMismatch, "state dimension differs from OVM dimension");
  const StepDensity r = rn_derivative(nu, rho);
  auto value = [&](const std::optional<HermitianMatrix>& deriv, const ComplexMatrix& v) -> Complex {
    if (!deriv) return 0.0;
    const HermitianMatrix root = psd_sqrt(*deriv);
    return trace_pair(s, root.mat() * v * root.mat());
  };
  ScalarStepFunction out;
  for (std::size_t k = 0; k < f.cells().size(); ++k) out.cells.push_back(value(r.cells[k], f.cells()[k]));
  for (std::size_t a = 0; a < f.atoms().size(); ++a) out.atoms.push_back(value(r.atoms[a], f.atoms()[a]));
  return out;
}

Complex integrate_fs(const ScalarStepFunction& fs, const InducedMeasure& reference) {
  if (fs.cells.size() != reference.cells.size() || fs.atoms.size() != reference.atoms.size()) {
    throw Error(ErrorKind::ShapeMismatch, "integrand does not match the reference measure");
  }
  Complex acc = 0.0;
  for (std::size_t k = 0; k < fs.cells.size(); ++k) acc += fs.cells[k] * reference.cells[k];
  for (std::size_t a = 0; a < fs.atoms.size(); ++a) acc += fs.atoms[a] * reference.atoms[a];
  return acc;
}

MeasurableSet ess_support(const QuantumRandomVariable& f, const OVM& nu) {
  require_same_space(f, nu);
  MeasurableSet out = MeasurableSet::empty(nu.space());
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    out.cells[k] = !is_zero_mass(nu.cell_masses()[k]) && op_norm(f.cells()[k]) > kZeroMassTol;
  }
  for (std::size_t a = 0; a < out.atoms.size(); ++a) {
    out.atoms[a] = !is_zero_mass(nu.atom_masses()[a]) && op_norm(f.atoms()[a]) > kZeroMassTol;
  }
  return out;
}

std::vector<ComplexMatrix> ess_range(const QuantumRandomVariable& f, const OVM& nu) {
  require_same_space(f, nu);
  std::vector<ComplexMatrix> out;
  auto add = [&](const ComplexMatrix& v) {
    for (const auto& seen : out) {
      if (op_norm(ComplexMatrix(v - seen)) <= kEssRangeDedupTol) return;
    }
    out.push_back(v);
  };
  for (std::size_t k = 0; k < f.cells().size(); ++k) {
    if (!is_zero_mass(nu.cell_masses()[k])) add(f.cells()[k]);
  }
  for (std::size_t a = 0; a < f.atoms().size(); ++a) {
    if (!is_zero_mass(nu.atom_masses()[a])) add(f.atoms()[a]);
  }
  return out;
}

double ess_sup(const QuantumRandomVariable& f, const OVM& nu) {
  double out = 0.0;
  for (const auto& v : ess_range(f, nu)) out = std::max(out, op_norm(v));
  return out;
}

double ess_sup_threshold(const QuantumRandomVariable& f, const OVM& nu) {
  require_same_space(f, nu);
  // {||f|| > M} is null exactly when M is at least every norm carried by a
  // non-null cell, so the infimum is the largest such norm.
  double bound = 0.0;
  for (std::size_t k = 0; k < f.cells().size(); ++k) {
    if (!is_zero_mass(nu.cell_masses()[k])) bound = std::max(bound, op_norm(f.cells()[k]));
  }
  for (std::size_t a = 0; a < f.atoms().size(); ++a) {
    if (!is_zero_mass(nu.atom_masses()[a])) bound = std::max(bound, op_norm(f.atoms()[a]));
  }
  return bound;
}

bool ess_equal(const QuantumRandomVariable& f, const QuantumRandomVariable& g, const OVM& nu) {
  const double gap = ess_sup(combine(1.0, f, -1.0, g), nu);
  return gap <= 1e-10 * std::max({1.0, ess_sup(f, nu), ess_sup(g, nu)});
}

}  // namespace ovmkit
