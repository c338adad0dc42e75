#pragma once

// Quantum random variables as matrix-valued step functions, the quantum
// expected value E_nu(f) and the essential support / range / supremum.

#include <utility>
#include <vector>

#include "ovmkit/ovm.hpp"
#include "ovmkit/rnderiv.hpp"

namespace ovmkit {

class QuantumRandomVariable {
 public:
  QuantumRandomVariable() = default;

  static QuantumRandomVariable make(const SampleSpace& space, std::size_t dim, std::vector<ComplexMatrix> cells,
                                    std::vector<ComplexMatrix> atoms = {});
  static QuantumRandomVariable constant(const SampleSpace& space, const ComplexMatrix& value);

  const SampleSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<ComplexMatrix>& cells() const noexcept { return cells_; }
  const std::vector<ComplexMatrix>& atoms() const noexcept { return atoms_; }
  bool self_adjoint() const noexcept { return self_adjoint_; }
  bool positive() const noexcept { return positive_; }

 private:
  SampleSpace space_;
  std::size_t dim_ = 0;
  std::vector<ComplexMatrix> cells_;
  std::vector<ComplexMatrix> atoms_;
  bool self_adjoint_ = false;
  bool positive_ = false;
};

struct ScalarStepFunction {
  std::vector<Complex> cells;
  std::vector<Complex> atoms;
};

/// alpha f + beta g
QuantumRandomVariable combine(Complex alpha, const QuantumRandomVariable& f, Complex beta,
                              const QuantumRandomVariable& g);
/// (f + f*)/2 and (f - f*)/(2i), both self-adjoint.
QuantumRandomVariable real_part(const QuantumRandomVariable& f);
QuantumRandomVariable imag_part(const QuantumRandomVariable& f);

QuantumRandomVariable indicator(const SampleSpace& space, std::size_t dim, const MeasurableSet& e);
/// Lift of a scalar [0,1] function h to h * I.
QuantumRandomVariable scalar_lift(const SampleSpace& space, std::size_t dim, const FractionalSet& h);

std::pair<QuantumRandomVariable, QuantumRandomVariable> pos_neg_parts(const QuantumRandomVariable& f);

/// sum_k M_k^{1/2} F_k M_k^{1/2} + sum_a M_a^{1/2} F_a M_a^{1/2}.
ComplexMatrix integrate(const OVM& nu, const QuantumRandomVariable& f);
/// Same value through the four positive parts (Re f)+-, (Im f)+-.
ComplexMatrix integrate_by_parts(const OVM& nu, const QuantumRandomVariable& f);

/// f_s(x) = tr(s R(x)^{1/2} f(x) R(x)^{1/2}) with R = dnu/dnu_rho; 0 where R is undefined.
ScalarStepFunction integrand_fs(const QuantumRandomVariable& f, const State& s, const OVM& nu, const State& rho);
/// sum_k f_s(k) nu_rho(cell k) + atoms: the right side of the defining identity.
Complex integrate_fs(const ScalarStepFunction& fs, const InducedMeasure& reference);

MeasurableSet ess_support(const QuantumRandomVariable& f, const OVM& nu);
std::vector<ComplexMatrix> ess_range(const QuantumRandomVariable& f, const OVM& nu);
/// max ||A|| over the essential range.
double ess_sup(const QuantumRandomVariable& f, const OVM& nu);
/// inf{ M >= 0 : nu({x : ||f(x)|| > M}) = 0 }, computed from the cells directly.
double ess_sup_threshold(const QuantumRandomVariable& f, const OVM& nu);
bool ess_equal(const QuantumRandomVariable& f, const QuantumRandomVariable& g, const OVM& nu);

inline constexpr double kEssRangeDedupTol = 1e-10;

}  // namespace ovmkit
