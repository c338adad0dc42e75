#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ovmkit/ovm.hpp"

namespace ovmkit {

/// dnu/dnu_rho as a step function. Cells and atoms of zero nu_rho mass are
/// left undefined (std::nullopt).
struct StepDensity {
  std::vector<std::optional<HermitianMatrix>> cells;
  std::vector<std::optional<HermitianMatrix>> atoms;
  InducedMeasure reference;
};

struct RnExistence {
  bool exists = true;
  std::vector<std::size_t> failing_cells;
  std::vector<std::size_t> failing_atoms;
};

/// Holds iff tr(rho M) > kRankTol * ||M|| wherever M is nonzero.
RnExistence rn_exists(const OVM& nu, const State& rho);

/// R = M / tr(rho M) cellwise. Throws DerivativeDoesNotExist naming the
/// failing cells, Unsupported for a non-positive nu.
StepDensity rn_derivative(const OVM& nu, const State& rho);

/// max over sets and entries of |nu_ij(E) - sum_{k in E} (R_k)_ij nu_rho(k)|.
double rn_consistency(const OVM& nu, const State& rho, std::span<const MeasurableSet> sets);

}  // namespace ovmkit
