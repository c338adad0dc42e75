#pragma once

// JSON encodings of the library types.
//
//   matrix          {"dim": d, "re": [[...]], "im": [[...]]}
//   OVM             {"space": {...}, "dim", "variant", "cell_masses", "atom_masses", "components"}
//   MeasurableSet   {"cells": [indices], "atoms": [indices]}
//   StepDensity     {"cells": [matrix | null], "atoms": [...]}
//   QRV             {"cells": [matrix], "atoms": [matrix]}, numbers allowed for d = 1
//   AttainResult    {"intervals": [[lo, hi]], "atoms", "achieved", "residual", "interval_count", "iterations"}
//
// Decoders throw Error(InvalidInput) naming the offending key.

#include <string>

#include "json.hpp"
#include "ovmkit/lyapunov.hpp"
#include "ovmkit/qintegrate.hpp"
#include "ovmkit/rnderiv.hpp"

namespace ovmkit::io {

using nlohmann::json;

json to_json(const ComplexMatrix& m);
json to_json(const HermitianMatrix& m);
json to_json(const SampleSpace& s);
json to_json(const OVM& nu);
json to_json(const MeasurableSet& e);
json to_json(const StepDensity& r);
json to_json(const QuantumRandomVariable& f);
json to_json(const AttainResult& r);

ComplexMatrix complex_matrix_from_json(const json& j, const std::string& where = "matrix");
HermitianMatrix hermitian_from_json(const json& j, const std::string& where = "matrix");
SampleSpace space_from_json(const json& j);
OVM ovm_from_json(const json& j);
MeasurableSet set_from_json(const json& j, const SampleSpace& space);
QuantumRandomVariable qrv_from_json(const json& j, const SampleSpace& space, std::size_t dim);

/// Rejects any key of `j` outside `allowed`, naming it. `where` prefixes the message.
void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace ovmkit::io
