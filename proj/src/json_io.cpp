#include "ovmkit/json_io.hpp"

#include <algorithm>

namespace ovmkit::io {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::InvalidInput, where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    bad(where, "expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::vector<std::size_t> indices(const json& j, std::size_t limit, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::size_t v = count(j[i], where + "[" + std::to_string(i) + "]");
    if (v >= limit) bad(where, "index " + std::to_string(v) + " out of range");
    out.push_back(v);
  }
  return out;
}

json bool_indices(const std::vector<bool>& mask) {
  json out = json::array();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

std::vector<HermitianMatrix> hermitian_list(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of matrices");
  std::vector<HermitianMatrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(hermitian_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) bad(where, "unknown key '" + key + "'");
  }
}

json to_json(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array();
    json ii = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ii.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

json to_json(const HermitianMatrix& m) { return to_json(m.mat()); }

ComplexMatrix complex_matrix_from_json(const json& j, const std::string& where) {
  require_keys(j, {"dim", "re", "im"}, where);
  const std::size_t d = count(field(j, "dim", where), where + ".dim");
  if (d == 0) bad(where, "dim must be positive");
  const auto di = static_cast<Eigen::Index>(d);
  ComplexMatrix m = ComplexMatrix::Zero(di, di);
  auto fill = [&](const char* key, bool imag) {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (imag) return;
      bad(where, std::string("missing key '") + key + "'");
    }
    const json& rows = *it;
    if (!rows.is_array() || rows.size() != d) bad(where + "." + key, "expected " + std::to_string(d) + " rows");
    for (std::size_t r = 0; r < d; ++r) {
      if (!rows[r].is_array() || rows[r].size() != d) {
        bad(where + "." + key + "[" + std::to_string(r) + "]", "expected " + std::to_string(d) + " entries");
      }
      for (std::size_t c = 0; c < d; ++c) {
        const double v = number(rows[r][c], where + "." + key);
        auto& z = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        z = imag ? Complex(z.real(), v) : Complex(v, z.imag());
      }
    }
  };
  fill("re", false);
  fill("im", true);
  require_finite(m, where.c_str());
  return m;
}

HermitianMatrix hermitian_from_json(const json& j, const std::string& where) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return HermitianMatrix::diagonal(std::span<const double>(&v, 1));
  }
  return HermitianMatrix::from(complex_matrix_from_json(j, where));
}

json to_json(const SampleSpace& s) {
  return json{{"a", s.a()},
              {"b", s.b()},
              {"breakpoints", s.breakpoints()},
              {"atoms", s.atom_sites()},
              {"divisible", s.divisible()}};
}

SampleSpace space_from_json(const json& j) {
  const std::string where = "space";
  require_keys(j, {"a", "b", "breakpoints", "atoms", "divisible", "cells"}, where);
  std::vector<double> atoms;
  if (j.contains("atoms")) {
    for (const auto& v : j["atoms"]) atoms.push_back(number(v, where + ".atoms"));
  }
  std::vector<bool> divisible;
  if (j.contains("divisible")) {
    const json& d = j["divisible"];
    if (d.is_boolean()) {
      divisible.assign(1, d.get<bool>());
    } else {
      for (const auto& v : d) {
        if (!v.is_boolean()) bad(where + ".divisible", "expected booleans");
        divisible.push_back(v.get<bool>());
      }
    }
  }
  if (j.contains("breakpoints")) {
    std::vector<double> bp;
    for (const auto& v : j["breakpoints"]) bp.push_back(number(v, where + ".breakpoints"));
    if (j.contains("a") && (bp.empty() || number(j["a"], where + ".a") != bp.front())) bad(where, "a differs from breakpoints[0]");
    if (j.contains("b") && (bp.empty() || number(j["b"], where + ".b") != bp.back())) bad(where, "b differs from the last breakpoint");
    if (divisible.size() == 1 && bp.size() > 2) divisible.assign(bp.size() - 1, divisible[0]);
    return SampleSpace::make(std::move(bp), std::move(atoms), std::move(divisible));
  }
  const double a = j.contains("a") ? number(j["a"], where + ".a") : 0.0;
  const double b = j.contains("b") ? number(j["b"], where + ".b") : 1.0;
  const std::size_t cells = count(field(j, "cells", where), where + ".cells");
  const bool div = divisible.empty() ? true : divisible[0];
  if (divisible.size() > 1) bad(where, "per-cell divisible flags need explicit breakpoints");
  return SampleSpace::uniform(a, b, cells, std::move(atoms), div);
}

json to_json(const OVM& nu) {
  json cells = json::array();
  for (const auto& m : nu.cell_masses()) cells.push_back(to_json(m));
  json atoms = json::array();
  for (const auto& m : nu.atom_masses()) atoms.push_back(to_json(m));
  json comps = json::array();
  for (const auto& c : nu.components()) comps.push_back(to_json(c));
  std::string variant = to_string(nu.variant());
  return json{{"space", to_json(nu.space())}, {"dim", nu.dim()},        {"variant", variant},
              {"cell_masses", cells},        {"atom_masses", atoms},   {"components", comps}};
}

OVM ovm_from_json(const json& j) {
  const std::string where = "ovm";
  require_keys(j, {"space", "dim", "variant", "cell_masses", "atom_masses", "components"}, where);
  const SampleSpace space = space_from_json(field(j, "space", where));
  std::string variant;
  if (j.contains("variant")) {
    if (!j["variant"].is_string()) bad(where + ".variant", "expected a string");
    variant = j["variant"].get<std::string>();
    if (variant != "grid" && variant != "atomic" && variant != "mixed" && variant != "direct_sum") {
      bad(where + ".variant", "unknown variant '" + variant + "'");
    }
  }
  if (variant == "direct_sum" || (j.contains("components") && !j["components"].empty())) {
    std::vector<OVM> comps;
    const json& list = field(j, "components", where);
    if (!list.is_array() || list.empty()) bad(where + ".components", "expected a nonempty array");
    for (const auto& c : list) {
      json with_space = c;
      if (!with_space.contains("space")) with_space["space"] = j["space"];
      comps.push_back(ovm_from_json(with_space));
    }
    OVM out = OVM::direct_sum(comps);
    if (j.contains("dim") && count(j["dim"], where + ".dim") != out.dim()) bad(where + ".dim", "does not match the components");
    return out;
  }
  const std::size_t dim = count(field(j, "dim", where), where + ".dim");
  std::vector<HermitianMatrix> cells, atoms;
  if (j.contains("cell_masses")) cells = hermitian_list(j["cell_masses"], where + ".cell_masses");
  if (j.contains("atom_masses")) atoms = hermitian_list(j["atom_masses"], where + ".atom_masses");
  OVM out = OVM::make(space, dim, std::move(cells), std::move(atoms));
  if (!variant.empty() && variant != to_string(out.variant())) {
    bad(where + ".variant", "declared '" + variant + "' but the masses give '" + to_string(out.variant()) + "'");
  }
  return out;
}

json to_json(const MeasurableSet& e) { return json{{"cells", bool_indices(e.cells)}, {"atoms", bool_indices(e.atoms)}}; }

MeasurableSet set_from_json(const json& j, const SampleSpace& space) {
  const std::string where = "set";
  require_keys(j, {"cells", "atoms"}, where);
  std::vector<std::size_t> cells, atoms;
  if (j.contains("cells")) cells = indices(j["cells"], space.cell_count(), where + ".cells");
  if (j.contains("atoms")) atoms = indices(j["atoms"], space.atom_count(), where + ".atoms");
  return MeasurableSet::from_indices(space, cells, atoms);
}

json to_json(const StepDensity& r) {
  auto list = [](const std::vector<std::optional<HermitianMatrix>>& v) {
    json out = json::array();
    for (const auto& m : v) out.push_back(m ? to_json(*m) : json(nullptr));
    return out;
  };
  return json{{"cells", list(r.cells)}, {"atoms", list(r.atoms)}};
}

json to_json(const QuantumRandomVariable& f) {
  auto list = [&](const std::vector<ComplexMatrix>& v) {
    json out = json::array();
    for (const auto& m : v) {
      if (f.dim() == 1 && m(0, 0).imag() == 0.0) {
        out.push_back(m(0, 0).real());
      } else {
        out.push_back(to_json(m));
      }
    }
    return out;
  };
  return json{{"cells", list(f.cells())}, {"atoms", list(f.atoms())}};
}

QuantumRandomVariable qrv_from_json(const json& j, const SampleSpace& space, std::size_t dim) {
  const std::string where = "qrv";
  require_keys(j, {"cells", "atoms"}, where);
  auto list = [&](const char* key) {
    std::vector<ComplexMatrix> out;
    if (!j.contains(key)) return out;
    const json& arr = j[key];
    if (!arr.is_array()) bad(where + "." + key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = where + "." + key + "[" + std::to_string(i) + "]";
      if (arr[i].is_number()) {
        if (dim != 1) bad(w, "scalar values need dim 1");
        out.push_back(ComplexMatrix::Constant(1, 1, Complex(arr[i].get<double>(), 0.0)));
      } else {
        out.push_back(complex_matrix_from_json(arr[i], w));
      }
    }
    return out;
  };
  if (!j.contains("cells")) bad(where, "missing key 'cells'");
  return QuantumRandomVariable::make(space, dim, list("cells"), list("atoms"));
}

json to_json(const AttainResult& r) {
  json intervals = json::array();
  for (const auto& iv : r.intervals) intervals.push_back(json::array({iv.lo, iv.hi}));
  return json{{"intervals", intervals},           {"atoms", r.atoms},
              {"achieved", to_json(r.achieved)},   {"residual", r.residual},
              {"interval_count", r.interval_count}, {"iterations", r.iterations}};
}

}  // namespace ovmkit::io
