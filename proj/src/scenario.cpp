#include "ovmkit/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <unistd.h>

#include "ovmkit/json_io.hpp"
#include "ovmkit/lyapunov.hpp"
#include "ovmkit/models.hpp"
#include "ovmkit/rng.hpp"

namespace ovmkit::cli {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& key, const std::string& what) { throw ScenarioError(key + ": " + what); }

void allow(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      invalid(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  invalid(key, "expected a nonnegative integer");
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback, std::size_t lo, std::size_t hi) {
  const std::uint64_t v = get_u64(j, key, fallback);
  if (v < lo || v > hi) invalid(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<std::size_t>(v);
}

double get_double(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) invalid(key, "expected a number");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) invalid(key, "must be finite");
  return v;
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) invalid(key, "expected true or false");
  return j[key].get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) invalid(key, "expected a string");
  return j[key].get<std::string>();
}

double tolerance(const json& sc, double fallback) {
  const double t = get_double(sc, "tol", fallback);
  if (t <= 0.0) invalid("tol", "must be positive");
  return t;
}

bool wants_csv(const json& sc) { return get_string(sc, "format", "json") == "csv"; }

HermitianMatrix scalar(double v) { return HermitianMatrix::diagonal(std::span<const double>(&v, 1)); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

OVM builtin_ovm(const json& j) {
  const std::string name = get_string(j, "builtin", "");
  if (name == "lebesgue") {
    allow(j, {"builtin", "dim", "cells"}, "ovm");
    return models::lebesgue_identity(get_count(j, "dim", 1, 1, 64), get_count(j, "cells", 16, 1, 100000));
  }
  if (name == "random") {
    allow(j, {"builtin", "dim", "cells", "seed", "probability"}, "ovm");
    Rng rng(get_u64(j, "seed", 1));
    return models::random_grid_povm(rng, get_count(j, "dim", 2, 1, 64), get_count(j, "cells", 40, 1, 100000),
                                    get_bool(j, "probability", false));
  }
  if (name == "uhl") {
    allow(j, {"builtin", "cells", "normalized"}, "ovm");
    return models::uhl(get_count(j, "cells", 12, 1, 64), get_bool(j, "normalized", true));
  }
  if (name == "single_atom") {
    allow(j, {"builtin", "mass"}, "ovm");
    const double mass = get_double(j, "mass", 1.0);
    if (mass < 0.0) invalid("ovm.mass", "must be nonnegative");
    return models::single_atom(mass);
  }
  if (name == "truncated_diagonal") {
    allow(j, {"builtin", "levels"}, "ovm");
    return models::truncated_diagonal(get_count(j, "levels", 8, 1, 40));
  }
  invalid("ovm.builtin", "unknown model '" + name + "'");
}

OVM parse_ovm(const json& j) {
  if (j.is_string()) return io::ovm_from_json(read_json_file(j.get<std::string>()));
  if (!j.is_object()) invalid("ovm", "expected an object or a file path");
  if (j.contains("builtin")) return builtin_ovm(j);
  return io::ovm_from_json(j);
}

std::size_t hermitian_rank_bound(const OVM& nu) {
  if (nu.variant() != OvmVariant::DirectSum) return nu.dim() * nu.dim();
  std::size_t d = 0;
  for (const auto& c : nu.components()) d += hermitian_rank_bound(c);
  return d;
}

json error_json(const Error& e) {
  return json{{"kind", to_string(e.kind())}, {"message", e.what()}, {"indices", e.indices()}};
}

void add_check(Report& rep, const std::string& name, bool pass, json value = nullptr, json limit = nullptr) {
  rep.checks.push_back({name, pass, std::move(value), std::move(limit)});
}

void add_leq(Report& rep, const std::string& name, double value, double limit) {
  add_check(rep, name, value <= limit, value, limit);
}

// Library errors raised while solving are part of the report, not scenario errors.
void attempt(Report& rep, const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    rep.error = error_json(e);
    add_check(rep, "completed", false, to_string(e.kind()));
  }
}

json interval_list(const std::vector<Interval>& ivs) {
  json out = json::array();
  for (const auto& iv : ivs) out.push_back(json::array({iv.lo, iv.hi}));
  return out;
}

std::vector<MeasurableSet> sample_sets(const SampleSpace& space, std::size_t random_count, std::uint64_t seed) {
  if (space.cell_count() + space.atom_count() <= 10) return all_sets(space);
  std::vector<MeasurableSet> out = {MeasurableSet::empty(space), MeasurableSet::full(space)};
  for (std::size_t k = 0; k < space.cell_count(); ++k) {
    const std::size_t one[] = {k};
    out.push_back(MeasurableSet::from_indices(space, one));
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < random_count; ++i) out.push_back(models::random_set(rng, space));
  return out;
}

// ---------------------------------------------------------------- flows

void run_attain(const json& sc, Report& rep) {
  allow(sc, {"kind", "ovm", "target", "target_fraction", "tol", "max_iter", "output", "format"}, "");
  if (!sc.contains("ovm")) invalid("ovm", "required");
  const OVM nu = parse_ovm(sc["ovm"]);
  if (sc.contains("target") == sc.contains("target_fraction")) invalid("target", "give exactly one of target, target_fraction");
  const HermitianMatrix target = sc.contains("target") ? io::hermitian_from_json(sc["target"], "target")
                                                       : get_double(sc, "target_fraction", 0.5) * nu.total();
  if (target.dim() != nu.dim()) invalid("target", "dimension differs from the OVM");
  AttainOptions opts;
  opts.max_iter = get_count(sc, "max_iter", opts.max_iter, 1, 100000000);
  const double tol = tolerance(sc, 1e-9);

  attempt(rep, [&] {
    const AttainResult r = attain(nu, target, opts);
    rep.results["attain"] = io::to_json(r);
    rep.results["fractional_cells"] = r.split_cells;
    rep.results["purify_iterations"] = r.purify_iterations;
    const double scale = std::max(1.0, op_norm(target));
    add_leq(rep, "residual", r.residual, tol * scale);
    const std::size_t bound = nu.space().cell_count() + hermitian_rank_bound(nu);
    add_check(rep, "interval_count", r.interval_count <= bound, r.interval_count, bound);
    const bool inside = loewner_leq(HermitianMatrix::zero(nu.dim()), r.achieved, kTolPsd) &&
                        loewner_leq(r.achieved, nu.total(), kTolPsd);
    add_check(rep, "achieved_in_operator_interval", inside);
    for (const auto& iv : r.intervals) rep.csv_rows.push_back({iv.lo, iv.hi});
  });
  rep.csv_header = {"lo", "hi"};
}

void run_convexity(const json& sc, Report& rep) {
  allow(sc, {"kind", "ovm", "trials", "seed", "cells", "expect", "tol", "output", "format"}, "");
  const std::uint64_t seed = get_u64(sc, "seed", 7);
  const std::size_t trials = get_count(sc, "trials", 100, 1, 1000000);
  const std::string expect = get_string(sc, "expect", "convex");
  if (expect != "convex" && expect != "obstructed") invalid("expect", "must be 'convex' or 'obstructed'");
  OVM nu;
  if (sc.contains("ovm")) {
    if (sc.contains("cells")) invalid("cells", "only applies to the default random OVM");
    nu = parse_ovm(sc["ovm"]);
  } else {
    Rng rng(seed);
    nu = models::random_grid_povm(rng, 2, get_count(sc, "cells", 40, 1, 100000));
  }
  const double tol = tolerance(sc, 1e-9);

  attempt(rep, [&] {
    const ConvexityReport c = convexity_certificate(nu, trials, seed);
    const std::size_t bound = nu.space().cell_count() + hermitian_rank_bound(nu);
    rep.results["trials"] = c.trials;
    rep.results["failures"] = c.failure_count;
    rep.results["max_residual"] = c.max_residual;
    rep.results["max_interval_count"] = c.max_interval_count;
    rep.results["interval_bound"] = bound;
    json failures = json::array();
    for (std::size_t i = 0; i < c.records.size(); ++i) {
      const CertificateTrial& t = c.records[i];
      if (t.failed) {
        failures.push_back({{"trial", i}, {"t", t.t}, {"e1", io::to_json(t.e1)}, {"e2", io::to_json(t.e2)},
                            {"reason", t.reason}, {"residual", t.residual}});
      }
      rep.csv_rows.push_back({i, t.t, t.failed, t.reason, t.residual, t.interval_count});
    }
    rep.results["failure_records"] = std::move(failures);

    if (nu.dim() == 1 && nu.space().cell_count() + nu.space().atom_count() <= 16) {
      std::vector<double> points;
      for (const auto& [e, v] : brute_force_range(nu)) points.push_back(v(0, 0).real());
      std::sort(points.begin(), points.end());
      points.erase(std::unique(points.begin(), points.end()), points.end());
      rep.results["range_points"] = points;
    }
    if (expect == "convex") {
      add_check(rep, "failures", c.failure_count == 0, c.failure_count, 0);
      add_leq(rep, "max_residual", c.max_residual, tol);
      add_check(rep, "max_interval_count", c.max_interval_count <= bound, c.max_interval_count, bound);
    } else {
      add_check(rep, "every_trial_obstructed", c.failure_count == c.trials, c.failure_count, c.trials);
    }
  });
  rep.csv_header = {"trial", "t", "failed", "reason", "residual", "interval_count"};
}

void run_truncated_rn(const json& sc, Report& rep) {
  allow(sc, {"kind", "levels", "tol", "output", "format"}, "");
  const std::size_t levels = get_count(sc, "levels", 8, 2, 40);
  const double tol = tolerance(sc, 1e-12);
  const OVM nu = models::truncated_diagonal(levels);
  const State rho = models::truncated_diagonal_state(levels);

  attempt(rep, [&] {
    const InducedMeasure im = induced_measure(nu, rho);
    const StepDensity r = rn_derivative(nu, rho);
    json rows = json::array();
    double density_err = 0.0;
    double rn_err = 0.0;
    bool entry00_nonzero = true;
    for (std::size_t n = 1; n <= levels; ++n) {
      const std::size_t k = models::truncated_diagonal_cell(levels, n);
      const double two_n = std::ldexp(1.0, static_cast<int>(n));
      const double expect_density = (two_n + 1.0) / (2.0 * two_n);
      const double expect_rn = 2.0 * two_n / (two_n + 1.0);
      const double density = im.cells[k] / nu.space().width(k);
      const double rn00 = (*r.cells[k])(0, 0).real();
      const double rnnn = (*r.cells[k])(n, n).real();
      density_err = std::max(density_err, std::abs(density - expect_density));
      rn_err = std::max({rn_err, std::abs(rn00 - expect_rn), std::abs(rnnn - expect_rn)});
      entry00_nonzero = entry00_nonzero && rn00 > 0.0;
      rows.push_back({{"n", n},
                      {"cell", json::array({nu.space().cell_lo(k), nu.space().cell_hi(k)})},
                      {"density", density},
                      {"expected_density", expect_density},
                      {"rn_00", rn00},
                      {"rn_nn", rnnn},
                      {"expected_rn", expect_rn}});
      rep.csv_rows.push_back({n, nu.space().cell_lo(k), nu.space().cell_hi(k), density, expect_density, rn00, rnnn,
                              expect_rn});
    }
    const auto sets = sample_sets(nu.space(), 256, levels);
    const double consistency = rn_consistency(nu, rho, sets);
    rep.results["levels"] = std::move(rows);
    rep.results["dim"] = nu.dim();
    rep.results["max_density_error"] = density_err;
    rep.results["max_rn_error"] = rn_err;
    rep.results["rn_consistency"] = consistency;
    rep.results["rn_consistency_sets"] = sets.size();
    rep.results["state_full_rank"] = rho.full_rank();
    // The (0,0) entry of the derivative equals the (n,n) entry on every level,
    // so a closed form that lists only the e_nn terms leaves it out.
    rep.results["closed_form_discrepancy"] = {
        {"entry_00_nonzero", entry00_nonzero},
        {"note", "dnu_00/dnu_rho = 2^(n+1)/(2^n+1) on every level; a formula listing only e_nn terms omits it"}};
    add_leq(rep, "density", density_err, tol);
    add_leq(rep, "rn_entries", rn_err, tol);
    add_leq(rep, "rn_consistency", consistency, 1e-11);
    add_check(rep, "rn_exists", rn_exists(nu, rho).exists);
  });
  rep.csv_header = {"n", "lo", "hi", "density", "expected_density", "rn_00", "rn_nn", "expected_rn"};
}

void run_uhl(const json& sc, Report& rep) {
  allow(sc, {"kind", "cells", "seed", "tol", "output", "format"}, "");
  const std::size_t m = get_count(sc, "cells", 12, 2, 20);
  const std::uint64_t seed = get_u64(sc, "seed", 1);
  const double tol = tolerance(sc, 1e-12);
  const OVM u = models::uhl(m);

  attempt(rep, [&] {
    const HermitianMatrix half = 0.5 * u.total();
    const kernels::NearestSubset nearest = brute_force_nearest(u, half);

    std::vector<std::vector<std::size_t>> supports;
    std::vector<std::size_t> all(m);
    for (std::size_t k = 0; k < m; ++k) all[k] = k;
    supports.push_back(all);
    for (std::size_t k = 1; k < m; ++k) supports.emplace_back(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < m; ++i) {
      supports.push_back({i});
      for (std::size_t j = i + 1; j < m; ++j) supports.push_back({i, j});
    }
    Rng rng(seed);
    for (int t = 0; t < 32; ++t) {
      std::vector<std::size_t> s;
      for (std::size_t k = 0; k < m; ++k) {
        if (rng.coin()) s.push_back(k);
      }
      if (!s.empty()) supports.push_back(std::move(s));
    }
    std::size_t witnesses = 0;
    for (const auto& s : supports) witnesses += kernel_witness(u, s).has_value() ? 1 : 0;

    const auto sets = sample_sets(u.space(), 128, seed);
    const OvmPropertyReport props = check_ovm_properties(u, sets);

    json mix;
    try {
      convex_combine(u, MeasurableSet::full(u.space()), MeasurableSet::empty(u.space()), 0.5);
      mix = {{"obstructed", false}};
    } catch (const Error& e) {
      mix = {{"obstructed", e.kind() == ErrorKind::AtomicObstruction}, {"cells", e.indices()}};
    }

    rep.results["cells"] = m;
    rep.results["min_distance_to_half"] = nearest.distance;
    rep.results["nearest_set"] = io::to_json(MeasurableSet::from_bits(u.space(), nearest.bits));
    rep.results["tested_supports"] = supports.size();
    rep.results["kernel_witnesses_found"] = witnesses;
    rep.results["spectral"] = props.spectral;
    rep.results["spectral_defect"] = props.spectral_defect;
    rep.results["probability"] = props.probability;
    rep.results["divisible_cells"] = false;
    rep.results["half_mix"] = mix;
    add_leq(rep, "min_distance", std::abs(nearest.distance - 0.5), tol);
    add_check(rep, "kernel_absent", witnesses == 0, witnesses, 0);
    add_check(rep, "spectral", props.spectral);

    if (wants_csv(sc)) {
      const auto range = brute_force_range(u);
      for (std::size_t b = 0; b < range.size(); ++b) rep.csv_rows.push_back({b, op_norm(range[b].second - half)});
    }
  });
  rep.csv_header = {"bits", "distance"};
}

void run_singular_34(const json& sc, Report& rep) {
  allow(sc, {"kind", "measures", "lambda", "cells", "tol", "output", "format"}, "");
  const std::size_t n = get_count(sc, "measures", 4, 2, 64);
  const std::size_t per_block = get_count(sc, "cells", 8, 1, 10000);
  std::vector<double> lambda;
  if (sc.contains("lambda")) {
    if (!sc["lambda"].is_array()) invalid("lambda", "expected an array of numbers");
    for (const auto& v : sc["lambda"]) {
      if (!v.is_number()) invalid("lambda", "expected numbers");
      lambda.push_back(v.get<double>());
    }
  } else if (n == 4) {
    lambda = {0.1, 0.5, 0.9, 0.3};
  } else {
    invalid("lambda", "required unless measures = 4");
  }
  if (lambda.size() != n) invalid("lambda", "expected " + std::to_string(n) + " values");
  for (double l : lambda) {
    if (!(l >= 0.0 && l <= 1.0)) invalid("lambda", "values must lie in [0, 1]");
  }
  const double tol = tolerance(sc, 1e-10);
  const auto blocks = models::mutually_singular(n, per_block);
  std::vector<HermitianMatrix> targets;
  for (double l : lambda) targets.push_back(scalar(l));

  attempt(rep, [&] {
    const AttainResult r = joint_attain(blocks, targets);
    std::vector<double> diag;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag.push_back(r.achieved(i, i).real());
      err = std::max(err, std::abs(diag.back() - lambda[i]));
    }
    rep.results["attain"] = io::to_json(r);
    rep.results["achieved_diagonal"] = diag;
    rep.results["fractional_cells"] = r.split_cells;
    rep.results["set_is_empty"] = r.intervals.empty() && r.atoms.empty();
    rep.results["set_is_full"] = r.intervals.size() == 1 && r.intervals[0] == Interval{0.0, 1.0};
    add_leq(rep, "residual", r.residual, tol);
    add_leq(rep, "diagonal", err, tol);
    for (const auto& iv : r.intervals) rep.csv_rows.push_back({iv.lo, iv.hi});
  });
  rep.csv_header = {"lo", "hi"};
}

void run_classical(const json& sc, Report& rep) {
  allow(sc, {"kind", "measures", "ovms", "cells", "targets", "target_fraction", "random_targets", "seed", "tol",
             "output", "format"},
        "");
  std::vector<OVM> measures;
  if (sc.contains("ovms")) {
    if (sc.contains("measures") || sc.contains("cells")) invalid("ovms", "conflicts with measures/cells");
    if (!sc["ovms"].is_array() || sc["ovms"].empty()) invalid("ovms", "expected a nonempty array");
    for (const auto& j : sc["ovms"]) measures.push_back(parse_ovm(j));
  } else {
    measures = models::overlapping_scalar(get_count(sc, "measures", 3, 1, 64), get_count(sc, "cells", 64, 1, 100000));
  }
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (measures[i].dim() != 1) invalid("ovms[" + std::to_string(i) + "]", "classical measures have dim 1");
    if (!(measures[i].space() == measures[0].space())) invalid("ovms[" + std::to_string(i) + "]", "sample space differs");
  }
  const std::size_t n = measures.size();
  const int target_modes = int(sc.contains("targets")) + int(sc.contains("target_fraction")) + int(sc.contains("random_targets"));
  if (target_modes > 1) invalid("targets", "give one of targets, target_fraction, random_targets");
  const double tol = tolerance(sc, 1e-9);

  std::vector<std::vector<double>> tuples;
  if (sc.contains("targets")) {
    if (!sc["targets"].is_array() || sc["targets"].size() != n) invalid("targets", "expected " + std::to_string(n) + " numbers");
    std::vector<double> t;
    for (const auto& v : sc["targets"]) {
      if (!v.is_number()) invalid("targets", "expected numbers");
      t.push_back(v.get<double>());
    }
    tuples.push_back(std::move(t));
  } else if (sc.contains("random_targets")) {
    const std::size_t count = get_count(sc, "random_targets", 50, 1, 100000);
    Rng rng(get_u64(sc, "seed", 1));
    for (std::size_t i = 0; i < count; ++i) {
      const FractionalSet h = models::random_fractional(rng, measures[0].space());
      std::vector<double> t;
      for (const auto& mu : measures) t.push_back(evaluate_fractional(mu, h)(0, 0).real());
      tuples.push_back(std::move(t));
    }
  } else {
    const double f = get_double(sc, "target_fraction", 0.5);
    std::vector<double> t;
    for (const auto& mu : measures) t.push_back(f * mu.total()(0, 0).real());
    tuples.push_back(std::move(t));
  }

  attempt(rep, [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const auto at = atoms(measures[i]);
      if (!at.empty() || !is_nonatomic(measures[i])) {
        std::vector<std::size_t> idx;
        for (const auto& a : at) idx.push_back(a.index);
        throw Error(ErrorKind::AtomicObstruction, "measure " + std::to_string(i) + " has atoms", idx);
      }
    }
    double max_res = 0.0;
    std::size_t max_frac = 0;
    json runs = json::array();
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      std::vector<HermitianMatrix> targets;
      for (double v : tuples[t]) targets.push_back(scalar(v));
      const AttainResult r = joint_attain(measures, targets);
      max_res = std::max(max_res, r.residual);
      max_frac = std::max(max_frac, r.split_cells);
      runs.push_back({{"target", tuples[t]},
                      {"residual", r.residual},
                      {"fractional_cells", r.split_cells},
                      {"interval_count", r.interval_count},
                      {"intervals", interval_list(r.intervals)}});
      rep.csv_rows.push_back({t, r.residual, r.split_cells, r.interval_count});
    }
    rep.results["measures"] = n;
    rep.results["runs"] = std::move(runs);
    rep.results["max_residual"] = max_res;
    rep.results["max_fractional_cells"] = max_frac;
    add_leq(rep, "max_residual", max_res, tol);
    add_check(rep, "fractional_cells", max_frac <= n, max_frac, n);
  });
  rep.csv_header = {"target", "residual", "fractional_cells", "interval_count"};
}

void run_properties(const json& sc, Report& rep) {
  allow(sc, {"kind", "ovm", "state", "expect", "seed", "output", "format"}, "");
  if (!sc.contains("ovm")) invalid("ovm", "required");
  const OVM nu = parse_ovm(sc["ovm"]);
  const State rho = sc.contains("state") ? State::from(io::hermitian_from_json(sc["state"], "state"))
                                         : State::maximally_mixed(nu.dim());
  if (rho.dim() != nu.dim()) invalid("state", "dimension differs from the OVM");
  json expect = sc.contains("expect") ? sc["expect"] : json::object();
  if (!expect.is_object()) invalid("expect", "expected an object");
  allow(expect, {"bounded", "self_adjoint", "positive", "spectral", "probability", "nonatomic"}, "expect");
  for (const auto& [k, v] : expect.items()) {
    if (!v.is_boolean()) invalid("expect." + k, "expected true or false");
  }
  const auto sets = sample_sets(nu.space(), 64, get_u64(sc, "seed", 1));

  attempt(rep, [&] {
    const OvmPropertyReport p = check_ovm_properties(nu, sets);
    json atom_list = json::array();
    for (const auto& a : atoms(nu)) atom_list.push_back({{"index", a.index}, {"site", a.site}});
    json flags = {{"bounded", p.bounded},   {"self_adjoint", p.self_adjoint}, {"positive", p.positive},
                  {"spectral", p.spectral}, {"probability", p.probability},   {"nonatomic", is_nonatomic(nu)}};
    rep.results["properties"] = flags;
    rep.results["spectral_defect"] = p.spectral_defect;
    rep.results["probability_defect"] = p.probability_defect;
    rep.results["sample_sets"] = sets.size();
    rep.results["atoms"] = atom_list;
    rep.results["variant"] = to_string(nu.variant());
    rep.results["dim"] = nu.dim();
    rep.results["cells"] = nu.space().cell_count();
    if (nu.positive()) {
      const InducedMeasure im = induced_measure(nu, rho);
      const RnExistence ex = rn_exists(nu, rho);
      rep.results["induced_total"] = im.total();
      rep.results["rn_exists"] = {{"exists", ex.exists}, {"failing_cells", ex.failing_cells}, {"failing_atoms", ex.failing_atoms}};
      rep.results["mutually_abs_continuous"] = abs_continuous(nu, im) && abs_continuous(im, nu);
    }
    for (const auto& [k, v] : flags.items()) rep.csv_rows.push_back({k, v});
    for (const auto& [k, v] : expect.items()) add_check(rep, k, flags[k] == v, flags[k], v);
  });
  rep.csv_header = {"property", "value"};
}

using Flow = void (*)(const json&, Report&);

Flow flow_for(const std::string& kind) {
  if (kind == "attain") return run_attain;
  if (kind == "convexity") return run_convexity;
  if (kind == "paper_example_13") return run_truncated_rn;
  if (kind == "uhl") return run_uhl;
  if (kind == "singular_34") return run_singular_34;
  if (kind == "classical") return run_classical;
  if (kind == "properties") return run_properties;
  invalid("kind", "unknown scenario kind '" + kind + "'");
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>(), std::chars_format::general, 17);
    return std::string(buf, res.ptr);
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

}  // namespace

bool Report::pass() const {
  if (error) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json Report::to_json() const {
  json cks = json::array();
  for (const auto& c : checks) cks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}});
  json out = {{"schema", kSchema},
              {"library", {{"name", "ovmkit"}, {"version", kLibraryVersion}}},
              {"kind", scenario.value("kind", "")},
              {"scenario", scenario},
              {"results", results},
              {"checks", cks},
              {"pass", pass()}};
  if (error) out["error"] = *error;
  if (duration_ms) out["duration_ms"] = *duration_ms;
  return out;
}

json load_scenario(const std::string& path_or_inline) {
  json sc;
  fs::path base = fs::current_path();
  const auto first = path_or_inline.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && path_or_inline[first] == '{') {
    try {
      sc = json::parse(path_or_inline);
    } catch (const json::parse_error& e) {
      throw ScenarioError(std::string("malformed JSON: ") + e.what());
    }
  } else {
    const fs::path p(path_or_inline);
    sc = read_json_file(p);
    base = p.has_parent_path() ? p.parent_path() : fs::path(".");
  }
  if (!sc.is_object()) throw ScenarioError("scenario must be a JSON object");
  auto inline_ovm = [&](json& slot) {
    if (slot.is_string()) {
      fs::path p(slot.get<std::string>());
      if (p.is_relative()) p = base / p;
      slot = read_json_file(p);
    }
  };
  if (sc.contains("ovm")) inline_ovm(sc["ovm"]);
  if (sc.contains("ovms") && sc["ovms"].is_array()) {
    for (auto& o : sc["ovms"]) inline_ovm(o);
  }
  return sc;
}

Report run_scenario(const json& scenario, const RunOptions& opts) {
  if (!scenario.is_object()) throw ScenarioError("scenario must be a JSON object");
  if (!scenario.contains("kind") || !scenario["kind"].is_string()) invalid("kind", "required string");
  const std::string format = get_string(scenario, "format", "json");
  if (format != "json" && format != "csv") invalid("format", "must be 'json' or 'csv'");
  if (scenario.contains("output") && !scenario["output"].is_string()) invalid("output", "expected a path");
  const Flow flow = flow_for(scenario["kind"].get<std::string>());
  Report rep;
  rep.scenario = scenario;
  const auto start = std::chrono::steady_clock::now();
  try {
    flow(scenario, rep);
  } catch (const Error& e) {
    throw ScenarioError(e.what());
  } catch (const json::exception& e) {
    throw ScenarioError(e.what());
  }
  if (opts.timing) {
    rep.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return rep;
}

std::string render_json(const Report& report) { return report.to_json().dump(2) + "\n"; }

std::string render_csv(const Report& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < report.csv_header.size(); ++i) out << (i ? "," : "") << report.csv_header[i];
  out << "\n";
  for (const auto& row : report.csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << "\n";
  }
  return out.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ScenarioError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ScenarioError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ScenarioError("cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace ovmkit::cli
