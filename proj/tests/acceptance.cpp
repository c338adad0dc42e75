// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ovmkit/lyapunov.hpp"
#include "ovmkit/models.hpp"
#include "ovmkit/qintegrate.hpp"
#include "ovmkit/rnderiv.hpp"
#include "ovmkit/rng.hpp"
#include "support.hpp"

using namespace ovmkit;
using testsupport::cholesky_psd;
using testsupport::max_abs;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Measure of a union of intervals, from first principles: overlap length over cell width.
ComplexMatrix interval_mass(const OVM& nu, const std::vector<Interval>& ivs, const std::vector<std::size_t>& atom_idx) {
  const auto d = static_cast<Eigen::Index>(nu.dim());
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  const SampleSpace& sp = nu.space();
  for (std::size_t k = 0; k < sp.cell_count(); ++k) {
    double len = 0.0;
    for (const auto& iv : ivs) len += std::max(0.0, std::min(iv.hi, sp.cell_hi(k)) - std::max(iv.lo, sp.cell_lo(k)));
    if (len > 0.0) s += (len / sp.width(k)) * nu.cell_masses()[k].mat();
  }
  for (std::size_t a : atom_idx) s += nu.atom_masses()[a].mat();
  return s;
}

ComplexMatrix weighted_sum(const OVM& nu, const std::vector<double>& h) {
  const auto d = static_cast<Eigen::Index>(nu.dim());
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < h.size(); ++k) s += h[k] * nu.cell_masses()[k].mat();
  return s;
}

double hnorm(const ComplexMatrix& a) { return op_norm(HermitianMatrix::from(a)); }

Outcome truncated_rn() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t N = 8;
  const OVM nu = models::truncated_diagonal(N);
  const State rho = models::truncated_diagonal_state(N);
  const InducedMeasure im = induced_measure(nu, rho);
  const StepDensity r = rn_derivative(nu, rho);
  double err = 0.0;
  double d1 = 0.0, r1 = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const std::size_t k = models::truncated_diagonal_cell(N, n);
    const double p = std::pow(2.0, static_cast<double>(n));
    const double density = im.cells[k] / (1.0 / static_cast<double>(n) - 1.0 / static_cast<double>(n + 1));
    const double rnn = (*r.cells[k])(n, n).real();
    const double r00 = (*r.cells[k])(0, 0).real();
    err = std::max({err, std::abs(density - (p + 1) / (2 * p)), std::abs(rnn - 2 * p / (p + 1)),
                    std::abs(r00 - 2 * p / (p + 1))});
    if (n == 1) {
      d1 = density;
      r1 = rnn;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = std::abs(d1 - 0.75) <= 1e-12 && std::abs(r1 - 4.0 / 3.0) <= 1e-12 && err <= 1e-12 && secs < 1.0;
  return {ok, fmt("density[1/2,1]=%.15g rn11=%.15g max_err=%.3g time=%.3fs", d1, r1, err, secs)};
}

Outcome integration_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0.0, worst_spread = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t d = 1 + static_cast<std::size_t>(inst) % 4;
    const std::size_t m = 1 + rng.index(64);
    const OVM nu = models::random_grid_povm(rng, d, m);
    const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), d, models::QrvKind::General);
    double fmax = 0.0;
    for (const auto& c : f.cells()) fmax = std::max(fmax, op_norm(c));
    const double scale = std::max(1.0, fmax * op_norm(nu.total()));
    const ComplexMatrix ef = integrate(nu, f);
    std::vector<State> refs;
    for (int i = 0; i < 3; ++i) refs.push_back(models::random_state(rng, d));
    for (int s_i = 0; s_i < 25; ++s_i) {
      const State s = models::random_state(rng, d);
      const Complex lhs = (s.matrix().mat() * ef).trace();
      double lo = HUGE_VAL, hi = -HUGE_VAL, lo_i = HUGE_VAL, hi_i = -HUGE_VAL;
      for (const State& rho : refs) {
        const Complex rhs = integrate_fs(integrand_fs(f, s, nu, rho), induced_measure(nu, rho));
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
        lo = std::min(lo, rhs.real());
        hi = std::max(hi, rhs.real());
        lo_i = std::min(lo_i, rhs.imag());
        hi_i = std::max(hi_i, rhs.imag());
      }
      worst_spread = std::max({worst_spread, (hi - lo) / scale, (hi_i - lo_i) / scale});
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && worst_spread <= 1e-10 && secs < 10.0,
          fmt("max_rel_gap=%.3g rho_spread=%.3g time=%.3fs", worst, worst_spread, secs)};
}

Outcome indicator_identity() {
  Rng rng(77);
  double worst = 0.0;
  auto check = [&](const OVM& nu, const MeasurableSet& e) {
    const ComplexMatrix lhs = integrate(nu, indicator(nu.space(), nu.dim(), e));
    ComplexMatrix direct = ComplexMatrix::Zero(static_cast<Eigen::Index>(nu.dim()), static_cast<Eigen::Index>(nu.dim()));
    for (std::size_t k = 0; k < e.cells.size(); ++k) {
      if (e.cells[k]) direct += nu.cell_masses()[k].mat();
    }
    worst = std::max(worst, hnorm(lhs - direct) / std::max(1.0, op_norm(nu.total())));
  };
  std::size_t exhaustive = 0;
  for (std::size_t m = 1; m <= 10; ++m) {
    const OVM nu = models::random_grid_povm(rng, 1 + m % 3, m);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits, ++exhaustive) {
      check(nu, MeasurableSet::from_bits(nu.space(), bits));
    }
  }
  for (const std::size_t m : {16, 64, 128, 256}) {
    const OVM nu = models::random_grid_povm(rng, 2, m);
    for (int i = 0; i < 200; ++i) check(nu, models::random_set(rng, nu.space()));
  }
  return {worst <= 1e-12, fmt("max_rel_err=%.3g exhaustive_sets=%.0f random_sets=800", worst, double(exhaustive))};
}

Outcome purification() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(4242);
  std::size_t worst_iter_excess = 0, worst_frac_excess = 0;
  double worst_rel = 0.0;
  bool ok = true;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t d = 1 + static_cast<std::size_t>(inst) % 3;
    const std::size_t m = 1 + rng.index(200);
    const OVM nu = models::random_grid_povm(rng, d, m);
    const FractionalSet h0 = models::random_fractional(rng, nu.space());
    const PurifyResult p = purify(nu, h0);
    std::size_t frac = 0;
    for (double v : p.h.cells) frac += (v > kFractionalSnap && v < 1.0 - kFractionalSnap) ? 1 : 0;
    const ComplexMatrix a0 = weighted_sum(nu, h0.cells);
    const double rel = hnorm(a0 - weighted_sum(nu, p.h.cells)) / std::max(1.0, hnorm(a0));
    ok = ok && p.iterations <= m && frac <= d * d && rel <= 1e-8;
    worst_iter_excess = std::max(worst_iter_excess, p.iterations > m ? p.iterations - m : 0);
    worst_frac_excess = std::max(worst_frac_excess, frac > d * d ? frac - d * d : 0);
    worst_rel = std::max(worst_rel, rel);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 30.0, fmt("iter_over_m=%.0f frac_over_d2=%.0f max_rel_drift=%.3g time=%.3fs",
                                 double(worst_iter_excess), double(worst_frac_excess), worst_rel, secs)};
}

Outcome convexity() {
  Rng rng(7);
  const OVM nu = models::random_grid_povm(rng, 2, 40);
  const ConvexityReport rep = convexity_certificate(nu, 100, 7);
  // Recompute every trial's realized mass independently of the library's evaluator.
  double recheck = 0.0;
  for (const auto& t : rep.records) {
    const AttainResult r = convex_combine(nu, t.e1, t.e2, t.t);
    ComplexMatrix want = t.t * evaluate(nu, t.e1).mat() + (1.0 - t.t) * evaluate(nu, t.e2).mat();
    recheck = std::max(recheck, hnorm(interval_mass(nu, r.intervals, r.atoms) - want));
  }
  const bool ok = rep.failure_count == 0 && rep.max_residual <= 1e-9 && recheck <= 1e-9 && rep.max_interval_count <= 44;
  return {ok, fmt("failures=%.0f max_residual=%.3g recomputed=%.3g max_intervals=%.0f", double(rep.failure_count),
                  rep.max_residual, recheck, double(rep.max_interval_count))};
}

Outcome uhl() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t m = 12;
  const OVM u = models::uhl(m);
  // Diagonal values: the operator norm is the largest |entry|.
  double best = HUGE_VAL;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
    double dist = 0.0;
    for (std::size_t k = 0; k < m; ++k) dist = std::max(dist, std::abs(double((bits >> k) & 1U) - 0.5));
    best = std::min(best, dist);
  }
  const double lib = brute_force_nearest(u, 0.5 * u.total()).distance;
  std::size_t tested = 0, found = 0;
  Rng rng(12);
  std::vector<std::vector<std::size_t>> supports;
  std::vector<std::size_t> all;
  for (std::size_t k = 0; k < m; ++k) {
    all.push_back(k);
    supports.push_back(all);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) supports.push_back(i == j ? std::vector<std::size_t>{i} : std::vector<std::size_t>{i, j});
  }
  for (int t = 0; t < 64; ++t) {
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < m; ++k) {
      if (rng.coin()) s.push_back(k);
    }
    if (!s.empty()) supports.push_back(s);
  }
  for (const auto& s : supports) {
    ++tested;
    found += kernel_witness(u, s).has_value() ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  const bool ok = std::abs(lib - 0.5) <= 1e-12 && std::abs(best - 0.5) <= 1e-12 && found == 0 && secs < 5.0;
  return {ok, fmt("min_distance=%.15g oracle=%.15g supports=%.0f witnesses=%.0f", lib, best, double(tested), double(found)) +
                  fmt(" time=%.3fs", secs)};
}

Outcome classical() {
  const auto measures = models::overlapping_scalar(3, 64);
  Rng rng(33);
  double worst = 0.0;
  std::size_t worst_frac = 0;
  for (int t = 0; t < 50; ++t) {
    const FractionalSet h = models::random_fractional(rng, measures[0].space());
    std::vector<HermitianMatrix> targets;
    for (const auto& mu : measures) {
      const double v = weighted_sum(mu, h.cells)(0, 0).real();
      targets.push_back(HermitianMatrix::diagonal(std::span<const double>(&v, 1)));
    }
    const AttainResult r = joint_attain(measures, targets);
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(interval_mass(measures[i], r.intervals, {})(0, 0).real() - targets[i](0, 0).real()));
    }
    std::size_t frac = 0;
    for (double v : r.h.cells) frac += (v > kFractionalSnap && v < 1.0 - kFractionalSnap) ? 1 : 0;
    worst_frac = std::max(worst_frac, frac);
  }
  return {worst <= 1e-9 && worst_frac <= 3, fmt("max_residual=%.3g max_fractional=%.0f", worst, double(worst_frac))};
}

Outcome ess_range_oracle() {
  Rng rng(8);
  std::size_t agree = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t m = 1 + rng.index(10);
    const std::size_t d = 1 + rng.index(2);
    std::vector<HermitianMatrix> masses;
    for (std::size_t k = 0; k < m; ++k) masses.push_back(rng.coin() ? models::random_psd(rng, d) : HermitianMatrix::zero(d));
    const OVM nu = OVM::make(SampleSpace::uniform(0, 1, m), d, masses);
    std::vector<ComplexMatrix> pool;
    for (int i = 0; i < 3; ++i) pool.push_back(models::random_complex(rng, d));
    std::vector<ComplexMatrix> vals;
    for (std::size_t k = 0; k < m; ++k) vals.push_back(pool[rng.index(pool.size())]);
    const QuantumRandomVariable f = QuantumRandomVariable::make(nu.space(), d, vals);
    agree += testsupport::same_set(ess_range(f, nu), testsupport::intersection_oracle(f, nu)) ? 1 : 0;
  }
  return {agree == 100, fmt("agreeing_cases=%.0f/100", double(agree))};
}

Outcome order_bounds() {
  Rng rng(99);
  std::size_t violations = 0;
  double lin = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng.index(4);
    const OVM nu = models::random_grid_povm(rng, d, 1 + rng.index(48));
    const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), d, models::QrvKind::Positive);
    double fmax = 0.0;
    for (const auto& c : f.cells()) fmax = std::max(fmax, op_norm(c));
    const ComplexMatrix ef = integrate(nu, f);
    const ComplexMatrix upper = fmax * nu.total().mat() - ef;
    if (!cholesky_psd(ef, 1e-9) || !cholesky_psd(upper, 1e-9)) ++violations;

    const QuantumRandomVariable g = models::random_qrv(rng, nu.space(), d, models::QrvKind::General);
    const Complex a(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Complex b(rng.uniform(-2, 2), rng.uniform(-2, 2));
    lin = std::max(lin, max_abs(integrate(nu, combine(a, f, b, g)) - a * ef - b * integrate(nu, g)));
  }
  return {violations == 0 && lin <= 1e-11, fmt("loewner_violations=%.0f linearity=%.3g", double(violations), lin)};
}

Outcome atomic() {
  const OVM one = models::single_atom(1.0);
  std::vector<double> range;
  for (const auto& [e, v] : brute_force_range(one)) range.push_back(v(0, 0).real());
  std::sort(range.begin(), range.end());
  range.erase(std::unique(range.begin(), range.end()), range.end());
  const bool two_points = range == std::vector<double>{0.0, 1.0};
  const ConvexityReport rep = convexity_certificate(one, 100, 7);
  std::size_t obstructed = 0;
  for (const auto& t : rep.records) obstructed += (t.failed && t.reason == "AtomicObstruction") ? 1 : 0;
  bool mix_refused = false;
  MeasurableSet with = MeasurableSet::empty(one.space());
  with.atoms[0] = true;
  try {
    convex_combine(one, with, MeasurableSet::empty(one.space()), 0.5);
  } catch (const Error& e) {
    mix_refused = e.kind() == ErrorKind::AtomicObstruction;
  }
  return {two_points && obstructed == 100 && mix_refused,
          fmt("range_points=%.0f obstructed_trials=%.0f/100 half_mix_refused=%.0f", double(range.size()), double(obstructed),
              mix_refused ? 1.0 : 0.0)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 truncated RN example at N=8", truncated_rn},
      {"2 integration identity", integration_identity},
      {"3 indicator identity", indicator_identity},
      {"4 purification contract", purification},
      {"5 convexity certificate", convexity},
      {"6 diagonal projection non-convexity", uhl},
      {"7 classical joint attainment", classical},
      {"8 essential range oracle", ess_range_oracle},
      {"9 integral order bounds", order_bounds},
      {"10 atomic obstruction", atomic},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
