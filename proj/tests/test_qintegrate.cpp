#include "doctest.h"

#include <cmath>

#include "ovmkit/models.hpp"
#include "ovmkit/qintegrate.hpp"
#include "ovmkit/rng.hpp"
#include "support.hpp"

using namespace ovmkit;

namespace {

ComplexMatrix cdiag(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

ComplexMatrix swap2() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

using testsupport::intersection_oracle;
using testsupport::same_set;

}  // namespace

TEST_CASE("indicator examples") {
  const OVM nu = models::lebesgue_identity(2, 4);
  const QuantumRandomVariable full = indicator(nu.space(), 2, MeasurableSet::full(nu.space()));
  for (const auto& v : full.cells()) CHECK(v == ComplexMatrix::Identity(2, 2));
  const QuantumRandomVariable none = indicator(nu.space(), 2, MeasurableSet::empty(nu.space()));
  for (const auto& v : none.cells()) CHECK(v == ComplexMatrix::Zero(2, 2));

  Rng rng(1);
  const OVM p = models::random_grid_povm(rng, 3, 12);
  for (int t = 0; t < 30; ++t) {
    const MeasurableSet e = models::random_set(rng, p.space());
    const ComplexMatrix lhs = integrate(p, indicator(p.space(), 3, e));
    CHECK(testsupport::max_abs(lhs - evaluate(p, e).mat()) <= 1e-12);
  }
}

TEST_CASE("pos_neg_parts examples") {
  const SampleSpace s = SampleSpace::uniform(0, 1, 2);
  const auto [p, n] = pos_neg_parts(QuantumRandomVariable::constant(s, cdiag(3, -2)));
  CHECK(testsupport::max_abs(p.cells()[0] - cdiag(3, 0)) <= 1e-15);
  CHECK(testsupport::max_abs(n.cells()[0] - cdiag(0, 2)) <= 1e-15);

  Rng rng(2);
  const QuantumRandomVariable pos = models::random_qrv(rng, s, 3, models::QrvKind::Positive);
  const auto [pp, pn] = pos_neg_parts(pos);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(testsupport::max_abs(pp.cells()[k] - pos.cells()[k]) <= 1e-14);
    CHECK(testsupport::max_abs(pn.cells()[k]) <= 1e-14);
  }

  // eigenvectors (1, +-1)/sqrt2 with eigenvalues +-1
  const auto [sp, sn] = pos_neg_parts(QuantumRandomVariable::constant(s, swap2()));
  ComplexMatrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  CHECK(testsupport::max_abs(sp.cells()[0] - plus) <= 1e-15);
  CHECK(testsupport::max_abs(sn.cells()[0] - minus) <= 1e-15);

  const QuantumRandomVariable general = models::random_qrv(rng, s, 2, models::QrvKind::General);
  try {
    pos_neg_parts(general);
    FAIL("expected NotSelfAdjoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSelfAdjoint);
  }
}

TEST_CASE("pos_neg_parts split exactly and are orthogonal") {
  Rng rng(3);
  const SampleSpace s = SampleSpace::uniform(0, 1, 20);
  for (int t = 0; t < 20; ++t) {
    const QuantumRandomVariable f = models::random_qrv(rng, s, 1 + rng.index(4), models::QrvKind::SelfAdjoint);
    const auto [p, n] = pos_neg_parts(f);
    CHECK(p.positive());
    CHECK(n.positive());
    for (std::size_t k = 0; k < 20; ++k) {
      CHECK(testsupport::max_abs(p.cells()[k] - n.cells()[k] - f.cells()[k]) <= 1e-14);
      CHECK(op_norm(ComplexMatrix(p.cells()[k] * n.cells()[k])) <= 1e-10);
    }
  }
}

TEST_CASE("integrate examples") {
  const OVM leb = models::lebesgue_identity(2, 8);
  Rng rng(4);
  const ComplexMatrix c = models::random_complex(rng, 2);
  CHECK(testsupport::max_abs(integrate(leb, QuantumRandomVariable::constant(leb.space(), c)) - c) <= 1e-14);

  const double m[] = {1.0, 4.0};
  const OVM one = OVM::make(SampleSpace::uniform(0, 1, 1), 2, {HermitianMatrix::diagonal(m)});
  const ComplexMatrix got = integrate(one, QuantumRandomVariable::constant(one.space(), swap2()));
  ComplexMatrix expect(2, 2);
  expect << 0, 2, 2, 0;
  CHECK(testsupport::max_abs(got - expect) <= 1e-15);
  // M F would be [[0,1],[4,0]]
  CHECK(testsupport::max_abs(got - HermitianMatrix::diagonal(m).mat() * swap2()) > 1.0);

  const double w[] = {1.0};
  const double neg[] = {-1.0};
  const OVM signed_nu = OVM::make(SampleSpace::uniform(0, 1, 2), 1, {HermitianMatrix::diagonal(w), HermitianMatrix::diagonal(neg)});
  CHECK_THROWS_AS(integrate(signed_nu, QuantumRandomVariable::constant(signed_nu.space(), ComplexMatrix::Identity(1, 1))), Error);
  CHECK_THROWS_AS(integrate(leb, QuantumRandomVariable::constant(leb.space(), ComplexMatrix::Identity(3, 3))), Error);
}

TEST_CASE("integrate agrees with the four-part split") {
  Rng rng(5);
  for (int t = 0; t < 25; ++t) {
    const std::size_t d = 1 + rng.index(4);
    const OVM nu = models::random_grid_povm(rng, d, 5 + rng.index(30));
    const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), d, models::QrvKind::General);
    CHECK(testsupport::max_abs(integrate(nu, f) - integrate_by_parts(nu, f)) <= 1e-10);
  }
}

TEST_CASE("integrand_fs examples") {
  Rng rng(6);
  const OVM nu = models::random_grid_povm(rng, 3, 10);
  const State rho = models::random_state(rng, 3);
  const State s = models::random_state(rng, 3);
  const StepDensity r = rn_derivative(nu, rho);
  const ScalarStepFunction one = integrand_fs(indicator(nu.space(), 3, MeasurableSet::full(nu.space())), s, nu, rho);
  for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(one.cells[k] - trace_pair(s, r.cells[k]->mat())) <= 1e-12);

  for (int t = 0; t < 25; ++t) {
    const State st = models::random_state(rng, 3);
    const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), 3, models::QrvKind::General);
    const Complex lhs = trace_pair(st, integrate(nu, f));
    const Complex rhs = integrate_fs(integrand_fs(f, st, nu, rho), induced_measure(nu, rho));
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }

  const QuantumRandomVariable pos = models::random_qrv(rng, nu.space(), 3, models::QrvKind::Positive);
  for (const auto& v : integrand_fs(pos, s, nu, rho).cells) CHECK(v.real() >= -1e-12);

  const double p[] = {1.0, 0.0, 0.0};
  const double blind[] = {0.0, 0.1, 0.1};
  const OVM hidden = OVM::make(nu.space(), 3, std::vector<HermitianMatrix>(10, HermitianMatrix::diagonal(blind)));
  CHECK_THROWS_AS(integrand_fs(pos, s, hidden, State::diagonal(p)), Error);
}

TEST_CASE("defining identity is independent of the reference state") {
  Rng rng(7);
  const OVM nu = models::random_grid_povm(rng, 4, 16);
  const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), 4, models::QrvKind::General);
  const State s = models::random_state(rng, 4);
  std::vector<Complex> values;
  for (int i = 0; i < 3; ++i) {
    const State rho = models::random_state(rng, 4);
    values.push_back(integrate_fs(integrand_fs(f, s, nu, rho), induced_measure(nu, rho)));
  }
  CHECK(std::abs(values[0] - values[1]) <= 1e-10);
  CHECK(std::abs(values[0] - values[2]) <= 1e-10);
}

TEST_CASE("ess_support examples") {
  const OVM nu = models::lebesgue_identity(2, 5);
  const SampleSpace& s = nu.space();
  CHECK(ess_support(QuantumRandomVariable::constant(s, ComplexMatrix::Zero(2, 2)), nu) == MeasurableSet::empty(s));
  const std::size_t pick[] = {1, 3};
  const MeasurableSet e = MeasurableSet::from_indices(s, pick);
  CHECK(ess_support(indicator(s, 2, e), nu) == e);

  const double w[] = {1.0};
  const double z[] = {0.0};
  const OVM partial = OVM::make(SampleSpace::uniform(0, 1, 2), 1, {HermitianMatrix::diagonal(w), HermitianMatrix::diagonal(z)});
  const QuantumRandomVariable on_null =
      QuantumRandomVariable::make(partial.space(), 1, {ComplexMatrix::Zero(1, 1), ComplexMatrix::Identity(1, 1)});
  CHECK(ess_support(on_null, partial) == MeasurableSet::empty(partial.space()));
}

TEST_CASE("ess_range examples") {
  const OVM nu = models::lebesgue_identity(2, 4);
  const SampleSpace& s = nu.space();
  Rng rng(8);
  const ComplexMatrix c = models::random_complex(rng, 2);
  const auto r1 = ess_range(QuantumRandomVariable::constant(s, c), nu);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0] == c);

  const std::size_t pick[] = {0};
  const auto r2 = ess_range(indicator(s, 2, MeasurableSet::from_indices(s, pick)), nu);
  const std::vector<ComplexMatrix> expect = {ComplexMatrix::Identity(2, 2), ComplexMatrix::Zero(2, 2)};
  CHECK(same_set(r2, expect));
}

TEST_CASE("ess_range matches the intersection oracle") {
  Rng rng(9);
  for (int inst = 0; inst < 40; ++inst) {
    const std::size_t m = 2 + rng.index(7);
    const std::size_t d = 1 + rng.index(2);
    std::vector<HermitianMatrix> masses;
    for (std::size_t k = 0; k < m; ++k) masses.push_back(rng.coin() ? models::random_psd(rng, d) : HermitianMatrix::zero(d));
    const OVM nu = OVM::make(SampleSpace::uniform(0, 1, m), d, masses);
    std::vector<ComplexMatrix> pool;
    for (int i = 0; i < 3; ++i) pool.push_back(models::random_complex(rng, d));
    std::vector<ComplexMatrix> vals;
    for (std::size_t k = 0; k < m; ++k) vals.push_back(pool[rng.index(pool.size())]);
    const QuantumRandomVariable f = QuantumRandomVariable::make(nu.space(), d, vals);
    CHECK(same_set(ess_range(f, nu), intersection_oracle(f, nu)));
  }
}

TEST_CASE("ess_sup examples and the threshold formulation") {
  const OVM nu = models::lebesgue_identity(2, 4);
  const SampleSpace& s = nu.space();
  CHECK(ess_sup(QuantumRandomVariable::constant(s, ComplexMatrix::Zero(2, 2)), nu) == 0.0);

  const QuantumRandomVariable half = QuantumRandomVariable::make(s, 2, {cdiag(2, 0), cdiag(2, 0), cdiag(0, 0), cdiag(0, 0)});
  CHECK(ess_sup(half, nu) == 2.0);

  const double w[] = {0.5};
  const double z[] = {0.0};
  const OVM partial = OVM::make(SampleSpace::uniform(0, 1, 3), 1,
                                {HermitianMatrix::diagonal(w), HermitianMatrix::diagonal(z), HermitianMatrix::diagonal(w)});
  const ComplexMatrix i1 = ComplexMatrix::Identity(1, 1);
  const QuantumRandomVariable spike = QuantumRandomVariable::make(partial.space(), 1, {i1, ComplexMatrix(100.0 * i1), i1});
  CHECK(ess_sup(spike, partial) == 1.0);
  CHECK(ess_sup_threshold(spike, partial) == 1.0);

  Rng rng(10);
  for (int t = 0; t < 30; ++t) {
    const OVM g = models::random_grid_povm(rng, 2, 6);
    const QuantumRandomVariable f = models::random_qrv(rng, g.space(), 2, models::QrvKind::General);
    CHECK(ess_sup(f, g) == ess_sup_threshold(f, g));
  }
}

TEST_CASE("ess_equal examples") {
  const double w[] = {0.5};
  const double z[] = {0.0};
  const OVM nu = OVM::make(SampleSpace::uniform(0, 1, 3), 1,
                           {HermitianMatrix::diagonal(w), HermitianMatrix::diagonal(z), HermitianMatrix::diagonal(w)});
  const ComplexMatrix i1 = ComplexMatrix::Identity(1, 1);
  const QuantumRandomVariable f = QuantumRandomVariable::make(nu.space(), 1, {i1, i1, ComplexMatrix(2.0 * i1)});
  const QuantumRandomVariable g = QuantumRandomVariable::make(nu.space(), 1, {i1, ComplexMatrix(-7.0 * i1), ComplexMatrix(2.0 * i1)});
  CHECK(ess_equal(f, g, nu));

  const std::size_t e1[] = {0};
  const std::size_t e2[] = {2};
  CHECK_FALSE(ess_equal(indicator(nu.space(), 1, MeasurableSet::from_indices(nu.space(), e1)),
                        indicator(nu.space(), 1, MeasurableSet::from_indices(nu.space(), e2)), nu));

  const QuantumRandomVariable tiny = combine(1.0, f, 1e-14, QuantumRandomVariable::constant(nu.space(), i1));
  CHECK(ess_equal(f, tiny, nu));
}

TEST_CASE("linearity of the integral") {
  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng.index(4);
    const OVM nu = models::random_grid_povm(rng, d, 4 + rng.index(40));
    const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), d, models::QrvKind::General);
    const QuantumRandomVariable g = models::random_qrv(rng, nu.space(), d, models::QrvKind::General);
    const Complex a(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Complex b(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const ComplexMatrix lhs = integrate(nu, combine(a, f, b, g));
    const ComplexMatrix rhs = a * integrate(nu, f) + b * integrate(nu, g);
    CHECK(testsupport::max_abs(lhs - rhs) <= 1e-11);
  }
}

TEST_CASE("positive integrands are bounded by ess_sup times the total mass") {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng.index(4);
    const OVM nu = models::random_grid_povm(rng, d, 4 + rng.index(30));
    const QuantumRandomVariable f = models::random_qrv(rng, nu.space(), d, models::QrvKind::Positive);
    const HermitianMatrix val = HermitianMatrix::from(integrate(nu, f));
    CHECK(testsupport::cholesky_psd(val.mat(), 1e-9));
    const HermitianMatrix bound = ess_sup(f, nu) * nu.total();
    CHECK(testsupport::cholesky_psd((bound - val).mat(), 1e-9 * std::max(1.0, op_norm(bound))));
  }
}

TEST_CASE("scalar lifts of 0/1 sets have range inside the scalar cube") {
  Rng rng(13);
  const OVM nu = models::random_grid_povm(rng, 3, 12);
  for (int t = 0; t < 20; ++t) {
    const FractionalSet h = FractionalSet::from_set(models::random_set(rng, nu.space()));
    for (const auto& v : ess_range(scalar_lift(nu.space(), 3, h), nu)) {
      const Complex lambda = v(0, 0);
      CHECK(lambda.imag() == 0.0);
      CHECK(lambda.real() >= 0.0);
      CHECK(lambda.real() <= 1.0);
      CHECK(testsupport::max_abs(v - lambda * ComplexMatrix::Identity(3, 3)) == 0.0);
    }
  }
}
