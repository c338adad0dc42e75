#include "ovmkit/lyapunov.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ovmkit/models.hpp"
#include "ovmkit/rng.hpp"

namespace ovmkit {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNullSingularRel = 1e-10;
constexpr double kWitnessResidualRel = 1e-10;
constexpr double kProjectionFloor = 1e-8;

MatrixXd coordinate_matrix(const std::vector<HermitianMatrix>& masses, std::size_t dim) {
  const auto rows = static_cast<Index>(dim * dim);
  MatrixXd c(rows, static_cast<Index>(masses.size()));
  for (std::size_t k = 0; k < masses.size(); ++k) c.col(static_cast<Index>(k)) = herm_coords(masses[k]);
  return c;
}

MatrixXd select_columns(const MatrixXd& c, std::span<const std::size_t> cols) {
  MatrixXd out(c.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = c.col(static_cast<Index>(cols[i]));
  return out;
}

// Projection of the first non-annihilated unit vector onto the numerical
// null space of `sub`, normalized to max |c| = 1.
std::optional<VectorXd> null_direction(const MatrixXd& sub) {
  const Index n = sub.cols();
  if (n == 0) return std::nullopt;
  MatrixXd range_v(n, 0);
  if (sub.rows() > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(sub, Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Index rank = 0;
    if (smax > 0.0) {
      while (rank < sv.size() && sv(rank) > kNullSingularRel * smax) ++rank;
    }
    range_v = svd.matrixV().leftCols(rank);
  }
  for (Index j = 0; j < n; ++j) {
    const double pjj = 1.0 - range_v.row(j).squaredNorm();
    if (pjj <= kProjectionFloor) continue;
    VectorXd c = -(range_v * range_v.row(j).transpose());
    c(j) += 1.0;
    const double scale = c.cwiseAbs().maxCoeff();
    return VectorXd(c / scale);
  }
  return std::nullopt;
}

double hull_norm(const OVM& nu) { return std::max(1.0, op_norm(nu.total())); }

bool witness_ok(const MatrixXd& sub, const VectorXd& c, double scale) {
  return op_norm(coords_to_herm(sub * c)) <= kWitnessResidualRel * scale;
}

double snap(double x) {
  if (x <= kFractionalSnap) return 0.0;
  if (x >= 1.0 - kFractionalSnap) return 1.0;
  return x;
}

std::vector<std::size_t> fractional_cells(const std::vector<double>& h) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] > kFractionalSnap && h[k] < 1.0 - kFractionalSnap) out.push_back(k);
  }
  return out;
}

// Largest t >= 0 keeping h + t * dir * c inside [0,1] on the free cells.
double max_step(const std::vector<double>& h, std::span<const std::size_t> free, const VectorXd& c, double dir) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < free.size(); ++i) {
    const double ci = dir * c(static_cast<Index>(i));
    const double hi = h[free[i]];
    if (ci > 0.0) t = std::min(t, (1.0 - hi) / ci);
    if (ci < 0.0) t = std::min(t, hi / -ci);
  }
  return std::isfinite(t) ? t : 0.0;
}

void require_positive(const OVM& nu, const char* op) {
  if (!nu.positive()) throw Error(ErrorKind::Unsupported, std::string(op) + " requires a positive OVM");
}

}  // namespace

std::optional<KernelWitness> kernel_witness(const OVM& nu, std::span<const std::size_t> support) {
  if (support.empty()) throw Error(ErrorKind::InvalidInput, "kernel_witness needs a nonempty support");
  const std::size_t m = nu.space().cell_count();
  std::vector<std::size_t> cols(support.begin(), support.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  for (std::size_t k : cols) {
    if (k >= m) throw Error(ErrorKind::InvalidInput, "support index out of range", {k});
  }
  std::vector<HermitianMatrix> masses;
  for (std::size_t k : cols) masses.push_back(nu.cell_masses()[k]);
  const MatrixXd sub = coordinate_matrix(masses, nu.dim());
  const auto c = null_direction(sub);
  if (!c || !witness_ok(sub, *c, hull_norm(nu))) return std::nullopt;
  KernelWitness w;
  w.coefficients.assign(m, 0.0);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const double ci = (*c)(static_cast<Index>(i));
    if (ci != 0.0) {
      w.coefficients[cols[i]] = ci;
      w.support.push_back(cols[i]);
    }
  }
  return w;
}

PurifyResult purify(const OVM& nu, const FractionalSet& h0) {
  if (!h0.matches(nu.space())) throw Error(ErrorKind::ShapeMismatch, "fractional set does not match the sample space");
  require_positive(nu, "purify");
  const std::size_t m = nu.space().cell_count();
  const MatrixXd coords = coordinate_matrix(nu.cell_masses(), nu.dim());
  const double scale = hull_norm(nu);

  PurifyResult r;
  r.h = h0;
  for (double& x : r.h.cells) x = snap(x);
  std::vector<std::size_t> free = fractional_cells(r.h.cells);
  while (!free.empty()) {
    const MatrixXd sub = select_columns(coords, free);
    const auto c = null_direction(sub);
    if (!c || !witness_ok(sub, *c, scale)) break;
    const double t_plus = max_step(r.h.cells, free, *c, 1.0);
    const double t = t_plus > 0.0 ? t_plus : -max_step(r.h.cells, free, *c, -1.0);
    if (t == 0.0) break;
    for (std::size_t i = 0; i < free.size(); ++i) {
      double& x = r.h.cells[free[i]];
      x = snap(std::clamp(x + t * (*c)(static_cast<Index>(i)), 0.0, 1.0));
    }
    ++r.iterations;
    std::vector<std::size_t> next = fractional_cells(r.h.cells);
    if (next.size() >= free.size() || r.iterations > m) {
      throw Error(ErrorKind::InvalidInput, "purification step failed to fix a coordinate");
    }
    free = std::move(next);
  }
  r.fractional = std::move(free);
  for (std::size_t k : r.fractional) {
    if (!nu.space().divisible()[k]) r.obstructed.push_back(k);
  }
  r.target_residual = op_norm(evaluate_fractional(nu, h0) - evaluate_fractional(nu, r.h));
  return r;
}

HermitianMatrix evaluate_intervals(const OVM& nu, std::span<const Interval> intervals,
                                   std::span<const std::size_t> atom_indices) {
  const SampleSpace& space = nu.space();
  HermitianMatrix out = HermitianMatrix::zero(nu.dim());
  for (std::size_t k = 0; k < space.cell_count(); ++k) {
    const double lo = space.cell_lo(k);
    const double hi = space.cell_hi(k);
    double covered = 0.0;
    for (const auto& iv : intervals) covered += std::max(0.0, std::min(hi, iv.hi) - std::max(lo, iv.lo));
    const double frac = covered / space.width(k);
    if (frac >= 1.0) {
      out += nu.cell_masses()[k];
    } else if (frac > 0.0) {
      out += frac * nu.cell_masses()[k];
    }
  }
  for (std::size_t a : atom_indices) {
    if (a >= space.atom_count()) throw Error(ErrorKind::ShapeMismatch, "atom index out of range", {a});
    out += nu.atom_masses()[a];
  }
  return out;
}

AttainResult realize_intervals(const OVM& nu, const FractionalSet& h) {
  if (!h.matches(nu.space())) throw Error(ErrorKind::ShapeMismatch, "fractional set does not match the sample space");
  const SampleSpace& space = nu.space();
  std::vector<std::size_t> blocked;
  for (std::size_t k = 0; k < h.cells.size(); ++k) {
    if (h.cells[k] != 0.0 && h.cells[k] != 1.0 && !space.divisible()[k]) blocked.push_back(k);
  }
  if (!blocked.empty()) {
    throw Error(ErrorKind::AtomicObstruction,
                std::to_string(blocked.size()) + " fractional cell(s) are not divisible", blocked);
  }
  AttainResult r;
  r.h = h;
  for (std::size_t k = 0; k < h.cells.size(); ++k) {
    const double x = h.cells[k];
    if (x == 0.0) continue;
    const double lo = space.cell_lo(k);
    const double hi = x == 1.0 ? space.cell_hi(k) : lo + x * space.width(k);
    if (x != 1.0) ++r.split_cells;
    if (!r.intervals.empty() && r.intervals.back().hi == lo) {
      r.intervals.back().hi = hi;
    } else {
      r.intervals.push_back({lo, hi});
    }
  }
  for (std::size_t a = 0; a < h.atoms.size(); ++a) {
    if (h.atoms[a]) r.atoms.push_back(a);
  }
  r.interval_count = r.intervals.size();
  r.achieved = evaluate_fractional(nu, h);
  return r;
}

AttainResult convex_combine(const OVM& nu, const MeasurableSet& e1, const MeasurableSet& e2, double t) {
  if (!e1.matches(nu.space()) || !e2.matches(nu.space())) {
    throw Error(ErrorKind::ShapeMismatch, "set masks do not match the sample space");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidInput, "mixing weight must lie in [0,1]");
  require_positive(nu, "convex_combine");
  if (t > 0.0 && t < 1.0 && e1.atoms != e2.atoms) {
    std::vector<std::size_t> differ;
    for (std::size_t a = 0; a < e1.atoms.size(); ++a) {
      if (e1.atoms[a] != e2.atoms[a]) differ.push_back(a);
    }
    throw Error(ErrorKind::AtomicObstruction, "atom selections cannot be mixed fractionally", differ);
  }
  const HermitianMatrix target = t * evaluate(nu, e1) + (1.0 - t) * evaluate(nu, e2);
  FractionalSet h0;
  h0.cells.resize(e1.cells.size());
  for (std::size_t k = 0; k < h0.cells.size(); ++k) {
    h0.cells[k] = (e1.cells[k] ? t : 0.0) + (e2.cells[k] ? 1.0 - t : 0.0);
  }
  h0.atoms = t == 1.0 ? e1.atoms : e2.atoms;
  h0 = FractionalSet::make(std::move(h0.cells), std::move(h0.atoms));

  const PurifyResult p = purify(nu, h0);
  AttainResult r = realize_intervals(nu, p.h);
  r.achieved = evaluate_intervals(nu, r.intervals, r.atoms);
  r.residual = op_norm(r.achieved - target);
  r.purify_iterations = p.iterations;
  r.iterations = p.iterations;
  return r;
}

namespace {

struct CellProblem {
  MatrixXd coords;
  MatrixXd pinv;  // m x D minimum-norm least-squares inverse
};

CellProblem make_cell_problem(const OVM& nu) {
  CellProblem p;
  p.coords = coordinate_matrix(nu.cell_masses(), nu.dim());
  Eigen::JacobiSVD<MatrixXd> svd(p.coords, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  VectorXd inv = VectorXd::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (smax > 0.0 && sv(i) > 1e-12 * smax) inv(i) = 1.0 / sv(i);
  }
  p.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return p;
}

// Pin the coordinates marked 0 or 1 in `pin` (-1 = free) and solve the rest
// by minimum-norm least squares.
std::optional<VectorXd> polish_pinned(const MatrixXd& coords, const VectorXd& a, const VectorXd& x,
                                      std::vector<int> pin, double tol) {
  VectorXd xb = x;
  // Coordinates pushed out of the box are pinned at the violated bound and
  // the solve repeats; each round pins at least one more coordinate.
  for (Index round = 0; round <= x.size(); ++round) {
    xb = x;
    std::vector<std::size_t> free;
    for (Index k = 0; k < x.size(); ++k) {
      const int p = pin[static_cast<std::size_t>(k)];
      if (p < 0) {
        free.push_back(static_cast<std::size_t>(k));
      } else {
        xb(k) = p;
      }
    }
    bool violated = false;
    if (!free.empty()) {
      const MatrixXd sub = select_columns(coords, free);
      Eigen::JacobiSVD<MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-12);
      const VectorXd delta = svd.solve(a - coords * xb);
      for (std::size_t i = 0; i < free.size(); ++i) {
        double& v = xb(static_cast<Index>(free[i]));
        v += delta(static_cast<Index>(i));
        if (v < -1e-12) {
          pin[free[i]] = 0;
          violated = true;
        } else if (v > 1.0 + 1e-12) {
          pin[free[i]] = 1;
          violated = true;
        }
        v = std::clamp(v, 0.0, 1.0);
      }
    }
    if (!violated) break;
    if (round == x.size()) return std::nullopt;
  }
  if ((a - coords * xb).norm() > tol) return std::nullopt;
  // Coordinates that landed next to a bound go onto it when that keeps the residual.
  VectorXd snapped = xb;
  for (Index k = 0; k < xb.size(); ++k) {
    if (snapped(k) <= 1e-9) snapped(k) = 0.0;
    if (snapped(k) >= 1.0 - 1e-9) snapped(k) = 1.0;
  }
  if ((a - coords * snapped).norm() <= tol) return snapped;
  return xb;
}

// Active-set guesses: the sign of Dykstra's box correction marks coordinates
// the clamp is holding at a bound; proximity to a bound is the fallback.
std::optional<VectorXd> polish(const MatrixXd& coords, const VectorXd& a, const VectorXd& x,
                               const VectorXd& box_correction, double tol) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<int> pin(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = box_correction(static_cast<Index>(k));
    if (c > 0.0) pin[k] = 1;
    if (c < 0.0) pin[k] = 0;
  }
  if (auto p = polish_pinned(coords, a, x, pin, tol)) return p;
  for (double snap_to : {1e-6, 1e-9}) {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = x(static_cast<Index>(k));
      pin[k] = v <= snap_to ? 0 : (v >= 1.0 - snap_to ? 1 : -1);
    }
    if (auto p = polish_pinned(coords, a, x, pin, tol)) return p;
  }
  return std::nullopt;
}

struct FeasiblePoint {
  VectorXd h;
  std::size_t iterations = 0;
};

std::optional<FeasiblePoint> find_feasible(const CellProblem& p, const VectorXd& a, double scale,
                                           const AttainOptions& opts) {
  const Index m = p.coords.cols();
  const double tol = opts.tol * scale;
  // Least-squares consistency: targets outside the span of the masses are unreachable.
  if ((p.coords * (p.pinv * a) - a).norm() > opts.give_up * scale) return std::nullopt;

  VectorXd x = VectorXd::Constant(m, 0.5);
  VectorXd pa = VectorXd::Zero(m);
  VectorXd pb = VectorXd::Zero(m);
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_x = x;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    const VectorXd u = x + pa;
    const VectorXd y = u - p.pinv * (p.coords * u - a);
    pa = u - y;
    const VectorXd v = y + pb;
    x = v.cwiseMax(0.0).cwiseMin(1.0);
    pb = v - x;
    if (it % opts.check_every == 0 || it == 1) {
      const double res = (p.coords * x - a).norm();
      if (res < best) {
        best = res;
        best_x = x;
      }
      if (auto polished = polish(p.coords, a, x, pb, tol)) return FeasiblePoint{*polished, it};
      if (res <= tol) return FeasiblePoint{x, it};
    }
  }
  if (best <= opts.give_up * scale) return FeasiblePoint{best_x, opts.max_iter};
  return std::nullopt;
}

}  // namespace

AttainResult attain(const OVM& nu, const HermitianMatrix& target, const AttainOptions& opts) {
  require_positive(nu, "attain");
  if (target.dim() != nu.dim()) throw Error(ErrorKind::DimMismatch, "target dimension differs from OVM dimension");
  const double scale = std::max(1.0, op_norm(target));
  const double order_tol = kTolPsd * hull_norm(nu);
  if (!psd_check(target, order_tol) || !loewner_leq(target, nu.total(), order_tol)) {
    throw Error(ErrorKind::TargetNotInHull, "target lies outside the operator interval [0, nu(X)]");
  }

  std::vector<std::size_t> live_atoms;
  for (const auto& at : atoms(nu)) live_atoms.push_back(at.index);
  if (live_atoms.size() > 12) throw Error(ErrorKind::SizeLimit, "attain enumerates at most 12 atoms");

  const CellProblem problem = make_cell_problem(nu);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << live_atoms.size()); ++bits) {
    HermitianMatrix cell_target = target;
    std::vector<bool> atom_mask(nu.space().atom_count(), false);
    for (std::size_t i = 0; i < live_atoms.size(); ++i) {
      if ((bits >> i) & 1U) {
        atom_mask[live_atoms[i]] = true;
        cell_target = cell_target - nu.atom_masses()[live_atoms[i]];
      }
    }
    const auto feasible = find_feasible(problem, herm_coords(cell_target), scale, opts);
    if (!feasible) continue;
    std::vector<double> h(feasible->h.data(), feasible->h.data() + feasible->h.size());
    const PurifyResult pur = purify(nu, FractionalSet::make(std::move(h), atom_mask));
    AttainResult r = realize_intervals(nu, pur.h);
    r.achieved = evaluate_intervals(nu, r.intervals, r.atoms);
    r.residual = op_norm(r.achieved - target);
    r.purify_iterations = pur.iterations;
    r.iterations = feasible->iterations + pur.iterations;
    return r;
  }
  throw Error(ErrorKind::TargetNotInHull,
              "alternating projections did not reach the target (not certified outside the range)");
}

AttainResult joint_attain(std::span<const OVM> measures, std::span<const HermitianMatrix> targets,
                          const AttainOptions& opts) {
  if (measures.size() != targets.size()) throw Error(ErrorKind::ShapeMismatch, "one target per measure required");
  for (std::size_t i = 0; i < measures.size(); ++i) {
    if (measures[i].dim() != targets[i].dim()) throw Error(ErrorKind::DimMismatch, "target dimension mismatch", {i});
  }
  const OVM sum = OVM::direct_sum(measures);
  return attain(sum, direct_sum(targets), opts);
}

std::vector<std::pair<MeasurableSet, HermitianMatrix>> brute_force_range(const OVM& nu) {
  const std::size_t bits = nu.space().cell_count() + nu.space().atom_count();
  if (bits > kernels::kMaxEnumerationBits) throw Error(ErrorKind::SizeLimit, "brute force limited to 22 cells + atoms");
  std::vector<std::pair<MeasurableSet, HermitianMatrix>> out;
  out.reserve(std::size_t{1} << bits);
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << bits); ++b) {
    MeasurableSet e = MeasurableSet::from_bits(nu.space(), b);
    HermitianMatrix v = evaluate(nu, e);
    out.emplace_back(std::move(e), std::move(v));
  }
  return out;
}

kernels::NearestSubset brute_force_nearest(const OVM& nu, const HermitianMatrix& target) {
  std::vector<HermitianMatrix> masses = nu.cell_masses();
  masses.insert(masses.end(), nu.atom_masses().begin(), nu.atom_masses().end());
  return kernels::omp::nearest_subset(masses, target);
}

namespace {

CertificateTrial run_trial(const OVM& nu, std::uint64_t seed, std::size_t index) {
  Rng rng = Rng::stream(seed, index);
  CertificateTrial trial;
  trial.e1 = models::random_set(rng, nu.space());
  trial.e2 = models::random_set(rng, nu.space());
  const std::size_t n_atoms = nu.space().atom_count();
  if (n_atoms > 0 && trial.e1.atoms == trial.e2.atoms) {
    const std::size_t a = index % n_atoms;
    trial.e2.atoms[a] = !trial.e2.atoms[a];
  }
  trial.t = rng.uniform_open();
  try {
    const AttainResult r = convex_combine(nu, trial.e1, trial.e2, trial.t);
    trial.residual = r.residual;
    trial.interval_count = r.interval_count;
    if (!(r.residual <= kCertificateFailResidual)) {
      trial.failed = true;
      trial.reason = "residual above 1e-6";
    }
  } catch (const Error& err) {
    trial.failed = true;
    trial.reason = to_string(err.kind());
  }
  return trial;
}

ConvexityReport aggregate(std::vector<CertificateTrial> records) {
  ConvexityReport report;
  report.trials = records.size();
  for (const auto& t : records) {
    if (t.failed) {
      ++report.failure_count;
      continue;
    }
    report.max_residual = std::max(report.max_residual, t.residual);
    report.max_interval_count = std::max(report.max_interval_count, t.interval_count);
  }
  report.records = std::move(records);
  return report;
}

}  // namespace

ConvexityReport convexity_certificate(const OVM& nu, std::size_t trials, std::uint64_t seed) {
  std::vector<CertificateTrial> records(trials);
  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    records[static_cast<std::size_t>(i)] = run_trial(nu, seed, static_cast<std::size_t>(i));
  }
  return aggregate(std::move(records));
}

ConvexityReport convexity_certificate_serial(const OVM& nu, std::size_t trials, std::uint64_t seed) {
  std::vector<CertificateTrial> records;
  records.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) records.push_back(run_trial(nu, seed, i));
  return aggregate(std::move(records));
}

}  // namespace ovmkit
