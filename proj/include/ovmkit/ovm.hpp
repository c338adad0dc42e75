#pragma once

// Operator-valued measures at finite resolution.
//
// A sample space is an interval [a, b) cut into m contiguous cells plus a
// finite list of point atom sites. An OVM assigns a Hermitian mass to every
// cell and every atom site; the value on a set is the sum of the masses it
// selects. Grid cells carry the constant density M_k / w_k, so the leftmost
// fraction t of a divisible cell has mass exactly t * M_k.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ovmkit/opcore.hpp"

namespace ovmkit {

class SampleSpace {
 public:
  SampleSpace() = default;

  /// Validates strictly increasing breakpoints, distinct atom sites inside
  /// [a, b] and one divisible flag per cell. An empty `divisible` means all
  /// cells are divisible.
  static SampleSpace make(std::vector<double> breakpoints, std::vector<double> atom_sites = {},
                          std::vector<bool> divisible = {});
  /// m equal cells on [a, b).
  static SampleSpace uniform(double a, double b, std::size_t cells, std::vector<double> atom_sites = {},
                             bool divisible = true);

  double a() const noexcept { return breakpoints_.front(); }
  double b() const noexcept { return breakpoints_.back(); }
  std::size_t cell_count() const noexcept { return breakpoints_.size() - 1; }
  std::size_t atom_count() const noexcept { return atom_sites_.size(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& atom_sites() const noexcept { return atom_sites_; }
  const std::vector<bool>& divisible() const noexcept { return divisible_; }
  double cell_lo(std::size_t k) const { return breakpoints_[k]; }
  double cell_hi(std::size_t k) const { return breakpoints_[k + 1]; }
  double width(std::size_t k) const { return breakpoints_[k + 1] - breakpoints_[k]; }

  friend bool operator==(const SampleSpace&, const SampleSpace&) = default;

 private:
  std::vector<double> breakpoints_{0.0, 1.0};
  std::vector<double> atom_sites_;
  std::vector<bool> divisible_{true};
};

/// Indicator of a set in the algebra generated by cells and atom sites.
struct MeasurableSet {
  std::vector<bool> cells;
  std::vector<bool> atoms;

  static MeasurableSet empty(const SampleSpace& space);
  static MeasurableSet full(const SampleSpace& space);
  /// Bit k selects cell k for k < m, then atom k - m.
  static MeasurableSet from_bits(const SampleSpace& space, std::uint64_t bits);
  static MeasurableSet from_indices(const SampleSpace& space, std::span<const std::size_t> cells,
                                    std::span<const std::size_t> atoms = {});

  bool matches(const SampleSpace& space) const noexcept;
  MeasurableSet complement() const;
  friend MeasurableSet intersect(const MeasurableSet& e, const MeasurableSet& f);
  friend bool operator==(const MeasurableSet&, const MeasurableSet&) = default;
};

/// [0,1]-relaxation of a set on the cells; atoms stay boolean.
struct FractionalSet {
  std::vector<double> cells;
  std::vector<bool> atoms;

  /// Clamps values within 1e-12 of [0,1]; rejects anything further out.
  static FractionalSet make(std::vector<double> cells, std::vector<bool> atoms);
  static FractionalSet constant(const SampleSpace& space, double value);
  static FractionalSet from_set(const MeasurableSet& e);

  bool matches(const SampleSpace& space) const noexcept;
};

enum class OvmVariant { Grid, Atomic, Mixed, DirectSum };

const char* to_string(OvmVariant v) noexcept;

class OVM {
 public:
  OVM() = default;

  /// `cell_masses` must have one entry per cell, or be empty (no cell mass);
  /// likewise `atom_masses`. The variant is inferred from which are present.
  static OVM make(SampleSpace space, std::size_t dim, std::vector<HermitianMatrix> cell_masses,
                  std::vector<HermitianMatrix> atom_masses = {});
  static OVM direct_sum(std::span<const OVM> components);

  const SampleSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return dim_; }
  OvmVariant variant() const noexcept { return variant_; }
  bool positive() const noexcept { return positive_; }
  const std::vector<HermitianMatrix>& cell_masses() const noexcept { return cells_; }
  const std::vector<HermitianMatrix>& atom_masses() const noexcept { return atoms_; }
  const std::vector<OVM>& components() const noexcept { return components_; }
  const HermitianMatrix& total() const noexcept { return total_; }

 private:
  SampleSpace space_;
  std::size_t dim_ = 0;
  OvmVariant variant_ = OvmVariant::Grid;
  bool positive_ = false;
  std::vector<HermitianMatrix> cells_;
  std::vector<HermitianMatrix> atoms_;
  std::vector<OVM> components_;
  HermitianMatrix total_;
};

/// nu_rho as per-cell and per-atom scalar masses tr(rho M).
struct InducedMeasure {
  SampleSpace space;
  std::vector<double> cells;
  std::vector<double> atoms;

  double total() const;
  double evaluate(const MeasurableSet& e) const;
};

/// nu_ij as per-cell and per-atom complex masses (M)_ij.
struct EntryMeasure {
  std::vector<Complex> cells;
  std::vector<Complex> atoms;
};

struct Atom {
  std::size_t index;
  double site;
  HermitianMatrix mass;
};

struct OvmPropertyReport {
  bool bounded = false;
  bool self_adjoint = false;
  bool positive = false;
  bool spectral = false;
  bool probability = false;
  double spectral_defect = 0.0;
  double probability_defect = 0.0;
};

bool is_zero_mass(const HermitianMatrix& m);

HermitianMatrix evaluate(const OVM& nu, const MeasurableSet& e);
HermitianMatrix evaluate_fractional(const OVM& nu, const FractionalSet& h);
InducedMeasure induced_measure(const OVM& nu, const State& rho);
EntryMeasure entry_measure(const OVM& nu, std::size_t i, std::size_t j);
std::vector<Atom> atoms(const OVM& nu);
bool is_nonatomic(const OVM& nu);
OvmPropertyReport check_ovm_properties(const OVM& nu, std::span<const MeasurableSet> sample_sets);

/// nu1 << nu2: every cell/atom that is null for nu2 is null for nu1.
bool abs_continuous(const OVM& nu1, const OVM& nu2);
bool abs_continuous(const InducedMeasure& nu1, const InducedMeasure& nu2);
bool abs_continuous(const OVM& nu1, const InducedMeasure& nu2);
bool abs_continuous(const InducedMeasure& nu1, const OVM& nu2);

OVM direct_sum(std::span<const OVM> components);

/// Every set of the generated algebra: all 2^(m + atoms) selections, at most 2^20.
std::vector<MeasurableSet> all_sets(const SampleSpace& space);

}  // namespace ovmkit
