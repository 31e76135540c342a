#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spinent/lattice_basis.hpp"

namespace spinent {

enum class Family { J1J2, XXZ, TransverseIsing, Ladder, GeneralXYZ };

std::string to_string(Family f);
/// Accepts "j1j2", "xxz", "ising", "ladder", "xyz" (case-insensitive).
Family parse_family(std::string_view name);

/// Hamiltonian family and couplings. Energies are in units of the
/// reference exchange, spin operators are s = sigma / 2.
///
///   J1J2     : sum_i J1 s_i.s_{i+1} + J2 s_i.s_{i+2}
///   XXZ      : sum_i s^x s^x + s^y s^y + delta s^z s^z   (nearest neighbours)
///   Ising    : -sum_i (lambda s^x_i s^x_{i+1} + s^z_i / 2)
///   Ladder   : j_leg sum_legs s.s + j_rung sum_rungs s.s
///   XYZ      : sum_i jx s^x s^x + jy s^y s^y + jz s^z s^z + h s^z_i
struct ModelSpec {
  Family family = Family::XXZ;
  double j1 = 1.0;
  double j2 = 0.0;
  double delta = 1.0;
  double lambda = 1.0;
  double j_leg = 1.0;
  double j_rung = 1.0;
  double jx = 1.0;
  double jy = 1.0;
  double jz = 1.0;
  double h = 0.0;

  static ModelSpec j1j2(double j1, double j2);
  static ModelSpec xxz(double delta);
  static ModelSpec ising(double lambda);
  static ModelSpec ladder(double j_rung, double j_leg = 1.0);
  static ModelSpec general_xyz(double jx, double jy, double jz, double h);

  /// Names of the couplings that belong to this family, in display order.
  std::vector<std::string> parameter_names() const;
  double parameter(std::string_view name) const;
  ModelSpec with_parameter(std::string_view name, double value) const;

  void validate() const;
};

enum class Axis { x, y, z };
enum class BondKind { NN, NNN, leg, rung };

std::string to_string(Axis a);
std::string to_string(BondKind k);
Axis parse_axis(std::string_view name);

/// One Hamiltonian summand jx s^x_i s^x_j + jy s^y_i s^y_j + jz s^z_i s^z_j.
struct Bond {
  int i = 0;
  int j = 0;
  BondKind kind = BondKind::NN;
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;
};

/// Single-site term `coefficient * s^axis_site` (signed as it appears in H).
struct FieldTerm {
  int site = 0;
  Axis axis = Axis::z;
  double coefficient = 0.0;
};

struct CouplingGraph {
  std::vector<Bond> bonds;
  std::vector<FieldTerm> fields;
};

/// One entry per summand of the Hamiltonian, so NNN pairs on a 4-site ring
/// appear twice.
CouplingGraph coupling_graph(const ModelSpec& model, const LatticeSpec& lattice);

struct Symmetries {
  bool sz_conserved = false;
  bool parity_conserved = false;
};

Symmetries conserved_quantities(const ModelSpec& model);

/// Real amplitudes over a sector basis. All model Hamiltonians here are real
/// symmetric in the s^z product basis.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::shared_ptr<const SectorBasis> basis);
  StateVector(std::shared_ptr<const SectorBasis> basis, std::vector<double> amplitudes);

  static StateVector basis_state(std::shared_ptr<const SectorBasis> basis,
                                 SpinConfiguration config);

  const SectorBasis& basis() const { return *basis_; }
  const std::shared_ptr<const SectorBasis>& basis_ptr() const { return basis_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  std::span<const double> amplitudes() const noexcept { return amplitudes_; }
  std::span<double> amplitudes() noexcept { return amplitudes_; }
  double operator[](std::size_t k) const { return amplitudes_[k]; }
  double& operator[](std::size_t k) { return amplitudes_[k]; }

  double norm() const;
  double dot(const StateVector& other) const;
  StateVector& normalize();
  StateVector& operator+=(const StateVector& other);
  StateVector& operator*=(double s);

 private:
  std::shared_ptr<const SectorBasis> basis_;
  std::vector<double> amplitudes_;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator*(double s, StateVector v);

/// Matrix-free Hamiltonian on a fixed basis. apply() is a pure function of
/// its input and safe to call concurrently on distinct output buffers.
class HamiltonianOperator {
 public:
  HamiltonianOperator(const ModelSpec& model, std::shared_ptr<const SectorBasis> basis);

  std::size_t dimension() const noexcept { return basis_->dimension(); }
  const SectorBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const SectorBasis>& basis_ptr() const noexcept { return basis_; }
  const ModelSpec& model() const noexcept { return model_; }

  /// out = H * in
  void apply(std::span<const double> in, std::span<double> out) const;

  /// Upper bound on the spectral radius (sum of |couplings|).
  double norm_bound() const noexcept { return norm_bound_; }

  /// Visits every nonzero element H(row, col) of the given row.
  template <typename Visitor>
  void for_each_in_row(std::size_t row, Visitor&& visit) const;

 private:
  struct FlipTerm {
    SpinConfiguration mask;
    double parallel;      // element when the two spins are aligned
    double antiparallel;  // element when they are opposite
  };

  ModelSpec model_;
  std::shared_ptr<const SectorBasis> basis_;
  std::vector<FlipTerm> flips_;
  std::vector<double> diagonal_;
  double norm_bound_ = 0.0;
};

template <typename Visitor>
void HamiltonianOperator::for_each_in_row(std::size_t row, Visitor&& visit) const {
  const SpinConfiguration c = (*basis_)[row];
  visit(row, diagonal_[row]);
  for (const auto& f : flips_) {
    const SpinConfiguration masked = c & f.mask;
    const bool aligned = masked == 0 || masked == f.mask;
    const double el = aligned ? f.parallel : f.antiparallel;
    if (el == 0.0) continue;
    // an aligned flip changes Sz by 2, but parallel != 0 only happens for
    // models that need the full basis, so the target is always present
    visit(basis_->rank_unchecked(c ^ f.mask), el);
  }
}

StateVector apply_hamiltonian(const ModelSpec& model, const StateVector& v);

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Dense real symmetric matrix of H on `basis`; throws ResourceError above
/// `dense_cap`.
Eigen::MatrixXd hamiltonian_dense(const ModelSpec& model,
                                  std::shared_ptr<const SectorBasis> basis,
                                  std::size_t dense_cap = kDefaultDenseCap);

}  // namespace spinent
