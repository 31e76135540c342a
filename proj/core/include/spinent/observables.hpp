#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spinent/eigensolver.hpp"
#include "spinent/models.hpp"

namespace spinent {

/// Two-site reduced density matrix in the ordered basis {uu, ud, du, dd};
/// the first factor is site i.
struct TwoSiteRDM {
  int i = 0;
  int j = 1;
  Eigen::Matrix4d entries = Eigen::Matrix4d::Zero();
};

/// Partial trace of |psi><psi| onto sites (i, j). Throws InvalidInput when
/// the state is not normalized to 1e-10 or the sites are invalid.
TwoSiteRDM two_site_rdm(const StateVector& state, int i, int j);

/// <s^a_i s^a_j> read off the RDM.
double correlator(const TwoSiteRDM& rdm, Axis axis);
double correlator(const StateVector& state, Axis axis, int i, int j);

inline constexpr double kQuantizationTol = 1e-6;

struct TotalSpin {
  std::optional<double> S;  // empty when <S^2> is not S(S+1) for a half-integer S
  double s_squared = 0.0;
};

TotalSpin total_spin(const StateVector& state, double quantization_tol = kQuantizationTol);

/// Eigenvalue of prod_i (2 s^z_i) when |<P>| > 1 - tol. Full basis only.
std::optional<int> parity(const StateVector& state, double quantization_tol = kQuantizationTol);

/// Parity shared by every state of an Sz sector: (-1)^(number of down spins).
int sector_parity(int n_sites, int sz_twice);

/// Embed a sector state into the full 2^N basis.
StateVector lift_to_full(const StateVector& state);

enum class Momentum { zero, pi };

/// A|psi> for A = sum_j phase_j s^axis_j with phase_j = 1 (zero) or (-1)^j
/// (pi).
///
/// x and y results are returned in the full basis, z results in the input
/// basis. For the y axis A|psi> is imaginary for real psi; the returned
/// real vector w satisfies A|psi> = i w, which preserves every overlap
/// modulus and norm.
StateVector collective_apply(const StateVector& state, Axis axis, Momentum momentum);

enum class OperatorTag { staggered_x, staggered_y, staggered_z, uniform_x, uniform_y, uniform_z };

std::string to_string(OperatorTag tag);
OperatorTag parse_operator(std::string_view name);
Axis axis_of(OperatorTag tag);
Momentum momentum_of(OperatorTag tag);

struct TransitionRow {
  double excitation = 0.0;  // E_n - E_0
  double weight = 0.0;      // |<n|A|0>|^2
};

struct TransitionWeights {
  OperatorTag op = OperatorTag::staggered_z;
  std::vector<TransitionRow> rows;
};

/// `solution` must be the complete spectrum of the basis holding A|ground>
/// (full basis for x and y, the ground state's basis for z).
TransitionWeights transition_weights(const StateVector& ground, double ground_energy,
                                     const EigenSolution& solution, OperatorTag op);

/// <0|[A,[H,A]]|0> against 2 sum_n (E_n - E_0) |<n|A|0>|^2 on the full
/// basis, with |0> the lowest eigenvector.
struct SumRuleCheck {
  OperatorTag op = OperatorTag::staggered_z;
  double ground_energy = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double weight_total = 0.0;  // sum_n |<n|A|0>|^2
  double norm_squared = 0.0;  // |A|0>|^2
};

SumRuleCheck sum_rule(const ModelSpec& model, const LatticeSpec& lattice, OperatorTag op,
                      std::size_t dense_cap = kDefaultDenseCap);

double sum_rule_residual(const ModelSpec& model, const LatticeSpec& lattice, OperatorTag op,
                         std::size_t dense_cap = kDefaultDenseCap);

/// The identity summed over the three axes and solved for the bond
/// correlators.
///   XXZ   (staggered A, J = 2 + delta):
///       -sum_a <s^a s^a> = E_0 / (J N) + W / (J N)
///   Ising (uniform A, J = -lambda):
///       <s^x s^x> - <s^y s^y> - <s^z s^z> = -E_0 / (J N) - W / (J N)
/// with W = sum_a sum_n (E_n - E_0) |<n|A_a|0>|^2 and correlators averaged
/// over nearest-neighbour bonds.
struct RearrangedSumRule {
  double coupling_J = 0.0;
  double correlator_side = 0.0;
  double spectral_side = 0.0;
  double residual = 0.0;
};

RearrangedSumRule rearranged_sum_rule(const ModelSpec& model, const LatticeSpec& lattice,
                                      std::size_t dense_cap = kDefaultDenseCap);

/// |A|psi>|^2 / N.
double structure_factor(const StateVector& state, Axis axis, Momentum q);

/// Sz, S and parity of an eigenstate living on `basis`.
StateLabel label_state(const StateVector& state, const Symmetries& symmetries,
                       double quantization_tol = kQuantizationTol);

}  // namespace spinent
