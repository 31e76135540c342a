#include "spinent/observables.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

#include "spinent/errors.hpp"

namespace spinent {

namespace {

bool is_up(SpinConfiguration c, int site) { return ((c >> site) & 1U) != 0; }

void require_normalized(const StateVector& s) {
  const double n2 = s.dot(s);
  if (std::abs(n2 - 1.0) > 1e-10) {
    throw InvalidInput("state is not normalized (|psi|^2 = " + std::to_string(n2) + ")");
  }
}

void require_site(const StateVector& s, int site) {
  if (site < 0 || site >= s.basis().n_sites()) {
    throw InvalidInput("site " + std::to_string(site) + " outside 0.." +
                       std::to_string(s.basis().n_sites() - 1));
  }
}

// RDM row/column of a configuration: (i down) * 2 + (j down).
int pair_index(SpinConfiguration c, int i, int j) {
  return (is_up(c, i) ? 0 : 2) + (is_up(c, j) ? 0 : 1);
}

SpinConfiguration with_pair(SpinConfiguration c, int i, int j, int idx) {
  const SpinConfiguration bi = SpinConfiguration{1} << i;
  const SpinConfiguration bj = SpinConfiguration{1} << j;
  c &= ~(bi | bj);
  if ((idx & 2) == 0) c |= bi;
  if ((idx & 1) == 0) c |= bj;
  return c;
}

std::shared_ptr<const SectorBasis> full_basis_like(const SectorBasis& b) {
  return std::make_shared<const SectorBasis>(b.lattice(), std::nullopt);
}

double phase(int site, Momentum q) { return q == Momentum::pi && (site & 1) ? -1.0 : 1.0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

TwoSiteRDM two_site_rdm(const StateVector& state, int i, int j) {
  require_site(state, i);
  require_site(state, j);
  if (i == j) throw InvalidInput("two_site_rdm needs distinct sites");
  require_normalized(state);

  const SectorBasis& basis = state.basis();
  TwoSiteRDM rdm;
  rdm.i = i;
  rdm.j = j;
  Eigen::Matrix4d& r = rdm.entries;
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const double a = state[k];
    if (a == 0.0) continue;
    const SpinConfiguration c = basis[k];
    const int row = pair_index(c, i, j);
    r(row, row) += a * a;
    for (int col = row + 1; col < 4; ++col) {
      const auto other = basis.find(with_pair(c, i, j, col));
      if (other) r(row, col) += a * state[*other];
    }
  }
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < row; ++col) r(row, col) = r(col, row);
  }
  return rdm;
}

double correlator(const TwoSiteRDM& rdm, Axis axis) {
  const auto& r = rdm.entries;
  switch (axis) {
    case Axis::z:
      return 0.25 * (r(0, 0) - r(1, 1) - r(2, 2) + r(3, 3));
    case Axis::x:
      // s^x s^x = (sigma^x sigma^x) / 4 couples uu<->dd and ud<->du
      return 0.25 * 2.0 * (r(0, 3) + r(1, 2));
    case Axis::y:
      // sigma^y sigma^y has -1 on uu<->dd and +1 on ud<->du
      return 0.25 * 2.0 * (r(1, 2) - r(0, 3));
  }
  return 0.0;
}

double correlator(const StateVector& state, Axis axis, int i, int j) {
  return correlator(two_site_rdm(state, i, j), axis);
}

StateVector lift_to_full(const StateVector& state) {
  if (state.basis().is_full()) return state;
  auto full = full_basis_like(state.basis());
  StateVector out(full);
  const auto& basis = state.basis();
  for (std::size_t k = 0; k < basis.dimension(); ++k) out[basis[k]] = state[k];
  return out;
}

StateVector collective_apply(const StateVector& state, Axis axis, Momentum momentum) {
  const int n = state.basis().n_sites();
  if (axis == Axis::z) {
    StateVector out(state.basis_ptr());
    const auto& basis = state.basis();
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
      double d = 0.0;
      for (int s = 0; s < n; ++s) d += phase(s, momentum) * (is_up(basis[k], s) ? 0.5 : -0.5);
      out[k] = d * state[k];
    }
    return out;
  }
  const StateVector in = lift_to_full(state);
  StateVector out(in.basis_ptr());
  for (std::size_t c = 0; c < in.size(); ++c) {
    const double a = in[c];
    if (a == 0.0) continue;
    for (int s = 0; s < n; ++s) {
      const SpinConfiguration flipped = static_cast<SpinConfiguration>(c) ^ (SpinConfiguration{1} << s);
      double el = 0.5 * phase(s, momentum);
      if (axis == Axis::y && !is_up(c, s)) el = -el;
      out[flipped] += el * a;
    }
  }
  return out;
}

TotalSpin total_spin(const StateVector& state, double quantization_tol) {
  const SectorBasis& basis = state.basis();
  const int n = basis.n_sites();
  const double norm2 = state.dot(state);
  TotalSpin out;
  if (basis.sz_twice()) {
    // S^2 = S^- S^+ + Sz^2 + Sz on an Sz eigenstate
    const int m2 = *basis.sz_twice();
    const double m = 0.5 * m2;
    double raise = 0.0;
    if (m2 < n) {
      const SectorBasis up(basis.lattice(), m2 + 2);
      std::vector<double> w(up.dimension(), 0.0);
      for (std::size_t k = 0; k < basis.dimension(); ++k) {
        const SpinConfiguration c = basis[k];
        for (int s = 0; s < n; ++s) {
          if (!is_up(c, s)) w[up.index_of(c | (SpinConfiguration{1} << s))] += state[k];
        }
      }
      for (double x : w) raise += x * x;
    }
    out.s_squared = raise + (m * m + m) * norm2;
  } else {
    for (Axis a : {Axis::x, Axis::y, Axis::z}) {
      const StateVector w = collective_apply(state, a, Momentum::zero);
      out.s_squared += w.dot(w);
    }
  }
  const double s = 0.5 * (std::sqrt(1.0 + 4.0 * std::max(out.s_squared, 0.0)) - 1.0);
  const double snapped = std::round(2.0 * s) / 2.0;
  if (std::abs(snapped * (snapped + 1.0) - out.s_squared) <= quantization_tol) out.S = snapped;
  return out;
}

int sector_parity(int n_sites, int sz_twice) {
  const int downs = (n_sites - sz_twice) / 2;
  return downs % 2 == 0 ? 1 : -1;
}

std::optional<int> parity(const StateVector& state, double quantization_tol) {
  const SectorBasis& basis = state.basis();
  if (!basis.is_full()) {
    throw InvalidInput("parity needs a full-basis state; an Sz sector has parity " +
                       std::to_string(sector_parity(basis.n_sites(), *basis.sz_twice())));
  }
  const int n = basis.n_sites();
  double p = 0.0;
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const int downs = n - std::popcount(basis[k]);
    p += (downs % 2 == 0 ? 1.0 : -1.0) * state[k] * state[k];
  }
  if (p > 1.0 - quantization_tol) return 1;
  if (p < -1.0 + quantization_tol) return -1;
  return std::nullopt;
}

std::string to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::staggered_x: return "staggered_x";
    case OperatorTag::staggered_y: return "staggered_y";
    case OperatorTag::staggered_z: return "staggered_z";
    case OperatorTag::uniform_x: return "uniform_x";
    case OperatorTag::uniform_y: return "uniform_y";
    case OperatorTag::uniform_z: return "uniform_z";
  }
  return "?";
}

OperatorTag parse_operator(std::string_view name) {
  const std::string s = lower(name);
  for (OperatorTag t : {OperatorTag::staggered_x, OperatorTag::staggered_y, OperatorTag::staggered_z,
                        OperatorTag::uniform_x, OperatorTag::uniform_y, OperatorTag::uniform_z}) {
    if (s == to_string(t)) return t;
  }
  throw InvalidInput("unknown operator '" + std::string(name) +
                     "' (expected staggered_x|y|z or uniform_x|y|z)");
}

Axis axis_of(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::staggered_x:
    case OperatorTag::uniform_x: return Axis::x;
    case OperatorTag::staggered_y:
    case OperatorTag::uniform_y: return Axis::y;
    default: return Axis::z;
  }
}

Momentum momentum_of(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::staggered_x:
    case OperatorTag::staggered_y:
    case OperatorTag::staggered_z: return Momentum::pi;
    default: return Momentum::zero;
  }
}

TransitionWeights transition_weights(const StateVector& ground, double ground_energy,
                                     const EigenSolution& solution, OperatorTag op) {
  const StateVector a0 = collective_apply(ground, axis_of(op), momentum_of(op));
  if (solution.size() != a0.size()) {
    throw InvalidInput("transition_weights needs the complete spectrum (" + std::to_string(a0.size()) +
                       " states), got " + std::to_string(solution.size()));
  }
  TransitionWeights out;
  out.op = op;
  out.rows.reserve(solution.size());
  for (std::size_t n = 0; n < solution.size(); ++n) {
    if (solution.vectors[n].size() != a0.size()) {
      throw InvalidInput("transition_weights: eigenvector dimension does not match A|0>");
    }
    double ov = 0.0;
    for (std::size_t k = 0; k < a0.size(); ++k) ov += solution.vectors[n][k] * a0[k];
    out.rows.push_back({solution.energies[n] - ground_energy, ov * ov});
  }
  return out;
}

namespace {

struct FullSolve {
  HamiltonianOperator h;
  EigenSolution spectrum;
  StateVector ground;
};

FullSolve solve_full(const ModelSpec& model, const LatticeSpec& lattice, std::size_t dense_cap) {
  lattice.validate();
  auto basis = std::make_shared<const SectorBasis>(lattice, std::nullopt);
  if (basis->dimension() > dense_cap) {
    throw ResourceError("sum rule needs a dense full spectrum of dimension " +
                        std::to_string(basis->dimension()) + " above the cap " +
                        std::to_string(dense_cap));
  }
  HamiltonianOperator h(model, basis);
  EigenSolution spec = dense_spectrum(hamiltonian_dense(model, basis, dense_cap));
  StateVector ground(basis, spec.vectors[0]);
  return {std::move(h), std::move(spec), std::move(ground)};
}

StateVector apply(const HamiltonianOperator& h, const StateVector& v) {
  StateVector out(v.basis_ptr());
  h.apply(v.amplitudes(), out.amplitudes());
  return out;
}

SumRuleCheck check_with(const FullSolve& fs, OperatorTag op) {
  const Axis axis = axis_of(op);
  const Momentum q = momentum_of(op);
  const StateVector a0 = collective_apply(fs.ground, axis, q);
  const StateVector ah0 = collective_apply(apply(fs.h, fs.ground), axis, q);
  SumRuleCheck out;
  out.op = op;
  out.ground_energy = fs.spectrum.energies[0];
  // <0|A H A|0> * 2 - <0|A^2 H|0> - <0|H A^2|0>; the last two are equal for real H
  out.lhs = 2.0 * a0.dot(apply(fs.h, a0)) - 2.0 * a0.dot(ah0);
  const TransitionWeights tw = transition_weights(fs.ground, out.ground_energy, fs.spectrum, op);
  for (const auto& row : tw.rows) {
    out.rhs += 2.0 * row.excitation * row.weight;
    out.weight_total += row.weight;
  }
  out.norm_squared = a0.dot(a0);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace

SumRuleCheck sum_rule(const ModelSpec& model, const LatticeSpec& lattice, OperatorTag op,
                      std::size_t dense_cap) {
  return check_with(solve_full(model, lattice, dense_cap), op);
}

double sum_rule_residual(const ModelSpec& model, const LatticeSpec& lattice, OperatorTag op,
                         std::size_t dense_cap) {
  return sum_rule(model, lattice, op, dense_cap).residual;
}

RearrangedSumRule rearranged_sum_rule(const ModelSpec& model, const LatticeSpec& lattice,
                                      std::size_t dense_cap) {
  double J = 0.0;
  bool staggered = false;
  if (model.family == Family::XXZ) {
    J = 2.0 + model.delta;
    staggered = true;
  } else if (model.family == Family::TransverseIsing) {
    J = -model.lambda;
  } else {
    throw InvalidInput("the rearranged sum rule exists only for the XXZ and Ising families");
  }
  if (J == 0.0) throw InvalidInput("the rearranged sum rule is singular at J = 0");
  if (lattice.geometry != Geometry::chain) throw InvalidInput("the rearranged sum rule needs a chain");

  const FullSolve fs = solve_full(model, lattice, dense_cap);
  const int n = lattice.n_sites;
  double w = 0.0;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    const OperatorTag op = staggered ? (a == Axis::x   ? OperatorTag::staggered_x
                                        : a == Axis::y ? OperatorTag::staggered_y
                                                       : OperatorTag::staggered_z)
                                     : (a == Axis::x   ? OperatorTag::uniform_x
                                        : a == Axis::y ? OperatorTag::uniform_y
                                                       : OperatorTag::uniform_z);
    w += 0.5 * check_with(fs, op).rhs;
  }
  double cx = 0.0, cy = 0.0, cz = 0.0;
  for (int i = 0; i < n; ++i) {
    const TwoSiteRDM r = two_site_rdm(fs.ground, i, (i + 1) % n);
    cx += correlator(r, Axis::x);
    cy += correlator(r, Axis::y);
    cz += correlator(r, Axis::z);
  }
  cx /= n;
  cy /= n;
  cz /= n;
  const double e0 = fs.spectrum.energies[0];
  RearrangedSumRule out;
  out.coupling_J = J;
  if (staggered) {
    out.correlator_side = -(cx + cy + cz);
    out.spectral_side = e0 / (J * n) + w / (J * n);
  } else {
    out.correlator_side = cx - cy - cz;
    out.spectral_side = -e0 / (J * n) - w / (J * n);
  }
  out.residual = std::abs(out.correlator_side - out.spectral_side);
  return out;
}

double structure_factor(const StateVector& state, Axis axis, Momentum q) {
  const StateVector w = collective_apply(state, axis, q);
  return w.dot(w) / state.basis().n_sites();
}

StateLabel label_state(const StateVector& state, const Symmetries& symmetries,
                       double quantization_tol) {
  StateLabel label;
  const SectorBasis& basis = state.basis();
  const int n = basis.n_sites();
  if (basis.sz_twice()) {
    label.sz_twice = basis.sz_twice();
    if (symmetries.parity_conserved) label.parity = sector_parity(n, *basis.sz_twice());
  } else {
    if (symmetries.sz_conserved) {
      const StateVector w = collective_apply(state, Axis::z, Momentum::zero);
      const double mean = state.dot(w);
      const double var = w.dot(w) - mean * mean;
      const double twice = std::round(2.0 * mean);
      if (var <= quantization_tol && std::abs(2.0 * mean - twice) <= quantization_tol) {
        label.sz_twice = static_cast<int>(twice);
      }
    }
    if (symmetries.parity_conserved) label.parity = parity(state, quantization_tol);
  }
  label.total_spin = total_spin(state, quantization_tol).S;
  return label;
}

}  // namespace spinent
