#include "spinent/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "spinent/errors.hpp"

namespace spinent {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::J1J2: return "j1j2";
    case Family::XXZ: return "xxz";
    case Family::TransverseIsing: return "ising";
    case Family::Ladder: return "ladder";
    case Family::GeneralXYZ: return "xyz";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  const std::string n = lower(name);
  if (n == "j1j2" || n == "j1-j2") return Family::J1J2;
  if (n == "xxz") return Family::XXZ;
  if (n == "ising" || n == "transverseising" || n == "tfim") return Family::TransverseIsing;
  if (n == "ladder") return Family::Ladder;
  if (n == "xyz" || n == "generalxyz") return Family::GeneralXYZ;
  throw InvalidInput("unknown model family '" + std::string(name) + "'");
}

std::string to_string(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

Axis parse_axis(std::string_view name) {
  const std::string n = lower(name);
  if (n == "x") return Axis::x;
  if (n == "y") return Axis::y;
  if (n == "z") return Axis::z;
  throw InvalidInput("unknown axis '" + std::string(name) + "'");
}

std::string to_string(BondKind k) {
  switch (k) {
    case BondKind::NN: return "NN";
    case BondKind::NNN: return "NNN";
    case BondKind::leg: return "leg";
    case BondKind::rung: return "rung";
  }
  return "?";
}

ModelSpec ModelSpec::j1j2(double j1, double j2) {
  ModelSpec m;
  m.family = Family::J1J2;
  m.j1 = j1;
  m.j2 = j2;
  return m;
}

ModelSpec ModelSpec::xxz(double delta) {
  ModelSpec m;
  m.family = Family::XXZ;
  m.delta = delta;
  return m;
}

ModelSpec ModelSpec::ising(double lambda) {
  ModelSpec m;
  m.family = Family::TransverseIsing;
  m.lambda = lambda;
  m.validate();
  return m;
}

ModelSpec ModelSpec::ladder(double j_rung, double j_leg) {
  ModelSpec m;
  m.family = Family::Ladder;
  m.j_rung = j_rung;
  m.j_leg = j_leg;
  return m;
}

ModelSpec ModelSpec::general_xyz(double jx, double jy, double jz, double h) {
  ModelSpec m;
  m.family = Family::GeneralXYZ;
  m.jx = jx;
  m.jy = jy;
  m.jz = jz;
  m.h = h;
  return m;
}

std::vector<std::string> ModelSpec::parameter_names() const {
  switch (family) {
    case Family::J1J2: return {"j1", "j2"};
    case Family::XXZ: return {"delta"};
    case Family::TransverseIsing: return {"lambda"};
    case Family::Ladder: return {"j_leg", "j_rung"};
    case Family::GeneralXYZ: return {"jx", "jy", "jz", "h"};
  }
  return {};
}

namespace {

double* parameter_slot(ModelSpec& m, std::string_view raw) {
  const std::string name = lower(raw);
  if (name == "j1") return &m.j1;
  if (name == "j2") return &m.j2;
  if (name == "delta") return &m.delta;
  if (name == "lambda") return &m.lambda;
  if (name == "j_leg" || name == "jleg") return &m.j_leg;
  if (name == "j_rung" || name == "jrung" || name == "j") return &m.j_rung;
  if (name == "jx") return &m.jx;
  if (name == "jy") return &m.jy;
  if (name == "jz") return &m.jz;
  if (name == "h") return &m.h;
  return nullptr;
}

}  // namespace

namespace {

double* member_slot(const ModelSpec& spec, ModelSpec& target, std::string_view name) {
  double* slot = parameter_slot(target, name);
  if (slot) {
    for (const auto& n : spec.parameter_names()) {
      if (parameter_slot(target, n) == slot) return slot;
    }
  }
  throw InvalidInput("parameter '" + std::string(name) + "' does not belong to the " +
                     to_string(spec.family) + " model");
}

}  // namespace

double ModelSpec::parameter(std::string_view name) const {
  ModelSpec copy = *this;
  return *member_slot(*this, copy, name);
}

ModelSpec ModelSpec::with_parameter(std::string_view name, double value) const {
  ModelSpec copy = *this;
  *member_slot(*this, copy, name) = value;
  return copy;
}

void ModelSpec::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(j1) || !finite(j2) || !finite(delta) || !finite(lambda) || !finite(j_leg) ||
      !finite(j_rung) || !finite(jx) || !finite(jy) || !finite(jz) || !finite(h)) {
    throw InvalidInput("model couplings must be finite");
  }
  if (family == Family::TransverseIsing && !(lambda > 0.0)) {
    throw InvalidInput("transverse Ising requires lambda > 0");
  }
}

CouplingGraph coupling_graph(const ModelSpec& model, const LatticeSpec& lattice) {
  model.validate();
  lattice.validate();
  const bool ladder = lattice.geometry == Geometry::ladder;
  if ((model.family == Family::Ladder) != ladder) {
    throw InvalidInput("model " + to_string(model.family) + " is incompatible with a " +
                       to_string(lattice.geometry) + " lattice");
  }
  const int n = lattice.n_sites;
  CouplingGraph g;
  auto iso = [](int i, int j, BondKind k, double J) { return Bond{i, j, k, J, J, J}; };

  switch (model.family) {
    case Family::J1J2:
      if (n < 3) throw InvalidInput("the J1-J2 chain needs at least 3 sites");
      for (int i = 0; i < n; ++i) g.bonds.push_back(iso(i, (i + 1) % n, BondKind::NN, model.j1));
      for (int i = 0; i < n; ++i) g.bonds.push_back(iso(i, (i + 2) % n, BondKind::NNN, model.j2));
      break;
    case Family::XXZ:
      for (int i = 0; i < n; ++i) {
        g.bonds.push_back(Bond{i, (i + 1) % n, BondKind::NN, 1.0, 1.0, model.delta});
      }
      break;
    case Family::TransverseIsing:
      for (int i = 0; i < n; ++i) {
        g.bonds.push_back(Bond{i, (i + 1) % n, BondKind::NN, -model.lambda, 0.0, 0.0});
      }
      for (int i = 0; i < n; ++i) g.fields.push_back(FieldTerm{i, Axis::z, -0.5});
      break;
    case Family::Ladder: {
      const int len = lattice.leg_length();
      if (len < 2) throw InvalidInput("the ladder needs at least 2 rungs");
      for (int k = 0; k < len; ++k) {
        for (int leg = 0; leg < 2; ++leg) {
          g.bonds.push_back(iso(2 * k + leg, 2 * ((k + 1) % len) + leg, BondKind::leg, model.j_leg));
        }
      }
      for (int k = 0; k < len; ++k) g.bonds.push_back(iso(2 * k, 2 * k + 1, BondKind::rung, model.j_rung));
      break;
    }
    case Family::GeneralXYZ:
      for (int i = 0; i < n; ++i) {
        g.bonds.push_back(Bond{i, (i + 1) % n, BondKind::NN, model.jx, model.jy, model.jz});
      }
      if (model.h != 0.0) {
        for (int i = 0; i < n; ++i) g.fields.push_back(FieldTerm{i, Axis::z, model.h});
      }
      break;
  }
  return g;
}

Symmetries conserved_quantities(const ModelSpec& model) {
  switch (model.family) {
    case Family::TransverseIsing: return {false, true};
    case Family::GeneralXYZ: return {model.jx == model.jy, true};
    default: return {true, true};
  }
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(std::shared_ptr<const SectorBasis> basis)
    : basis_(std::move(basis)), amplitudes_(basis_->dimension(), 0.0) {}

StateVector::StateVector(std::shared_ptr<const SectorBasis> basis, std::vector<double> amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != basis_->dimension()) {
    throw InvalidInput("amplitude count " + std::to_string(amplitudes_.size()) +
                       " does not match basis dimension " + std::to_string(basis_->dimension()));
  }
}

StateVector StateVector::basis_state(std::shared_ptr<const SectorBasis> basis,
                                     SpinConfiguration config) {
  StateVector v(basis);
  v[basis->index_of(config)] = 1.0;
  return v;
}

double StateVector::norm() const { return std::sqrt(dot(*this)); }

double StateVector::dot(const StateVector& other) const {
  if (!(basis() == other.basis())) throw InvalidInput("dot product of states on different bases");
  double s = 0.0;
  for (std::size_t k = 0; k < amplitudes_.size(); ++k) s += amplitudes_[k] * other.amplitudes_[k];
  return s;
}

StateVector& StateVector::normalize() {
  const double n = norm();
  if (n == 0.0) throw InvalidInput("cannot normalize the zero vector");
  return *this *= 1.0 / n;
}

StateVector& StateVector::operator+=(const StateVector& other) {
  if (!(basis() == other.basis())) throw InvalidInput("sum of states on different bases");
  for (std::size_t k = 0; k < amplitudes_.size(); ++k) amplitudes_[k] += other.amplitudes_[k];
  return *this;
}

StateVector& StateVector::operator*=(double s) {
  for (auto& a : amplitudes_) a *= s;
  return *this;
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator*(double s, StateVector v) { return v *= s; }

// -------------------------------------------------------- HamiltonianOperator

HamiltonianOperator::HamiltonianOperator(const ModelSpec& model,
                                         std::shared_ptr<const SectorBasis> basis)
    : model_(model), basis_(std::move(basis)) {
  const CouplingGraph g = coupling_graph(model_, basis_->lattice());
  if (!basis_->is_full() && !conserved_quantities(model_).sz_conserved) {
    throw InvalidInput("model " + to_string(model_.family) +
                       " does not conserve Sz; it needs the full basis");
  }
  struct DiagTerm {
    SpinConfiguration mask;
    double jz;
  };
  std::vector<DiagTerm> diag;
  std::vector<double> field_z(static_cast<std::size_t>(basis_->n_sites()), 0.0);
  for (const auto& b : g.bonds) {
    const SpinConfiguration mask = (SpinConfiguration{1} << b.i) | (SpinConfiguration{1} << b.j);
    // s^x s^x and s^y s^y flip both spins; aligned pairs pick up (jx - jy)/4,
    // opposite pairs (jx + jy)/4.
    const double par = 0.25 * (b.jx - b.jy);
    const double anti = 0.25 * (b.jx + b.jy);
    if (par != 0.0 || anti != 0.0) flips_.push_back(FlipTerm{mask, par, anti});
    if (b.jz != 0.0) diag.push_back(DiagTerm{mask, b.jz});
    norm_bound_ += 0.25 * (std::abs(b.jx) + std::abs(b.jy) + std::abs(b.jz));
  }
  for (const auto& f : g.fields) {
    if (f.axis != Axis::z) throw InvalidInput("only z fields are supported");
    field_z[static_cast<std::size_t>(f.site)] += f.coefficient;
    norm_bound_ += 0.5 * std::abs(f.coefficient);
  }
  const std::size_t dim = basis_->dimension();
  diagonal_.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const SpinConfiguration c = (*basis_)[k];
    double d = 0.0;
    for (const auto& t : diag) {
      const SpinConfiguration m = c & t.mask;
      d += (m == 0 || m == t.mask) ? 0.25 * t.jz : -0.25 * t.jz;
    }
    for (std::size_t s = 0; s < field_z.size(); ++s) {
      if (field_z[s] != 0.0) d += ((c >> s) & 1U) ? 0.5 * field_z[s] : -0.5 * field_z[s];
    }
    diagonal_[k] = d;
  }
}

void HamiltonianOperator::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t dim = dimension();
  if (in.size() != dim || out.size() != dim) {
    throw InvalidInput("operator application on a vector of the wrong length");
  }
  // Gather form: row k only reads `in`, so rows are independent.
  for (std::size_t k = 0; k < dim; ++k) {
    double acc = 0.0;
    for_each_in_row(k, [&](std::size_t col, double el) { acc += el * in[col]; });
    out[k] = acc;
  }
}

StateVector apply_hamiltonian(const ModelSpec& model, const StateVector& v) {
  HamiltonianOperator op(model, v.basis_ptr());
  StateVector out(v.basis_ptr());
  op.apply(v.amplitudes(), out.amplitudes());
  return out;
}

Eigen::MatrixXd hamiltonian_dense(const ModelSpec& model,
                                  std::shared_ptr<const SectorBasis> basis,
                                  std::size_t dense_cap) {
  const std::size_t dim = basis->dimension();
  if (dim > dense_cap) {
    throw ResourceError("dense matrix of dimension " + std::to_string(dim) +
                        " exceeds the cap of " + std::to_string(dense_cap));
  }
  HamiltonianOperator op(model, std::move(basis));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    op.for_each_in_row(k, [&](std::size_t col, double el) {
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(col)) += el;
    });
  }
  return m;
}

}  // namespace spinent
