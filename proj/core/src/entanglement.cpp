#include "spinent/entanglement.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "spinent/errors.hpp"

namespace spinent {

namespace {

constexpr double kRhoTol = 1e-10;

template <typename M>
M yy() {
  M y = M::Zero();
  y(0, 3) = -1.0;
  y(1, 2) = 1.0;
  y(2, 1) = 1.0;
  y(3, 0) = -1.0;
  return y;
}

template <typename M>
void validate(const M& rho) {
  const double tr = std::abs(rho.trace() - 1.0);
  if (tr > kRhoTol) throw InvalidInput("density matrix trace differs from 1 by " + std::to_string(tr));
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kRhoTol) throw InvalidInput("density matrix is not Hermitian");
}

template <typename M>
ConcurrenceValue from_hermitian(const M& rho) {
  validate(rho);
  const M h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<M> es(h);
  const Eigen::Vector4d ev = es.eigenvalues();
  if (ev.minCoeff() < -kRhoTol) {
    throw InvalidInput("density matrix has a negative eigenvalue " + std::to_string(ev.minCoeff()));
  }
  // lambda_i are the singular values of Phi^T (sy x sy) Phi with rho = Phi Phi^dagger;
  // this avoids square roots of tiny eigenvalues of the R matrix
  const Eigen::Vector4d root = ev.cwiseMax(0.0).cwiseSqrt();
  const M phi = es.eigenvectors() * root.asDiagonal();
  const M tau = phi.transpose() * yy<M>() * phi;
  Eigen::JacobiSVD<M> svd(tau);
  Eigen::Vector4d lam = svd.singularValues();
  std::sort(lam.data(), lam.data() + 4, std::greater<>());
  ConcurrenceValue out;
  out.method = ConcurrenceMethod::wootters;
  out.raw = lam(0) - lam(1) - lam(2) - lam(3);
  out.value = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

ConcurrenceValue closed(double raw, ConcurrenceMethod m) {
  return {std::clamp(raw, 0.0, 1.0), raw, m};
}

}  // namespace

std::string to_string(ConcurrenceMethod m) {
  switch (m) {
    case ConcurrenceMethod::wootters: return "wootters";
    case ConcurrenceMethod::xxz_closed: return "xxz_closed";
    case ConcurrenceMethod::ising_closed: return "ising_closed";
  }
  return "?";
}

Eigen::Matrix4d spin_flip(const Eigen::Matrix4d& rho) {
  const Eigen::Matrix4d y = yy<Eigen::Matrix4d>();
  return y * rho * y;
}

Eigen::Matrix4cd spin_flip(const Eigen::Matrix4cd& rho) {
  const Eigen::Matrix4cd y = yy<Eigen::Matrix4cd>();
  return y * rho.conjugate() * y;
}

ConcurrenceValue wootters_concurrence(const TwoSiteRDM& rdm) { return from_hermitian(rdm.entries); }
ConcurrenceValue wootters_concurrence(const Eigen::Matrix4d& rho) { return from_hermitian(rho); }
ConcurrenceValue wootters_concurrence(const Eigen::Matrix4cd& rho) { return from_hermitian(rho); }

ConcurrenceValue xxz_closed_form(double sum_of_correlators) {
  return closed(-2.0 * sum_of_correlators - 0.5, ConcurrenceMethod::xxz_closed);
}

ConcurrenceValue ising_closed_form(double cxx, double cyy, double czz) {
  return closed(2.0 * (cxx - cyy - czz) - 0.5, ConcurrenceMethod::ising_closed);
}

}  // namespace spinent
