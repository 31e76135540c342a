#pragma once

#include <string>

#include <Eigen/Core>

#include "spinent/observables.hpp"

namespace spinent {

enum class ConcurrenceMethod { wootters, xxz_closed, ising_closed };

std::string to_string(ConcurrenceMethod m);

/// `value` is clamped to [0, 1]; `raw` keeps the unclamped number.
struct ConcurrenceValue {
  double value = 0.0;
  double raw = 0.0;
  ConcurrenceMethod method = ConcurrenceMethod::wootters;
};

/// rho~ = (sigma^y x sigma^y) rho* (sigma^y x sigma^y).
Eigen::Matrix4d spin_flip(const Eigen::Matrix4d& rho);
Eigen::Matrix4cd spin_flip(const Eigen::Matrix4cd& rho);

/// max(0, l1 - l2 - l3 - l4) with l_i the descending square roots of the
/// eigenvalues of rho rho~, obtained from the symmetric form
/// sqrt(rho) rho~ sqrt(rho).
///
/// Throws InvalidInput if rho is not unit-trace, symmetric and positive
/// semidefinite within 1e-10.
ConcurrenceValue wootters_concurrence(const TwoSiteRDM& rdm);
ConcurrenceValue wootters_concurrence(const Eigen::Matrix4d& rho);
ConcurrenceValue wootters_concurrence(const Eigen::Matrix4cd& rho);

/// raw = -2 sum_a <s^a_j s^a_{j+1}> - 1/2, valid for XXZ ground states.
ConcurrenceValue xxz_closed_form(double sum_of_correlators);

/// raw = 2 (cxx - cyy - czz) - 1/2, proposed for Ising ground states.
/// Outside that domain it can disagree with the Wootters value.
ConcurrenceValue ising_closed_form(double cxx, double cyy, double czz);

}  // namespace spinent
