#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace spinent {

/// y = A x for a real symmetric operator of fixed dimension.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Quantum numbers of an eigenstate; empty entries are not conserved or
/// failed the quantization test ("mixed").
struct StateLabel {
  std::optional<int> sz_twice;
  std::optional<double> total_spin;
  std::optional<int> parity;
};

/// Ascending eigenpairs. Degenerate multiplets appear as separate entries
/// with equal energies. Each vector's largest-magnitude amplitude is
/// positive.
struct EigenSolution {
  std::vector<double> energies;
  std::vector<std::vector<double>> vectors;
  std::vector<StateLabel> labels;
  std::vector<double> residuals;

  std::size_t size() const noexcept { return energies.size(); }
};

/// All eigenpairs of a real symmetric matrix.
EigenSolution dense_spectrum(const Eigen::MatrixXd& matrix);

struct LanczosOptions {
  int max_iter = 50000;       // total operator applications
  int krylov_dim = 160;       // basis size before an explicit restart
  double tol = 1e-10;         // residual, relative to the spectral width
  std::uint64_t seed = 0x5EED;
  double degeneracy_tol = 1e-9;  // relative to the spectral width
  double scale = 0.0;            // spectral width hint; 0 = estimate
};

/// Lowest `k` eigenpairs by Lanczos with full reorthogonalization.
///
/// Converged Ritz pairs are locked and later runs are deflated against
/// them. Once k pairs are locked, fresh random starts orthogonal to the
/// locked set keep looking below the k-th energy until nothing new turns
/// up; in exact arithmetic a single Krylov space holds only one vector per
/// degenerate eigenspace, so this is what resolves multiplicities.
///
/// Throws NumericError when `max_iter` applications are exhausted.
EigenSolution lanczos_lowest_k(const LinearOperator& apply, std::size_t dim, std::size_t k,
                               const LanczosOptions& opts = {});

/// Smallest Ritz value after each of the first `steps` Lanczos iterations
/// from the seeded start vector (no restarts).
std::vector<double> lanczos_ritz_history(const LinearOperator& apply, std::size_t dim,
                                         std::size_t steps, std::uint64_t seed = 0x5EED);

/// Flip the sign of `v` so that its largest-magnitude entry is positive.
void fix_phase(std::span<double> v);

}  // namespace spinent
