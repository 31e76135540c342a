#include "spinent/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "spinent/errors.hpp"

namespace spinent {

namespace {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void scale(std::span<double> a, double s) {
  for (auto& x : a) x *= s;
}

// Two passes of classical Gram-Schmidt against both sets.
void orthogonalize(std::span<double> w, const std::vector<Vec>& a, const std::vector<Vec>& b) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& u : a) axpy(-dot(u, w), u, w);
    for (const auto& u : b) axpy(-dot(u, w), u, w);
  }
}

Vec random_unit(std::mt19937_64& rng, std::size_t dim, const std::vector<Vec>& locked) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vec v(dim);
    for (auto& x : v) x = dist(rng);
    orthogonalize(v, locked, {});
    const double n = nrm2(v);
    if (n > 1e-8) {
      scale(v, 1.0 / n);
      return v;
    }
  }
  throw NumericError("could not draw a start vector outside the locked subspace", {}, 0);
}

struct KrylovRun {
  std::vector<Vec> basis;
  Eigen::VectorXd ritz_values;
  Eigen::MatrixXd ritz_coeffs;  // columns: eigenvectors of the tridiagonal matrix
  double last_beta = 0.0;
  bool invariant = false;
};

struct Context {
  const LinearOperator& apply;
  std::size_t dim;
  int matvecs = 0;
  double scale_hint;
  double width = 0.0;
  double max_abs = 0.0;

  double scale() const {
    if (scale_hint > 0.0) return scale_hint;
    return std::max({width, 1e-3 * max_abs, 1e-300});
  }

  void observe(const Eigen::VectorXd& ritz) {
    if (ritz.size() == 0) return;
    width = std::max(width, ritz.maxCoeff() - ritz.minCoeff());
    max_abs = std::max(max_abs, ritz.cwiseAbs().maxCoeff());
  }

  Vec mul(std::span<const double> x) {
    Vec y(dim, 0.0);
    apply(x, y);
    ++matvecs;
    return y;
  }
};

void tridiagonal_eigen(const Vec& alpha, const Vec& beta, KrylovRun& run) {
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd e(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i + 1 < m; ++i) e(i) = beta[i];
  if (m == 1) {
    run.ritz_values = d;
    run.ritz_coeffs = Eigen::MatrixXd::Identity(1, 1);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw NumericError("tridiagonal eigensolver failed", {}, 0);
  }
  run.ritz_values = es.eigenvalues();
  run.ritz_coeffs = es.eigenvectors();
}

// Runs up to `m_max` Lanczos steps from `start`, stopping early once the
// lowest `want` Ritz estimates fall below `tol_abs` or the space closes.
KrylovRun krylov(Context& ctx, Vec start, const std::vector<Vec>& locked, std::size_t m_max,
                 std::size_t want, double tol) {
  KrylovRun run;
  Vec alpha, beta;
  run.basis.push_back(std::move(start));
  for (std::size_t j = 0; j < m_max; ++j) {
    const Vec& q = run.basis[j];
    Vec w = ctx.mul(q);
    const double a = dot(q, w);
    axpy(-a, q, w);
    if (j > 0) axpy(-beta[j - 1], run.basis[j - 1], w);
    orthogonalize(w, locked, run.basis);
    alpha.push_back(a);
    const double b = nrm2(w);

    const std::size_t m = j + 1;
    const bool last = m == m_max;
    const bool check = last || (m >= want && (m <= 40 || m % 5 == 0));
    if (check) {
      tridiagonal_eigen(alpha, beta, run);
      ctx.observe(run.ritz_values);
      const double tol_abs = tol * ctx.scale();
      run.last_beta = b;
      run.invariant = b <= 1e-13 * std::max(ctx.scale(), ctx.max_abs);
      bool done = run.invariant || last;
      if (!done && m >= want) {
        done = true;
        for (std::size_t i = 0; i < want; ++i) {
          if (b * std::abs(run.ritz_coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) >
              0.1 * tol_abs) {
            done = false;
            break;
          }
        }
      }
      if (done) return run;
    }
    beta.push_back(b);
    scale(w, 1.0 / b);
    run.basis.push_back(std::move(w));
  }
  return run;
}

Vec ritz_vector(const KrylovRun& run, std::size_t i, std::size_t dim) {
  Vec y(dim, 0.0);
  const auto m = static_cast<Eigen::Index>(run.ritz_values.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    axpy(run.ritz_coeffs(r, static_cast<Eigen::Index>(i)), run.basis[static_cast<std::size_t>(r)], y);
  }
  return y;
}

double residual_norm(Context& ctx, const Vec& y, double theta) {
  Vec r = ctx.mul(y);
  axpy(-theta, y, r);
  return nrm2(r);
}

}  // namespace

void fix_phase(std::span<double> v) {
  std::size_t best = 0;
  double mag = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // strict comparison keeps the first index among equal magnitudes
    if (std::abs(v[i]) > mag * (1.0 + 1e-12)) {
      mag = std::abs(v[i]);
      best = i;
    }
  }
  if (!v.empty() && v[best] < 0.0) scale(v, -1.0);
}

EigenSolution dense_spectrum(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw InvalidInput("dense_spectrum needs a square matrix");
  const double mmax = matrix.size() ? matrix.cwiseAbs().maxCoeff() : 0.0;
  const double asym = matrix.size() ? (matrix - matrix.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-12 * std::max(1.0, mmax)) {
    throw InvalidInput("dense_spectrum needs a symmetric matrix (asymmetry " +
                       std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
  if (es.info() != Eigen::Success) {
    throw NumericError("dense symmetric eigensolver did not converge", {}, 0);
  }
  EigenSolution sol;
  const auto n = matrix.rows();
  sol.energies.resize(n);
  sol.vectors.resize(n);
  sol.labels.resize(n);
  sol.residuals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = es.eigenvectors().col(i);
    fix_phase(std::span<double>(v.data(), static_cast<std::size_t>(n)));
    sol.energies[i] = es.eigenvalues()(i);
    sol.residuals[i] = (matrix * v - sol.energies[i] * v).norm();
    sol.vectors[i].assign(v.data(), v.data() + n);
  }
  return sol;
}

EigenSolution lanczos_lowest_k(const LinearOperator& apply, std::size_t dim, std::size_t k,
                               const LanczosOptions& opts) {
  if (k < 1 || k > dim) {
    throw InvalidInput("lanczos_lowest_k needs 1 <= k <= dim (k=" + std::to_string(k) +
                       ", dim=" + std::to_string(dim) + ")");
  }
  Context ctx{apply, dim, 0, opts.scale};
  std::mt19937_64 rng(opts.seed);

  std::vector<Vec> locked;
  Vec locked_energy;
  Vec locked_residual;
  std::optional<Vec> next_start;
  Vec best_residuals;

  auto kth_energy = [&] {
    Vec e = locked_energy;
    std::sort(e.begin(), e.end());
    return e[k - 1];
  };

  while (true) {
    const bool validating = locked.size() >= k;
    const std::size_t remaining = dim - locked.size();
    if (remaining == 0) break;
    const std::size_t want = validating ? 1 : std::min(k - locked.size(), remaining);
    Vec start = next_start ? *next_start : random_unit(rng, dim, locked);
    next_start.reset();

    const std::size_t m_max = std::min<std::size_t>(static_cast<std::size_t>(opts.krylov_dim), remaining);
    KrylovRun run = krylov(ctx, std::move(start), locked, std::max(m_max, want), want, opts.tol);
    const double tol_abs = opts.tol * ctx.scale();
    const double threshold = validating ? kth_energy() - opts.degeneracy_tol * ctx.scale() : 0.0;

    std::size_t accepted = 0;
    best_residuals.clear();
    for (std::size_t i = 0; i < want && i < static_cast<std::size_t>(run.ritz_values.size()); ++i) {
      const double theta = run.ritz_values(static_cast<Eigen::Index>(i));
      if (validating && theta >= threshold) break;
      Vec y = ritz_vector(run, i, dim);
      orthogonalize(y, locked, {});
      scale(y, 1.0 / nrm2(y));
      const double res = residual_norm(ctx, y, theta);
      best_residuals.push_back(res);
      if (res > tol_abs) {
        next_start = std::move(y);
        break;
      }
      locked.push_back(std::move(y));
      locked_energy.push_back(theta);
      locked_residual.push_back(res);
      ++accepted;
    }

    if (validating && accepted == 0 && !next_start) break;
    if (ctx.matvecs > opts.max_iter) {
      throw NumericError("Lanczos did not converge within " + std::to_string(opts.max_iter) +
                             " operator applications",
                         best_residuals, ctx.matvecs);
    }
  }

  std::vector<std::size_t> order(locked.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return locked_energy[a] < locked_energy[b]; });

  EigenSolution sol;
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    fix_phase(locked[i]);
    sol.energies.push_back(locked_energy[i]);
    sol.vectors.push_back(std::move(locked[i]));
    sol.residuals.push_back(locked_residual[i]);
  }
  sol.labels.resize(k);
  return sol;
}

std::vector<double> lanczos_ritz_history(const LinearOperator& apply, std::size_t dim,
                                         std::size_t steps, std::uint64_t seed) {
  Context ctx{apply, dim, 0, 0.0};
  std::mt19937_64 rng(seed);
  Vec q = random_unit(rng, dim, {});
  std::vector<Vec> basis{q};
  Vec alpha, beta, history;
  for (std::size_t j = 0; j < std::min(steps, dim); ++j) {
    Vec w = ctx.mul(basis[j]);
    const double a = dot(basis[j], w);
    axpy(-a, basis[j], w);
    if (j > 0) axpy(-beta[j - 1], basis[j - 1], w);
    orthogonalize(w, {}, basis);
    alpha.push_back(a);
    KrylovRun run;
    tridiagonal_eigen(alpha, beta, run);
    history.push_back(run.ritz_values(0));
    const double b = nrm2(w);
    if (b < 1e-13) break;
    beta.push_back(b);
    scale(w, 1.0 / b);
    basis.push_back(std::move(w));
  }
  return history;
}

}  // namespace spinent
