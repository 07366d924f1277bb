#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ovsc/types.hpp"

namespace ovsc {

/// Relaxed normalized-cuts optimum for K clusters.
struct ContinuousSolution {
  /// First K eigenvectors of P = D^-1 A, scaled so that Z^T D Z = I.
  Matrix z_star;
  /// Matching eigenvalues of P, descending.
  Vector eigenvalues;
  /// Row-normalized Z (unit-norm rows, zero rows left at zero).
  Matrix x_tilde;

  std::size_t k() const noexcept { return static_cast<std::size_t>(z_star.cols()); }
};

/// Solve max tr(Z^T A Z) s.t. Z^T D Z = I through the symmetric matrix
/// D^-1/2 A D^-1/2. Zero degrees are lifted by 1e-10 before inversion.
ContinuousSolution continuous_solve(const Matrix& binarized, const Vector& degree, int k);

/// tr(Z^T A Z).
double objective_continuous(const Matrix& z, const Matrix& binarized);

/// Average link ratio (1/K) sum_k X_k^T A X_k / X_k^T D X_k; empty clusters contribute 0.
double objective_link_ratio(const Matrix& x, const Matrix& binarized, const Vector& degree);

/// Z = X (X^T D X)^-1/2.
Matrix relax_assignment(const Matrix& x, const Vector& degree);

/// X = Diag(diag^-1/2(Z Z^T)) Z, i.e. every nonzero row scaled to unit length.
Matrix normalize_rows(const Matrix& z);

/// Non-maximal suppression: the largest entry of each row becomes 1 and, for
/// rows with an overlap flag, the second largest as well. Ties go to the lower
/// column index. With K = 1 an overlap row keeps its single label.
AssignmentMatrix nms_assign(const Matrix& rotated, const OverlapVector& overlap);

/// Orthonormal R minimizing ||X - X_tilde R||^2: R = V U^T from the SVD
/// X^T X_tilde = U S V^T.
Matrix procrustes(const Matrix& x, const Matrix& x_tilde);

/// ||X - X_tilde R||_F^2.
double discretization_cost(const Matrix& x, const Matrix& x_tilde, const Matrix& rotation);

/// Seeded orthogonal initialization: a random first row of X_tilde, then rows
/// with the least accumulated absolute inner product; orthonormalized.
Matrix initial_rotation(const Matrix& x_tilde, std::uint64_t seed);

struct DiscretizeConfig {
  int max_iters = 100;
  double tol = 1e-6;
  int restarts = 3;
  std::uint64_t seed = 0;
};

struct DiscretizeRun {
  std::uint64_t seed = 0;
  /// Cost after every (X-step, R-step) round.
  std::vector<double> phi_history;
  double best_phi = 0.0;
  bool converged = false;
};

struct DiscretizeResult {
  AssignmentMatrix assignment;
  Matrix rotation;
  double phi = 0.0;
  std::size_t best_run = 0;
  std::vector<DiscretizeRun> runs;
};

/// Alternate NMS and Procrustes from `initial` until the relative decrease of
/// phi drops below cfg.tol or cfg.max_iters rounds pass. Returns the best X seen.
DiscretizeResult discretize_from(const Matrix& x_tilde, const OverlapVector& overlap,
                                 const Matrix& initial, const DiscretizeConfig& cfg);

/// cfg.restarts seeded runs of discretize_from; keeps the smallest final phi
/// (ties resolved by restart order).
DiscretizeResult discretize(const ContinuousSolution& solution, const OverlapVector& overlap,
                            const DiscretizeConfig& cfg);

}  // namespace ovsc
