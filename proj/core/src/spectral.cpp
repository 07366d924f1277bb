#include "ovsc/spectral.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <spdlog/spdlog.h>

#include "ovsc/error.hpp"

namespace ovsc {
namespace {

constexpr double kDegreeFloor = 1e-10;

// Eigenvector signs are arbitrary; pin the largest-magnitude entry positive.
void fix_signs(Matrix& w) {
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Eigen::Index arg = 0;
    w.col(j).cwiseAbs().maxCoeff(&arg);
    if (w(arg, j) < 0.0) w.col(j) = -w.col(j);
  }
}

bool degenerate(const Vector& singular_values) {
  if (singular_values.size() == 0) return true;
  const double top = singular_values.maxCoeff();
  return !(top > 0.0) || singular_values.minCoeff() < 1e-12 * top;
}

}  // namespace

ContinuousSolution continuous_solve(const Matrix& binarized, const Vector& degree, int k) {
  const auto n = binarized.rows();
  if (binarized.cols() != n || degree.size() != n) {
    throw ContractError("continuous_solve: affinity/degree shapes disagree");
  }
  if (k < 1 || k > n) {
    throw ContractError("continuous_solve: K = " + std::to_string(k) + " outside [1, " +
                        std::to_string(n) + "]");
  }
  Vector d = degree;
  if ((d.array() <= 0.0).any()) {
    spdlog::warn("continuous_solve: {} isolated node(s); lifting all degrees by {}",
                 (d.array() <= 0.0).count(), kDegreeFloor);
    d.array() += kDegreeFloor;
    if ((d.array() <= 0.0).any()) throw ContractError("continuous_solve: negative degree");
  }
  const Vector inv_sqrt = d.cwiseSqrt().cwiseInverse();
  Matrix sym = inv_sqrt.asDiagonal() * binarized * inv_sqrt.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("continuous_solve: eigensolver did not converge (N = " +
                         std::to_string(n) + ", min degree = " + std::to_string(d.minCoeff()) +
                         ")");
  }
  // Eigen sorts ascending; the K algebraically largest come last.
  Matrix w(n, k);
  ContinuousSolution sol;
  sol.eigenvalues.resize(k);
  for (int j = 0; j < k; ++j) {
    w.col(j) = solver.eigenvectors().col(n - 1 - j);
    sol.eigenvalues(j) = solver.eigenvalues()(n - 1 - j);
  }
  fix_signs(w);
  sol.z_star = inv_sqrt.asDiagonal() * w;
  sol.x_tilde = normalize_rows(sol.z_star);
  return sol;
}

double objective_continuous(const Matrix& z, const Matrix& binarized) {
  if (z.rows() != binarized.rows() || binarized.rows() != binarized.cols()) {
    throw ContractError("objective_continuous: shapes disagree");
  }
  return (z.transpose() * binarized * z).trace();
}

double objective_link_ratio(const Matrix& x, const Matrix& binarized, const Vector& degree) {
  if (x.rows() != binarized.rows() || degree.size() != x.rows()) {
    throw ContractError("objective_link_ratio: shapes disagree");
  }
  if (x.cols() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const auto col = x.col(k);
    const double den = col.dot(degree.cwiseProduct(col));
    if (den > 0.0) total += col.dot(binarized * col) / den;
  }
  return total / static_cast<double>(x.cols());
}

Matrix relax_assignment(const Matrix& x, const Vector& degree) {
  if (degree.size() != x.rows()) throw ContractError("relax_assignment: shapes disagree");
  const Matrix gram = x.transpose() * degree.asDiagonal() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 0.0) {
    throw ContractError("relax_assignment: X^T D X is singular (empty cluster?)");
  }
  return x * solver.operatorInverseSqrt();
}

Matrix normalize_rows(const Matrix& z) {
  Matrix out = z;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

AssignmentMatrix nms_assign(const Matrix& rotated, const OverlapVector& overlap) {
  const auto n = rotated.rows();
  const auto k = rotated.cols();
  if (static_cast<Eigen::Index>(overlap.size()) != n) {
    throw ContractError("nms_assign: overlap vector has " + std::to_string(overlap.size()) +
                        " entries for " + std::to_string(n) + " rows");
  }
  if (k < 1) throw ContractError("nms_assign: need at least one cluster");

  AssignmentMatrix out;
  out.x = Matrix::Zero(n, k);
  out.overlap = overlap;
  std::size_t single_label_overlaps = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index first = 0;
    for (Eigen::Index c = 1; c < k; ++c) {
      if (rotated(i, c) > rotated(i, first)) first = c;
    }
    out.x(i, first) = 1.0;
    if (!overlap.flags[static_cast<std::size_t>(i)]) continue;
    if (k < 2) {
      ++single_label_overlaps;
      continue;
    }
    Eigen::Index second = first == 0 ? 1 : 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (c != first && rotated(i, c) > rotated(i, second)) second = c;
    }
    out.x(i, second) = 1.0;
  }
  if (single_label_overlaps > 0) {
    spdlog::warn("nms_assign: {} overlap row(s) but only one cluster; emitting a single label",
                 single_label_overlaps);
  }
  return out;
}

Matrix procrustes(const Matrix& x, const Matrix& x_tilde) {
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols()) {
    throw ContractError("procrustes: X and X_tilde shapes disagree");
  }
  const Matrix m = x.transpose() * x_tilde;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (degenerate(svd.singularValues())) {
    spdlog::debug("procrustes: X^T X_tilde is rank deficient (smallest singular value {})",
                  svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0);
  }
  return svd.matrixV() * svd.matrixU().transpose();
}

double discretization_cost(const Matrix& x, const Matrix& x_tilde, const Matrix& rotation) {
  return (x - x_tilde * rotation).squaredNorm();
}

Matrix initial_rotation(const Matrix& x_tilde, std::uint64_t seed) {
  const auto n = x_tilde.rows();
  const auto k = x_tilde.cols();
  if (n < 1 || k < 1) throw ContractError("initial_rotation: empty solution");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);

  Matrix chosen(k, k);
  chosen.col(0) = x_tilde.row(pick(rng)).transpose();
  Vector accumulated = Vector::Zero(n);
  for (Eigen::Index j = 1; j < k; ++j) {
    accumulated += (x_tilde * chosen.col(j - 1)).cwiseAbs();
    Eigen::Index arg = 0;
    accumulated.minCoeff(&arg);
    chosen.col(j) = x_tilde.row(arg).transpose();
  }
  Eigen::HouseholderQR<Matrix> qr(chosen);
  Matrix q = qr.householderQ() * Matrix::Identity(k, k);
  const Matrix upper = q.transpose() * chosen;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (upper(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

DiscretizeResult discretize_from(const Matrix& x_tilde, const OverlapVector& overlap,
                                 const Matrix& initial, const DiscretizeConfig& cfg) {
  const auto k = x_tilde.cols();
  if (k < 1) throw ContractError("discretize: need K >= 1");
  if (initial.rows() != k || initial.cols() != k) {
    throw ContractError("discretize: initial rotation must be K x K");
  }
  if (cfg.max_iters < 1) throw ContractError("discretize: max_iters must be >= 1");

  DiscretizeResult result;
  DiscretizeRun run;
  run.best_phi = std::numeric_limits<double>::infinity();
  Matrix rotation = initial;
  bool any_degenerate = false;

  for (int round = 0; round < cfg.max_iters; ++round) {
    auto assignment = nms_assign(x_tilde * rotation, overlap);
    const Matrix m = assignment.x.transpose() * x_tilde;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    any_degenerate = any_degenerate || degenerate(svd.singularValues());
    rotation = svd.matrixV() * svd.matrixU().transpose();
    const double phi = discretization_cost(assignment.x, x_tilde, rotation);
    run.phi_history.push_back(phi);

    if (phi < run.best_phi) {
      run.best_phi = phi;
      result.assignment = std::move(assignment);
      result.rotation = rotation;
    }
    if (phi <= 1e-12) {
      run.converged = true;
      break;
    }
    if (run.phi_history.size() >= 2) {
      const double prev = run.phi_history[run.phi_history.size() - 2];
      if (std::abs(phi - prev) / std::max(prev, 1e-12) < cfg.tol) {
        run.converged = true;
        break;
      }
    }
  }
  if (any_degenerate) {
    spdlog::warn("discretize: rank-deficient X^T X_tilde encountered (empty clusters?)");
  }
  if (!run.converged) {
    spdlog::debug("discretize: no convergence after {} rounds", cfg.max_iters);
  }
  result.phi = run.best_phi;
  result.runs.push_back(std::move(run));
  return result;
}

DiscretizeResult discretize(const ContinuousSolution& solution, const OverlapVector& overlap,
                            const DiscretizeConfig& cfg) {
  if (cfg.restarts < 1) throw ContractError("discretize: restarts must be >= 1");
  DiscretizeResult best;
  std::vector<DiscretizeRun> runs;
  for (int r = 0; r < cfg.restarts; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    auto attempt = discretize_from(solution.x_tilde, overlap,
                                   initial_rotation(solution.x_tilde, seed), cfg);
    attempt.runs.front().seed = seed;
    runs.push_back(attempt.runs.front());
    if (r == 0 || attempt.phi < best.phi) {
      best = std::move(attempt);
      best.best_run = static_cast<std::size_t>(r);
    }
  }
  best.runs = std::move(runs);
  for (auto k = 0; k < best.assignment.x.cols(); ++k) {
    if (best.assignment.x.col(k).sum() == 0.0) {
      spdlog::info("discretize: cluster {} is empty", k);
    }
  }
  return best;
}

}  // namespace ovsc
