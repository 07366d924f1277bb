#include "ovsc/affinity.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "ovsc/error.hpp"

namespace ovsc {

Matrix cosine_affinity(const Matrix& vectors) {
  const auto n = vectors.rows();
  const Vector norms = vectors.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms(i) > 0.0)) {
      throw ContractError("cosine_affinity: embedding " + std::to_string(i) + " has zero norm");
    }
  }
  const Matrix unit = norms.cwiseInverse().asDiagonal() * vectors;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(unit.row(i).dot(unit.row(j)), -1.0, 1.0);
      a(i, j) = c;
      a(j, i) = c;
    }
  }
  return a;
}

Matrix cosine_affinity(const EmbeddingSequence& embeddings) {
  return cosine_affinity(embeddings.vectors);
}

Matrix p_binarize(const Matrix& affinity, int p) {
  const auto n = affinity.rows();
  if (affinity.cols() != n) throw ContractError("p_binarize: affinity must be square");
  if (p < 1 || p > n) {
    throw ContractError("p_binarize: p = " + std::to_string(p) + " outside [1, " +
                        std::to_string(n) + "]");
  }
  Matrix kept = Matrix::Zero(n, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    kept(i, i) = 1.0;
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    const auto take = static_cast<std::ptrdiff_t>(p - 1);
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        const double va = affinity(i, a);
                        const double vb = affinity(i, b);
                        return va != vb ? va > vb : a < b;
                      });
    for (std::ptrdiff_t r = 0; r < take; ++r) kept(i, order[static_cast<std::size_t>(r)]) = 1.0;
  }
  return 0.5 * (kept + kept.transpose());
}

Laplacian laplacian(const Matrix& binarized) {
  if (binarized.rows() != binarized.cols()) {
    throw ContractError("laplacian: matrix must be square");
  }
  if ((binarized - binarized.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ContractError("laplacian: matrix is not symmetric");
  }
  if (binarized.size() > 0 && binarized.minCoeff() < 0.0) {
    throw ContractError("laplacian: matrix has negative entries");
  }
  Laplacian out;
  out.degree = binarized.rowwise().sum();
  out.matrix = -binarized;
  out.matrix.diagonal() += out.degree;
  return out;
}

AffinityBundle make_bundle(const Matrix& raw, int p) {
  AffinityBundle b;
  b.raw = raw;
  b.p = p;
  b.binarized = p_binarize(raw, p);
  auto lap = laplacian(b.binarized);
  b.degree = std::move(lap.degree);
  b.laplacian = std::move(lap.matrix);
  return b;
}

}  // namespace ovsc
