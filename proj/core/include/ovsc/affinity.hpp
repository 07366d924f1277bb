#pragma once

#include "ovsc/types.hpp"

namespace ovsc {

/// Raw affinity plus its binarized graph for one value of p.
struct AffinityBundle {
  Matrix raw;
  int p = 0;
  Matrix binarized;
  Vector degree;
  Matrix laplacian;
};

/// Pairwise cosine similarity. The result is exactly symmetric with a unit diagonal.
Matrix cosine_affinity(const EmbeddingSequence& embeddings);
Matrix cosine_affinity(const Matrix& vectors);

/// Row-wise p-binarization followed by symmetrization (A_p + A_p^T) / 2.
///
/// Each row keeps its diagonal plus the p - 1 largest off-diagonal entries;
/// ties go to the lower column index. Entries of the result lie in {0, 0.5, 1}.
Matrix p_binarize(const Matrix& affinity, int p);

struct Laplacian {
  Vector degree;
  Matrix matrix;
};

/// Unnormalized graph Laplacian diag(d) - A with d the row sums of A.
/// Throws ContractError when A is asymmetric beyond 1e-9 or has negative entries.
Laplacian laplacian(const Matrix& binarized);

AffinityBundle make_bundle(const Matrix& raw, int p);

}  // namespace ovsc
