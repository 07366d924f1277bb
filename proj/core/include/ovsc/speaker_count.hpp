#pragma once

#include <cstddef>
#include <vector>

#include "ovsc/types.hpp"

namespace ovsc {

struct SpeakerCountConfig {
  int p_min = 2;
  int p_max = 20;
  double epsilon = 1e-10;
  /// Upper bound on the estimate; the eigengap search only looks at the first
  /// `max_speakers` gaps. When all of those are zero for every p, the whole
  /// spectrum is searched and the result clamped (with a warning).
  int max_speakers = 10;
  /// Eigenvalues with magnitude below this are snapped to zero.
  double zero_snap = 1e-10;
};

/// Diagnostics of the normalized-maximum-eigengap sweep.
struct EigengapReport {
  std::vector<int> p_values;
  std::vector<Vector> eigenvalues;  ///< ascending Laplacian spectrum per p
  std::vector<Vector> gaps;         ///< consecutive differences per p
  std::vector<double> g;            ///< normalized maximum eigengap per p
  std::vector<double> r;            ///< p / g per p (infinity when g == 0)
  std::vector<int> k_per_p;
  int p_hat = 0;
  int k_hat = 0;

  std::size_t index_of_p_hat() const;
};

/// e[j] = lambda[j + 1] - lambda[j]. Throws ContractError on unsorted input.
Vector eigengap_vector(const Vector& ascending_eigenvalues);

/// Sweep p over [p_min, p_max], binarize, and pick the p minimizing p / g_p;
/// the speaker count is the number of eigenvalues below the largest gap.
/// Throws IndeterminateCountError when every g_p is zero.
EigengapReport estimate_speakers(const Matrix& affinity, const SpeakerCountConfig& cfg = {});

}  // namespace ovsc
