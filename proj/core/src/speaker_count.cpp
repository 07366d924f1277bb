#include "ovsc/speaker_count.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "ovsc/affinity.hpp"
#include "ovsc/error.hpp"

namespace ovsc {

std::size_t EigengapReport::index_of_p_hat() const {
  const auto it = std::find(p_values.begin(), p_values.end(), p_hat);
  return static_cast<std::size_t>(it - p_values.begin());
}

Vector eigengap_vector(const Vector& ascending_eigenvalues) {
  const auto n = ascending_eigenvalues.size();
  if (n == 0) return Vector();
  for (Eigen::Index i = 1; i < n; ++i) {
    if (ascending_eigenvalues(i) < ascending_eigenvalues(i - 1)) {
      throw ContractError("eigengap_vector: eigenvalues are not sorted ascending");
    }
  }
  return ascending_eigenvalues.tail(n - 1) - ascending_eigenvalues.head(n - 1);
}

EigengapReport estimate_speakers(const Matrix& affinity, const SpeakerCountConfig& cfg) {
  const auto n = static_cast<int>(affinity.rows());
  if (affinity.cols() != affinity.rows()) {
    throw ContractError("estimate_speakers: affinity must be square");
  }
  if (cfg.p_min < 1 || cfg.p_min > cfg.p_max || cfg.p_max > n) {
    throw ContractError("estimate_speakers: need 1 <= p_min <= p_max <= N (got " +
                        std::to_string(cfg.p_min) + ", " + std::to_string(cfg.p_max) + ", " +
                        std::to_string(n) + ")");
  }
  if (n < 2) throw ContractError("estimate_speakers: need at least 2 segments");
  if (cfg.max_speakers < 1) throw ContractError("estimate_speakers: max_speakers must be >= 1");

  EigengapReport report;
  const auto search = std::min<Eigen::Index>(cfg.max_speakers, n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  std::vector<double> full_g;
  std::vector<int> full_k;

  for (int p = cfg.p_min; p <= cfg.p_max; ++p) {
    const auto lap = laplacian(p_binarize(affinity, p));
    solver.compute(lap.matrix, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("estimate_speakers: eigensolver failed for p = " + std::to_string(p));
    }
    Vector lambda = solver.eigenvalues();
    for (auto& v : lambda) {
      if (std::abs(v) < cfg.zero_snap) v = 0.0;
    }
    // Snapping can only reorder values that straddle zero; keep the order exact.
    std::sort(lambda.begin(), lambda.end());
    if (lambda(0) < -1e-8) {
      throw NumericalError("estimate_speakers: Laplacian has negative eigenvalue " +
                           std::to_string(lambda(0)));
    }
    Vector gaps = eigengap_vector(lambda);
    const double scale = lambda(n - 1) + cfg.epsilon;

    Eigen::Index arg = 0;
    const double max_gap = gaps.head(search).maxCoeff(&arg);
    Eigen::Index full_arg = 0;
    const double full_gap = gaps.maxCoeff(&full_arg);

    report.p_values.push_back(p);
    report.eigenvalues.push_back(std::move(lambda));
    report.gaps.push_back(std::move(gaps));
    report.g.push_back(max_gap / scale);
    report.k_per_p.push_back(static_cast<int>(arg) + 1);
    full_g.push_back(full_gap / scale);
    full_k.push_back(std::min(static_cast<int>(full_arg) + 1, cfg.max_speakers));
  }

  // More well-separated clusters than max_speakers leave a flat spectrum inside
  // the search window; count on the whole spectrum and clamp instead.
  const bool window_flat =
      std::all_of(report.g.begin(), report.g.end(), [](double g) { return !(g > 0.0); });
  if (window_flat && std::any_of(full_g.begin(), full_g.end(), [](double g) { return g > 0.0; })) {
    spdlog::warn("speaker count: no eigengap among the first {} eigenvalues; clamping to "
                 "max_speakers",
                 cfg.max_speakers);
    report.g = full_g;
    report.k_per_p = full_k;
  }
  for (std::size_t i = 0; i < report.g.size(); ++i) {
    const double g = report.g[i];
    report.r.push_back(g > 0.0 ? report.p_values[i] / g : std::numeric_limits<double>::infinity());
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < report.r.size(); ++i) {
    if (report.r[i] < report.r[best]) best = i;
  }
  if (!(report.g[best] > 0.0)) {
    throw IndeterminateCountError(
        "speaker count is indeterminate: every binarization has a zero eigengap");
  }
  report.p_hat = report.p_values[best];
  report.k_hat = report.k_per_p[best];
  Eigen::Index full_arg = 0;
  report.gaps[best].maxCoeff(&full_arg);
  if (full_arg >= search) {
    spdlog::info("speaker count limited to max_speakers = {}: largest gap sits at position {}",
                 cfg.max_speakers, full_arg + 1);
  }
  spdlog::debug("speaker count: p_hat = {}, k_hat = {}, r = {}", report.p_hat, report.k_hat,
                report.r[best]);
  return report;
}

}  // namespace ovsc
