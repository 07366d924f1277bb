#include "ovsc/report.hpp"

#include <fstream>

#include "ovsc/error.hpp"
#include "text.hpp"

namespace ovsc {
namespace {

std::vector<double> as_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::json to_json(const EigengapReport& report) {
  nlohmann::json j;
  j["p_values"] = report.p_values;
  j["g"] = report.g;
  j["r"] = report.r;  // infinity serializes as null
  j["k_per_p"] = report.k_per_p;
  j["p_hat"] = report.p_hat;
  j["k_hat"] = report.k_hat;
  auto& eig = j["eigenvalues"] = nlohmann::json::array();
  for (const auto& v : report.eigenvalues) eig.push_back(as_vector(v));
  return j;
}

nlohmann::json to_json(const DerBreakdown& der) {
  return {{"missed", der.missed},
          {"false_alarm", der.false_alarm},
          {"confusion", der.confusion},
          {"der", der.der},
          {"total_reference_speaker_time", der.total_reference_speaker_time}};
}

nlohmann::json to_json(const DiarizeResult& result) {
  nlohmann::json j;
  j["recording_id"] = result.recording_id;
  j["segments"] = result.discretization.assignment.rows();
  j["overlap_segments"] = result.discretization.assignment.overlap.count();
  j["num_speakers"] = result.k;
  j["p"] = result.affinity.p;
  j["counted_on_single_rows"] = result.counted_on_single_rows;
  if (!result.count.p_values.empty()) j["speaker_count"] = to_json(result.count);

  const auto& d = result.discretization;
  nlohmann::json disc;
  disc["phi"] = d.phi;
  disc["best_run"] = d.best_run;
  auto& runs = disc["runs"] = nlohmann::json::array();
  for (const auto& r : d.runs) {
    runs.push_back({{"seed", r.seed},
                    {"phi_history", r.phi_history},
                    {"best_phi", r.best_phi},
                    {"converged", r.converged}});
  }
  std::vector<double> sizes;
  for (Eigen::Index k = 0; k < d.assignment.x.cols(); ++k) {
    sizes.push_back(d.assignment.x.col(k).sum());
  }
  disc["cluster_sizes"] = sizes;
  j["discretization"] = std::move(disc);
  return j;
}

nlohmann::json to_json(const DurationConfig& cfg) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"min_silence", cfg.min_silence}, {"max_silence", opt(cfg.max_silence)},
          {"min_single", cfg.min_single},   {"max_single", opt(cfg.max_single)},
          {"min_overlap", cfg.min_overlap}, {"max_overlap", opt(cfg.max_overlap)},
          {"bias", cfg.bias}};
}

void write_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << text::shortest(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("error while writing " + path);
}

}  // namespace ovsc
