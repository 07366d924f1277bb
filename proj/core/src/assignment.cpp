#include "ovsc/error.hpp"
#include "ovsc/ingest.hpp"

namespace ovsc {

Timeline assignment_to_timeline(const AssignmentMatrix& assignment,
                                const std::vector<SegmentSpan>& spans) {
  if (assignment.rows() != spans.size()) {
    throw ContractError("assignment has " + std::to_string(assignment.rows()) +
                        " rows but there are " + std::to_string(spans.size()) + " segments");
  }
  Timeline tl;
  if (!spans.empty()) tl.recording_id = spans.front().recording_id;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t k = 0; k < assignment.k(); ++k) {
      if (assignment.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) != 0.0) {
        tl.entries.push_back(Interval{cluster_name(k), spans[i].start, spans[i].end});
      }
    }
  }
  return normalize_timeline(std::move(tl));
}

}  // namespace ovsc
