#include <algorithm>
#include <map>

#include "ovsc/ingest.hpp"

namespace ovsc {

Timeline normalize_timeline(Timeline timeline) {
  std::map<std::string, std::vector<Interval>> by_speaker;
  for (auto& e : timeline.entries) {
    if (!(e.end > e.start)) continue;
    by_speaker[e.speaker].push_back(std::move(e));
  }
  std::vector<Interval> merged;
  for (auto& [speaker, list] : by_speaker) {
    std::sort(list.begin(), list.end(), [](const Interval& a, const Interval& b) {
      return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
    Interval cur = list.front();
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].start <= cur.end + kMergeGap) {
        cur.end = std::max(cur.end, list[i].end);
      } else {
        merged.push_back(cur);
        cur = list[i];
      }
    }
    merged.push_back(cur);
  }
  std::sort(merged.begin(), merged.end(), [](const Interval& a, const Interval& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.speaker != b.speaker) return a.speaker < b.speaker;
    return a.end < b.end;
  });
  timeline.entries = std::move(merged);
  return timeline;
}

std::string cluster_name(std::size_t k) { return "spk" + std::to_string(k); }

}  // namespace ovsc
