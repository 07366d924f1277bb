#include "ovsc/scoring.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "ovsc/error.hpp"
#include "ovsc/ingest.hpp"

namespace ovsc {
namespace {

struct Event {
  double time;
  bool reference;
  std::size_t speaker;
  bool start;
};

struct Sweep {
  std::vector<std::string> ref_names;
  std::vector<std::string> hyp_names;
  Matrix cooccurrence;  // hyp x ref seconds
  DerCounts counts;     // confusion holds sum(min(R, H) * dur) until mapped
};

std::vector<std::string> speaker_names(const Timeline& tl) {
  std::vector<std::string> names;
  for (const auto& e : tl.entries) names.push_back(e.speaker);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::size_t position(const std::vector<std::string>& names, const std::string& name) {
  return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), name) -
                                  names.begin());
}

// Union of [b - collar, b + collar] around every reference boundary.
std::vector<std::pair<double, double>> collar_zones(const Timeline& ref, double collar) {
  std::vector<std::pair<double, double>> zones;
  if (collar <= 0.0) return zones;
  for (const auto& e : ref.entries) {
    zones.emplace_back(e.start - collar, e.start + collar);
    zones.emplace_back(e.end - collar, e.end + collar);
  }
  std::sort(zones.begin(), zones.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& z : zones) {
    if (!merged.empty() && z.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, z.second);
    } else {
      merged.push_back(z);
    }
  }
  return merged;
}

bool in_zone(const std::vector<std::pair<double, double>>& zones, double t) {
  auto it = std::upper_bound(zones.begin(), zones.end(), std::pair{t, std::numeric_limits<double>::infinity()});
  if (it == zones.begin()) return false;
  --it;
  return t >= it->first && t <= it->second;
}

Sweep sweep(const Timeline& reference, const Timeline& hypothesis, double collar) {
  if (collar < 0.0) throw ContractError("collar must be non-negative");
  const auto ref = normalize_timeline(reference);
  const auto hyp = normalize_timeline(hypothesis);

  Sweep out;
  out.ref_names = speaker_names(ref);
  out.hyp_names = speaker_names(hyp);
  out.cooccurrence = Matrix::Zero(static_cast<Eigen::Index>(out.hyp_names.size()),
                                  static_cast<Eigen::Index>(out.ref_names.size()));

  std::vector<Event> events;
  std::vector<double> cuts;
  for (const auto& e : ref.entries) {
    const auto k = position(out.ref_names, e.speaker);
    events.push_back({e.start, true, k, true});
    events.push_back({e.end, true, k, false});
  }
  for (const auto& e : hyp.entries) {
    const auto k = position(out.hyp_names, e.speaker);
    events.push_back({e.start, false, k, true});
    events.push_back({e.end, false, k, false});
  }
  const auto zones = collar_zones(ref, collar);
  for (const auto& ev : events) cuts.push_back(ev.time);
  for (const auto& z : zones) {
    cuts.push_back(z.first);
    cuts.push_back(z.second);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });

  std::vector<char> ref_on(out.ref_names.size(), 0);
  std::vector<char> hyp_on(out.hyp_names.size(), 0);
  std::size_t ev = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    while (ev < events.size() && events[ev].time <= cuts[c]) {
      auto& on = events[ev].reference ? ref_on : hyp_on;
      on[events[ev].speaker] = events[ev].start ? 1 : 0;
      ++ev;
    }
    const double dur = cuts[c + 1] - cuts[c];
    if (!(dur > 0.0)) continue;
    if (!zones.empty() && in_zone(zones, 0.5 * (cuts[c] + cuts[c + 1]))) continue;

    double r = 0.0;
    double h = 0.0;
    for (auto v : ref_on) r += v;
    for (auto v : hyp_on) h += v;
    if (r == 0.0 && h == 0.0) continue;
    out.counts.reference += r * dur;
    out.counts.missed += std::max(0.0, r - h) * dur;
    out.counts.false_alarm += std::max(0.0, h - r) * dur;
    out.counts.confusion += std::min(r, h) * dur;
    for (std::size_t i = 0; i < hyp_on.size(); ++i) {
      if (!hyp_on[i]) continue;
      for (std::size_t j = 0; j < ref_on.size(); ++j) {
        if (ref_on[j]) {
          out.cooccurrence(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += dur;
        }
      }
    }
  }
  return out;
}

}  // namespace

DerBreakdown DerCounts::breakdown() const {
  if (!(reference > 0.0)) {
    throw ContractError("DER is undefined: the reference has no scored speech");
  }
  DerBreakdown b;
  b.total_reference_speaker_time = reference;
  b.missed = 100.0 * missed / reference;
  b.false_alarm = 100.0 * false_alarm / reference;
  b.confusion = 100.0 * confusion / reference;
  b.der = b.missed + b.false_alarm + b.confusion;
  return b;
}

std::vector<int> max_weight_assignment(const Matrix& weights) {
  const auto rows = static_cast<std::size_t>(weights.rows());
  const auto cols = static_cast<std::size_t>(weights.cols());
  const auto n = std::max(rows, cols);
  std::vector<int> result(rows, -1);
  if (rows == 0 || cols == 0) return result;

  // Hungarian method (potentials, O(n^3)) minimizing -weight on a zero-padded square.
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols)
               ? -weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))
               : 0.0;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const auto i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const auto j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const auto i = match[j];
    if (i >= 1 && i <= rows && j <= cols) result[i - 1] = static_cast<int>(j - 1);
  }
  return result;
}

SpeakerMapping map_speakers(const Timeline& reference, const Timeline& hypothesis) {
  const auto s = sweep(reference, hypothesis, 0.0);
  const auto assign = max_weight_assignment(s.cooccurrence);
  SpeakerMapping mapping;
  for (std::size_t h = 0; h < assign.size(); ++h) {
    if (assign[h] < 0) continue;
    if (!(s.cooccurrence(static_cast<Eigen::Index>(h), assign[h]) > 0.0)) continue;
    mapping.emplace_back(s.hyp_names[h], s.ref_names[static_cast<std::size_t>(assign[h])]);
  }
  return mapping;
}

DerCounts der_counts(const Timeline& reference, const Timeline& hypothesis, double collar) {
  auto s = sweep(reference, hypothesis, collar);
  const auto assign = max_weight_assignment(s.cooccurrence);
  // Summed in sorted order so that relabelling the hypothesis cannot change the result.
  std::vector<double> matched;
  for (std::size_t h = 0; h < assign.size(); ++h) {
    if (assign[h] >= 0) matched.push_back(s.cooccurrence(static_cast<Eigen::Index>(h), assign[h]));
  }
  std::sort(matched.begin(), matched.end());
  double correct = 0.0;
  for (double m : matched) correct += m;
  s.counts.confusion = std::max(0.0, s.counts.confusion - correct);
  return s.counts;
}

DerBreakdown der_score(const Timeline& reference, const Timeline& hypothesis, double collar) {
  return der_counts(reference, hypothesis, collar).breakdown();
}

}  // namespace ovsc
