#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ovsc/types.hpp"

namespace ovsc {

/// Error components in percent of scored reference speaker-time.
struct DerBreakdown {
  double missed = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;
  double der = 0.0;
  double total_reference_speaker_time = 0.0;
};

/// Raw seconds behind a DerBreakdown; pooled across recordings by summation.
struct DerCounts {
  double reference = 0.0;
  double missed = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;

  DerCounts& operator+=(const DerCounts& o) {
    reference += o.reference;
    missed += o.missed;
    false_alarm += o.false_alarm;
    confusion += o.confusion;
    return *this;
  }
  /// Throws ContractError when no reference speech was scored.
  DerBreakdown breakdown() const;
};

using SpeakerMapping = std::vector<std::pair<std::string, std::string>>;  ///< (hyp, ref)

/// Optimal one-to-one assignment on a weight matrix (rows x cols, any shape);
/// returns col index per row, -1 when unassigned. Maximizes total weight.
std::vector<int> max_weight_assignment(const Matrix& weights);

/// Hypothesis-to-reference mapping maximizing total co-occurring duration.
/// Pairs with zero co-occurrence are left unmapped.
SpeakerMapping map_speakers(const Timeline& reference, const Timeline& hypothesis);

/// Seconds of missed, false-alarm and confused speaker-time. A collar of c
/// removes [b - c, b + c] around every reference boundary b from scoring.
DerCounts der_counts(const Timeline& reference, const Timeline& hypothesis, double collar = 0.0);

DerBreakdown der_score(const Timeline& reference, const Timeline& hypothesis,
                       double collar = 0.0);

}  // namespace ovsc
