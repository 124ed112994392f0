#pragma once

#include "tsad/core/event.hpp"

namespace tsad {

// Duration-weighted (seconds) for weighted_segment, interval counts for
// overlapping_segment, where tn is always 0.
struct ConfusionWeights {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double tn = 0.0;

  friend bool operator==(const ConfusionWeights&, const ConfusionWeights&) = default;
};

// NaN marks an undefined value (zero denominator).
struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Partition [t0, t1] at every interval edge of truth and pred and accrue
/// each piece's duration to tp, fp, fn or tn. Throws InvalidArgument when
/// t0 >= t1 and IntervalOutOfSpan when an interval leaves the span.
ConfusionWeights weighted_segment(const EventList& truth, const EventList& pred, Timestamp t0,
                                  Timestamp t1);

/// tp: truth intervals touching some prediction; fn: the rest of truth;
/// fp: predictions touching no truth interval.
ConfusionWeights overlapping_segment(const EventList& truth, const EventList& pred);

Scores score_from_confusion(const ConfusionWeights& c);

/// Copy of `events` clipped to [t0, t1]; intervals that end up empty are dropped.
EventList clip_events(const EventList& events, Timestamp t0, Timestamp t1);

}  // namespace tsad
