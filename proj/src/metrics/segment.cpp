#include "tsad/metrics/segment.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace tsad {

namespace {

void check_inside(const EventList& events, Timestamp t0, Timestamp t1, const char* which) {
  for (const Event& e : events) {
    if (e.t_s < t0 || e.t_e > t1) {
      throw Error(ErrorCode::IntervalOutOfSpan,
                  std::string(which) + " interval [" + std::to_string(e.t_s) + ", " +
                      std::to_string(e.t_e) + "] outside span [" + std::to_string(t0) + ", " +
                      std::to_string(t1) + "]",
                  which);
    }
  }
}

}  // namespace

ConfusionWeights weighted_segment(const EventList& truth, const EventList& pred, Timestamp t0,
                                  Timestamp t1) {
  if (t0 >= t1) throw Error(ErrorCode::InvalidArgument, "span requires t0 < t1");
  check_inside(truth, t0, t1, "truth");
  check_inside(pred, t0, t1, "pred");

  // Coverage deltas per edge; intervals inside one list may overlap.
  struct Delta {
    int truth = 0;
    int pred = 0;
  };
  std::map<Timestamp, Delta> edges{{t0, {}}, {t1, {}}};
  for (const Event& e : truth) {
    edges[e.t_s].truth += 1;
    edges[e.t_e].truth -= 1;
  }
  for (const Event& e : pred) {
    edges[e.t_s].pred += 1;
    edges[e.t_e].pred -= 1;
  }

  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  int in_truth = 0, in_pred = 0;
  for (auto it = edges.begin(); std::next(it) != edges.end(); ++it) {
    in_truth += it->second.truth;
    in_pred += it->second.pred;
    const std::int64_t length = std::next(it)->first - it->first;
    if (in_truth > 0 && in_pred > 0) {
      tp += length;
    } else if (in_pred > 0) {
      fp += length;
    } else if (in_truth > 0) {
      fn += length;
    } else {
      tn += length;
    }
  }
  return {static_cast<double>(tp), static_cast<double>(fp), static_cast<double>(fn),
          static_cast<double>(tn)};
}

ConfusionWeights overlapping_segment(const EventList& truth, const EventList& pred) {
  EventList t = truth;
  EventList p = pred;
  sort_events(t);
  sort_events(p);

  // Only entries starting at or before e.t_e can touch e.
  auto touches_any = [](const Event& e, const EventList& sorted) {
    auto upper = std::upper_bound(sorted.begin(), sorted.end(), e.t_e,
                                  [](Timestamp v, const Event& x) { return v < x.t_s; });
    for (auto it = sorted.begin(); it != upper; ++it) {
      if (it->t_e >= e.t_s) return true;
    }
    return false;
  };

  ConfusionWeights c;
  for (const Event& e : t) {
    if (touches_any(e, p)) {
      c.tp += 1.0;
    } else {
      c.fn += 1.0;
    }
  }
  for (const Event& e : p) {
    if (!touches_any(e, t)) c.fp += 1.0;
  }
  return c;
}

Scores score_from_confusion(const ConfusionWeights& c) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Scores s;
  s.precision = (c.tp + c.fp) > 0.0 ? c.tp / (c.tp + c.fp) : nan;
  s.recall = (c.tp + c.fn) > 0.0 ? c.tp / (c.tp + c.fn) : nan;
  if (std::isnan(s.precision) || std::isnan(s.recall)) {
    s.f1 = nan;
  } else if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  } else {
    s.f1 = 0.0;
  }
  return s;
}

EventList clip_events(const EventList& events, Timestamp t0, Timestamp t1) {
  EventList out;
  out.reserve(events.size());
  for (Event e : events) {
    e.t_s = std::max(e.t_s, t0);
    e.t_e = std::min(e.t_e, t1);
    if (e.t_s < e.t_e) out.push_back(e);
  }
  return out;
}

}  // namespace tsad
