#pragma once

#include "tsad/core/signal.hpp"

#include <string_view>
#include <vector>

namespace tsad {

enum class EventSource { detected, manual };

std::string_view to_string(EventSource source) noexcept;
EventSource parse_event_source(std::string_view text);

// A scored anomalous interval, closed on both ends: [t_s, t_e] with t_s < t_e.
struct Event {
  Timestamp t_s = 0;
  Timestamp t_e = 0;
  double severity = 0.0;
  EventSource source = EventSource::detected;

  friend bool operator==(const Event&, const Event&) = default;
};

// Sorted ascending by t_s. Events from one detection run never overlap.
using EventList = std::vector<Event>;

/// Validated constructor; throws InvalidArgument unless t_s < t_e and severity >= 0.
Event make_event(Timestamp t_s, Timestamp t_e, double severity = 0.0,
                 EventSource source = EventSource::detected);

void sort_events(EventList& events);

/// Closed-interval intersection: true when the intervals share a timestamp.
inline bool overlaps(const Event& a, const Event& b) noexcept {
  return a.t_s <= b.t_e && b.t_s <= a.t_e;
}

}  // namespace tsad
