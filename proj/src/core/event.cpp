#include "tsad/core/event.hpp"

#include "tsad/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsad {

std::string_view to_string(EventSource source) noexcept {
  return source == EventSource::manual ? "manual" : "detected";
}

EventSource parse_event_source(std::string_view text) {
  if (text == "detected") return EventSource::detected;
  if (text == "manual") return EventSource::manual;
  throw Error(ErrorCode::InvalidArgument, "unknown event source '" + std::string(text) + "'",
              "source");
}

Event make_event(Timestamp t_s, Timestamp t_e, double severity, EventSource source) {
  if (t_s >= t_e) {
    throw Error(ErrorCode::InvalidArgument,
                "event needs t_s < t_e, got [" + std::to_string(t_s) + ", " +
                    std::to_string(t_e) + "]");
  }
  if (!(severity >= 0.0) || !std::isfinite(severity)) {
    throw Error(ErrorCode::InvalidArgument, "event severity must be finite and >= 0");
  }
  return Event{t_s, t_e, severity, source};
}

void sort_events(EventList& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t_s < b.t_s || (a.t_s == b.t_s && a.t_e < b.t_e);
  });
}

}  // namespace tsad
