#include "tsad/primitives/data_context.hpp"

#include "tsad/core/error.hpp"

#include <string>

namespace tsad {
namespace {

template <typename T>
const T& require(const SlotValue<T>& slot, Slot name) {
  if (!slot) {
    throw Error(ErrorCode::UnsatisfiedSlot, "slot '" + std::string(to_string(name)) + "' is empty",
                std::string(to_string(name)));
  }
  return *slot;
}

}  // namespace

std::string_view to_string(Slot slot) noexcept {
  switch (slot) {
    case Slot::timestamps: return "timestamps";
    case Slot::values: return "values";
    case Slot::windows: return "windows";
    case Slot::targets: return "targets";
    case Slot::target_timestamps: return "target_timestamps";
    case Slot::predictions: return "predictions";
    case Slot::errors: return "errors";
    case Slot::events: return "events";
    case Slot::labels: return "labels";
  }
  return "values";
}

std::optional<Slot> parse_slot(std::string_view text) noexcept {
  for (Slot slot : kAllSlots) {
    if (to_string(slot) == text) return slot;
  }
  return std::nullopt;
}

bool DataContext::has(Slot slot) const noexcept {
  switch (slot) {
    case Slot::timestamps: return timestamps.has_value();
    case Slot::values: return values.has_value();
    case Slot::windows: return windows.has_value();
    case Slot::targets: return targets.has_value();
    case Slot::target_timestamps: return target_timestamps.has_value();
    case Slot::predictions: return predictions.has_value();
    case Slot::errors: return errors.has_value();
    case Slot::events: return events.has_value();
    case Slot::labels: return labels.has_value();
  }
  return false;
}

void DataContext::copy_slot(Slot slot, const DataContext& from) {
  switch (slot) {
    case Slot::timestamps: timestamps = from.timestamps; break;
    case Slot::values: values = from.values; break;
    case Slot::windows: windows = from.windows; break;
    case Slot::targets: targets = from.targets; break;
    case Slot::target_timestamps: target_timestamps = from.target_timestamps; break;
    case Slot::predictions: predictions = from.predictions; break;
    case Slot::errors: errors = from.errors; break;
    case Slot::events: events = from.events; break;
    case Slot::labels: labels = from.labels; break;
  }
}

const std::vector<Timestamp>& DataContext::require_timestamps() const { return require(timestamps, Slot::timestamps); }
const Matrix& DataContext::require_values() const { return require(values, Slot::values); }
const WindowSet& DataContext::require_windows() const { return require(windows, Slot::windows); }
const Matrix& DataContext::require_targets() const { return require(targets, Slot::targets); }
const std::vector<Timestamp>& DataContext::require_target_timestamps() const {
  return require(target_timestamps, Slot::target_timestamps);
}
const Matrix& DataContext::require_predictions() const { return require(predictions, Slot::predictions); }
const std::vector<double>& DataContext::require_errors() const { return require(errors, Slot::errors); }
const EventList& DataContext::require_events() const { return require(events, Slot::events); }
const EventList& DataContext::require_labels() const { return require(labels, Slot::labels); }

}  // namespace tsad
