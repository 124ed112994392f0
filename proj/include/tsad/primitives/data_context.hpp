#pragma once

#include "tsad/core/event.hpp"
#include "tsad/core/signal.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace tsad {

enum class Slot {
  timestamps,
  values,
  windows,
  targets,
  target_timestamps,
  predictions,
  errors,
  events,
  labels,
};

inline constexpr std::array<Slot, 9> kAllSlots{
    Slot::timestamps, Slot::values,      Slot::windows, Slot::targets, Slot::target_timestamps,
    Slot::predictions, Slot::errors,     Slot::events,  Slot::labels};

std::string_view to_string(Slot slot) noexcept;
std::optional<Slot> parse_slot(std::string_view text) noexcept;

// Slots a pipeline's caller provides directly.
inline bool is_raw_slot(Slot slot) noexcept {
  return slot == Slot::timestamps || slot == Slot::values || slot == Slot::labels;
}

// Flattened windows plus the time span each one covers.
struct WindowSet {
  Matrix data;
  std::vector<Timestamp> start_ts;
  std::vector<Timestamp> end_ts;
  std::size_t window_size = 0;
  std::size_t channels = 0;
};

// An optional, immutable, shared value. Copies share storage, so routing a
// slot between steps costs a reference count; writers replace the whole value.
template <typename T>
class SlotValue {
 public:
  SlotValue() = default;
  SlotValue(std::nullopt_t) {}
  SlotValue(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}

  SlotValue& operator=(T value) {
    ptr_ = std::make_shared<const T>(std::move(value));
    return *this;
  }
  SlotValue& operator=(std::nullopt_t) {
    ptr_.reset();
    return *this;
  }

  bool has_value() const noexcept { return ptr_ != nullptr; }
  explicit operator bool() const noexcept { return has_value(); }
  const T& operator*() const noexcept { return *ptr_; }
  const T* operator->() const noexcept { return ptr_.get(); }
  void reset() noexcept { ptr_.reset(); }

 private:
  std::shared_ptr<const T> ptr_;
};

/// The named data slots threaded through one pipeline execution. A context is
/// confined to a single fit or detect call.
struct DataContext {
  SlotValue<std::vector<Timestamp>> timestamps;
  SlotValue<Matrix> values;
  SlotValue<WindowSet> windows;
  SlotValue<Matrix> targets;
  SlotValue<std::vector<Timestamp>> target_timestamps;
  SlotValue<Matrix> predictions;
  SlotValue<std::vector<double>> errors;
  SlotValue<EventList> events;
  SlotValue<EventList> labels;

  bool has(Slot slot) const noexcept;
  void copy_slot(Slot slot, const DataContext& from);

  const std::vector<Timestamp>& require_timestamps() const;
  const Matrix& require_values() const;
  const WindowSet& require_windows() const;
  const Matrix& require_targets() const;
  const std::vector<Timestamp>& require_target_timestamps() const;
  const Matrix& require_predictions() const;
  const std::vector<double>& require_errors() const;
  const EventList& require_events() const;
  const EventList& require_labels() const;
};

}  // namespace tsad
