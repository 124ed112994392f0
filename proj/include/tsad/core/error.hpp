#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsad {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedCsv,
  DuplicateTimestamp,
  EmptySignal,
  EmptySlice,
  InfeasibleSpec,
  AllMissingChannel,
  SignalTooShort,
  SingularSystem,
  NonFiniteLoss,
  ShapeMismatch,
  SchemaError,
  CycleError,
  UnsatisfiedSlot,
  UnknownPrimitive,
  BadHyperparamSpec,
  OutOfRange,
  UnknownHyperparam,
  IntervalOutOfSpan,
  NumericalFailure,
  BudgetExhausted,
  AllTrialsFailed,
  Locked,
  CorruptJournal,
  UnknownCollection,
  MissingField,
  DanglingReference,
  NotFound,
  SingleClassData,
  CorruptModel,
  BindError,
  TooManyPoints,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every domain failure in the library is reported as a tsad::Error. `context`
// carries the offending step id, field name, or offset when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string context = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }

 private:
  ErrorCode code_;
  std::string context_;
};

}  // namespace tsad
