#include "tsad/core/error.hpp"

namespace tsad {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::AllMissingChannel: return "AllMissingChannel";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::CycleError: return "CycleError";
    case ErrorCode::UnsatisfiedSlot: return "UnsatisfiedSlot";
    case ErrorCode::UnknownPrimitive: return "UnknownPrimitive";
    case ErrorCode::BadHyperparamSpec: return "BadHyperparamSpec";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownHyperparam: return "UnknownHyperparam";
    case ErrorCode::IntervalOutOfSpan: return "IntervalOutOfSpan";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::AllTrialsFailed: return "AllTrialsFailed";
    case ErrorCode::Locked: return "Locked";
    case ErrorCode::CorruptJournal: return "CorruptJournal";
    case ErrorCode::UnknownCollection: return "UnknownCollection";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::BindError: return "BindError";
    case ErrorCode::TooManyPoints: return "TooManyPoints";
  }
  return "Unknown";
}

}  // namespace tsad
