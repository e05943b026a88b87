#include "tconn/error.hpp"

namespace tconn {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::SlotOutOfRange: return "SlotOutOfRange";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SharedComponentMismatch: return "SharedComponentMismatch";
    case Errc::DomainError: return "DomainError";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownIdentifier: return "UnknownIdentifier";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::ConstraintViolation: return "ConstraintViolation";
    case Errc::SamplingFailed: return "SamplingFailed";
    case Errc::PreconditionFailed: return "PreconditionFailed";
    case Errc::SolveFailed: return "SolveFailed";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotAVectorField: return "NotAVectorField";
    case Errc::NotASection: return "NotASection";
    case Errc::NotAffine: return "NotAffine";
    case Errc::NotTorsionFree: return "NotTorsionFree";
    case Errc::CompatibilityViolation: return "CompatibilityViolation";
    case Errc::SectionRetractionMismatch: return "SectionRetractionMismatch";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::BasePointMismatch: return "BasePointMismatch";
    case Errc::LoopNotClosed: return "LoopNotClosed";
    case Errc::Config: return "ConfigError";
  }
  return "Error";
}

static std::string positioned(int line, int column, const std::vector<std::string>& expected,
                              const std::string& message) {
  std::string s = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  if (!expected.empty()) {
    s += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) s += ", ";
      s += expected[i];
    }
    s += ")";
  }
  return s;
}

ParseError::ParseError(Errc code, int line, int column, std::vector<std::string> expected,
                       const std::string& message)
    : Error(code, positioned(line, column, expected, message)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

}  // namespace tconn
