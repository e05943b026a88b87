#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tconn {

enum class Errc {
  SlotOutOfRange,
  DimensionMismatch,
  SharedComponentMismatch,
  DomainError,
  ParseError,
  UnknownIdentifier,
  ArityMismatch,
  ConstraintViolation,
  SamplingFailed,
  PreconditionFailed,
  SolveFailed,
  RankDeficient,
  NotAVectorField,
  NotASection,
  NotAffine,
  NotTorsionFree,
  CompatibilityViolation,
  SectionRetractionMismatch,
  NonFiniteState,
  BasePointMismatch,
  LoopNotClosed,
  Config,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

class ParseError : public Error {
 public:
  ParseError(Errc code, int line, int column, std::vector<std::string> expected,
             const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

}  // namespace tconn
