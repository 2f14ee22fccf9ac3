#pragma once

#include <stdexcept>
#include <string>

namespace gpclt {

// Every failure raised by the library carries a short category tag that the
// CLI prints as `error: <category>: <detail>` and maps to an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& detail)
      : std::runtime_error(detail), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& detail) : Error("domain", detail) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& detail) : Error("parse", detail) {}
};

class QuadratureError : public Error {
 public:
  explicit QuadratureError(const std::string& detail)
      : Error("quadrature", detail) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& detail)
      : Error("invariant", detail) {}
};

class UnsupportedRegimeError : public Error {
 public:
  explicit UnsupportedRegimeError(const std::string& detail)
      : Error("unsupported-regime", detail) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& detail)
      : Error("alignment", detail) {}
};

class CovarianceInvalidError : public Error {
 public:
  explicit CovarianceInvalidError(const std::string& detail)
      : Error("covariance-invalid", detail) {}
};

class OverflowError : public Error {
 public:
  explicit OverflowError(const std::string& detail)
      : Error("overflow", detail) {}
};

}  // namespace gpclt
