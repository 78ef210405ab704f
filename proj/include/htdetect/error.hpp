#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace htdetect {

// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorCategory {
  Config,    // invalid configuration or arguments
  Data,      // unreadable, malformed or unsuitable input data
  Internal,  // everything else
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

/// A cell that is not a finite real. Row and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t row, std::size_t column,
             const std::string& detail)
      : Error(ErrorCategory::Data, source + ": row " + std::to_string(row) + " column " +
                                       std::to_string(column) + ": " + detail),
        row_(row),
        column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class EmptyDatasetError : public Error {
 public:
  explicit EmptyDatasetError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class NumericInputError : public Error {
 public:
  explicit NumericInputError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class StratificationError : public Error {
 public:
  explicit StratificationError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class ClassCoverageError : public Error {
 public:
  explicit ClassCoverageError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class DegenerateTrainingError : public Error {
 public:
  explicit DegenerateTrainingError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class FormatVersionError : public Error {
 public:
  explicit FormatVersionError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

}  // namespace htdetect
