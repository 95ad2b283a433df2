#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dropout {

// Base of every error raised by the library. Callers that only need a
// diagnostic catch this; tests catch the concrete types.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DROPOUT_DEFINE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

// Ingestion
DROPOUT_DEFINE_ERROR(ManifestParseError);
DROPOUT_DEFINE_ERROR(DuplicateColumnError);
DROPOUT_DEFINE_ERROR(MissingValueError);
DROPOUT_DEFINE_ERROR(EmptyResultError);
DROPOUT_DEFINE_ERROR(IoError);

// Preprocessing
DROPOUT_DEFINE_ERROR(InvalidFractionError);
DROPOUT_DEFINE_ERROR(ColumnMismatchError);
DROPOUT_DEFINE_ERROR(UnknownGroupError);

// Models and metrics
DROPOUT_DEFINE_ERROR(SingleClassError);
DROPOUT_DEFINE_ERROR(InsufficientRowsError);
DROPOUT_DEFINE_ERROR(WidthMismatchError);
DROPOUT_DEFINE_ERROR(LengthMismatchError);
DROPOUT_DEFINE_ERROR(KindMismatchError);
DROPOUT_DEFINE_ERROR(NoSplitError);
DROPOUT_DEFINE_ERROR(ModelFormatError);

DROPOUT_DEFINE_ERROR(UnknownFeatureError);
DROPOUT_DEFINE_ERROR(InvalidArgumentError);

#undef DROPOUT_DEFINE_ERROR

class MissingColumnError : public Error {
 public:
  explicit MissingColumnError(std::string column)
      : Error("missing column: " + column), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class CellParseError : public Error {
 public:
  CellParseError(std::size_t row, std::string column, const std::string& text)
      : Error("cannot parse cell at data row " + std::to_string(row) + ", column '" + column +
              "': '" + text + "'"),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace dropout
