#ifndef ENGAGE_ERRORS_HPP
#define ENGAGE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace engage {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& column)
        : Error("missing required column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

// Raised only for malformed non-blank cells; blanks mean "missing" and drop the row.
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& column, const std::string& detail)
        : Error("row " + std::to_string(row) + ", column '" + column + "': " + detail),
          row_(row),
          column_(column) {}
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

class EmptyAfterClean : public Error {
public:
    EmptyAfterClean() : Error("no records survive cleaning") {}
};

class NegativeAge : public Error {
public:
    NegativeAge(const std::string& upload, const std::string& reference)
        : Error("upload date " + upload + " is after reference date " + reference) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& what) : Error(what) {}
};

class TooFewRows : public Error {
public:
    explicit TooFewRows(const std::string& what) : Error(what) {}
};

class NonFiniteTarget : public Error {
public:
    explicit NonFiniteTarget(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error(what) {}
};

class ConstantTruth : public Error {
public:
    ConstantTruth() : Error("r2 undefined: truth vector is constant") {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(int version)
        : Error("unsupported model format_version: " + std::to_string(version)),
          version_(version) {}
    int version() const { return version_; }

private:
    int version_;
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error(what) {}
};

}  // namespace engage

#endif
