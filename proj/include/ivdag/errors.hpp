#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ivdag {

// Failure category, mapped to CLI exit codes: data errors exit 3,
// numerical failures exit 4.
enum class ErrorKind { data, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class CyclicInput : public Error {
public:
    explicit CyclicInput(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

class NotNested : public Error {
public:
    explicit NotNested(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class MaxIterations : public Error {
public:
    explicit MaxIterations(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

// Raised when a peeling round finds no instrument-leaf pair while primary
// nodes remain; carries the surviving submatrix indices for diagnosis.
class PeelStalled : public Error {
public:
    PeelStalled(const std::string& msg, std::vector<int> rows, std::vector<int> cols)
        : Error(ErrorKind::numeric, msg), surviving_rows(std::move(rows)),
          surviving_cols(std::move(cols)) {}
    std::vector<int> surviving_rows;  // 0-based instrument rows still active
    std::vector<int> surviving_cols;  // 0-based primary columns still active
};

class DegreesOfFreedomExhausted : public Error {
public:
    explicit DegreesOfFreedomExhausted(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

class NoContainedReplicates : public Error {
public:
    explicit NoContainedReplicates(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class MissingValue : public ParseError {
public:
    explicit MissingValue(const std::string& msg) : ParseError(msg) {}
};

class RowMismatch : public Error {
public:
    explicit RowMismatch(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(ErrorKind::data, msg) {}
};

}  // namespace ivdag
