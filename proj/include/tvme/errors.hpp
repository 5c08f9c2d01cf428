#pragma once

#include <stdexcept>
#include <string>

namespace tvme {

// Base for all tvme failures. `stage` names the pipeline step that failed so
// the CLI can report which part of a run broke.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error("parse", what + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

// Input value outside the mathematical domain (e.g. non-positive price).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
    DomainError(std::string stage, const std::string& what) : Error(std::move(stage), what) {}
};

// Date axis violates the declared frequency (duplicate, gap, or disorder).
class FrequencyError : public Error {
public:
    explicit FrequencyError(const std::string& what) : Error("frequency", what) {}
};

// Too few observations for the requested operation.
class InsufficientDataError : public Error {
public:
    InsufficientDataError(std::string stage, const std::string& what)
        : Error(std::move(stage), what) {}
};

// Numerical failure (rank deficiency, singular system, non-convergence).
class NumericalError : public Error {
public:
    NumericalError(std::string stage, const std::string& what)
        : Error(std::move(stage), what) {}
};

// Matrix inverse requested past the configured condition cap.
class SingularityError : public NumericalError {
public:
    SingularityError(std::string stage, const std::string& what)
        : NumericalError(std::move(stage), what) {}
};

// Filesystem problem while reading inputs or writing outputs.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io", what) {}
    IoError(std::string stage, const std::string& what) : Error(std::move(stage), what) {}
};

}  // namespace tvme
