#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace nvi {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text or binary file. Carries the 1-based line when known.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Input violates a documented invariant or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad configuration: unknown backend, unknown kind, invalid hyperparameter.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A statistic whose value is mathematically undefined for the given data
/// (zero variance, 0/0 reliability).
class UndefinedStatisticError : public Error {
public:
    using Error::Error;
};

/// Failure inside one stage of the extraction pipeline.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, std::optional<int> frame_index, const std::string& what)
        : Error("[" + stage + "]" +
                (frame_index ? " frame " + std::to_string(*frame_index) : std::string{}) + ": " +
                what),
          stage_(std::move(stage)), frame_index_(frame_index) {}

    const std::string& stage() const noexcept { return stage_; }
    std::optional<int> frame_index() const noexcept { return frame_index_; }

private:
    std::string stage_;
    std::optional<int> frame_index_;
};

/// Optimisation diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace nvi
