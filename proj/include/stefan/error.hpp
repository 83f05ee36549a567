#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

/// Failure categories; the numeric values are the CLI exit codes.
enum class ErrorCategory : int {
    config = 1,
    solver = 2,
    verification = 3,
};

class StefanError : public std::runtime_error {
public:
    StefanError(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

/// Bad user input: malformed config, invalid coefficients, shape mismatch.
class ConfigError : public StefanError {
public:
    explicit ConfigError(const std::string& what)
        : StefanError(ErrorCategory::config, what) {}
};

/// Violated precondition of a library call.
class PreconditionError : public StefanError {
public:
    explicit PreconditionError(const std::string& what)
        : StefanError(ErrorCategory::config, what) {}
};

class QuadratureError : public StefanError {
public:
    explicit QuadratureError(const std::string& what)
        : StefanError(ErrorCategory::solver, what) {}
};

/// Successive approximations did not reach the tolerance within max_iter.
class SolverError : public StefanError {
public:
    SolverError(const std::string& what, int step, double last_update)
        : StefanError(ErrorCategory::solver, what), step_(step), last_update_(last_update) {}

    int step() const noexcept { return step_; }
    double last_update() const noexcept { return last_update_; }

private:
    int step_;
    double last_update_;
};

class VerificationError : public StefanError {
public:
    explicit VerificationError(const std::string& what)
        : StefanError(ErrorCategory::verification, what) {}
};

} // namespace stefan
