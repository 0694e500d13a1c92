// errors.hpp — error hierarchy shared by all modules; categories map to CLI exit codes.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace holsim {

enum class ErrorCategory {
    Validation = 2,  // bad inputs, schema violations
    Integrator = 3,  // propagation failures (non-convergence, positivity loss)
    Io         = 4,  // filesystem and serialization failures
    Resource   = 5,  // dimension/overflow guards
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }
    int exit_code() const { return static_cast<int>(category_); }
    const char* category_name() const {
        switch (category_) {
            case ErrorCategory::Validation: return "validation";
            case ErrorCategory::Integrator: return "integrator";
            case ErrorCategory::Io: return "io";
            case ErrorCategory::Resource: return "resource";
        }
        return "unknown";
    }

private:
    ErrorCategory category_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorCategory::Validation, message) {}
};

class IntegratorError : public Error {
public:
    explicit IntegratorError(const std::string& message)
        : Error(ErrorCategory::Integrator, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message)
        : Error(ErrorCategory::Io, message) {}
};

class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& message)
        : Error(ErrorCategory::Resource, message) {}
};

/// One field-level problem found while validating a scenario document.
struct ValidationIssue {
    std::string path;     // dotted field path, e.g. "network.couplings[0].j"
    std::string message;
};

/// Carries every issue found in a document, not just the first.
class ScenarioValidationError : public ValidationError {
public:
    explicit ScenarioValidationError(std::vector<ValidationIssue> issues)
        : ValidationError(format(issues)), issues_(std::move(issues)) {}

    const std::vector<ValidationIssue>& issues() const { return issues_; }

private:
    static std::string format(const std::vector<ValidationIssue>& issues) {
        std::string out = "scenario validation failed (" + std::to_string(issues.size()) + " issue(s)):";
        for (const auto& issue : issues) {
            out += "\n  " + issue.path + ": " + issue.message;
        }
        return out;
    }

    std::vector<ValidationIssue> issues_;
};

}  // namespace holsim
