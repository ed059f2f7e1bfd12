#pragma once

#include "ivdrem/core/types.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace ivdrem {

/// Invalid model, signal or experiment description. `field()` holds the
/// config path of the offending entry when the error came from a file.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what, std::string field = {})
        : std::invalid_argument(field.empty() ? what : field + ": " + what),
          message_(what),
          field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::string field_;
};

/// A state or output became non-finite. Carries the grid step and the module
/// that produced it so a partial log can be annotated.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, StepIndex step, std::string module)
        : std::runtime_error(module + " at step " + std::to_string(step) + ": " + what),
          step_(step),
          module_(std::move(module)) {}

    [[nodiscard]] StepIndex step() const noexcept { return step_; }
    [[nodiscard]] const std::string& module() const noexcept { return module_; }

private:
    StepIndex step_;
    std::string module_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ivdrem
