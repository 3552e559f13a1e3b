#pragma once

#include <stdexcept>
#include <string>

namespace dtrot {

/// Malformed or invalid map-spec document.
class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Invalid numeric configuration (resolutions, budgets, windows).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite coordinate showed up during iteration.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, long long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
    long long step() const noexcept { return step_; }

private:
    long long step_;
};

class EmptyMaskError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-chain search hit its shift-accumulator bound without a conclusion.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dtrot
