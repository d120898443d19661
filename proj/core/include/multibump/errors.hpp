#pragma once

#include <stdexcept>
#include <string>

namespace multibump {

/// Failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
    Spec,          // malformed input, violated precondition
    Numerical,     // integrator / solver fault, magnitude fault
    Verification,  // a checked property did not hold
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Short machine-readable tag, e.g. "MAGNITUDE_FAULT".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

inline Error spec_error(const std::string& what) {
    return Error(ErrorKind::Spec, "SPEC_ERROR", what);
}

inline Error numerical_fault(std::string code, const std::string& what) {
    return Error(ErrorKind::Numerical, std::move(code), what);
}

inline Error verification_failure(std::string code, const std::string& what) {
    return Error(ErrorKind::Verification, std::move(code), what);
}

}  // namespace multibump
