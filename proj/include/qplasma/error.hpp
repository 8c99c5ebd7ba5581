#pragma once

#include <stdexcept>
#include <string>

namespace qplasma {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller-supplied value outside an operation's domain. `parameter` names
// the offending input so CLI diagnostics can point at the config key.
class PreconditionError : public Error {
public:
    PreconditionError(std::string parameter, const std::string& message)
        : Error(parameter + ": " + message), parameter_(std::move(parameter)), message_(message) {}

    const std::string& parameter() const noexcept { return parameter_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string parameter_;
    std::string message_;
};

inline void require(bool condition, const char* parameter, const std::string& message) {
    if (!condition) throw PreconditionError(parameter, message);
}

} // namespace qplasma
