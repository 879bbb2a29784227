#pragma once

#include <stdexcept>
#include <string>

namespace polymer {

// Base for all recoverable library errors. Precondition violations are
// reported as InvalidArgument so callers can tell bad input from numerical
// failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Grid too coarse for the kernel width or the diagonal cutoff. `parameter`
// names the limiting quantity ("a" or "eps").
class ResolutionError : public InvalidArgument {
public:
    ResolutionError(const std::string& parameter, const std::string& what)
        : InvalidArgument(what), parameter_(parameter) {}
    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

// Adaptive quadrature ran out of budget; carries the best estimate reached.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate, double error_estimate)
        : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}
    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

}  // namespace polymer
