#pragma once

#include <stdexcept>
#include <string>

namespace sidtw {

// Malformed user input: bad files, bad flags, violated preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The computation itself broke down (degenerate direction, vanishing mass,
// bracket failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateDirectionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RegionMassUnderflowError : public NumericalError {
public:
    RegionMassUnderflowError(const std::string& what, double log_mass)
        : NumericalError(what), log_mass_(log_mass) {}

    double log_mass() const noexcept { return log_mass_; }

private:
    double log_mass_;
};

// Broken internal consistency, e.g. the observed data falling outside its
// own selection event.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace sidtw
