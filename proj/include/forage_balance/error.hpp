#pragma once

#include <stdexcept>
#include <string>

namespace forage {

/// Bad input: malformed level text, out-of-range action, invalid config.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A level that violates the playability contract was handed to the simulator.
class UnplayableLevel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation called in a state where it is not allowed (step after done, ...).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite loss or parameters during training.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace forage
