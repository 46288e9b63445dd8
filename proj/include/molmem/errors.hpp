#pragma once

#include <stdexcept>
#include <string>

namespace molmem {

// Bad configuration or violated precondition on user-supplied input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical contract (basis cutoff, step convergence, physicality) failed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No re-emitted pulse above the detection floor.
class NoEmissionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace molmem
