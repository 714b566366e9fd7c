#pragma once

#include <stdexcept>
#include <string>

namespace sieve {

// Structural misuse: mismatched ground sets or moduli, bad parameters,
// overlapping partitions. Maps to CLI exit code 2.
class structure_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computed quantity violated a contract that should hold by construction.
// Maps to CLI exit code 2.
class invariant_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// An enumeration or dense computation would exceed its size cap.
// Maps to CLI exit code 3.
class capacity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sieve
