#pragma once

#include <stdexcept>
#include <string>

namespace wishful {

/// Bad caller input: dimension mismatch, non-probability vectors, malformed files.
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The numerical machinery could not produce a consistent answer.
class solver_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wishful
