#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace megp {

/// Bad caller input: empty data, length mismatch, unknown column, out-of-range config.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A node sequence that does not form a well-formed expression tree.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// S-expression syntax error; `position` is the byte offset into the parsed text.
class ParseError : public InputError {
public:
    ParseError(const std::string& message, std::size_t position)
        : InputError(message + " at position " + std::to_string(position))
        , position_(position)
    {
    }

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

} // namespace megp
