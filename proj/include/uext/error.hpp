#pragma once

#include <stdexcept>
#include <string>

namespace uext {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text (.frame/.abp files, formula strings).
struct ParseError : Error {
    int line = 0;
    ParseError(int line_no, const std::string& msg)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// A precondition on arguments was violated (unknown node, universe mismatch, ...).
struct InputError : Error {
    using Error::Error;
};

/// A configured resource cap was exceeded. Never silent: callers either
/// surface this as an Overflow verdict or abort with the limit in the message.
struct LimitError : Error {
    using Error::Error;
};

}  // namespace uext
