#pragma once

#include <stdexcept>
#include <string>

namespace sdp {

/// Bad arguments or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File system or format failures. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text parse failure carrying the offending 1-based line number.
class ParseError : public IoError {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : IoError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace sdp
