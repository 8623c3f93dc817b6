#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Base for all errors raised by the library. The CLI maps each subclass to
/// its own exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative method did not converge or a numerical result is unusable.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Configuration or file-format problem tied to a source location.
/// `line` is 1-based; 0 means the value came from the command line.
class ParseError : public Error {
public:
    ParseError(std::string source, int line, int column, const std::string& message)
        : Error(format(source, line, column, message)),
          source_(std::move(source)), line_(line), column_(column) {}

    const std::string& source() const noexcept { return source_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    static std::string format(const std::string& source, int line, int column,
                              const std::string& message) {
        std::string where = source.empty() ? std::string("<input>") : source;
        if (line > 0) {
            where += ":" + std::to_string(line);
            if (column > 0) where += ":" + std::to_string(column);
        }
        return where + ": " + message;
    }

    std::string source_;
    int line_;
    int column_;
};

}  // namespace spdc
