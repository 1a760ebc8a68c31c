#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wdst {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (shape mismatch, bad range, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (unknown filter family, bad weight spec, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem or codec failure; carries the offending path in the message.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed binary weight file; records the byte offset of the problem.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t offset)
        : Error(msg + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace wdst
