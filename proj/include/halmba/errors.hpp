#pragma once

#include <stdexcept>
#include <string>

namespace halmba {

/// Invalid or inconsistent configuration input (unknown keys, range or
/// ordering violations, malformed values).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure during a solve or metric extraction (degenerate
/// boundary conditions, undefined metrics).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem or serialization failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace halmba
