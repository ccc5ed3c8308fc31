/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <stdexcept>
#include <string>

namespace splatpart {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateTriangleError : public Error {
public:
    explicit DegenerateTriangleError(const std::string& msg) : Error(msg) {}
};

class TopologyMismatchError : public Error {
public:
    explicit TopologyMismatchError(const std::string& msg) : Error(msg) {}
};

class NumericalOverflowError : public Error {
public:
    explicit NumericalOverflowError(const std::string& msg) : Error(msg) {}
};

class ZeroScaleError : public Error {
public:
    explicit ZeroScaleError(const std::string& msg) : Error(msg) {}
};

/// File-format and argument validation failures. Parse errors carry the byte
/// offset where decoding stopped when it is known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
    ParseError(const std::string& msg, long long byte_offset)
        : Error(msg + " (byte offset " + std::to_string(byte_offset) + ")") {}
};

class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& msg) : Error(msg) {}
};

} // namespace splatpart
