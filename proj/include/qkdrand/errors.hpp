#ifndef QKDRAND_ERRORS_HPP
#define QKDRAND_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkdrand {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidCharacter : public Error {
public:
    explicit InvalidCharacter(std::size_t position)
        : Error("invalid character at position " + std::to_string(position)),
          position(position) {}
    std::size_t position;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class TruncatedFile : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class KeyTooShort : public Error {
public:
    using Error::Error;
};

class NonPositiveOutputLength : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class TooFewBits : public Error {
public:
    using Error::Error;
};

class PreconditionFailed : public Error {
public:
    using Error::Error;
};

class PeriodicTemplate : public Error {
public:
    using Error::Error;
};

class InvalidM : public Error {
public:
    using Error::Error;
};

class NetworkError : public Error {
public:
    using Error::Error;
};

class MalformedResponse : public Error {
public:
    using Error::Error;
};

class Timeout : public Error {
public:
    using Error::Error;
};

} // namespace qkdrand

#endif
