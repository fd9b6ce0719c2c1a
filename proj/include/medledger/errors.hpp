#pragma once

#include <stdexcept>
#include <string>

namespace medledger {

// Root of every error the library throws. Callers that only need a message
// can catch this; the CLI maps the concrete types to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad length, bad size, bad flag).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Arithmetic domain errors: subtraction underflow, division by zero.
class ArithmeticError : public Error {
 public:
  using Error::Error;
};

// Modular inverse does not exist because gcd(a, m) != 1.
class NoInverse : public ArithmeticError {
 public:
  using ArithmeticError::ArithmeticError;
};

// Malformed serialized data (bad magic, truncated input, trailing bytes).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Ciphertext or stored bytes fail authentication (padding, digest, hash).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// RSA-wrapped session key fails to unwrap: wrong private key or tampering.
class UnwrapError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class PermissionDenied : public Error {
 public:
  using Error::Error;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

// Filesystem failure while persisting state.
class StorageError : public Error {
 public:
  using Error::Error;
};

}  // namespace medledger
