#pragma once

#include <stdexcept>
#include <string>

namespace hhesim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ModulusMismatch : public Error {
 public:
  ModulusMismatch() : Error("operands are bound to different moduli") {}
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

// Rejection sampler exceeded its attempt cap.
class StreamFault : public Error {
 public:
  using Error::Error;
};

class EncodingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hhesim
