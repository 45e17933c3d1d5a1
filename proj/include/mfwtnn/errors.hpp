#pragma once

#include <stdexcept>
#include <string>

namespace mfwtnn {

/// Bad argument: invalid mode index, negative threshold, dimension mismatch.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inverse FFT of a spectrum that is not conjugate-symmetric.
class SymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decomposition failure or non-finite data.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown key in a key-value config file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfwtnn
