#pragma once

#include <stdexcept>
#include <string>

namespace memix {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failures: missing file, short write, failed rename.
class IoError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrc {
  bad_magic,
  unsupported_version,
  truncated,
  trailing_data,
  shape_mismatch,
  bad_field,
  non_finite,
};

const char* to_string(FormatErrc code) noexcept;

// A file or buffer that does not follow one of the binary formats.
class FormatError : public Error {
 public:
  FormatError(FormatErrc code, const std::string& what)
      : Error(std::string(to_string(code)) + ": " + what), code_(code) {}

  FormatErrc code() const noexcept { return code_; }

 private:
  FormatErrc code_;
};

// Invalid configuration or arguments supplied by a caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A precondition on an operation was violated (e.g. out-of-range token).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced during inference; indicates corrupt weights.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace memix
