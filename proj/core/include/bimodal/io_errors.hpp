#ifndef BIMODAL_IO_ERRORS_HPP_
#define BIMODAL_IO_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bimodal {

/// Base for failures reading or writing dataset and model files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated input; `offset` is the byte position of the problem.
class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : FormatError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// The file parsed, but its contents violate a structural invariant.
class ValidationError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace bimodal

#endif  // BIMODAL_IO_ERRORS_HPP_
