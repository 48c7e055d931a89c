#pragma once

#include <stdexcept>
#include <string>

namespace pccl {

/// Raised when arguments violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while decoding one of the binary interchange files.
class FormatError : public std::runtime_error {
public:
  enum class Kind { bad_magic, version_mismatch, truncated, dim_mismatch, corrupt, io };

  FormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

} // namespace pccl
