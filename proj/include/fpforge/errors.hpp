#pragma once

#include <stdexcept>
#include <string>

namespace fpforge {

// Bad arguments or malformed values supplied by the caller. CLI maps this
// (and ParseError) to exit code 1.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents: images, manifests, checkpoints, configs.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem and stream failures. CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fpforge
