#pragma once

#include <stdexcept>
#include <string>

namespace flatcam {

// Violated geometric or numeric precondition (e.g. a depth behind the mask).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Configuration or argument that fails validation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shape mismatch between operator, volume and images.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed on-disk artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flatcam
