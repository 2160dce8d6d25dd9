#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowvs {

// Bad arguments: non-finite twists, non-positive depth, invalid poses...
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A 3D point with Z <= 0 was passed to the pinhole projection.
class BehindCamera : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed .flo / .pfm / CSV input. `offset()` is the byte offset (or line
// number for text formats) where parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormat : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few valid features (or an all-zero Jacobian) to compute a twist.
class DegenerateObservation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditioned : public std::runtime_error {
 public:
  IllConditioned(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class TaskGenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable provider file. `iteration()` is -1 when the failure
// is not tied to a servo iteration.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, long iteration = -1)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace flowvs
