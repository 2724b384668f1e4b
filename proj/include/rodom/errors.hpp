#pragma once

#include <stdexcept>
#include <string>

namespace rodom {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File / format errors
struct MalformedFileError : Error {
  using Error::Error;
};
struct ValueOutOfRangeError : Error {
  using Error::Error;
};
struct NonMonotonicTimeError : Error {
  using Error::Error;
};

// Synthesis
struct EmptyWorldError : Error {
  using Error::Error;
};

// Ego-motion
struct InsufficientDopplerError : Error {
  using Error::Error;
};
struct InvalidEstimateError : Error {
  using Error::Error;
};

// Submap / NDT
struct MotionCountMismatchError : Error {
  using Error::Error;
};
struct EmptyMapError : Error {
  using Error::Error;
};

// Pipeline
struct InsufficientInputError : Error {
  using Error::Error;
};

// Evaluation
struct NoOverlapError : Error {
  using Error::Error;
};
struct TimeAlignmentError : Error {
  using Error::Error;
};

}  // namespace rodom
