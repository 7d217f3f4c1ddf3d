#pragma once

#include <stdexcept>
#include <string>

namespace passrate {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfIntervalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OpenBoundaryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonSimpleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooFewExamplesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LabelRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LengthMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace passrate
