#pragma once

#include <stdexcept>
#include <string>

namespace nvh {

/// Input table/header does not match the expected column layout.
struct schema_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A field could not be parsed or holds a non-finite value.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A categorical selector references an attribute the dataset does not have.
struct selection_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mismatched block/vector sizes.
struct dimension_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A stated precondition was violated by the caller.
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quantity is undefined because a variance (or similar) degenerates to zero.
struct degenerate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A cross-validation partition cannot be formed as requested.
struct partition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete configuration (priors, model wiring, JSON schema).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation applied to a surrogate family it is not defined for.
struct spec_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reports mixed from incompatible datasets.
struct comparison_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Query point outside the fitted frequency-band map.
struct extrapolation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A sampler chain could not be initialized.
struct init_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Normal equations singular or numerically unusable; carries the condition
/// number estimate at the point of failure.
struct conditioning_error : std::runtime_error {
  double condition;
  conditioning_error(const std::string& msg, double cond)
      : std::runtime_error(msg), condition(cond) {}
};

}  // namespace nvh
