#pragma once

#include <stdexcept>
#include <string>

namespace semr {

/** Base class for all library errors. */
struct SemrError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** A matrix expected to be symmetric PSD failed the check. */
struct NotPsdError : SemrError {
  using SemrError::SemrError;
};

/** A matrix required to be invertible had a zero Cholesky pivot. */
struct SingularMatrixError : SemrError {
  using SemrError::SemrError;
};

/** Dimension mismatch between operands. */
struct DimensionError : SemrError {
  using SemrError::SemrError;
};

/** An arm covariance violates the Frobenius budget ||Sigma_i||_F <= gamma.
 *  The stored index is 0-based; messages use the 1-based arm numbering that
 *  all output files use. */
struct GammaViolatedError : SemrError {
  int arm;
  GammaViolatedError(int arm_, double frob, double gamma)
      : SemrError("arm " + std::to_string(arm_ + 1) + " has Frobenius norm " +
                  std::to_string(frob) + " exceeding budget " + std::to_string(gamma)),
        arm(arm_) {}
};

/** Horizon below the minimum the operation supports. */
struct HorizonTooSmallError : SemrError {
  using SemrError::SemrError;
};

/** Episode counts failed a consistency check (e.g. do not sum to n). */
struct CountMismatchError : SemrError {
  using SemrError::SemrError;
};

/** Requested a per-arm certificate for an arm with zero gap. */
struct ZeroGapError : SemrError {
  using SemrError::SemrError;
};

/** Lower-bound construction infeasible: perturbation exceeds the Fisher budget. */
struct LambdaTooLargeError : SemrError {
  using SemrError::SemrError;
};

/** A variance parameter was zero or negative. */
struct NonPositiveVarianceError : SemrError {
  using SemrError::SemrError;
};

/** An operation that needs data received an empty input. */
struct EmptyInputError : SemrError {
  using SemrError::SemrError;
};

/** Config file is syntactically malformed. */
struct ConfigParseError : SemrError {
  int line;  // 1-based line number of the offending entry
  ConfigParseError(int line_, const std::string& what_)
      : SemrError("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

/** Config file parsed but is semantically invalid. */
struct ConfigValidationError : SemrError {
  using SemrError::SemrError;
};

/** Too few usable points to fit a slope. */
struct SlopeFitError : SemrError {
  using SemrError::SemrError;
};

}  // namespace semr
