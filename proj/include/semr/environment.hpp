#pragma once

#include <vector>

#include "semr/numkit.hpp"

namespace semr {

/** A k-armed Gaussian environment: every arm shares the mean theta and arm i
 *  samples from N(theta, Sigma_i). gamma is the common Frobenius budget all
 *  arm covariances must respect. Cholesky factors and traces are precomputed. */
struct EnvironmentSpec {
  int k = 0;
  int d = 0;
  std::vector<double> theta;
  std::vector<PsdMatrix> covariances;
  double gamma = 0.0;

  // Derived, filled in by build_environment.
  std::vector<Matrix> chol_factors;
  std::vector<double> traces;
};

/** Validates and finishes an environment: all covariances square of one
 *  dimension, theta of matching length, ||Sigma_i||_F <= gamma for every arm
 *  (GammaViolatedError otherwise), factors and traces cached. */
EnvironmentSpec build_environment(std::vector<double> theta,
                                  std::vector<PsdMatrix> covariances, double gamma);

/** One sample from arm `arm`. */
std::vector<double> pull(const EnvironmentSpec& env, int arm, RngStream& rng);

/** Allocation-free pull; z is scratch of size d. */
void pull_into(const EnvironmentSpec& env, int arm, RngStream& rng,
               std::vector<double>& z, std::vector<double>& out);

/** Fisher information of arm i about theta: Sigma_i^{-1}.
 *  Throws SingularMatrixError for singular covariances. */
PsdMatrix fisher_info(const EnvironmentSpec& env, int arm);

/** Static geometry of an environment: which arm is best and by how much. */
struct GapProfile {
  int best_arm = 0;                   // argmin_i Tr(Sigma_i), lowest index on ties
  double optimal_trace = 0.0;         // Tr(Sigma_{best})
  std::vector<double> gaps;           // Delta_i = Tr(Sigma_i) - optimal_trace
  std::vector<double> fisher_traces;  // Tr(Sigma_i^{-1}); +inf for singular arms
  // True when the trace-minimising arm also maximises the Fisher trace. The
  // two optimality notions coincide for d = 1 but can part ways above it.
  bool definitions_agree = true;
};

GapProfile gap_profile(const EnvironmentSpec& env);

/** One recorded pull, for history-capturing runs. */
struct PullRecord {
  long long round;  // 1-based round index
  int arm;          // 0-based arm
  std::vector<double> sample;
};

}  // namespace semr
