#pragma once

#include <vector>

#include "semr/environment.hpp"
#include "semr/numkit.hpp"
#include "semr/policies.hpp"

namespace semr {

struct MeanWithSe {
  double value = 0.0;
  double se = 0.0;
};

/** Count-based regret (1/n^2) sum_i Delta_i * mean_count_i.
 *  Throws CountMismatchError unless the mean counts sum to n (tol 1e-6 * n). */
double count_based_regret(const GapProfile& gaps, const std::vector<double>& mean_counts,
                          long long n);

/** MSE-based regret: mean ||theta_hat - theta||^2 - Tr(Sigma*)/n, with the
 *  standard error of the replication mean. */
MeanWithSe mse_based_regret(const std::vector<std::vector<double>>& theta_hats,
                            const std::vector<double>& theta, double optimal_trace,
                            long long n);

/** Tr( [ sum_i w_i I_i ]^{-1} ) for nonnegative weights w.
 *  Throws SingularMatrixError when the weighted information is singular. */
double plugin_variance_trace(const std::vector<PsdMatrix>& fishers,
                             const std::vector<double>& weights);

/** Information regret R_I = Tr([sum_i mean_count_i I_i]^{-1}) - Tr([n I_*]^{-1}).
 *  Both terms go through plugin_variance_trace, so an allocation that matches
 *  the oracle's produces an exact 0. */
double information_regret(const std::vector<PsdMatrix>& fishers,
                          const std::vector<double>& mean_counts, int best_arm,
                          long long n);

/** Everything the laboratory reports about one cell of a sweep. */
struct RegretReport {
  long long n = 0;
  int replications = 0;

  double count_based = 0.0, count_based_se = 0.0;
  double mse_raw = 0.0, mse_raw_se = 0.0;          // mean ||theta_hat - theta||^2
  double mse_based = 0.0, mse_based_se = 0.0;
  double r_info = 0.0, r_info_se = 0.0;
  double r_thetatilde = 0.0, r_thetatilde_se = 0.0;
  double dec1_second_term = 0.0, dec1_second_se = 0.0;
  double plugin_trace = 0.0;                        // Tr([sum_i mean_count_i I_i]^{-1})
  double identity_gap = 0.0;                        // |r_thetatilde + r_info - mse_based|

  std::vector<double> mean_counts;
  std::vector<double> mean_count_se;
};

/** Builds the full report: both regret definitions, the two-term decomposition
 *  R = R_thetatilde + R_I, and per-arm mean counts, all with standard errors.
 *  R_I's standard error comes from a delta-method linearisation in the counts;
 *  R_thetatilde's from the per-replication residual of MSE minus that
 *  linearisation. Requires at least two replications. */
RegretReport decomposition_report(const GapProfile& gaps,
                                  const std::vector<PsdMatrix>& fishers,
                                  const ReplicationSet& reps,
                                  const std::vector<double>& theta);

}  // namespace semr
