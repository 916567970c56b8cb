#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semr/environment.hpp"
#include "semr/numkit.hpp"

namespace semr {

/** Constants of the confidence schedule for dimension d and budget gamma. */
struct ScheduleConstants {
  double alpha = 0.0;  // max{(d-1)^2, 2}
  double c = 0.0;      // 1/(1+sqrt(alpha)); satisfies c <= 1/d
  double c_d = 0.0;    // 8*gamma^2*(1+sqrt(alpha))^2
};

ScheduleConstants schedule_constants(int d, double gamma);

/** Certificate for one suboptimal arm: the pull-count threshold machinery and
 *  the comparison of the predicted count ceiling against an empirical mean. */
struct BoundCertificate {
  int arm = 0;
  double gap = 0.0;
  double alpha = 0.0;
  double c = 0.0;
  double c_d = 0.0;
  double u = 0.0;            // ceil(8*gamma^2*log(2/delta)/((1-c)^2*gap^2)) + 1
  double eta = 0.0;          // gap - gamma*sqrt(8*log(2/delta)/(u-1)); eta >= c*gap
  double count_bound = 0.0;  // c_d*log(n)/gap^2 + 5
  double empirical_mean = 0.0;
  double empirical_se = 0.0;
  bool pass = false;  // empirical_mean <= count_bound + 3*empirical_se
};

/** Certificate for a single arm; ZeroGapError unless gap > 0. The empirical
 *  mean/se come from episodes run with the default delta schedule at this n. */
BoundCertificate certificate_for_arm(const GapProfile& gaps, int d, double gamma,
                                     long long n, int arm, double empirical_mean,
                                     double empirical_se);

/** Certificates for every suboptimal arm (zero-gap arms are skipped). */
std::vector<BoundCertificate> certificate(const GapProfile& gaps, int d, double gamma,
                                          long long n,
                                          const std::vector<double>& mean_counts,
                                          const std::vector<double>& count_se);

/** Right-hand side of the finite-sample regret bound:
 *  5*sum_i gap_i/n^2 + 4*gamma*(1+sqrt(alpha))*sqrt(2k*log(n))/n^{3/2}. */
double regret_threshold_bound(const GapProfile& gaps, int d, double gamma, long long n);

/** One cell of the trace-concentration experiment. */
struct ConcentrationTrial {
  std::string sigma_label;
  long long m = 0;
  double epsilon = 0.0;
  double empirical_tail = 0.0;  // fraction of trials with |Z| > eps*||Sigma||_F
  double bound = 0.0;           // 2*exp(-((m-1)/8)*min(eps^2, eps*F/S))
  long long trials = 0;
  bool pass = false;  // empirical <= bound + 3*binomial SE
};

/** Tail frequencies of Z = Tr(Sigma) - Tr(Sigma_hat) over `trials` draws of
 *  m samples each, against the lemma bound, for the full (m, eps) grid.
 *  Sigma_hat uses the unbiased 1/(m-1) normalisation. Draws depend only on
 *  (root_seed, stream_block, m index, trial), so cells of one m share data
 *  across eps and runs are reproducible for any worker count. */
std::vector<ConcentrationTrial> concentration_sweep(
    const PsdMatrix& sigma, const std::string& sigma_label,
    const std::vector<long long>& m_grid, const std::vector<double>& eps_grid,
    long long trials, uint64_t root_seed, uint64_t stream_block, int workers);

}  // namespace semr
