#pragma once

#include <cstdint>
#include <vector>

#include "semr/environment.hpp"
#include "semr/policies.hpp"

namespace semr {

/** The adversarial scalar environment pair of the lower-bound construction.
 *  All sigma fields are VARIANCES: the Fisher information of a mean under
 *  N(theta, sigma) is 1/sigma, and the construction perturbs arms by +-Lambda
 *  in that information coordinate. */
struct LowerBoundPair {
  long long n = 0;
  int k = 0;
  double gamma = 0.0;
  double sigma1 = 0.0;    // arm 1 variance in nu
  double sigma_c = 0.0;   // arms 2..k variance in nu: 1/sigma_c = 1/sigma1 - Lambda
  double sigma_ss = 0.0;  // perturbed arm variance in nu': 1/sigma_ss = 1/sigma1 + Lambda
  int weak_arm = 1;       // 0-based; default arm 2, re-chosen per policy later

  double lambda = 0.0;     // sqrt((k-1)/(n*c1))
  double lipschitz = 0.0;  // L = 1/gamma^2
  double i_sigma1 = 0.0;   // Fisher info in the variance parameter: 1/(2*sigma1^2)
  double c1 = 0.0;         // i_sigma1 * L^{-2}
  double c2 = 0.0;         // (1/(4e)) * sqrt((k-1)/c1)
  double c3 = 0.0;         // L*sqrt(k-1) / (4e*sqrt(i_sigma1)*(1/sigma1)^2)
  double tilde_lambda_bound = 0.0;  // i_sigma1*(sigma_ss - sigma1)^2
};

double lipschitz_constant(double gamma);
double fisher_info_variance(double sigma1);
double c1_constant(double sigma1, double gamma);
double c2_constant(int k, double c1);
double c3_constant(int k, double lipschitz, double i_sigma1, double i1_theta);

/** Builds the pair for horizon n. Throws LambdaTooLargeError when the
 *  perturbation hits the information boundary (1/sigma1 - Lambda <= 0) and
 *  GammaViolatedError when a resulting variance exceeds gamma. */
LowerBoundPair build_pair(long long n, int k, double sigma1, double gamma);

EnvironmentSpec nu_environment(const LowerBoundPair& pair, double theta = 0.0);
EnvironmentSpec nu_prime_environment(const LowerBoundPair& pair, int weak_arm,
                                     double theta = 0.0);

/** KL(N(mu,var1) || N(mu,var2)) = (ln(var2/var1) + var1/var2 - 1)/2. */
double kl_same_mean_gaussian(double var1, double var2);

struct WeakArmResult {
  int arm = 0;  // 0-based; always >= 1
  double mean_count = 0.0;
  double se = 0.0;
  double pigeonhole_bound = 0.0;  // n/(k-1)
  bool pigeonhole_ok = false;     // mean_count <= n/(k-1) + 3*se
};

/** Least-pulled suboptimal arm of nu under the policy (ties to lowest index),
 *  with the pigeonhole guarantee mean[T_h] <= n/(k-1) checked empirically. */
WeakArmResult find_weak_arm(const PolicySpec& policy, const EnvironmentSpec& nu,
                            long long n, int replications, uint64_t root_seed,
                            uint64_t stream_block, int workers);

struct BhResult {
  double p = 0.0;  // freq of {T_1(n) <= n/2} under nu
  double q = 0.0;  // freq of the complement under nu'
  double kl = 0.0;
  double threshold = 0.0;  // exp(-kl)/2
  double pooled_se = 0.0;
  bool pass = false;  // p + q >= threshold - 3*pooled_se
};

BhResult bh_inequality_check(double p, double q, double kl, double se_p, double se_q);

struct LowerBoundVerdict {
  LowerBoundPair pair;
  PolicyKind policy = PolicyKind::Lcb;
  int weak_arm = 1;

  // Additive information regrets R_I^{(-1)} = sum_i mean[T_i] * (I_best - I_i).
  double r_minus_nu = 0.0, r_minus_nu_se = 0.0;
  double r_minus_nuprime = 0.0, r_minus_nuprime_se = 0.0;
  double sum = 0.0;
  double threshold = 0.0;  // c2 * sqrt(n)
  double pooled_se = 0.0;
  bool pass = false;  // sum >= threshold - 3*pooled_se

  double floor = 0.0;  // c3 * n^{-3/2}

  // Realized multiplicative information regrets, one per environment.
  double r_info_nu = 0.0, r_info_nuprime = 0.0;

  double mean_t_weak_nu = 0.0;  // mean pulls of the weak arm under nu
  BhResult bh;
};

/** Runs the policy on nu, re-targets the weak arm, runs it on nu', and checks
 *  the lower-bound chain: the additive-regret sum against c2*sqrt(n) and the
 *  Bretagnolle-Huber inequality on the {T_1 <= n/2} event. */
LowerBoundVerdict verdict(const PolicySpec& policy, const LowerBoundPair& pair,
                          int replications, uint64_t root_seed, uint64_t stream_block,
                          int workers);

struct DivergenceCheck {
  double analytic = 0.0;     // mean[T_h] * kl(sigma_c, sigma_ss)
  double monte_carlo = 0.0;  // mean over nu-runs of the summed log-likelihood ratio
  double relative_error = 0.0;
  double mc_se = 0.0;
  double mean_t_weak = 0.0;
};

/** Empirical check of the divergence decomposition between nu and nu', which
 *  must differ at exactly one arm. */
DivergenceCheck divergence_decomposition_check(const PolicySpec& policy,
                                               const EnvironmentSpec& nu,
                                               const EnvironmentSpec& nu_prime,
                                               long long n, int replications,
                                               uint64_t root_seed, uint64_t stream_block,
                                               int workers);

struct FloorCheck {
  double floor = 0.0;         // c3 * n^{-3/2}
  double realized_max = 0.0;  // max(r_info_nu, r_info_nuprime)
  bool ok = false;
};

/** The certified regret floor against the realized information regrets. */
FloorCheck r_i_floor(const LowerBoundVerdict& v, double i1_theta);

}  // namespace semr
