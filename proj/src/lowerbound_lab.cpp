#include "semr/lowerbound_lab.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "semr/parallel.hpp"
#include "semr/regret.hpp"

namespace semr {

double lipschitz_constant(double gamma) { return 1.0 / (gamma * gamma); }

double fisher_info_variance(double sigma1) { return 1.0 / (2.0 * sigma1 * sigma1); }

double c1_constant(double sigma1, double gamma) {
  const double l = lipschitz_constant(gamma);
  return fisher_info_variance(sigma1) / (l * l);
}

double c2_constant(int k, double c1) {
  return std::sqrt(static_cast<double>(k - 1) / c1) / (4.0 * std::numbers::e);
}

double c3_constant(int k, double lipschitz, double i_sigma1, double i1_theta) {
  return lipschitz * std::sqrt(static_cast<double>(k - 1)) /
         (4.0 * std::numbers::e * std::sqrt(i_sigma1) * i1_theta * i1_theta);
}

LowerBoundPair build_pair(long long n, int k, double sigma1, double gamma) {
  if (k < 2) throw DimensionError("lower-bound pair needs k >= 2");
  if (n < 1) throw HorizonTooSmallError("lower-bound pair needs n >= 1");
  if (!(sigma1 > 0.0)) throw NonPositiveVarianceError("sigma1 must be positive");
  if (!(gamma > 0.0)) throw SemrError("gamma must be positive");

  LowerBoundPair p;
  p.n = n;
  p.k = k;
  p.gamma = gamma;
  p.sigma1 = sigma1;
  p.lipschitz = lipschitz_constant(gamma);
  p.i_sigma1 = fisher_info_variance(sigma1);
  p.c1 = c1_constant(sigma1, gamma);
  p.lambda = std::sqrt(static_cast<double>(k - 1) / (static_cast<double>(n) * p.c1));

  const double info1 = 1.0 / sigma1;
  if (info1 - p.lambda <= 0.0)
    throw LambdaTooLargeError("Lambda = " + std::to_string(p.lambda) +
                              " reaches the information boundary 1/sigma1");
  p.sigma_c = 1.0 / (info1 - p.lambda);
  p.sigma_ss = 1.0 / (info1 + p.lambda);
  if (sigma1 > gamma) throw GammaViolatedError(0, sigma1, gamma);
  if (p.sigma_c > gamma) throw GammaViolatedError(1, p.sigma_c, gamma);

  p.weak_arm = 1;
  p.c2 = c2_constant(k, p.c1);
  p.c3 = c3_constant(k, p.lipschitz, p.i_sigma1, info1);
  const double diff = p.sigma_ss - sigma1;
  p.tilde_lambda_bound = p.i_sigma1 * diff * diff;
  return p;
}

EnvironmentSpec nu_environment(const LowerBoundPair& pair, double theta) {
  std::vector<PsdMatrix> covs;
  covs.reserve(pair.k);
  covs.push_back(PsdMatrix::diagonal({pair.sigma1}));
  for (int i = 1; i < pair.k; ++i) covs.push_back(PsdMatrix::diagonal({pair.sigma_c}));
  return build_environment({theta}, std::move(covs), pair.gamma);
}

EnvironmentSpec nu_prime_environment(const LowerBoundPair& pair, int weak_arm,
                                     double theta) {
  if (weak_arm < 1 || weak_arm >= pair.k)
    throw DimensionError("weak arm must be one of the suboptimal arms of nu");
  std::vector<PsdMatrix> covs;
  covs.reserve(pair.k);
  covs.push_back(PsdMatrix::diagonal({pair.sigma1}));
  for (int i = 1; i < pair.k; ++i)
    covs.push_back(PsdMatrix::diagonal({i == weak_arm ? pair.sigma_ss : pair.sigma_c}));
  return build_environment({theta}, std::move(covs), pair.gamma);
}

double kl_same_mean_gaussian(double var1, double var2) {
  if (!(var1 > 0.0) || !(var2 > 0.0))
    throw NonPositiveVarianceError("variances must be positive");
  return 0.5 * (std::log(var2 / var1) + var1 / var2 - 1.0);
}

namespace {

struct ArmCountStats {
  double mean = 0.0;
  double se = 0.0;
};

ArmCountStats count_stats(const ReplicationSet& runs, int arm) {
  const size_t r = runs.counts.size();
  long long total = 0;
  for (const auto& c : runs.counts) total += c[arm];
  ArmCountStats s;
  s.mean = static_cast<double>(total) / static_cast<double>(r);
  double ss = 0.0;
  for (const auto& c : runs.counts) {
    const double d = static_cast<double>(c[arm]) - s.mean;
    ss += d * d;
  }
  if (r > 1)
    s.se = std::sqrt(ss / static_cast<double>(r - 1) / static_cast<double>(r));
  return s;
}

int weak_arm_of(const ReplicationSet& runs) {
  int best = 1;
  double best_mean = count_stats(runs, 1).mean;
  for (int j = 2; j < runs.k; ++j) {
    const double m = count_stats(runs, j).mean;
    if (m < best_mean) {
      best = j;
      best_mean = m;
    }
  }
  return best;
}

/** Additive information regret sum_i mean[T_i] * (I_best - I_i) with its SE,
 *  for a d=1 environment. */
struct AdditiveRegret {
  double value = 0.0;
  double se = 0.0;
};

AdditiveRegret additive_info_regret(const EnvironmentSpec& env,
                                    const ReplicationSet& runs) {
  std::vector<double> info(env.k);
  for (int i = 0; i < env.k; ++i) info[i] = 1.0 / env.covariances[i].matrix()(0, 0);
  int best = 0;
  for (int i = 1; i < env.k; ++i)
    if (info[i] > info[best]) best = i;

  const size_t r = runs.counts.size();
  std::vector<double> per_rep(r);
  for (size_t j = 0; j < r; ++j) {
    double v = 0.0;
    for (int i = 0; i < env.k; ++i)
      v += static_cast<double>(runs.counts[j][i]) * (info[best] - info[i]);
    per_rep[j] = v;
  }
  AdditiveRegret out;
  for (double v : per_rep) out.value += v;
  out.value /= static_cast<double>(r);
  double ss = 0.0;
  for (double v : per_rep) {
    const double d = v - out.value;
    ss += d * d;
  }
  if (r > 1)
    out.se = std::sqrt(ss / static_cast<double>(r - 1) / static_cast<double>(r));
  return out;
}

double realized_info_regret(const EnvironmentSpec& env, const ReplicationSet& runs) {
  std::vector<PsdMatrix> fishers;
  fishers.reserve(env.k);
  for (int i = 0; i < env.k; ++i) fishers.push_back(fisher_info(env, i));
  int best = 0;
  for (int i = 1; i < env.k; ++i)
    if (env.traces[i] < env.traces[best]) best = i;

  const size_t r = runs.counts.size();
  std::vector<double> mean_counts(env.k, 0.0);
  for (const auto& c : runs.counts)
    for (int i = 0; i < env.k; ++i) mean_counts[i] += static_cast<double>(c[i]);
  for (double& m : mean_counts) m /= static_cast<double>(r);
  return information_regret(fishers, mean_counts, best, runs.n);
}

double event_frequency_t1_low(const ReplicationSet& runs) {
  long long hits = 0;
  for (const auto& c : runs.counts)
    if (2 * c[0] <= runs.n) ++hits;
  return static_cast<double>(hits) / static_cast<double>(runs.counts.size());
}

double binomial_se(double p, size_t trials) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace

WeakArmResult find_weak_arm(const PolicySpec& policy, const EnvironmentSpec& nu,
                            long long n, int replications, uint64_t root_seed,
                            uint64_t stream_block, int workers) {
  if (nu.k < 2) throw DimensionError("find_weak_arm needs k >= 2");
  const ReplicationSet runs =
      run_replications(nu, policy, n, replications, root_seed, stream_block, workers);
  WeakArmResult w;
  w.arm = weak_arm_of(runs);
  const ArmCountStats s = count_stats(runs, w.arm);
  w.mean_count = s.mean;
  w.se = s.se;
  w.pigeonhole_bound = static_cast<double>(n) / static_cast<double>(nu.k - 1);
  w.pigeonhole_ok = w.mean_count <= w.pigeonhole_bound + 3.0 * w.se;
  return w;
}

BhResult bh_inequality_check(double p, double q, double kl, double se_p, double se_q) {
  BhResult r;
  r.p = p;
  r.q = q;
  r.kl = kl;
  r.threshold = 0.5 * std::exp(-kl);
  r.pooled_se = std::sqrt(se_p * se_p + se_q * se_q);
  r.pass = p + q >= r.threshold - 3.0 * r.pooled_se;
  return r;
}

LowerBoundVerdict verdict(const PolicySpec& policy, const LowerBoundPair& pair,
                          int replications, uint64_t root_seed, uint64_t stream_block,
                          int workers) {
  LowerBoundVerdict v;
  v.pair = pair;
  v.policy = policy.kind;

  const EnvironmentSpec nu = nu_environment(pair);
  const ReplicationSet runs_nu = run_replications(nu, policy, pair.n, replications,
                                                  root_seed, stream_block, workers);
  v.weak_arm = weak_arm_of(runs_nu);

  const EnvironmentSpec nu_prime = nu_prime_environment(pair, v.weak_arm);
  const ReplicationSet runs_np = run_replications(
      nu_prime, policy, pair.n, replications, root_seed, stream_block + 1, workers);

  const AdditiveRegret a_nu = additive_info_regret(nu, runs_nu);
  const AdditiveRegret a_np = additive_info_regret(nu_prime, runs_np);
  v.r_minus_nu = a_nu.value;
  v.r_minus_nu_se = a_nu.se;
  v.r_minus_nuprime = a_np.value;
  v.r_minus_nuprime_se = a_np.se;
  v.sum = a_nu.value + a_np.value;
  v.threshold = pair.c2 * std::sqrt(static_cast<double>(pair.n));
  v.pooled_se = std::sqrt(a_nu.se * a_nu.se + a_np.se * a_np.se);
  v.pass = v.sum >= v.threshold - 3.0 * v.pooled_se;

  v.floor = pair.c3 * std::pow(static_cast<double>(pair.n), -1.5);
  v.r_info_nu = realized_info_regret(nu, runs_nu);
  v.r_info_nuprime = realized_info_regret(nu_prime, runs_np);

  v.mean_t_weak_nu = count_stats(runs_nu, v.weak_arm).mean;
  const double p = event_frequency_t1_low(runs_nu);
  const double q = 1.0 - event_frequency_t1_low(runs_np);
  const double kl_arm = kl_same_mean_gaussian(pair.sigma_c, pair.sigma_ss);
  v.bh = bh_inequality_check(p, q, v.mean_t_weak_nu * kl_arm,
                             binomial_se(p, runs_nu.counts.size()),
                             binomial_se(q, runs_np.counts.size()));
  return v;
}

namespace {

struct LogRatioObserver final : PullObserver {
  int h = 0;
  double theta = 0.0;
  double log_term = 0.0;  // 0.5*ln(v2/v1)
  double coef = 0.0;      // 0.5*(1/v2 - 1/v1)
  double sum = 0.0;
  void on_pull(long long, int arm, const std::vector<double>& x) override {
    if (arm != h) return;
    const double d = x[0] - theta;
    sum += log_term + coef * d * d;
  }
};

}  // namespace

DivergenceCheck divergence_decomposition_check(const PolicySpec& policy,
                                               const EnvironmentSpec& nu,
                                               const EnvironmentSpec& nu_prime,
                                               long long n, int replications,
                                               uint64_t root_seed, uint64_t stream_block,
                                               int workers) {
  if (nu.k != nu_prime.k || nu.d != 1 || nu_prime.d != 1)
    throw DimensionError("divergence check needs two scalar environments of equal k");

  int h = -1;
  for (int i = 0; i < nu.k; ++i) {
    if (nu.covariances[i].matrix()(0, 0) != nu_prime.covariances[i].matrix()(0, 0)) {
      if (h >= 0) throw SemrError("environments differ at more than one arm");
      h = i;
    }
  }
  const bool identical = h < 0;
  if (identical) h = 0;  // any arm: every per-pull log ratio is exactly zero

  const double v1 = nu.covariances[h].matrix()(0, 0);
  const double v2 = nu_prime.covariances[h].matrix()(0, 0);
  const double kl = kl_same_mean_gaussian(v1, v2);

  std::vector<double> sums(replications);
  std::vector<long long> t_weak(replications);
  parallel_for(replications, workers, [&](long long r) {
    RngStream rng(root_seed, (stream_block << 32) | static_cast<uint64_t>(r));
    LogRatioObserver obs;
    obs.h = h;
    obs.theta = nu.theta[0];
    obs.log_term = 0.5 * std::log(v2 / v1);
    obs.coef = 0.5 * (1.0 / v2 - 1.0 / v1);
    EpisodeResult ep = run_episode(nu, policy, n, rng, &obs);
    sums[r] = obs.sum;
    t_weak[r] = ep.counts[h];
  });

  DivergenceCheck out;
  long long total_t = 0;
  for (long long t : t_weak) total_t += t;
  out.mean_t_weak = static_cast<double>(total_t) / static_cast<double>(replications);
  out.analytic = out.mean_t_weak * kl;
  double mc = 0.0;
  for (double s : sums) mc += s;
  mc /= static_cast<double>(replications);
  out.monte_carlo = mc;
  double ss = 0.0;
  for (double s : sums) {
    const double d = s - mc;
    ss += d * d;
  }
  if (replications > 1)
    out.mc_se = std::sqrt(ss / static_cast<double>(replications - 1) /
                          static_cast<double>(replications));
  if (out.analytic == 0.0) {
    out.relative_error = out.monte_carlo == 0.0
                             ? 0.0
                             : std::numeric_limits<double>::infinity();
  } else {
    out.relative_error = std::fabs(out.monte_carlo - out.analytic) / std::fabs(out.analytic);
  }
  return out;
}

FloorCheck r_i_floor(const LowerBoundVerdict& v, double i1_theta) {
  FloorCheck f;
  f.floor = c3_constant(v.pair.k, v.pair.lipschitz, v.pair.i_sigma1, i1_theta) *
            std::pow(static_cast<double>(v.pair.n), -1.5);
  f.realized_max = std::fmax(v.r_info_nu, v.r_info_nuprime);
  f.ok = f.realized_max >= f.floor;
  return f;
}

}  // namespace semr
