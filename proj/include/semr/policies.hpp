#pragma once

#include <cstdint>
#include <vector>

#include "semr/environment.hpp"
#include "semr/numkit.hpp"

namespace semr {

enum class PolicyKind { Lcb, Uniform, Greedy, EpsilonGreedy, Oracle };

enum class CovNormalization { OverT, OverTMinus1 };

struct PolicySpec {
  PolicyKind kind = PolicyKind::Lcb;
  double epsilon = 0.1;  // EpsilonGreedy only
  CovNormalization normalization = CovNormalization::OverT;
};

/** Per-episode learner state shared by the estimate-driven policies.
 *
 *  The confidence schedule sets delta = 2/n^alpha with
 *  alpha = max{(d-1)^2, 2}, so log(2/delta) = alpha * log(n). The log is
 *  stored directly: for large d and n, delta itself underflows to zero long
 *  before the quantity the index needs does. */
struct LcbState {
  int k = 0;
  int d = 0;
  long long horizon = 0;
  long long round = 0;  // pulls made so far
  double gamma = 0.0;
  double alpha = 0.0;
  double delta = 0.0;            // informational; may underflow to 0
  double log_2_over_delta = 0.0;  // alpha * log(horizon), the operative value
  CovNormalization normalization = CovNormalization::OverT;
  std::vector<long long> counts;
  std::vector<StreamingCovariance> covs;
};

LcbState make_lcb_state(int k, int d, long long horizon, double gamma,
                        CovNormalization normalization);

/** Current trace estimate for an arm under the state's normalisation.
 *  Defined as 0 whenever the chosen normalisation has no sample yet
 *  (count == 0, or count == 1 under 1/(T-1)). */
double trace_estimate(const LcbState& state, int arm);

/** Lower-confidence index from raw ingredients:
 *  trace_est - gamma * sqrt(8 * log_2_over_delta / count).
 *  -infinity when count == 0, so unpulled arms are chosen first. */
double lcb_index_value(double trace_est, long long count, double log_2_over_delta,
                       double gamma);

double lcb_index(const LcbState& state, int arm);

/** Next arm for the policy. Ties break to the lowest index. `gaps` is consulted
 *  only by Oracle (which needs to know the best arm) and may be null otherwise.
 *  RNG use: Uniform/Greedy/Oracle/Lcb draw nothing; EpsilonGreedy draws one
 *  uniform for the explore test and, only when exploring, one more for the arm. */
int select_arm(const PolicySpec& policy, const LcbState& state, const GapProfile* gaps,
               RngStream& rng);

/** Folds one observed sample into the state. */
void update(LcbState& state, int arm, const std::vector<double>& sample);

struct EpisodeResult {
  std::vector<long long> counts;   // pulls per arm; sums to n
  std::vector<double> theta_hat;   // mean of all n samples
};

/** Observer hook for per-pull instrumentation (histories, divergence sums). */
struct PullObserver {
  virtual ~PullObserver() = default;
  virtual void on_pull(long long round, int arm, const std::vector<double>& sample) = 0;
};

/** Runs one full episode of `policy` against `env` for n rounds.
 *  Throws HorizonTooSmallError for n < 1. Every sample enters theta_hat with
 *  equal weight 1/n regardless of which arm produced it. */
EpisodeResult run_episode(const EnvironmentSpec& env, const PolicySpec& policy,
                          long long n, RngStream& rng, PullObserver* observer = nullptr);

/** run_episode with the full pull history captured. */
struct EpisodeHistory {
  std::vector<PullRecord> records;
  EpisodeResult result;
};

EpisodeHistory run_episode_with_history(const EnvironmentSpec& env,
                                        const PolicySpec& policy, long long n,
                                        RngStream& rng);

/** Raw per-replication outputs of repeated episodes at one (env, policy, n). */
struct ReplicationSet {
  int k = 0;
  int d = 0;
  long long n = 0;
  std::vector<std::vector<long long>> counts;   // R x k
  std::vector<std::vector<double>> theta_hats;  // R x d
};

/** R independent episodes on a worker pool. Replication r draws from
 *  RngStream(root_seed, (stream_block << 32) | r), and results land in slot r,
 *  so output is identical for every worker count. A sweep uses block 0, which
 *  makes the stream id literally r. */
ReplicationSet run_replications(const EnvironmentSpec& env, const PolicySpec& policy,
                                long long n, int replications, uint64_t root_seed,
                                uint64_t stream_block, int workers);

}  // namespace semr
