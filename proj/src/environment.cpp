#include "semr/environment.hpp"

#include <cmath>
#include <limits>

namespace semr {

EnvironmentSpec build_environment(std::vector<double> theta,
                                  std::vector<PsdMatrix> covariances, double gamma) {
  if (covariances.empty()) throw EmptyInputError("environment needs at least one arm");
  if (!(gamma > 0.0)) throw SemrError("gamma must be positive");

  EnvironmentSpec env;
  env.k = static_cast<int>(covariances.size());
  env.d = covariances.front().dim();
  for (const auto& c : covariances)
    if (c.dim() != env.d) throw DimensionError("arm covariances differ in dimension");
  if (theta.empty()) theta.assign(env.d, 0.0);
  if (static_cast<int>(theta.size()) != env.d)
    throw DimensionError("theta length does not match covariance dimension");

  env.theta = std::move(theta);
  env.covariances = std::move(covariances);
  env.gamma = gamma;

  env.chol_factors.reserve(env.k);
  env.traces.reserve(env.k);
  for (int i = 0; i < env.k; ++i) {
    const double frob = frobenius_norm(env.covariances[i].matrix());
    if (frob > gamma) throw GammaViolatedError(i, frob, gamma);
    env.chol_factors.push_back(cholesky(env.covariances[i]));
    env.traces.push_back(trace(env.covariances[i].matrix()));
  }
  return env;
}

std::vector<double> pull(const EnvironmentSpec& env, int arm, RngStream& rng) {
  return mvn_sample(env.theta, env.chol_factors[arm], rng);
}

void pull_into(const EnvironmentSpec& env, int arm, RngStream& rng,
               std::vector<double>& z, std::vector<double>& out) {
  mvn_sample_into(env.theta, env.chol_factors[arm], rng, z, out);
}

PsdMatrix fisher_info(const EnvironmentSpec& env, int arm) {
  return PsdMatrix::from_matrix(psd_inverse(env.covariances[arm]));
}

GapProfile gap_profile(const EnvironmentSpec& env) {
  GapProfile g;
  g.best_arm = 0;
  for (int i = 1; i < env.k; ++i)
    if (env.traces[i] < env.traces[g.best_arm]) g.best_arm = i;
  g.optimal_trace = env.traces[g.best_arm];

  g.gaps.resize(env.k);
  g.fisher_traces.resize(env.k);
  for (int i = 0; i < env.k; ++i) {
    g.gaps[i] = env.traces[i] - g.optimal_trace;
    try {
      g.fisher_traces[i] = trace(psd_inverse(env.covariances[i]));
    } catch (const SingularMatrixError&) {
      g.fisher_traces[i] = std::numeric_limits<double>::infinity();
    }
  }

  int fisher_best = 0;
  for (int i = 1; i < env.k; ++i)
    if (g.fisher_traces[i] > g.fisher_traces[fisher_best]) fisher_best = i;
  g.definitions_agree = (fisher_best == g.best_arm);
  return g;
}

}  // namespace semr
