#include <doctest.h>

#include <cmath>
#include <vector>

#include "semr/regret.hpp"

using namespace semr;

namespace {

EnvironmentSpec scalar_env(std::vector<double> variances, double gamma) {
  std::vector<PsdMatrix> covs;
  for (double v : variances) covs.push_back(PsdMatrix::diagonal({v}));
  return build_environment({}, std::move(covs), gamma);
}

std::vector<PsdMatrix> fishers_of(const EnvironmentSpec& env) {
  std::vector<PsdMatrix> f;
  for (int i = 0; i < env.k; ++i) f.push_back(fisher_info(env, i));
  return f;
}

}  // namespace

TEST_CASE("count based regret arithmetic and count audit") {
  EnvironmentSpec env = scalar_env({1.0, 2.0, 3.0}, 4.0);
  GapProfile g = gap_profile(env);
  // (1/n^2) * (0*500 + 1*300 + 2*200) = 700 / 1e6.
  CHECK(count_based_regret(g, {500, 300, 200}, 1000) ==
        doctest::Approx(7e-4).epsilon(1e-14));
  CHECK_THROWS_AS(count_based_regret(g, {500, 300, 100}, 1000), CountMismatchError);
}

TEST_CASE("mse based regret from a toy replication set") {
  MeanWithSe r = mse_based_regret({{0.1}, {-0.1}}, {0.0}, 1.0, 10);
  CHECK(r.value == doctest::Approx(0.01 - 0.1).epsilon(1e-14));
  CHECK(r.se == doctest::Approx(0.0).epsilon(1e-16));  // both squared errors equal
}

TEST_CASE("plugin variance trace in one dimension") {
  EnvironmentSpec env = scalar_env({1.0, 2.0}, 3.0);
  auto f = fishers_of(env);  // informations 1 and 0.5
  CHECK(plugin_variance_trace(f, {10.0, 20.0}) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK_THROWS_AS(plugin_variance_trace(f, {0.0, 0.0}), SingularMatrixError);
}

TEST_CASE("plugin variance trace in two dimensions") {
  EnvironmentSpec env = build_environment(
      {0.0, 0.0},
      {PsdMatrix::diagonal({1.0, 2.0}), PsdMatrix::diagonal({4.0, 1.0})}, 5.0);
  auto f = fishers_of(env);
  // Weighted info diag: (3*1 + 5*0.25, 3*0.5 + 5*1) = (4.25, 6.5).
  double expect = 1.0 / 4.25 + 1.0 / 6.5;
  CHECK(plugin_variance_trace(f, {3.0, 5.0}) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("oracle allocation has exactly zero information regret") {
  EnvironmentSpec env = scalar_env({1.5, 2.0, 7.0}, 8.0);
  auto f = fishers_of(env);
  double r = information_regret(f, {1000.0, 0.0, 0.0}, 0, 1000);
  CHECK(r == 0.0);  // exact: both terms run through the same code path
}

TEST_CASE("decomposition report against hand computed values") {
  EnvironmentSpec env = scalar_env({1.0, 2.0}, 3.0);
  GapProfile g = gap_profile(env);
  auto f = fishers_of(env);

  ReplicationSet reps;
  reps.k = 2;
  reps.d = 1;
  reps.n = 10;
  reps.counts = {{6, 4}, {5, 5}, {7, 3}, {6, 4}};
  reps.theta_hats = {{0.2}, {-0.1}, {0.0}, {0.1}};

  RegretReport rep = decomposition_report(g, f, reps, {0.0});

  CHECK(rep.mean_counts[0] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(rep.mean_counts[1] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(rep.count_based == doctest::Approx(0.04).epsilon(1e-14));
  // Per-replication count regrets are {.04,.05,.03,.04}; se = sd/2 = 0.0040825.
  CHECK(rep.count_based_se == doctest::Approx(0.00408248).epsilon(1e-5));

  // mse_raw = mean{.04,.01,0,.01} = 0.015; optimal trace over n = 0.1.
  CHECK(rep.mse_raw == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(rep.mse_based == doctest::Approx(-0.085).epsilon(1e-13));

  // plugin = 1/(6*1 + 4*0.5) = 0.125, oracle term = 1/10.
  CHECK(rep.plugin_trace == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(rep.r_info == doctest::Approx(0.025).epsilon(1e-13));
  CHECK(rep.r_thetatilde == doctest::Approx(0.015 - 0.125).epsilon(1e-13));
  CHECK(rep.identity_gap < 1e-15);

  // dec1 second term: (1/n^2) sum_i T_i Tr(Sigma_i) - Tr(Sigma*)/n.
  // Here (6*1 + 4*2)/100 - 0.1 = 0.04 per the mean counts.
  CHECK(rep.dec1_second_term == doctest::Approx(0.04).epsilon(1e-13));

  // Delta-method se for r_info: grad = -(0.125^2) * (1, 0.5); the linearised
  // values over replications are {0, 1, -1, 0} * 0.0078125.
  const double lin_se = 0.0078125 * std::sqrt(2.0 / 3.0) / 2.0;
  CHECK(rep.r_info_se == doctest::Approx(lin_se).epsilon(1e-10));
}

TEST_CASE("decomposition identity holds on monte carlo data") {
  EnvironmentSpec env = build_environment(
      {0.3, -0.2},
      {PsdMatrix::diagonal({1.0, 2.0}), PsdMatrix::diagonal({2.0, 1.5}),
       PsdMatrix::diagonal({0.5, 0.9})},
      4.0);
  GapProfile g = gap_profile(env);
  auto f = fishers_of(env);
  ReplicationSet reps = run_replications(env, PolicySpec{PolicyKind::Lcb}, 50, 200, 88, 0, 2);
  RegretReport rep = decomposition_report(g, f, reps, env.theta);
  CHECK(rep.identity_gap <=
        1e-12 * std::max({std::abs(rep.mse_based), std::abs(rep.r_info), 1e-30}));
  CHECK(rep.replications == 200);
}

TEST_CASE("decomposition report rejects degenerate inputs") {
  EnvironmentSpec env = scalar_env({1.0, 2.0}, 3.0);
  GapProfile g = gap_profile(env);
  auto f = fishers_of(env);
  ReplicationSet reps;
  reps.k = 2;
  reps.d = 1;
  reps.n = 10;
  reps.counts = {{6, 4}};
  reps.theta_hats = {{0.0}};
  CHECK_THROWS_AS(decomposition_report(g, f, reps, {0.0}), SemrError);

  reps.counts = {{6, 4}, {6, 3}};  // second row sums to 9, not 10
  reps.theta_hats = {{0.0}, {0.0}};
  CHECK_THROWS_AS(decomposition_report(g, f, reps, {0.0}), CountMismatchError);
}
