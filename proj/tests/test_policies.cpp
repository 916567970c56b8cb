#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "semr/policies.hpp"

using namespace semr;

namespace {

EnvironmentSpec scalar_env(std::vector<double> variances, double gamma) {
  std::vector<PsdMatrix> covs;
  for (double v : variances) covs.push_back(PsdMatrix::diagonal({v}));
  return build_environment({}, std::move(covs), gamma);
}

struct Recorder : PullObserver {
  std::vector<PullRecord> pulls;
  void on_pull(long long round, int arm, const std::vector<double>& sample) override {
    pulls.push_back({round, arm, sample});
  }
};

}  // namespace

TEST_CASE("confidence schedule constants by dimension") {
  CHECK(make_lcb_state(2, 1, 100, 1.0, CovNormalization::OverT).alpha == 2.0);
  CHECK(make_lcb_state(2, 2, 100, 1.0, CovNormalization::OverT).alpha == 2.0);
  CHECK(make_lcb_state(2, 3, 100, 1.0, CovNormalization::OverT).alpha == 4.0);
  CHECK(make_lcb_state(2, 4, 100, 1.0, CovNormalization::OverT).alpha == 9.0);

  LcbState s = make_lcb_state(3, 1, 10, 2.0, CovNormalization::OverT);
  CHECK(s.log_2_over_delta == doctest::Approx(2.0 * std::log(10.0)).epsilon(1e-15));
  CHECK(s.delta == doctest::Approx(0.02).epsilon(1e-12));
  CHECK_THROWS_AS(make_lcb_state(2, 1, 0, 1.0, CovNormalization::OverT),
                  HorizonTooSmallError);
}

TEST_CASE("lcb index arithmetic") {
  CHECK(lcb_index_value(0.0, 0, 5.0, 1.0) == -std::numeric_limits<double>::infinity());
  // 5 - 3 * sqrt(8 * 2 / 4) = 5 - 6 = -1.
  CHECK(lcb_index_value(5.0, 4, 2.0, 3.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("trace estimate respects the chosen normalisation") {
  for (auto norm : {CovNormalization::OverT, CovNormalization::OverTMinus1}) {
    LcbState s = make_lcb_state(1, 1, 10, 1.0, norm);
    CHECK(trace_estimate(s, 0) == 0.0);
    update(s, 0, {0.0});
    if (norm == CovNormalization::OverTMinus1)
      CHECK(trace_estimate(s, 0) == 0.0);  // one sample, estimator undefined
    update(s, 0, {2.0});
    double expect = norm == CovNormalization::OverT ? 1.0 : 2.0;
    CHECK(trace_estimate(s, 0) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("selection rules: round robin, oracle, unpulled first") {
  EnvironmentSpec env = scalar_env({2.0, 1.0, 3.0}, 4.0);
  GapProfile gaps = gap_profile(env);
  RngStream rng(1, 1);

  PolicySpec uniform{PolicyKind::Uniform};
  LcbState s = make_lcb_state(3, 1, 30, 4.0, CovNormalization::OverT);
  std::vector<int> seq;
  for (int t = 0; t < 6; ++t) {
    int a = select_arm(uniform, s, nullptr, rng);
    seq.push_back(a);
    update(s, a, {0.0});
  }
  CHECK(seq == std::vector<int>{0, 1, 2, 0, 1, 2});

  PolicySpec oracle{PolicyKind::Oracle};
  LcbState s2 = make_lcb_state(3, 1, 30, 4.0, CovNormalization::OverT);
  CHECK(select_arm(oracle, s2, &gaps, rng) == 1);

  // LCB and Greedy both take every unpulled arm before trusting estimates.
  for (PolicyKind kind : {PolicyKind::Lcb, PolicyKind::Greedy}) {
    PolicySpec p{kind};
    LcbState s3 = make_lcb_state(3, 1, 30, 4.0, CovNormalization::OverT);
    std::vector<bool> seen(3, false);
    for (int t = 0; t < 3; ++t) {
      int a = select_arm(p, s3, nullptr, rng);
      CHECK_FALSE(seen[a]);
      seen[a] = true;
      update(s3, a, {0.0});
    }
  }
}

TEST_CASE("greedy exploits the smallest trace estimate") {
  LcbState s = make_lcb_state(2, 1, 100, 4.0, CovNormalization::OverT);
  // Arm 0 looks spread out, arm 1 tight.
  update(s, 0, {0.0});
  update(s, 0, {4.0});
  update(s, 1, {1.0});
  update(s, 1, {1.1});
  RngStream rng(2, 2);
  CHECK(select_arm(PolicySpec{PolicyKind::Greedy}, s, nullptr, rng) == 1);
}

TEST_CASE("epsilon greedy rng contract: one draw, two when exploring") {
  LcbState s = make_lcb_state(4, 1, 100, 4.0, CovNormalization::OverT);
  for (int a = 0; a < 4; ++a) {
    update(s, a, {0.1 * a});
    update(s, a, {-0.1 * a});
  }

  // epsilon = 0: pure exploitation, exactly one uniform consumed.
  PolicySpec exploit{PolicyKind::EpsilonGreedy, 0.0};
  RngStream r1(9, 9), twin1(9, 9);
  select_arm(exploit, s, nullptr, r1);
  twin1.next_u64();
  CHECK(r1.next_u64() == twin1.next_u64());

  // epsilon = 1: always explore, two uniforms, arm = floor(u * k).
  PolicySpec explore{PolicyKind::EpsilonGreedy, 1.0};
  RngStream r2(9, 9), twin2(9, 9);
  int arm = select_arm(explore, s, nullptr, r2);
  twin2.next_double();
  int expect = static_cast<int>(twin2.next_double() * 4.0);
  CHECK(arm == expect);
  CHECK(r2.next_u64() == twin2.next_u64());
}

TEST_CASE("run_episode accounting: counts, rounds, theta_hat") {
  EnvironmentSpec env = scalar_env({1.0, 3.0}, 4.0);
  RngStream rng(5, 0);
  Recorder rec;
  EpisodeResult res = run_episode(env, PolicySpec{PolicyKind::Lcb}, 50, rng, &rec);

  CHECK(res.counts.size() == 2);
  CHECK(res.counts[0] + res.counts[1] == 50);
  CHECK(rec.pulls.size() == 50);
  CHECK(rec.pulls.front().round == 1);
  CHECK(rec.pulls.back().round == 50);

  double acc = 0.0;
  std::vector<long long> counts(2, 0);
  for (const auto& p : rec.pulls) {
    acc += p.sample[0];
    ++counts[p.arm];
  }
  CHECK(res.theta_hat[0] == doctest::Approx(acc / 50.0).epsilon(1e-12));
  CHECK(counts == res.counts);

  RngStream bad(5, 0);
  CHECK_THROWS_AS(run_episode(env, PolicySpec{PolicyKind::Lcb}, 0, bad),
                  HorizonTooSmallError);
}

TEST_CASE("uniform and oracle episode count layouts") {
  EnvironmentSpec env = scalar_env({2.0, 1.0, 3.0}, 4.0);
  RngStream r1(6, 0);
  EpisodeResult u6 = run_episode(env, PolicySpec{PolicyKind::Uniform}, 6, r1);
  CHECK(u6.counts == std::vector<long long>{2, 2, 2});
  RngStream r2(6, 1);
  EpisodeResult u7 = run_episode(env, PolicySpec{PolicyKind::Uniform}, 7, r2);
  CHECK(u7.counts == std::vector<long long>{3, 2, 2});

  RngStream r3(6, 2);
  EpisodeResult o = run_episode(env, PolicySpec{PolicyKind::Oracle}, 25, r3);
  CHECK(o.counts == std::vector<long long>{0, 25, 0});
}

TEST_CASE("incremental lcb episode equals the naive select/update loop") {
  EnvironmentSpec env = scalar_env({1.0, 2.0, 4.0}, 5.0);
  const long long n = 400;

  RngStream fast(77, 0);
  EpisodeResult res = run_episode(env, PolicySpec{PolicyKind::Lcb}, n, fast);

  // Replay with the public piecewise API and the same stream.
  RngStream slow(77, 0);
  LcbState s = make_lcb_state(env.k, env.d, n, env.gamma, CovNormalization::OverT);
  PolicySpec p{PolicyKind::Lcb};
  std::vector<long long> counts(3, 0);
  std::vector<double> acc(1, 0.0);
  std::vector<double> z(1), x(1);
  for (long long t = 0; t < n; ++t) {
    int a = select_arm(p, s, nullptr, slow);
    pull_into(env, a, slow, z, x);
    update(s, a, x);
    ++counts[a];
    acc[0] += x[0];
  }
  CHECK(res.counts == counts);
  CHECK(res.theta_hat[0] == doctest::Approx(acc[0] / n).epsilon(1e-12));
}

TEST_CASE("theta_hat is unbiased under adaptive sampling") {
  EnvironmentSpec env = scalar_env({1.0, 2.0}, 3.0);
  const int R = 10000;
  const long long n = 100;
  double sum = 0.0;
  for (int r = 0; r < R; ++r) {
    RngStream rng(404, r);
    sum += run_episode(env, PolicySpec{PolicyKind::Lcb}, n, rng).theta_hat[0];
  }
  // se = sqrt(max var / (n R)) ~ 0.0045; allow 4 se.
  CHECK(std::abs(sum / R) < 0.02);
}

TEST_CASE("lcb splits pulls roughly evenly between identical arms") {
  EnvironmentSpec env = scalar_env({1.0, 1.0}, 2.0);
  const int R = 500;
  const long long n = 200;
  long long t0 = 0;
  for (int r = 0; r < R; ++r) {
    RngStream rng(11, r);
    t0 += run_episode(env, PolicySpec{PolicyKind::Lcb}, n, rng).counts[0];
  }
  double share = static_cast<double>(t0) / (R * n);
  CHECK(share > 0.4);
  CHECK(share < 0.6);
}

TEST_CASE("episodes are reproducible from the stream alone") {
  EnvironmentSpec env = scalar_env({1.0, 3.0, 2.0}, 4.0);
  for (PolicyKind kind : {PolicyKind::Lcb, PolicyKind::Greedy, PolicyKind::EpsilonGreedy}) {
    RngStream r1(123, 5), r2(123, 5);
    EpisodeResult a = run_episode(env, PolicySpec{kind, 0.2}, 150, r1);
    EpisodeResult b = run_episode(env, PolicySpec{kind, 0.2}, 150, r2);
    CHECK(a.counts == b.counts);
    CHECK(a.theta_hat == b.theta_hat);
  }
}

TEST_CASE("history runs replay to the same summary") {
  EnvironmentSpec env = scalar_env({1.0, 2.0}, 3.0);
  RngStream rng(31, 2);
  EpisodeHistory h = run_episode_with_history(env, PolicySpec{PolicyKind::Greedy}, 80, rng);
  CHECK(h.records.size() == 80);
  double acc = 0.0;
  std::vector<long long> counts(2, 0);
  for (size_t t = 0; t < h.records.size(); ++t) {
    CHECK(h.records[t].round == static_cast<long long>(t + 1));
    ++counts[h.records[t].arm];
    acc += h.records[t].sample[0];
  }
  CHECK(counts == h.result.counts);
  CHECK(h.result.theta_hat[0] == doctest::Approx(acc / 80.0).epsilon(1e-12));
}

TEST_CASE("run_replications is invariant to worker count") {
  EnvironmentSpec env = scalar_env({1.0, 2.0, 3.0}, 4.0);
  PolicySpec p{PolicyKind::Lcb};
  ReplicationSet w1 = run_replications(env, p, 120, 40, 2024, 3, 1);
  ReplicationSet w4 = run_replications(env, p, 120, 40, 2024, 3, 4);
  CHECK(w1.counts == w4.counts);
  CHECK(w1.theta_hats == w4.theta_hats);
  CHECK(w1.n == 120);
  CHECK(static_cast<int>(w1.counts.size()) == 40);
  for (const auto& row : w1.counts)
    CHECK(std::accumulate(row.begin(), row.end(), 0LL) == 120);
}

TEST_CASE("replications depend on the stream block") {
  EnvironmentSpec env = scalar_env({1.0, 2.0}, 3.0);
  PolicySpec p{PolicyKind::EpsilonGreedy, 0.3};
  ReplicationSet b0 = run_replications(env, p, 60, 20, 9, 0, 2);
  ReplicationSet b1 = run_replications(env, p, 60, 20, 9, 1, 2);
  CHECK(b0.counts != b1.counts);
}
