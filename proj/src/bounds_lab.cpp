#include "semr/bounds_lab.hpp"

#include <cmath>

#include "semr/parallel.hpp"

namespace semr {

ScheduleConstants schedule_constants(int d, double gamma) {
  ScheduleConstants s;
  const double dm1 = static_cast<double>(d - 1);
  s.alpha = std::fmax(dm1 * dm1, 2.0);
  const double root = 1.0 + std::sqrt(s.alpha);
  s.c = 1.0 / root;
  s.c_d = 8.0 * gamma * gamma * root * root;
  return s;
}

BoundCertificate certificate_for_arm(const GapProfile& gaps, int d, double gamma,
                                     long long n, int arm, double empirical_mean,
                                     double empirical_se) {
  const double gap = gaps.gaps[arm];
  if (!(gap > 0.0)) throw ZeroGapError("arm " + std::to_string(arm) + " has zero gap");

  const ScheduleConstants sc = schedule_constants(d, gamma);
  const double log_2_over_delta = sc.alpha * std::log(static_cast<double>(n));

  BoundCertificate cert;
  cert.arm = arm;
  cert.gap = gap;
  cert.alpha = sc.alpha;
  cert.c = sc.c;
  cert.c_d = sc.c_d;
  const double omc = 1.0 - sc.c;
  cert.u = std::ceil(8.0 * gamma * gamma * log_2_over_delta / (omc * omc * gap * gap)) + 1.0;
  cert.eta = gap - gamma * std::sqrt(8.0 * log_2_over_delta / (cert.u - 1.0));
  cert.count_bound = sc.c_d * std::log(static_cast<double>(n)) / (gap * gap) + 5.0;
  cert.empirical_mean = empirical_mean;
  cert.empirical_se = empirical_se;
  cert.pass = empirical_mean <= cert.count_bound + 3.0 * empirical_se;
  return cert;
}

std::vector<BoundCertificate> certificate(const GapProfile& gaps, int d, double gamma,
                                          long long n,
                                          const std::vector<double>& mean_counts,
                                          const std::vector<double>& count_se) {
  std::vector<BoundCertificate> certs;
  for (size_t i = 0; i < gaps.gaps.size(); ++i) {
    if (gaps.gaps[i] <= 0.0) continue;  // optimal arm: no finite bound to certify
    certs.push_back(certificate_for_arm(gaps, d, gamma, n, static_cast<int>(i),
                                        mean_counts[i], count_se[i]));
  }
  return certs;
}

double regret_threshold_bound(const GapProfile& gaps, int d, double gamma, long long n) {
  const ScheduleConstants sc = schedule_constants(d, gamma);
  const double nn = static_cast<double>(n);
  const double k = static_cast<double>(gaps.gaps.size());
  double gap_sum = 0.0;
  for (double g : gaps.gaps) gap_sum += g;
  return 5.0 * gap_sum / (nn * nn) +
         4.0 * gamma * (1.0 + std::sqrt(sc.alpha)) * std::sqrt(2.0 * k * std::log(nn)) /
             std::pow(nn, 1.5);
}

std::vector<ConcentrationTrial> concentration_sweep(
    const PsdMatrix& sigma, const std::string& sigma_label,
    const std::vector<long long>& m_grid, const std::vector<double>& eps_grid,
    long long trials, uint64_t root_seed, uint64_t stream_block, int workers) {
  const int d = sigma.dim();
  const double sigma_trace = trace(sigma.matrix());
  const double frob = frobenius_norm(sigma.matrix());
  const double spec = spectral_norm(sigma.matrix());
  const Matrix chol_factor = cholesky(sigma);
  const std::vector<double> zero_mean(d, 0.0);

  std::vector<ConcentrationTrial> out;
  for (size_t mi = 0; mi < m_grid.size(); ++mi) {
    const long long m = m_grid[mi];
    if (m < 2) throw SemrError("concentration sample size must be at least 2");

    // One Z per trial, shared by every eps cell of this m.
    std::vector<double> z_abs(static_cast<size_t>(trials));
    parallel_for(trials, workers, [&](long long t) {
      const uint64_t stream =
          (stream_block << 40) | (static_cast<uint64_t>(mi) << 32) | static_cast<uint64_t>(t);
      RngStream rng(root_seed, stream);
      // Welford restricted to the quantities the trace needs.
      std::vector<double> zbuf(d), x(d), mean(d, 0.0), delta(d);
      double scatter_trace = 0.0;
      for (long long s = 1; s <= m; ++s) {
        mvn_sample_into(zero_mean, chol_factor, rng, zbuf, x);
        const double w = static_cast<double>(s - 1) / static_cast<double>(s);
        double d2 = 0.0;
        for (int i = 0; i < d; ++i) {
          delta[i] = x[i] - mean[i];
          d2 += delta[i] * delta[i];
        }
        for (int i = 0; i < d; ++i) mean[i] += delta[i] / static_cast<double>(s);
        scatter_trace += w * d2;
      }
      const double trace_hat = scatter_trace / static_cast<double>(m - 1);
      z_abs[static_cast<size_t>(t)] = std::fabs(sigma_trace - trace_hat);
    });

    for (double eps : eps_grid) {
      long long hits = 0;
      const double cut = eps * frob;
      for (double z : z_abs)
        if (z > cut) ++hits;
      ConcentrationTrial cell;
      cell.sigma_label = sigma_label;
      cell.m = m;
      cell.epsilon = eps;
      cell.trials = trials;
      cell.empirical_tail = static_cast<double>(hits) / static_cast<double>(trials);
      cell.bound = 2.0 * std::exp(-(static_cast<double>(m - 1) / 8.0) *
                                  std::fmin(eps * eps, eps * frob / spec));
      const double se = std::sqrt(cell.empirical_tail * (1.0 - cell.empirical_tail) /
                                  static_cast<double>(trials));
      cell.pass = cell.empirical_tail <= cell.bound + 3.0 * se;
      out.push_back(std::move(cell));
    }
  }
  return out;
}

}  // namespace semr
