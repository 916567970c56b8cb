#include "semr/regret.hpp"

#include <cmath>

namespace semr {

namespace {

MeanWithSe mean_and_se(const std::vector<double>& xs) {
  const size_t r = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(r);
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(r - 1);
  return {mean, std::sqrt(var / static_cast<double>(r))};
}

double squared_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double count_based_regret(const GapProfile& gaps, const std::vector<double>& mean_counts,
                          long long n) {
  if (mean_counts.size() != gaps.gaps.size())
    throw DimensionError("count_based_regret: arm count mismatch");
  double total = 0.0, weighted = 0.0;
  for (size_t i = 0; i < mean_counts.size(); ++i) {
    total += mean_counts[i];
    weighted += gaps.gaps[i] * mean_counts[i];
  }
  const double nn = static_cast<double>(n);
  if (std::fabs(total - nn) > 1e-6 * nn)
    throw CountMismatchError("mean counts sum to " + std::to_string(total) +
                             ", expected " + std::to_string(n));
  return weighted / (nn * nn);
}

MeanWithSe mse_based_regret(const std::vector<std::vector<double>>& theta_hats,
                            const std::vector<double>& theta, double optimal_trace,
                            long long n) {
  std::vector<double> mses;
  mses.reserve(theta_hats.size());
  for (const auto& th : theta_hats) mses.push_back(squared_distance(th, theta));
  MeanWithSe m = mean_and_se(mses);
  m.value -= optimal_trace / static_cast<double>(n);
  return m;
}

double plugin_variance_trace(const std::vector<PsdMatrix>& fishers,
                             const std::vector<double>& weights) {
  if (fishers.empty() || fishers.size() != weights.size())
    throw DimensionError("plugin_variance_trace: arm count mismatch");
  const int d = fishers.front().dim();
  Matrix m(d);
  for (size_t i = 0; i < fishers.size(); ++i) {
    const Matrix& fi = fishers[i].matrix();
    const double w = weights[i];
    for (size_t e = 0; e < m.a.size(); ++e) m.a[e] += w * fi.a[e];
  }
  return trace(psd_inverse(PsdMatrix::from_matrix(std::move(m))));
}

double information_regret(const std::vector<PsdMatrix>& fishers,
                          const std::vector<double>& mean_counts, int best_arm,
                          long long n) {
  std::vector<double> opt(fishers.size(), 0.0);
  opt[best_arm] = static_cast<double>(n);
  return plugin_variance_trace(fishers, mean_counts) - plugin_variance_trace(fishers, opt);
}

RegretReport decomposition_report(const GapProfile& gaps,
                                  const std::vector<PsdMatrix>& fishers,
                                  const ReplicationSet& reps,
                                  const std::vector<double>& theta) {
  const int k = reps.k;
  const size_t r = reps.counts.size();
  if (r < 2) throw SemrError("decomposition_report needs at least two replications");
  if (reps.theta_hats.size() != r)
    throw DimensionError("decomposition_report: counts/theta_hats length mismatch");
  if (static_cast<int>(gaps.gaps.size()) != k || static_cast<int>(fishers.size()) != k)
    throw DimensionError("decomposition_report: arm count mismatch");

  const double nn = static_cast<double>(reps.n);
  const double inv_n2 = 1.0 / (nn * nn);

  RegretReport rep;
  rep.n = reps.n;
  rep.replications = static_cast<int>(r);

  // Per-arm mean counts (exact integer totals first) and their SEs.
  std::vector<long long> totals(k, 0);
  for (const auto& c : reps.counts) {
    if (static_cast<int>(c.size()) != k)
      throw DimensionError("decomposition_report: ragged count rows");
    long long row = 0;
    for (int i = 0; i < k; ++i) {
      totals[i] += c[i];
      row += c[i];
    }
    if (row != reps.n)
      throw CountMismatchError("replication counts sum to " + std::to_string(row) +
                               ", expected " + std::to_string(reps.n));
  }
  rep.mean_counts.resize(k);
  rep.mean_count_se.resize(k);
  for (int i = 0; i < k; ++i)
    rep.mean_counts[i] = static_cast<double>(totals[i]) / static_cast<double>(r);
  for (int i = 0; i < k; ++i) {
    double ss = 0.0;
    for (const auto& c : reps.counts) {
      const double d = static_cast<double>(c[i]) - rep.mean_counts[i];
      ss += d * d;
    }
    rep.mean_count_se[i] =
        std::sqrt(ss / static_cast<double>(r - 1) / static_cast<double>(r));
  }

  // Count-based regret and the first decomposition's second term, both with
  // per-replication statistics.
  std::vector<double> g(r), dec1(r), mse(r);
  const double opt_over_n = gaps.optimal_trace / nn;
  for (size_t j = 0; j < r; ++j) {
    double wg = 0.0, wt = 0.0;
    for (int i = 0; i < k; ++i) {
      const double c = static_cast<double>(reps.counts[j][i]);
      wg += gaps.gaps[i] * c;
      wt += (gaps.gaps[i] + gaps.optimal_trace) * c;  // Tr(Sigma_i) * count
    }
    g[j] = wg * inv_n2;
    dec1[j] = wt * inv_n2 - opt_over_n;
    mse[j] = squared_distance(reps.theta_hats[j], theta);
  }
  {
    const MeanWithSe m = mean_and_se(g);
    rep.count_based = m.value;
    rep.count_based_se = m.se;
  }
  {
    const MeanWithSe m = mean_and_se(dec1);
    rep.dec1_second_term = m.value;
    rep.dec1_second_se = m.se;
  }
  {
    const MeanWithSe m = mean_and_se(mse);
    rep.mse_raw = m.value;
    rep.mse_raw_se = m.se;
    rep.mse_based = m.value - opt_over_n;
    rep.mse_based_se = m.se;
  }

  // Second decomposition. Both plug-in traces go through the same routine so
  // that an oracle allocation cancels exactly.
  rep.plugin_trace = plugin_variance_trace(fishers, rep.mean_counts);
  std::vector<double> opt_w(k, 0.0);
  opt_w[gaps.best_arm] = nn;
  const double opt_plugin = plugin_variance_trace(fishers, opt_w);
  rep.r_info = rep.plugin_trace - opt_plugin;
  rep.r_thetatilde = rep.mse_raw - rep.plugin_trace;
  rep.identity_gap = std::fabs(rep.r_thetatilde + rep.r_info - rep.mse_based);

  // Delta method for the R_I standard error: linearise the plug-in trace in
  // the mean counts, gradient d/dw_i Tr(M^{-1}) = -Tr(M^{-1} I_i M^{-1}).
  const int d = fishers.front().dim();
  Matrix m_at_mean(d);
  for (int i = 0; i < k; ++i) {
    const Matrix& fi = fishers[i].matrix();
    for (size_t e = 0; e < m_at_mean.a.size(); ++e)
      m_at_mean.a[e] += rep.mean_counts[i] * fi.a[e];
  }
  const Matrix minv = psd_inverse(PsdMatrix::from_matrix(std::move(m_at_mean)));
  std::vector<double> grad(k);
  for (int i = 0; i < k; ++i)
    grad[i] = -trace(matmul(matmul(minv, fishers[i].matrix()), minv));

  std::vector<double> lin(r), resid(r);
  for (size_t j = 0; j < r; ++j) {
    double l = 0.0;
    for (int i = 0; i < k; ++i)
      l += grad[i] * (static_cast<double>(reps.counts[j][i]) - rep.mean_counts[i]);
    lin[j] = l;
    resid[j] = mse[j] - l;
  }
  rep.r_info_se = mean_and_se(lin).se;
  rep.r_thetatilde_se = mean_and_se(resid).se;

  return rep;
}

}  // namespace semr
