#include "semr/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace semr {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SemrError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw SemrError("failed writing " + path);
}

struct ArmStats {
  std::vector<double> mean;
  std::vector<double> se;
};

ArmStats arm_count_stats(const ReplicationSet& runs) {
  const int k = runs.k;
  const size_t r = runs.counts.size();
  ArmStats s;
  s.mean.assign(k, 0.0);
  s.se.assign(k, 0.0);
  std::vector<long long> totals(k, 0);
  for (const auto& c : runs.counts)
    for (int i = 0; i < k; ++i) totals[i] += c[i];
  for (int i = 0; i < k; ++i)
    s.mean[i] = static_cast<double>(totals[i]) / static_cast<double>(r);
  if (r > 1) {
    for (int i = 0; i < k; ++i) {
      double ss = 0.0;
      for (const auto& c : runs.counts) {
        const double d = static_cast<double>(c[i]) - s.mean[i];
        ss += d * d;
      }
      s.se[i] = std::sqrt(ss / static_cast<double>(r - 1) / static_cast<double>(r));
    }
  }
  return s;
}

PolicySpec policy_from_config(const ExperimentConfig& cfg) {
  PolicySpec spec;
  if (!cfg.policy) throw ConfigValidationError("config has no policy");
  spec.kind = *cfg.policy;
  if (cfg.epsilon) spec.epsilon = *cfg.epsilon;
  if (cfg.normalization) spec.normalization = *cfg.normalization;
  return spec;
}

uint64_t seed_of(const ExperimentConfig& cfg) { return cfg.seed.value_or(0); }
int workers_of(const ExperimentConfig& cfg) { return cfg.workers.value_or(1); }

json fit_json(const SlopeFit& fit) {
  json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["slope_se"] = fit.slope_se;
  j["points_used"] = fit.points_used;
  j["dropped_n"] = fit.dropped_n;
  j["correction"] = fit.correction == SlopeCorrection::SqrtLog ? "sqrtlog" : "none";
  return j;
}

json row_json(const SweepRow& row) {
  const RegretReport& r = row.report;
  json j;
  j["n"] = row.n;
  j["policy"] = policy_name(row.policy);
  j["replications"] = r.replications;
  j["count_based_regret"] = r.count_based;
  j["count_based_se"] = r.count_based_se;
  j["mse_based_regret"] = r.mse_based;
  j["mse_based_se"] = r.mse_based_se;
  j["mse_raw"] = r.mse_raw;
  j["r_info"] = r.r_info;
  j["r_info_se"] = r.r_info_se;
  j["r_thetatilde"] = r.r_thetatilde;
  j["r_thetatilde_se"] = r.r_thetatilde_se;
  j["dec1_second_term"] = r.dec1_second_term;
  j["dec1_second_se"] = r.dec1_second_se;
  j["plugin_trace"] = r.plugin_trace;
  j["identity_gap"] = r.identity_gap;
  j["theorem_bound"] = row.theorem_bound;
  j["mean_counts"] = r.mean_counts;
  j["mean_count_se"] = r.mean_count_se;
  return j;
}

json sweep_common_json(const ExperimentConfig& cfg, const char* command) {
  json j;
  j["schema"] = "semr-lab v1";
  j["command"] = command;
  j["seed"] = seed_of(cfg);
  j["workers"] = workers_of(cfg);
  if (cfg.policy) j["policy"] = policy_name(*cfg.policy);
  if (cfg.replications) j["replications"] = *cfg.replications;
  return j;
}

void log_row(std::ostream& log, const SweepRow& row) {
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "n=%lld policy=%s count_regret=%.6g (se %.2g) mse_regret=%.6g (se %.2g)",
                row.n, policy_name(row.policy), row.report.count_based,
                row.report.count_based_se, row.report.mse_based, row.report.mse_based_se);
  log << buf << '\n';
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg) {
  if (cfg.horizons.empty()) throw ConfigValidationError("config has no horizons");
  if (!cfg.replications) throw ConfigValidationError("config has no replications");
  const PolicySpec policy = policy_from_config(cfg);
  const EnvironmentSpec env = environment_from_config(cfg);
  const GapProfile gaps = gap_profile(env);
  std::vector<PsdMatrix> fishers;
  fishers.reserve(env.k);
  for (int i = 0; i < env.k; ++i) fishers.push_back(fisher_info(env, i));

  SweepResult result;
  for (long long n : cfg.horizons) {
    const ReplicationSet reps = run_replications(env, policy, n, *cfg.replications,
                                                 seed_of(cfg), 0, workers_of(cfg));
    SweepRow row;
    row.n = n;
    row.policy = policy.kind;
    row.report = decomposition_report(gaps, fishers, reps, env.theta);
    row.theorem_bound = regret_threshold_bound(gaps, env.d, env.gamma, n);
    result.rows.push_back(std::move(row));
  }

  try {
    std::vector<SlopePoint> points;
    for (const SweepRow& row : result.rows)
      points.push_back({static_cast<double>(row.n), row.report.count_based});
    result.fit_uncorrected = fit_slope(points, SlopeCorrection::None);
    result.fit_sqrtlog = fit_slope(points, SlopeCorrection::SqrtLog);
    result.fits_valid = true;
  } catch (const SemrError& e) {
    result.fits_valid = false;
    result.fit_error = e.what();
  }
  return result;
}

std::string results_csv(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw EmptyInputError("results_csv needs at least one row");
  const int k = static_cast<int>(rows.front().report.mean_counts.size());
  std::ostringstream out;
  out << "# semr-lab v1\n";
  out << "n,policy,count_based_regret,count_based_se,mse_based_regret,mse_based_se,"
         "r_info,r_info_se,r_thetatilde,r_thetatilde_se,dec1_second_term,"
         "dec1_second_se,theorem_bound";
  for (int i = 1; i <= k; ++i) out << ",mean_count_" << i;
  for (int i = 1; i <= k; ++i) out << ",mean_count_se_" << i;
  out << '\n';
  for (const SweepRow& row : rows) {
    const RegretReport& r = row.report;
    out << row.n << ',' << policy_name(row.policy) << ',' << fmt17(r.count_based) << ','
        << fmt17(r.count_based_se) << ',' << fmt17(r.mse_based) << ','
        << fmt17(r.mse_based_se) << ',' << fmt17(r.r_info) << ',' << fmt17(r.r_info_se)
        << ',' << fmt17(r.r_thetatilde) << ',' << fmt17(r.r_thetatilde_se) << ','
        << fmt17(r.dec1_second_term) << ',' << fmt17(r.dec1_second_se) << ','
        << fmt17(row.theorem_bound);
    for (double m : r.mean_counts) out << ',' << fmt17(m);
    for (double s : r.mean_count_se) out << ',' << fmt17(s);
    out << '\n';
  }
  return out.str();
}

std::string concentration_csv(const std::vector<ConcentrationTrial>& cells) {
  std::ostringstream out;
  out << "# semr-lab v1\n";
  out << "sigma,m,epsilon,trials,empirical_tail,bound,pass\n";
  for (const ConcentrationTrial& c : cells)
    out << c.sigma_label << ',' << c.m << ',' << fmt17(c.epsilon) << ',' << c.trials
        << ',' << fmt17(c.empirical_tail) << ',' << fmt17(c.bound) << ','
        << (c.pass ? 1 : 0) << '\n';
  return out.str();
}

std::string certificates_csv(const std::vector<BoundCertificate>& certs) {
  std::ostringstream out;
  out << "# semr-lab v1\n";
  out << "arm,gap,alpha,c,c_d,u,eta,count_bound,empirical_mean,empirical_se,pass\n";
  for (const BoundCertificate& c : certs)
    out << (c.arm + 1) << ',' << fmt17(c.gap) << ',' << fmt17(c.alpha) << ','
        << fmt17(c.c) << ',' << fmt17(c.c_d) << ',' << fmt17(c.u) << ',' << fmt17(c.eta)
        << ',' << fmt17(c.count_bound) << ',' << fmt17(c.empirical_mean) << ','
        << fmt17(c.empirical_se) << ',' << (c.pass ? 1 : 0) << '\n';
  return out.str();
}

std::string lowerbound_csv(const std::vector<LowerBoundRow>& rows) {
  std::ostringstream out;
  out << "# semr-lab v1\n";
  out << "policy,k,n,weak_arm,r_minus_nu,r_minus_nu_se,r_minus_nuprime,"
         "r_minus_nuprime_se,sum,threshold,pooled_se,pass,c2,c3,floor,r_info_nu,"
         "r_info_nuprime,floor_realized_max,floor_ok,bh_p,bh_q,bh_kl,bh_threshold,"
         "bh_pooled_se,bh_pass,div_analytic,div_monte_carlo,div_rel_error\n";
  for (const LowerBoundRow& row : rows) {
    const LowerBoundVerdict& v = row.verdict;
    out << policy_name(v.policy) << ',' << v.pair.k << ',' << v.pair.n << ','
        << (v.weak_arm + 1) << ',' << fmt17(v.r_minus_nu) << ',' << fmt17(v.r_minus_nu_se)
        << ',' << fmt17(v.r_minus_nuprime) << ',' << fmt17(v.r_minus_nuprime_se) << ','
        << fmt17(v.sum) << ',' << fmt17(v.threshold) << ',' << fmt17(v.pooled_se) << ','
        << (v.pass ? 1 : 0) << ',' << fmt17(v.pair.c2) << ',' << fmt17(v.pair.c3) << ','
        << fmt17(row.floor.floor) << ',' << fmt17(v.r_info_nu) << ','
        << fmt17(v.r_info_nuprime) << ',' << fmt17(row.floor.realized_max) << ','
        << (row.floor.ok ? 1 : 0) << ',' << fmt17(v.bh.p) << ',' << fmt17(v.bh.q) << ','
        << fmt17(v.bh.kl) << ',' << fmt17(v.bh.threshold) << ','
        << fmt17(v.bh.pooled_se) << ',' << (v.bh.pass ? 1 : 0) << ',';
    if (row.has_divergence) {
      out << fmt17(row.divergence.analytic) << ',' << fmt17(row.divergence.monte_carlo)
          << ',' << fmt17(row.divergence.relative_error);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                 std::ostream& log) {
  ExperimentConfig one = cfg;
  if (one.horizons.empty()) throw ConfigValidationError("config has no horizons");
  one.horizons.resize(1);
  const SweepResult result = run_sweep(one);
  write_file(out_dir, "results.csv", results_csv(result.rows));
  json report = sweep_common_json(one, "simulate");
  report["rows"] = json::array({row_json(result.rows.front())});
  write_file(out_dir, "report.json", report.dump(2) + "\n");
  log_row(log, result.rows.front());
  log << "wrote " << out_dir << "/results.csv and report.json\n";
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const SweepResult result = run_sweep(cfg);
  write_file(out_dir, "results.csv", results_csv(result.rows));

  json report = sweep_common_json(cfg, "sweep");
  report["horizons"] = cfg.horizons;
  json rows = json::array();
  for (const SweepRow& row : result.rows) rows.push_back(row_json(row));
  report["rows"] = rows;
  if (result.fits_valid) {
    report["fit_uncorrected"] = fit_json(result.fit_uncorrected);
    report["fit_sqrtlog"] = fit_json(result.fit_sqrtlog);
  } else {
    report["fit_error"] = result.fit_error;
  }
  write_file(out_dir, "report.json", report.dump(2) + "\n");

  for (const SweepRow& row : result.rows) log_row(log, row);
  if (result.fits_valid) {
    std::vector<SlopePoint> points;
    for (const SweepRow& row : result.rows)
      points.push_back({static_cast<double>(row.n), row.report.count_based});
    try {
      write_file(out_dir, "regret_loglog.svg", emit_svg(points, result.fit_sqrtlog));
    } catch (const EmptyInputError&) {
      log << "no positive regret points; skipping plot\n";
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "slope: uncorrected %.4f (se %.4f), sqrtlog-corrected %.4f (se %.4f)",
                  result.fit_uncorrected.slope, result.fit_uncorrected.slope_se,
                  result.fit_sqrtlog.slope, result.fit_sqrtlog.slope_se);
    log << buf << '\n';
  } else {
    log << "slope fit unavailable: " << result.fit_error << '\n';
  }
  log << "wrote " << out_dir << "/results.csv, report.json\n";
  return 0;
}

int cmd_concentration(const ExperimentConfig& cfg, const std::string& out_dir,
                      std::ostream& log) {
  if (cfg.conc_sigmas.empty()) throw ConfigValidationError("config has no conc_sigma");
  if (cfg.conc_m.empty()) throw ConfigValidationError("config has no conc_m");
  const bool eps_auto = cfg.conc_eps_auto.value_or(false);
  if (cfg.conc_eps.empty() && !eps_auto)
    throw ConfigValidationError("config has no conc_eps");
  const long long trials = cfg.conc_trials.value_or(10000);

  std::vector<ConcentrationTrial> all;
  for (size_t si = 0; si < cfg.conc_sigmas.size(); ++si) {
    const PsdMatrix sigma = sigma_from_spec(cfg.conc_sigmas[si]);
    std::vector<double> eps = cfg.conc_eps;
    if (eps_auto) {
      // One cell beyond the Frobenius/spectral ratio exercises the linear
      // branch of the lemma's min(eps^2, eps*F/S).
      const double ratio =
          frobenius_norm(sigma.matrix()) / spectral_norm(sigma.matrix());
      eps.push_back(1.25 * ratio);
    }
    const std::vector<ConcentrationTrial> cells =
        concentration_sweep(sigma, sigma_label(cfg.conc_sigmas[si]), cfg.conc_m, eps,
                            trials, seed_of(cfg), si, workers_of(cfg));
    all.insert(all.end(), cells.begin(), cells.end());
  }

  write_file(out_dir, "concentration.csv", concentration_csv(all));
  json report;
  report["schema"] = "semr-lab v1";
  report["command"] = "concentration";
  report["seed"] = seed_of(cfg);
  report["trials"] = trials;
  int passed = 0;
  json cells = json::array();
  for (const ConcentrationTrial& c : all) {
    json j;
    j["sigma"] = c.sigma_label;
    j["m"] = c.m;
    j["epsilon"] = c.epsilon;
    j["empirical_tail"] = c.empirical_tail;
    j["bound"] = c.bound;
    j["pass"] = c.pass;
    cells.push_back(j);
    if (c.pass) ++passed;
  }
  report["cells"] = cells;
  write_file(out_dir, "report.json", report.dump(2) + "\n");
  log << passed << "/" << all.size() << " cells within the lemma bound\n";
  log << "wrote " << out_dir << "/concentration.csv, report.json\n";
  return 0;
}

int cmd_certify(const ExperimentConfig& cfg, const std::string& out_dir,
                std::ostream& log) {
  if (cfg.policy && *cfg.policy != PolicyKind::Lcb)
    throw ConfigValidationError("certify runs the lcb policy; remove or fix 'policy'");
  if (!cfg.replications) throw ConfigValidationError("config has no replications");
  long long n;
  if (cfg.certify_n) {
    n = *cfg.certify_n;
  } else if (!cfg.horizons.empty()) {
    n = cfg.horizons.back();
  } else {
    throw ConfigValidationError("config needs certify_n or horizons");
  }

  PolicySpec policy;
  policy.kind = PolicyKind::Lcb;
  if (cfg.normalization) policy.normalization = *cfg.normalization;
  const EnvironmentSpec env = environment_from_config(cfg);
  const GapProfile gaps = gap_profile(env);

  const ReplicationSet reps = run_replications(env, policy, n, *cfg.replications,
                                               seed_of(cfg), 0, workers_of(cfg));
  const ArmStats stats = arm_count_stats(reps);
  const std::vector<BoundCertificate> certs =
      certificate(gaps, env.d, env.gamma, n, stats.mean, stats.se);

  write_file(out_dir, "certificates.csv", certificates_csv(certs));
  json report;
  report["schema"] = "semr-lab v1";
  report["command"] = "certify";
  report["n"] = n;
  report["seed"] = seed_of(cfg);
  report["replications"] = *cfg.replications;
  const ScheduleConstants sc = schedule_constants(env.d, env.gamma);
  report["alpha"] = sc.alpha;
  report["c"] = sc.c;
  report["c_d"] = sc.c_d;
  json arms = json::array();
  bool all_pass = true;
  for (const BoundCertificate& c : certs) {
    json j;
    j["arm"] = c.arm + 1;
    j["gap"] = c.gap;
    j["u"] = c.u;
    j["eta"] = c.eta;
    j["count_bound"] = c.count_bound;
    j["empirical_mean"] = c.empirical_mean;
    j["empirical_se"] = c.empirical_se;
    j["pass"] = c.pass;
    arms.push_back(j);
    all_pass = all_pass && c.pass;
  }
  report["arms"] = arms;
  report["all_pass"] = all_pass;
  write_file(out_dir, "report.json", report.dump(2) + "\n");

  for (const BoundCertificate& c : certs) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "arm %d: mean T = %.2f vs bound %.2f -> %s",
                  c.arm + 1, c.empirical_mean, c.count_bound, c.pass ? "ok" : "FAIL");
    log << buf << '\n';
  }
  log << "wrote " << out_dir << "/certificates.csv, report.json\n";
  if (certs.empty()) log << "no suboptimal arms; nothing to certify\n";
  return all_pass ? 0 : 4;
}

int cmd_lowerbound(const ExperimentConfig& cfg, const std::string& out_dir,
                   std::ostream& log) {
  if (cfg.lb_k.empty()) throw ConfigValidationError("config has no lb_k");
  if (cfg.lb_horizons.empty()) throw ConfigValidationError("config has no lb_horizons");
  if (!cfg.lb_replications) throw ConfigValidationError("config has no lb_replications");
  if (cfg.lb_policies.empty()) throw ConfigValidationError("config has no lb_policies");
  const double sigma1 = cfg.lb_sigma1.value_or(1.0);
  const double gamma = cfg.lb_gamma.value_or(2.0);
  const bool with_div = cfg.lb_divergence.value_or(false);
  const int replications = *cfg.lb_replications;

  std::vector<LowerBoundRow> rows;
  bool all_ok = true;
  uint64_t cell = 0;
  for (int k : cfg.lb_k) {
    for (long long n : cfg.lb_horizons) {
      const LowerBoundPair pair = build_pair(n, k, sigma1, gamma);
      for (PolicyKind kind : cfg.lb_policies) {
        PolicySpec policy;
        policy.kind = kind;
        if (cfg.epsilon) policy.epsilon = *cfg.epsilon;
        if (cfg.normalization) policy.normalization = *cfg.normalization;

        LowerBoundRow row;
        row.verdict = verdict(policy, pair, replications, seed_of(cfg), 4 * cell,
                              workers_of(cfg));
        row.floor = r_i_floor(row.verdict, 1.0 / sigma1);
        if (with_div) {
          const EnvironmentSpec nu = nu_environment(pair);
          const EnvironmentSpec nu_prime =
              nu_prime_environment(pair, row.verdict.weak_arm);
          row.divergence = divergence_decomposition_check(
              policy, nu, nu_prime, n, replications, seed_of(cfg), 4 * cell + 2,
              workers_of(cfg));
          row.has_divergence = true;
        }

        const bool ok = row.verdict.pass && row.verdict.bh.pass && row.floor.ok;
        all_ok = all_ok && ok;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "%s k=%d n=%lld: sum=%.4f vs threshold %.4f, bh %s, floor %s",
                      policy_name(kind), k, n, row.verdict.sum, row.verdict.threshold,
                      row.verdict.bh.pass ? "ok" : "FAIL", row.floor.ok ? "ok" : "FAIL");
        log << buf << '\n';
        rows.push_back(std::move(row));
        ++cell;
      }
    }
  }

  write_file(out_dir, "lowerbound.csv", lowerbound_csv(rows));
  json report;
  report["schema"] = "semr-lab v1";
  report["command"] = "lowerbound";
  report["sigma1"] = sigma1;
  report["gamma"] = gamma;
  report["replications"] = replications;
  report["seed"] = seed_of(cfg);
  json cells = json::array();
  for (const LowerBoundRow& row : rows) {
    const LowerBoundVerdict& v = row.verdict;
    json j;
    j["policy"] = policy_name(v.policy);
    j["k"] = v.pair.k;
    j["n"] = v.pair.n;
    j["weak_arm"] = v.weak_arm + 1;
    j["lambda"] = v.pair.lambda;
    j["sigma_c"] = v.pair.sigma_c;
    j["sigma_ss"] = v.pair.sigma_ss;
    j["r_minus_nu"] = v.r_minus_nu;
    j["r_minus_nuprime"] = v.r_minus_nuprime;
    j["sum"] = v.sum;
    j["threshold"] = v.threshold;
    j["pooled_se"] = v.pooled_se;
    j["pass"] = v.pass;
    j["c2"] = v.pair.c2;
    j["c3"] = v.pair.c3;
    j["floor"] = row.floor.floor;
    j["r_info_nu"] = v.r_info_nu;
    j["r_info_nuprime"] = v.r_info_nuprime;
    j["floor_ok"] = row.floor.ok;
    j["bh"] = {{"p", v.bh.p},
               {"q", v.bh.q},
               {"kl", v.bh.kl},
               {"threshold", v.bh.threshold},
               {"pooled_se", v.bh.pooled_se},
               {"pass", v.bh.pass}};
    if (row.has_divergence) {
      j["divergence"] = {{"analytic", row.divergence.analytic},
                         {"monte_carlo", row.divergence.monte_carlo},
                         {"relative_error", row.divergence.relative_error}};
    }
    cells.push_back(j);
  }
  report["cells"] = cells;
  report["all_pass"] = all_ok;
  write_file(out_dir, "report.json", report.dump(2) + "\n");
  log << "wrote " << out_dir << "/lowerbound.csv, report.json\n";
  return all_ok ? 0 : 4;
}

int cmd_fit_slope(const std::string& csv_path, SlopeCorrection correction,
                  std::ostream& log) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw SemrError("cannot open " + csv_path);
  std::string line;
  std::vector<std::string> header;
  std::vector<SlopePoint> points;
  int n_col = -1, regret_col = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (n_col < 0) {
      for (size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "n") n_col = static_cast<int>(i);
        if (fields[i] == "count_based_regret") regret_col = static_cast<int>(i);
      }
      if (n_col < 0 || regret_col < 0)
        throw SemrError("csv header lacks n/count_based_regret columns");
      continue;
    }
    if (static_cast<int>(fields.size()) <= std::max(n_col, regret_col))
      throw SemrError("csv row has too few fields");
    points.push_back({std::strtod(fields[n_col].c_str(), nullptr),
                      std::strtod(fields[regret_col].c_str(), nullptr)});
  }
  const SlopeFit fit = fit_slope(points, correction);
  log << fit_json(fit).dump(2) << '\n';
  return 0;
}

}  // namespace semr
