#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "semr/bounds_lab.hpp"
#include "semr/config.hpp"
#include "semr/lowerbound_lab.hpp"
#include "semr/regret.hpp"

namespace semr {

// ---------------------------------------------------------------- slope fits

struct SlopePoint {
  double n = 0.0;
  double regret = 0.0;
};

enum class SlopeCorrection { None, SqrtLog };

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points_used = 0;
  std::vector<double> dropped_n;  // n of points with regret <= 0, excluded from the fit
  SlopeCorrection correction = SlopeCorrection::None;
};

/** Ordinary least squares of ln(regret) on ln(n); with SqrtLog correction the
 *  response is ln(regret) - ln(ln(n))/2. Points with regret <= 0 are dropped
 *  and recorded; fewer than 3 usable points raises SlopeFitError. n must be
 *  at least 2 everywhere. */
SlopeFit fit_slope(const std::vector<SlopePoint>& points, SlopeCorrection correction);

/** Log-log chart of the points with the fitted line and a slope annotation.
 *  Pure function of its inputs; identical inputs give identical bytes. */
std::string emit_svg(const std::vector<SlopePoint>& points, const SlopeFit& fit);

// --------------------------------------------------------------------- sweep

struct SweepRow {
  long long n = 0;
  PolicyKind policy = PolicyKind::Lcb;
  RegretReport report;
  double theorem_bound = 0.0;  // Eq-13-style threshold bound at this n
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool fits_valid = false;
  SlopeFit fit_uncorrected;
  SlopeFit fit_sqrtlog;
  std::string fit_error;  // set when fits_valid is false
};

/** Runs the policy over the full horizon grid, R replications per n.
 *  Replication r always uses RngStream(seed, r), so results are identical for
 *  any worker count, and common random numbers are shared across the grid. */
SweepResult run_sweep(const ExperimentConfig& cfg);

std::string results_csv(const std::vector<SweepRow>& rows);
std::string concentration_csv(const std::vector<ConcentrationTrial>& cells);
std::string certificates_csv(const std::vector<BoundCertificate>& certs);

struct LowerBoundRow {
  LowerBoundVerdict verdict;
  FloorCheck floor;
  bool has_divergence = false;
  DivergenceCheck divergence;
};

std::string lowerbound_csv(const std::vector<LowerBoundRow>& rows);

// --------------------------------------------------------------- subcommands

/** Drivers behind the CLI verbs. Each writes its artifacts under out_dir,
 *  logs a human summary, and returns the process exit code (0 success,
 *  4 failed certification for certify/lowerbound). Config and runtime errors
 *  escape as exceptions; the CLI maps them to exit codes 2 and 3. */
int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_concentration(const ExperimentConfig& cfg, const std::string& out_dir,
                      std::ostream& log);
int cmd_certify(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_lowerbound(const ExperimentConfig& cfg, const std::string& out_dir,
                   std::ostream& log);
int cmd_fit_slope(const std::string& csv_path, SlopeCorrection correction,
                  std::ostream& log);

}  // namespace semr
