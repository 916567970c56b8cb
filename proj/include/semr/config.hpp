#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semr/environment.hpp"
#include "semr/policies.hpp"

namespace semr {

/** One arm's covariance as written in a config: `diag v1 .. vd` or
 *  `full v11 v12 .. vdd` (row-major). */
struct ArmCovSpec {
  enum class Kind { Diag, Full };
  Kind kind = Kind::Diag;
  std::vector<double> values;
  bool operator==(const ArmCovSpec&) const = default;
};

/** One concentration-study covariance: `identity d`, `diag v1 .. vd`,
 *  `full d v11 .. vdd`, or `random-spd d seed`. */
struct SigmaSpec {
  enum class Kind { Identity, Diag, Full, RandomSpd };
  Kind kind = Kind::Identity;
  int dim = 1;
  uint64_t seed = 0;        // RandomSpd only
  std::vector<double> values;
  bool operator==(const SigmaSpec&) const = default;
};

/** Parsed experiment description. Optional fields stay empty when the config
 *  does not mention them; each subcommand checks for the blocks it needs. */
struct ExperimentConfig {
  // environment
  std::optional<int> k;
  std::optional<int> d;
  std::vector<double> theta;
  std::vector<ArmCovSpec> covs;
  std::optional<double> gamma;

  // policy
  std::optional<PolicyKind> policy;
  std::optional<double> epsilon;
  std::optional<CovNormalization> normalization;

  // execution
  std::vector<long long> horizons;
  std::optional<int> replications;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;

  // concentration block
  std::vector<SigmaSpec> conc_sigmas;
  std::vector<long long> conc_m;
  std::vector<double> conc_eps;
  std::optional<bool> conc_eps_auto;  // add one eps above ||S||_F/||S||_2 per sigma
  std::optional<long long> conc_trials;

  // certify block
  std::optional<long long> certify_n;

  // lower-bound block
  std::optional<double> lb_sigma1;
  std::optional<double> lb_gamma;
  std::vector<int> lb_k;
  std::vector<long long> lb_horizons;
  std::optional<int> lb_replications;
  std::vector<PolicyKind> lb_policies;
  std::optional<bool> lb_divergence;

  bool operator==(const ExperimentConfig&) const = default;
};

/** Parses and validates a key-value config document.
 *  Throws ConfigParseError (with line number) for malformed or unknown lines
 *  and ConfigValidationError (naming the field) for semantic violations. */
ExperimentConfig parse_config(const std::string& text);

/** Canonical text form; parse_config(serialize_config(c)) == c. */
std::string serialize_config(const ExperimentConfig& cfg);

const char* policy_name(PolicyKind kind);

/** Builds the environment a config describes (covs + gamma + theta). */
EnvironmentSpec environment_from_config(const ExperimentConfig& cfg);

PsdMatrix sigma_from_spec(const SigmaSpec& spec);
std::string sigma_label(const SigmaSpec& spec);

}  // namespace semr
