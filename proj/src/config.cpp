#include "semr/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace semr {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigParseError(line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, int line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigParseError(line, "expected an integer, got '" + tok + "'");
  return v;
}

uint64_t parse_u64(const std::string& tok, int line) {
  if (!tok.empty() && tok[0] == '-')
    throw ConfigParseError(line, "expected a non-negative integer, got '" + tok + "'");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigParseError(line, "expected an integer, got '" + tok + "'");
  return v;
}

bool parse_bool(const std::string& tok, int line) {
  if (tok == "true") return true;
  if (tok == "false") return false;
  throw ConfigParseError(line, "expected true or false, got '" + tok + "'");
}

PolicyKind parse_policy(const std::string& tok, int line) {
  if (tok == "lcb") return PolicyKind::Lcb;
  if (tok == "uniform") return PolicyKind::Uniform;
  if (tok == "greedy") return PolicyKind::Greedy;
  if (tok == "epsilon-greedy") return PolicyKind::EpsilonGreedy;
  if (tok == "oracle") return PolicyKind::Oracle;
  throw ConfigParseError(line, "unknown policy '" + tok + "'");
}

std::vector<double> parse_doubles(const std::vector<std::string>& toks, size_t from,
                                  int line) {
  std::vector<double> out;
  for (size_t i = from; i < toks.size(); ++i) out.push_back(parse_double(toks[i], line));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigValidationError(message);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.gamma) require(*cfg.gamma > 0.0, "gamma must be positive");
  if (cfg.d) require(*cfg.d >= 1, "d must be at least 1");
  if (cfg.k) require(*cfg.k >= 1, "k must be at least 1");
  if (cfg.epsilon) require(*cfg.epsilon >= 0.0 && *cfg.epsilon <= 1.0,
                           "epsilon must lie in [0, 1]");
  if (cfg.replications) require(*cfg.replications >= 2, "replications must be at least 2");
  if (cfg.workers) require(*cfg.workers >= 1, "workers must be at least 1");

  for (size_t i = 1; i < cfg.horizons.size(); ++i)
    require(cfg.horizons[i] > cfg.horizons[i - 1], "horizon grid strictly increasing");
  for (long long n : cfg.horizons) require(n >= 1, "horizons must be at least 1");

  // Environment block consistency.
  if (!cfg.covs.empty()) {
    int dim;
    const ArmCovSpec& first = cfg.covs.front();
    if (first.kind == ArmCovSpec::Kind::Diag) {
      dim = static_cast<int>(first.values.size());
    } else {
      dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(first.values.size()))));
    }
    for (const ArmCovSpec& c : cfg.covs) {
      const size_t want = c.kind == ArmCovSpec::Kind::Diag
                              ? static_cast<size_t>(dim)
                              : static_cast<size_t>(dim) * static_cast<size_t>(dim);
      require(c.values.size() == want, "cov entries must agree in dimension");
    }
    if (cfg.d) require(*cfg.d == dim, "d does not match the cov entries");
    if (cfg.k) require(*cfg.k == static_cast<int>(cfg.covs.size()),
                       "k does not match the number of cov entries");
    if (!cfg.theta.empty())
      require(static_cast<int>(cfg.theta.size()) == dim,
              "theta length does not match the cov dimension");
  }

  for (const SigmaSpec& s : cfg.conc_sigmas) {
    require(s.dim >= 1, "conc_sigma dimension must be at least 1");
    if (s.kind == SigmaSpec::Kind::Diag)
      require(static_cast<int>(s.values.size()) == s.dim, "conc_sigma diag length mismatch");
    if (s.kind == SigmaSpec::Kind::Full)
      require(s.values.size() == static_cast<size_t>(s.dim) * static_cast<size_t>(s.dim),
              "conc_sigma full matrix length mismatch");
  }
  for (long long m : cfg.conc_m) require(m >= 2, "conc_m entries must be at least 2");
  for (double e : cfg.conc_eps) require(e > 0.0, "conc_eps entries must be positive");
  if (cfg.conc_trials) require(*cfg.conc_trials >= 1000, "conc_trials must be at least 1000");

  if (cfg.certify_n) require(*cfg.certify_n >= 2, "certify_n must be at least 2");

  if (cfg.lb_sigma1) require(*cfg.lb_sigma1 > 0.0, "lb_sigma1 must be positive");
  if (cfg.lb_gamma) require(*cfg.lb_gamma > 0.0, "lb_gamma must be positive");
  for (int k : cfg.lb_k) require(k >= 2, "lb_k entries must be at least 2");
  for (size_t i = 1; i < cfg.lb_horizons.size(); ++i)
    require(cfg.lb_horizons[i] > cfg.lb_horizons[i - 1],
            "lb_horizons grid strictly increasing");
  for (long long n : cfg.lb_horizons) require(n >= 1, "lb_horizons must be at least 1");
  if (cfg.lb_replications)
    require(*cfg.lb_replications >= 2, "lb_replications must be at least 2");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::vector<std::string> seen;  // scalar keys already set

  auto mark_scalar = [&](const std::string& key) {
    for (const std::string& s : seen)
      if (s == key) throw ConfigParseError(line_no, "duplicate key '" + key + "'");
    seen.push_back(key);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(line_no, "empty key");
    if (value.empty()) throw ConfigParseError(line_no, "empty value for '" + key + "'");
    const std::vector<std::string> toks = tokenize(value);

    auto expect_one = [&]() -> const std::string& {
      if (toks.size() != 1)
        throw ConfigParseError(line_no, "'" + key + "' takes a single value");
      return toks[0];
    };

    if (key == "k") {
      mark_scalar(key);
      cfg.k = static_cast<int>(parse_int(expect_one(), line_no));
    } else if (key == "d") {
      mark_scalar(key);
      cfg.d = static_cast<int>(parse_int(expect_one(), line_no));
    } else if (key == "theta") {
      mark_scalar(key);
      cfg.theta = parse_doubles(toks, 0, line_no);
    } else if (key == "variances") {
      mark_scalar(key);
      for (const std::string& t : toks)
        cfg.covs.push_back({ArmCovSpec::Kind::Diag, {parse_double(t, line_no)}});
    } else if (key == "cov") {
      ArmCovSpec c;
      if (toks[0] == "diag") {
        c.kind = ArmCovSpec::Kind::Diag;
      } else if (toks[0] == "full") {
        c.kind = ArmCovSpec::Kind::Full;
      } else {
        throw ConfigParseError(line_no, "cov must start with diag or full");
      }
      c.values = parse_doubles(toks, 1, line_no);
      if (c.values.empty()) throw ConfigParseError(line_no, "cov has no entries");
      cfg.covs.push_back(std::move(c));
    } else if (key == "gamma") {
      mark_scalar(key);
      cfg.gamma = parse_double(expect_one(), line_no);
    } else if (key == "policy") {
      mark_scalar(key);
      cfg.policy = parse_policy(expect_one(), line_no);
    } else if (key == "epsilon") {
      mark_scalar(key);
      cfg.epsilon = parse_double(expect_one(), line_no);
    } else if (key == "normalization") {
      mark_scalar(key);
      const std::string& t = expect_one();
      if (t == "1/T") {
        cfg.normalization = CovNormalization::OverT;
      } else if (t == "1/(T-1)") {
        cfg.normalization = CovNormalization::OverTMinus1;
      } else {
        throw ConfigParseError(line_no, "normalization must be 1/T or 1/(T-1)");
      }
    } else if (key == "horizons") {
      mark_scalar(key);
      for (const std::string& t : toks) cfg.horizons.push_back(parse_int(t, line_no));
    } else if (key == "replications") {
      mark_scalar(key);
      cfg.replications = static_cast<int>(parse_int(expect_one(), line_no));
    } else if (key == "seed") {
      mark_scalar(key);
      cfg.seed = parse_u64(expect_one(), line_no);
    } else if (key == "workers") {
      mark_scalar(key);
      cfg.workers = static_cast<int>(parse_int(expect_one(), line_no));
    } else if (key == "out") {
      mark_scalar(key);
      cfg.out_dir = expect_one();
    } else if (key == "conc_sigma") {
      SigmaSpec s;
      if (toks[0] == "identity") {
        if (toks.size() != 2) throw ConfigParseError(line_no, "identity takes a dimension");
        s.kind = SigmaSpec::Kind::Identity;
        s.dim = static_cast<int>(parse_int(toks[1], line_no));
      } else if (toks[0] == "diag") {
        s.kind = SigmaSpec::Kind::Diag;
        s.values = parse_doubles(toks, 1, line_no);
        s.dim = static_cast<int>(s.values.size());
      } else if (toks[0] == "full") {
        if (toks.size() < 2) throw ConfigParseError(line_no, "full takes a dimension");
        s.kind = SigmaSpec::Kind::Full;
        s.dim = static_cast<int>(parse_int(toks[1], line_no));
        s.values = parse_doubles(toks, 2, line_no);
      } else if (toks[0] == "random-spd") {
        if (toks.size() != 3)
          throw ConfigParseError(line_no, "random-spd takes a dimension and a seed");
        s.kind = SigmaSpec::Kind::RandomSpd;
        s.dim = static_cast<int>(parse_int(toks[1], line_no));
        s.seed = parse_u64(toks[2], line_no);
      } else {
        throw ConfigParseError(line_no, "unknown conc_sigma form '" + toks[0] + "'");
      }
      cfg.conc_sigmas.push_back(std::move(s));
    } else if (key == "conc_m") {
      mark_scalar(key);
      for (const std::string& t : toks) cfg.conc_m.push_back(parse_int(t, line_no));
    } else if (key == "conc_eps") {
      mark_scalar(key);
      cfg.conc_eps = parse_doubles(toks, 0, line_no);
    } else if (key == "conc_eps_auto") {
      mark_scalar(key);
      cfg.conc_eps_auto = parse_bool(expect_one(), line_no);
    } else if (key == "conc_trials") {
      mark_scalar(key);
      cfg.conc_trials = parse_int(expect_one(), line_no);
    } else if (key == "certify_n") {
      mark_scalar(key);
      cfg.certify_n = parse_int(expect_one(), line_no);
    } else if (key == "lb_sigma1") {
      mark_scalar(key);
      cfg.lb_sigma1 = parse_double(expect_one(), line_no);
    } else if (key == "lb_gamma") {
      mark_scalar(key);
      cfg.lb_gamma = parse_double(expect_one(), line_no);
    } else if (key == "lb_k") {
      mark_scalar(key);
      for (const std::string& t : toks)
        cfg.lb_k.push_back(static_cast<int>(parse_int(t, line_no)));
    } else if (key == "lb_horizons") {
      mark_scalar(key);
      for (const std::string& t : toks) cfg.lb_horizons.push_back(parse_int(t, line_no));
    } else if (key == "lb_replications") {
      mark_scalar(key);
      cfg.lb_replications = static_cast<int>(parse_int(expect_one(), line_no));
    } else if (key == "lb_policies") {
      mark_scalar(key);
      for (const std::string& t : toks) cfg.lb_policies.push_back(parse_policy(t, line_no));
    } else if (key == "lb_divergence") {
      mark_scalar(key);
      cfg.lb_divergence = parse_bool(expect_one(), line_no);
    } else {
      throw ConfigParseError(line_no, "unknown key '" + key + "'");
    }
  }

  validate(cfg);
  return cfg;
}

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Lcb: return "lcb";
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::EpsilonGreedy: return "epsilon-greedy";
    case PolicyKind::Oracle: return "oracle";
  }
  return "?";
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto line_list = [&out](const char* key, const auto& values, auto&& format) {
    if (values.empty()) return;
    out << key << " =";
    for (const auto& v : values) out << ' ' << format(v);
    out << '\n';
  };
  auto fmt_ll = [](long long v) { return std::to_string(v); };
  auto fmt_int = [](int v) { return std::to_string(v); };

  if (cfg.k) out << "k = " << *cfg.k << '\n';
  if (cfg.d) out << "d = " << *cfg.d << '\n';
  line_list("theta", cfg.theta, fmt);
  for (const ArmCovSpec& c : cfg.covs) {
    out << "cov = " << (c.kind == ArmCovSpec::Kind::Diag ? "diag" : "full");
    for (double v : c.values) out << ' ' << fmt(v);
    out << '\n';
  }
  if (cfg.gamma) out << "gamma = " << fmt(*cfg.gamma) << '\n';
  if (cfg.policy) out << "policy = " << policy_name(*cfg.policy) << '\n';
  if (cfg.epsilon) out << "epsilon = " << fmt(*cfg.epsilon) << '\n';
  if (cfg.normalization)
    out << "normalization = "
        << (*cfg.normalization == CovNormalization::OverT ? "1/T" : "1/(T-1)") << '\n';
  line_list("horizons", cfg.horizons, fmt_ll);
  if (cfg.replications) out << "replications = " << *cfg.replications << '\n';
  if (cfg.seed) out << "seed = " << *cfg.seed << '\n';
  if (cfg.workers) out << "workers = " << *cfg.workers << '\n';
  if (cfg.out_dir) out << "out = " << *cfg.out_dir << '\n';

  for (const SigmaSpec& s : cfg.conc_sigmas) {
    out << "conc_sigma = ";
    switch (s.kind) {
      case SigmaSpec::Kind::Identity:
        out << "identity " << s.dim;
        break;
      case SigmaSpec::Kind::Diag:
        out << "diag";
        for (double v : s.values) out << ' ' << fmt(v);
        break;
      case SigmaSpec::Kind::Full:
        out << "full " << s.dim;
        for (double v : s.values) out << ' ' << fmt(v);
        break;
      case SigmaSpec::Kind::RandomSpd:
        out << "random-spd " << s.dim << ' ' << s.seed;
        break;
    }
    out << '\n';
  }
  line_list("conc_m", cfg.conc_m, fmt_ll);
  line_list("conc_eps", cfg.conc_eps, fmt);
  if (cfg.conc_eps_auto) out << "conc_eps_auto = " << (*cfg.conc_eps_auto ? "true" : "false") << '\n';
  if (cfg.conc_trials) out << "conc_trials = " << *cfg.conc_trials << '\n';
  if (cfg.certify_n) out << "certify_n = " << *cfg.certify_n << '\n';

  if (cfg.lb_sigma1) out << "lb_sigma1 = " << fmt(*cfg.lb_sigma1) << '\n';
  if (cfg.lb_gamma) out << "lb_gamma = " << fmt(*cfg.lb_gamma) << '\n';
  line_list("lb_k", cfg.lb_k, fmt_int);
  line_list("lb_horizons", cfg.lb_horizons, fmt_ll);
  if (cfg.lb_replications) out << "lb_replications = " << *cfg.lb_replications << '\n';
  if (!cfg.lb_policies.empty()) {
    out << "lb_policies =";
    for (PolicyKind p : cfg.lb_policies) out << ' ' << policy_name(p);
    out << '\n';
  }
  if (cfg.lb_divergence)
    out << "lb_divergence = " << (*cfg.lb_divergence ? "true" : "false") << '\n';
  return out.str();
}

EnvironmentSpec environment_from_config(const ExperimentConfig& cfg) {
  if (cfg.covs.empty())
    throw ConfigValidationError("config has no cov/variances entries");
  if (!cfg.gamma) throw ConfigValidationError("config has no gamma");

  int dim;
  if (cfg.covs.front().kind == ArmCovSpec::Kind::Diag) {
    dim = static_cast<int>(cfg.covs.front().values.size());
  } else {
    dim = static_cast<int>(
        std::lround(std::sqrt(static_cast<double>(cfg.covs.front().values.size()))));
  }

  std::vector<PsdMatrix> covs;
  covs.reserve(cfg.covs.size());
  for (const ArmCovSpec& c : cfg.covs) {
    if (c.kind == ArmCovSpec::Kind::Diag) {
      covs.push_back(PsdMatrix::diagonal(c.values));
    } else {
      Matrix m(dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          m(i, j) = c.values[static_cast<size_t>(i) * dim + j];
      try {
        covs.push_back(PsdMatrix::from_matrix(std::move(m)));
      } catch (const NotPsdError& e) {
        throw ConfigValidationError(std::string("cov entry invalid: ") + e.what());
      }
    }
  }
  return build_environment(cfg.theta, std::move(covs), *cfg.gamma);
}

PsdMatrix sigma_from_spec(const SigmaSpec& spec) {
  switch (spec.kind) {
    case SigmaSpec::Kind::Identity:
      return PsdMatrix::identity(spec.dim);
    case SigmaSpec::Kind::Diag:
      return PsdMatrix::diagonal(spec.values);
    case SigmaSpec::Kind::Full: {
      Matrix m(spec.dim);
      for (int i = 0; i < spec.dim; ++i)
        for (int j = 0; j < spec.dim; ++j)
          m(i, j) = spec.values[static_cast<size_t>(i) * spec.dim + j];
      return PsdMatrix::from_matrix(std::move(m));
    }
    case SigmaSpec::Kind::RandomSpd: {
      // A with iid standard normal entries; A^T A is SPD almost surely.
      RngStream rng(spec.seed, 0);
      Matrix a(spec.dim);
      for (double& v : a.a) v = rng.next_normal();
      return PsdMatrix::from_matrix(matmul(transpose(a), a));
    }
  }
  throw SemrError("unreachable sigma spec kind");
}

std::string sigma_label(const SigmaSpec& spec) {
  switch (spec.kind) {
    case SigmaSpec::Kind::Identity:
      return "identity-" + std::to_string(spec.dim);
    case SigmaSpec::Kind::Diag: {
      std::string s = "diag";
      for (double v : spec.values) s += "-" + fmt(v);
      return s;
    }
    case SigmaSpec::Kind::Full:
      return "full-" + std::to_string(spec.dim) + "x" + std::to_string(spec.dim);
    case SigmaSpec::Kind::RandomSpd:
      return "random-spd-" + std::to_string(spec.dim) + "-" + std::to_string(spec.seed);
  }
  return "?";
}

}  // namespace semr
