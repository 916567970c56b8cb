#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "semr/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw semr::ConfigValidationError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int env_workers() {
  const char* raw = std::getenv("SEMR_WORKERS");
  if (!raw || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1)
    throw semr::ConfigValidationError("SEMR_WORKERS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semr: sequential estimation under multiple resources, as a lab bench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  uint64_t seed_flag = 0;
  int workers_flag = 0;
  std::string csv_path;
  std::string correction = "none";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_flag, "output directory (default: config 'out' or ./out)");
    sub->add_option("--seed", seed_flag, "override the config root seed");
    sub->add_option("--workers", workers_flag, "worker threads (default: SEMR_WORKERS or config)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* simulate = app.add_subcommand("simulate", "one horizon, full regret report");
  CLI::App* sweep = app.add_subcommand("sweep", "horizon grid with log-log slope fits");
  CLI::App* concentration =
      app.add_subcommand("concentration", "trace-concentration tail study");
  CLI::App* certify = app.add_subcommand("certify", "pull-count bound certificates");
  CLI::App* lowerbound =
      app.add_subcommand("lowerbound", "adversarial-pair lower-bound certification");
  for (CLI::App* sub : {simulate, sweep, concentration, certify, lowerbound})
    add_common(sub);

  CLI::App* fit = app.add_subcommand("fit-slope", "fit a slope to an existing results CSV");
  fit->add_option("--csv", csv_path, "results.csv produced by sweep")->required();
  fit->add_option("--correction", correction, "none or sqrtlog")
      ->check(CLI::IsMember({"none", "sqrtlog"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      const semr::SlopeCorrection corr = correction == "sqrtlog"
                                             ? semr::SlopeCorrection::SqrtLog
                                             : semr::SlopeCorrection::None;
      return semr::cmd_fit_slope(csv_path, corr, std::cout);
    }

    semr::ExperimentConfig cfg = semr::parse_config(read_file(config_path));
    if (app.get_subcommand()->count("--seed") > 0) cfg.seed = seed_flag;
    if (workers_flag > 0) {
      cfg.workers = workers_flag;
    } else if (const int ew = env_workers(); ew > 0) {
      cfg.workers = ew;
    }
    const std::string out_dir =
        !out_flag.empty() ? out_flag : cfg.out_dir.value_or(std::string("out"));

    if (simulate->parsed()) return semr::cmd_simulate(cfg, out_dir, std::cout);
    if (sweep->parsed()) return semr::cmd_sweep(cfg, out_dir, std::cout);
    if (concentration->parsed()) return semr::cmd_concentration(cfg, out_dir, std::cout);
    if (certify->parsed()) return semr::cmd_certify(cfg, out_dir, std::cout);
    if (lowerbound->parsed()) return semr::cmd_lowerbound(cfg, out_dir, std::cout);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const semr::ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const semr::ConfigValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
