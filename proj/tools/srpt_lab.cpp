// Command-line driver for the SRPT heavy-traffic lab.
//
//   srpt_lab run --config exp.json [--out dir] [--workers n] [--seed s]
//   srpt_lab invert-s --alpha 1 --beta 1 --ln-y 10 20 40
//   srpt_lab compare-rbm --n 10000 --seed 7 [--out report.json]
//   srpt_lab replay --log events.csv [--discipline srpt]

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srpt_lab/experiment.hpp"

namespace {

using namespace srpt_lab;

int cmd_run(const std::string &config_path, const std::string &out_dir,
            std::optional<unsigned> workers, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty())
    cfg.output_dir = out_dir;
  if (seed)
    cfg.base_seed = *seed;
  cfg.workers = workers ? *workers : workers_from_env(1);
  const ExperimentResult res = run_experiment(cfg);
  for (const auto &t : res.trends)
    std::cout << t.to_json().dump() << '\n';
  if (!res.fclt.is_null())
    std::cout << res.fclt.dump() << '\n';
  std::cout << "wrote " << res.files.size() << " files to " << cfg.output_dir
            << '\n';
  return 0;
}

int cmd_invert(double alpha, double beta, const std::vector<double> &ys,
               const std::vector<double> &ln_ys) {
  const ProcTimeDist d(alpha, beta);
  std::vector<double> all = ys;
  for (double l : ln_ys)
    all.push_back(std::exp(l));
  if (all.empty())
    throw CLI::ValidationError("invert-s", "give at least one --y or --ln-y");
  std::printf("%-24s %-24s %-24s %s\n", "y", "S_inv(y)", "S(S_inv(y))",
              "beta*S_inv/(ln y)^(1/alpha)");
  for (const auto &row : invert_s(d, all)) {
    std::printf("%-24s %-24s %-24s %s\n", format_double(row.y).c_str(),
                format_double(row.s_inv).c_str(),
                format_double(row.s_of_s_inv).c_str(),
                row.weibull_ratio ? format_double(*row.weibull_ratio).c_str()
                                  : "-");
  }
  return 0;
}

int cmd_compare_rbm(const RbmParams &p, double t, std::size_t n,
                    std::uint64_t seed, unsigned workers,
                    const std::string &out_file) {
  const RbmComparison cmp = compare_rbm(p, t, n, seed, workers);
  const std::string report = cmp.to_json().dump(2);
  std::cout << report << '\n';
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out)
      throw std::runtime_error("cannot write " + out_file);
    out << report << '\n';
  }
  return 0;
}

int cmd_replay(const std::string &log_path, const std::string &discipline,
               const std::string &out_file) {
  std::ifstream in(log_path);
  if (!in)
    throw std::runtime_error("cannot open " + log_path);
  const EventLog log = EventLog::read_csv(in);
  const ReplayReport rep = replay(log, parse_discipline(discipline));
  const std::string report = rep.to_json().dump(2);
  std::cout << report << '\n';
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out)
      throw std::runtime_error("cannot write " + out_file);
    out << report << '\n';
  }
  return rep.exact() ? 0 : 3;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"SRPT heavy-traffic simulation lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  auto *run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment JSON")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--workers", workers, "worker threads (env SRPT_LAB_WORKERS)");
  run->add_option("--seed", seed, "base seed (overrides config)");

  double alpha = 1.0, beta = 1.0;
  std::vector<double> ys, ln_ys;
  auto *inv = app.add_subcommand("invert-s", "tabulate the inverse of S");
  inv->add_option("--alpha", alpha, "Weibull shape")->capture_default_str();
  inv->add_option("--beta", beta, "Weibull rate")->capture_default_str();
  inv->add_option("--y", ys, "arguments y");
  inv->add_option("--ln-y", ln_ys, "arguments given as ln y");

  RbmParams rbm;
  double rbm_t = 1.0;
  std::size_t rbm_n = 10000;
  std::uint64_t rbm_seed = 1;
  unsigned rbm_workers = 0;
  std::string rbm_out;
  auto *cmp = app.add_subcommand("compare-rbm",
                                 "KS of simulated RBM marginal vs closed form");
  cmp->add_option("--kappa", rbm.drift, "drift")->capture_default_str();
  cmp->add_option("--variance", rbm.variance, "variance per unit time")
      ->capture_default_str();
  cmp->add_option("--step", rbm.step, "Euler step")->capture_default_str();
  cmp->add_option("--t", rbm_t, "evaluation time")->capture_default_str();
  cmp->add_option("--n", rbm_n, "sample paths")->capture_default_str();
  cmp->add_option("--seed", rbm_seed, "seed")->capture_default_str();
  cmp->add_option("--workers", rbm_workers, "worker threads");
  cmp->add_option("--out", rbm_out, "write the report to this file");

  std::string log_path, discipline = "srpt", replay_out;
  auto *rep = app.add_subcommand("replay", "re-derive Q/W from an event log");
  rep->add_option("--log", log_path, "event-log CSV")->required();
  rep->add_option("--discipline", discipline, "srpt or fifo")
      ->capture_default_str();
  rep->add_option("--out", replay_out, "write the report to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run)
      return cmd_run(config_path, out_dir, workers, seed);
    if (*inv)
      return cmd_invert(alpha, beta, ys, ln_ys);
    if (*cmp)
      return cmd_compare_rbm(rbm, rbm_t, rbm_n, rbm_seed,
                             rbm_workers ? rbm_workers : workers_from_env(1),
                             rbm_out);
    if (*rep)
      return cmd_replay(log_path, discipline, replay_out);
  } catch (const config_error &e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error &e) {
    return app.exit(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
