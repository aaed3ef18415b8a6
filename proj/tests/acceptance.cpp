// Acceptance suite. Usage: srpt_lab_acceptance [criterion ...]
// With no arguments every criterion runs. Exit status is nonzero if any
// selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "srpt_lab/experiment.hpp"

namespace {

using namespace srpt_lab;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string summary;
};

void note(const char *fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

constexpr std::uint64_t kSeed = 20240611;
constexpr std::size_t kTraces = 100;

// Shared primitives for criteria 1 and 2: Exp(1) sizes, Poisson arrivals,
// kappa = 0, w0 = 1, scaled horizon 1, grid 0.01.
struct TraceSetup {
  HeavyTrafficParams p;
  SFunction sf{ProcTimeDist::exponential(1.0)};
  SystemConfig cfg;
  std::vector<Thresholds> th;
  std::vector<double> grid;
  std::vector<double> phys;
  std::vector<double> xs;

  TraceSetup(double r, std::vector<double> eps) {
    p.w0 = 1.0;
    cfg = make_system(p, r, sf);
    for (double e : eps)
      th.push_back(thresholds(cfg, sf, e));
    grid = scaled_grid(1.0, 0.01);
    phys = physical_grid(grid, r);
    xs = {1.0, cfg.c_r};
    for (const auto &t : th) {
      xs.push_back(t.u);
      if (t.l > 0.0)
        xs.push_back(t.l);
    }
  }

  RawPath path(DisciplineKind d, std::size_t i) const {
    return run(cfg, p, d, phys.back(), phys, xs, kSeed, i);
  }
};

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double balance = 0.0, entry = 0.0, x1 = 0.0, x2 = 0.0, squeeze = 0.0;
  std::size_t squeeze_points = 0;

  auto check = [&](const TraceSetup &s, std::size_t i) {
    const RawPath raw = s.path(DisciplineKind::SRPT, i);
    for (const double x : {1.0, s.cfg.c_r}) {
      for (std::size_t j = 0; j < raw.size(); ++j) {
        balance = std::max(balance, std::abs(balance_residual(raw, raw.t[j], x)));
        entry = std::max(entry, -entry_work_slack(raw, j, x));
        x1 = std::max(x1, -work_below_x_slack(raw, j, x));
      }
    }
    for (const auto &th : s.th) {
      const ScaledPath sp = scale_path(raw, s.cfg, s.sf, th, s.grid);
      for (std::size_t j = 0; j < sp.size(); ++j) {
        for (const double x : {1.0, s.cfg.c_r})
          x2 = std::max(x2, -scaled_work_below_x_slack(sp, j, x));
        if (const auto sq = squeeze_check(sp, j)) {
          ++squeeze_points;
          squeeze = std::max({squeeze, sq->lhs - sq->mid, sq->mid - sq->rhs});
        }
      }
    }
  };

  for (double r : {5.0, 10.0}) {
    const TraceSetup s(r, {1.0});
    note("r=%g c_r=%.6f l=%g u=%.6f", r, s.cfg.c_r, s.th[0].l, s.th[0].u);
    for (std::size_t i = 0; i < kTraces; ++i)
      check(s, i);
  }
  note("squeeze points at r in {5, 10}: %zu (l = 0 for every epsilon there)",
       squeeze_points);
  const TraceSetup extra(100.0, {0.1});
  note("squeeze also checked at r=100 eps=0.1: l=%.6f u=%.6f", extra.th[0].l,
       extra.th[0].u);
  for (std::size_t i = 0; i < kTraces; ++i)
    check(extra, i);
  const double elapsed = seconds_since(t0);

  note("max |balance residual|      %.3e (tol 1e-9)", balance);
  note("max entry-work violation    %.3e (tol 1e-9)", entry);
  note("max work-below-x violation (physical) %.3e (tol 1e-9)", x1);
  note("max work-below-x violation (scaled)   %.3e (tol 1e-9)", x2);
  note("max squeeze violation       %.3e over %zu points (tol 1e-12)", squeeze,
       squeeze_points);
  note("runtime %.2f s (target < 30 s)", elapsed);
  Outcome o;
  o.pass = balance <= 1e-9 && entry <= 1e-9 && x1 <= 1e-9 && x2 <= 1e-9 &&
           squeeze <= 1e-12 && squeeze_points > 0 && elapsed < 30.0;
  o.summary = "pathwise exactness over " + std::to_string(3 * kTraces) + " traces";
  return o;
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  double w_gap = 0.0;
  std::size_t q_violations = 0, points = 0;
  for (double r : {5.0, 10.0}) {
    const TraceSetup s(r, {1.0});
    for (std::size_t i = 0; i < kTraces; ++i) {
      const RawPath a = s.path(DisciplineKind::SRPT, i);
      const RawPath b = s.path(DisciplineKind::FIFO, i);
      for (std::size_t j = 0; j < a.size(); ++j) {
        ++points;
        w_gap = std::max(w_gap, std::abs(a.w[j] - b.w[j]));
        if (a.q[j] > b.q[j])
          ++q_violations;
      }
    }
  }
  note("grid points compared        %zu", points);
  note("max |W_SRPT - W_FIFO|        %.3e (tol 1e-9)", w_gap);
  note("points with Q_SRPT > Q_FIFO  %zu", q_violations);
  note("runtime %.2f s", seconds_since(t0));
  return {w_gap < 1e-9 && q_violations == 0, "SRPT vs FIFO on shared primitives"};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<double, double>> cases{{1.0, 1.0}};
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0})
      cases.emplace_back(a, b);

  std::vector<double> mono_grid;
  for (double ly = 10.0; ly <= 50.0 + 1e-9; ly += 2.5)
    mono_grid.push_back(ly);

  bool pass = true;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto [alpha, beta] = cases[k];
    const ProcTimeDist d(alpha, beta);
    const SFunction sf(d);

    double worst_round_trip = 0.0;
    bool round_trip_ok = true;
    for (double ly = std::log(sf.at_zero()) + 0.05; ly <= 50.0 + 1e-9;
         ly += 0.25) {
      const double y = std::exp(ly);
      const double s = sf.value(sf.inverse(y));
      const double rel = s / y - 1.0;
      worst_round_trip = std::max(worst_round_trip, std::abs(rel));
      if (!(s >= y && s <= y * (1.0 + 1e-6)))
        round_trip_ok = false;
    }

    auto ratio = [&](double ly) {
      return beta * sf.inverse(std::exp(ly)) / std::pow(ly, 1.0 / alpha);
    };
    bool mono = true;
    for (std::size_t i = 1; i < mono_grid.size(); ++i)
      if (!(ratio(mono_grid[i]) < ratio(mono_grid[i - 1])))
        mono = false;
    bool mono_from_1 = true;
    for (double ly = 1.5; ly <= 50.0 + 1e-9; ly += 0.5)
      if (!(ratio(ly) < ratio(ly - 0.5)))
        mono_from_1 = false;
    const double at50 = ratio(50.0);
    const bool ok = round_trip_ok && mono && at50 < 1.3;
    pass = pass && ok;
    note("%s alpha=%-3g beta=%-3g round-trip max rel %.2e %s, ratio monotone "
         "on ln y in [10,50]: %s (from ln y = 1: %s), ratio(e^50) = %.5f %s",
         k == 0 ? "Exp(1)      " : "Weibull     ", alpha, beta,
         worst_round_trip, round_trip_ok ? "ok" : "BAD", mono ? "yes" : "NO",
         mono_from_1 ? "yes" : "no", at50, at50 < 1.3 ? "< 1.3" : ">= 1.3 FAIL");
  }
  const double elapsed = seconds_since(t0);
  note("runtime %.2f s (target < 5 s)", elapsed);
  return {pass && elapsed < 5.0, "S inversion round trip and Weibull ratio"};
}

Outcome criterion4() {
  bool pass = true;
  const std::vector<double> lys{10.0, 20.0, 40.0};
  std::vector<std::pair<double, double>> cases;
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0})
      cases.emplace_back(a, b);
  for (const auto &[alpha, beta] : cases) {
    const SFunction sf(ProcTimeDist(alpha, beta));
    auto f = [&](double y) { return sf.inverse(y); };
    std::vector<double> v;
    for (double ly : lys)
      v.push_back(svrate_statistic(f, 2.0, std::exp(ly)));
    const bool dec = v[1] < v[0] && v[2] < v[1];
    pass = pass && dec;
    note("Weibull alpha=%-3g beta=%-3g: %.6f %.6f %.6f %s", alpha, beta, v[0],
         v[1], v[2], dec ? "decreasing" : "NOT decreasing");
  }
  auto slow = [](double y) { return std::exp(std::pow(std::log(y), 0.75)); };
  std::vector<double> v;
  for (double ly : lys)
    v.push_back(svrate_statistic(slow, 2.0, std::exp(ly)));
  const bool not_dec = !(v[1] < v[0] && v[2] < v[1]);
  note("exp((ln y)^0.75):              %.6f %.6f %.6f %s", v[0], v[1], v[2],
       not_dec ? "does not decrease" : "DECREASES");
  return {pass && not_dec, "svrate dichotomy"};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const RbmParams p{0.0, 1.0, 0.0, 1e-3};
  const RbmComparison cmp = compare_rbm(p, 1.0, 10000, kSeed, workers_from_env(1));
  note("KS(simulated W*(1), closed form) = %.5f over n=%zu (tol 0.02), %.2f s",
       cmp.statistic, cmp.n, seconds_since(t0));

  bool tables = true;
  const std::vector<double> path{0.0, -0.5, -1.3, -0.8};
  tables = tables && reflect(path, 1.0) == std::vector<double>{1.0, 0.5, 0.0, 0.5};
  const std::vector<double> up{0.0, 0.25, 0.5, 1.0};
  tables = tables && reflect(up, 0.0) == up;
  std::vector<double> down(9), expect(9);
  for (std::size_t j = 0; j < down.size(); ++j) {
    down[j] = -0.25 * static_cast<double>(j);
    expect[j] = std::max(1.0 + down[j], 0.0);
  }
  tables = tables && reflect(down, 1.0) == expect;
  note("reflect unit tables: %s", tables ? "exact" : "MISMATCH");
  return {cmp.statistic < 0.02 && tables, "RBM oracle"};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  HeavyTrafficParams p;
  const SystemConfig cfg = make_system(p, 50.0);
  const FcltVarianceResult f = fclt_variance_check(cfg, p, 1.0, 1.0, 2000, kSeed);
  const double target = 2.0 - 5.0 * std::exp(-1.0);
  const double rel = std::abs(f.sample_variance / target - 1.0);
  const double elapsed = seconds_since(t0);
  note("sample variance of Vhat_1(1) = %.5f, predicted %.5f, target %.5f, "
       "relative error %.3f (tol 0.20)",
       f.sample_variance, f.predicted, target, rel);
  note("runtime %.2f s (target < 120 s)", elapsed);
  return {rel < 0.2 && elapsed < 120.0, "truncated-load FCLT variance"};
}

ExperimentConfig pipeline_config(const fs::path &dir) {
  ExperimentConfig c;
  c.dist = ProcTimeDist::exponential(1.0);
  c.kappa = 0.0;
  c.w0 = 0.0;
  c.r_values = {30.0, 100.0, 300.0};
  c.epsilon = {1.0, 0.1};
  c.fixed_x = {1.0};
  c.delta = 0.01;
  c.horizon = 1.0;
  c.replications = 300;
  c.base_seed = kSeed;
  c.output_dir = dir.string();
  c.trend_margin = 0.05;
  c.workers = workers_from_env(1);
  return c;
}

const TrendReport &find_trend(const ExperimentResult &res,
                              const std::string &name) {
  for (const auto &t : res.trends)
    if (t.statistic == name)
      return t;
  throw std::runtime_error("missing trend " + name);
}

void print_trend(const TrendReport &t) {
  std::string meds;
  for (std::size_t i = 0; i < t.r.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " r=%g:%.5g", t.r[i], t.median[i]);
    meds += buf;
  }
  std::string skipped;
  for (double r : t.skipped_r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %g", r);
    skipped += buf;
  }
  note("%-22s margin %.2f%s -> %s%s%s", t.statistic.c_str(), t.margin,
       meds.c_str(), t.monotone_decreasing ? "monotone" : "NOT monotone",
       skipped.empty() ? "" : ", l = 0 at r =", skipped.c_str());
}

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("srpt_lab_acceptance_" + name + "_" +
                        std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = scratch("c7");
  const ExperimentResult res = run_experiment(pipeline_config(dir));
  const TrendReport &gap = find_trend(res, "gap");
  const TrendReport &below = find_trend(res, "mass_below_l_eps=1");
  const TrendReport &above = find_trend(res, "work_above_u_eps=1");
  print_trend(gap);
  print_trend(below);
  print_trend(above);
  if (below.r.empty())
    note("%s", "below-l statistic at eps=1 is vacuous: l = 0 at every r");
  std::string ks;
  for (double k : gap.terminal_ks)
    ks += " " + format_label(k);
  note("terminal Qtilde(1) vs RBM marginal KS per r:%s", ks.c_str());
  note("%s", "supplementary (not gating), eps=0.1:");
  print_trend(find_trend(res, "mass_below_l_eps=0.1"));
  print_trend(find_trend(res, "work_above_u_eps=0.1"));
  const double elapsed = seconds_since(t0);
  note("runtime %.1f s (target < 600 s)", elapsed);
  fs::remove_all(dir);
  return {gap.monotone_decreasing && below.monotone_decreasing &&
              above.monotone_decreasing && elapsed < 600.0,
          "gap and region-mass trends, n=300, r in {30, 100, 300}"};
}

Outcome criterion8() {
  const fs::path dir = scratch("c8");
  ExperimentConfig c = pipeline_config(dir);
  const ExperimentResult res = run_experiment(c);
  const TrendReport &fixed = find_trend(res, "theta_x=1");
  const TrendReport &eps = find_trend(res, "theta_eps=1");
  print_trend(fixed);
  print_trend(eps);
  if (eps.r.empty())
    note("%s", "epsilon-theta statistic at eps=1 is vacuous: l = 0 at every r");
  note("%s", "supplementary (not gating), eps=0.1:");
  print_trend(find_trend(res, "theta_eps=0.1"));
  fs::remove_all(dir);
  return {fixed.monotone_decreasing && eps.monotone_decreasing &&
              fixed.margin == 0.0 && eps.margin == 0.0,
          "theta clock trends at margin 0"};
}

std::map<std::string, std::string> read_all(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

Outcome criterion9() {
  const fs::path a = scratch("c9a"), b = scratch("c9b");
  ExperimentConfig ca = pipeline_config(a);
  ExperimentConfig cb = pipeline_config(b);
  ca.dump_paths = cb.dump_paths = true;
  cb.workers = ca.workers + 1;
  run_experiment(ca);
  run_experiment(cb);
  const auto fa = read_all(a), fb = read_all(b);
  std::size_t differing = 0;
  for (const auto &[name, content] : fa) {
    const auto it = fb.find(name);
    if (it == fb.end() || it->second != content) {
      ++differing;
      note("differs: %s", name.c_str());
    }
  }
  note("%zu files compared (workers %u vs %u), %zu differ", fa.size(),
       ca.workers, cb.workers, differing);
  fs::remove_all(a);
  fs::remove_all(b);
  return {differing == 0 && fa.size() == fb.size() && !fa.empty(),
          "byte-identical rerun"};
}

} // namespace

int main(int argc, char **argv) {
  const std::vector<std::function<Outcome()>> all{
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(all.size()); ++i)
      selected.push_back(i);

  int failures = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(all.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    std::printf("criterion %d:\n", k);
    std::fflush(stdout);
    Outcome o;
    try {
      o = all[k - 1]();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d %s  %s\n", k, o.pass ? "PASS" : "FAIL",
                o.summary.c_str());
    std::fflush(stdout);
    if (!o.pass)
      ++failures;
  }
  return failures == 0 ? 0 : 1;
}
