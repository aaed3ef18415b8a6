#ifndef SRPT_LAB_EXPERIMENT_HPP
#define SRPT_LAB_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "srpt_lab/dist.hpp"
#include "srpt_lab/htseq.hpp"
#include "srpt_lab/io.hpp"
#include "srpt_lab/rbm.hpp"
#include "srpt_lab/scaling.hpp"
#include "srpt_lab/srpt_sim.hpp"
#include "srpt_lab/stats.hpp"

namespace srpt_lab {

/// Invalid experiment configuration; field() names the offending key.
class config_error : public std::invalid_argument {
public:
  config_error(std::string field, const std::string &what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

inline std::string sha256_hex(const std::string &data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

enum class Pipeline { Trend, Fclt };

struct ExperimentConfig {
  ProcTimeDist dist = ProcTimeDist::exponential(1.0);
  double kappa = 0.0;
  double w0 = 0.0;
  InterarrivalLaw interarrival{};
  std::vector<double> r_values;
  std::vector<double> epsilon{1.0};
  std::vector<double> fixed_x{1.0};
  double delta = 0.01;
  double horizon = 1.0;
  std::size_t replications = 1;
  std::uint64_t base_seed = 1;
  std::string output_dir = "out";
  Pipeline pipeline = Pipeline::Trend;
  double trend_margin = 0.05;
  bool dump_paths = false;
  bool event_log = false;
  unsigned workers = 1;

  HeavyTrafficParams params() const {
    return {kappa, interarrival, dist, w0};
  }

  /// Canonical JSON of everything that affects numeric output.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["dist"] = {{"kind", "weibull"}, {"alpha", dist.alpha()},
                 {"beta", dist.beta()}};
    nlohmann::json ia = {{"kind", interarrival.name()}};
    if (interarrival.kind == InterarrivalLaw::Kind::Erlang)
      ia["k"] = interarrival.stages;
    if (interarrival.kind == InterarrivalLaw::Kind::Hyperexponential)
      ia["cv"] = interarrival.cv;
    j["heavy_traffic"] = {{"kappa", kappa},
                          {"w0", w0},
                          {"interarrival", ia},
                          {"r_values", r_values}};
    j["epsilon"] = epsilon;
    j["fixed_x"] = fixed_x;
    j["grid"] = {{"delta", delta}, {"horizon", horizon}};
    j["replications"] = replications;
    j["base_seed"] = base_seed;
    j["pipeline"] = pipeline == Pipeline::Trend ? "trend" : "fclt";
    j["trend_margin"] = trend_margin;
    j["dump_paths"] = dump_paths;
    j["event_log"] = event_log;
    return j;
  }
};

namespace detail {

inline const nlohmann::json &require(const nlohmann::json &j,
                                     const std::string &key,
                                     const std::string &path) {
  if (!j.is_object() || !j.contains(key))
    throw config_error(path + key, "missing");
  return j.at(key);
}

inline double number(const nlohmann::json &j, const std::string &field) {
  if (!j.is_number())
    throw config_error(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw config_error(field, "must be finite");
  return v;
}

inline double number_or(const nlohmann::json &j, const std::string &key,
                        double fallback, const std::string &path) {
  return j.contains(key) ? number(j.at(key), path + key) : fallback;
}

inline std::vector<double> number_list(const nlohmann::json &j,
                                       const std::string &field) {
  if (!j.is_array())
    throw config_error(field, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline bool flag_or(const nlohmann::json &j, const std::string &key,
                    bool fallback) {
  if (!j.contains(key))
    return fallback;
  if (!j.at(key).is_boolean())
    throw config_error(key, "must be a boolean");
  return j.at(key).get<bool>();
}

} // namespace detail

inline ProcTimeDist parse_dist(const nlohmann::json &j,
                               const std::string &path = "dist.") {
  const auto &kind = detail::require(j, "kind", path);
  if (!kind.is_string() || kind.get<std::string>() != "weibull")
    throw config_error(path + "kind", "only \"weibull\" is supported");
  const double alpha = detail::number(detail::require(j, "alpha", path), path + "alpha");
  const double beta = detail::number(detail::require(j, "beta", path), path + "beta");
  if (!(alpha > 0.0))
    throw config_error(path + "alpha", "must be positive");
  if (!(beta > 0.0))
    throw config_error(path + "beta", "must be positive");
  return {alpha, beta};
}

inline InterarrivalLaw parse_interarrival(const nlohmann::json &j,
                                          const std::string &path) {
  const auto &kind = detail::require(j, "kind", path);
  if (!kind.is_string())
    throw config_error(path + "kind", "must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "exponential")
    return InterarrivalLaw::exponential();
  if (k == "erlang") {
    const auto &stages = detail::require(j, "k", path);
    if (!stages.is_number_integer() || stages.get<int>() < 1)
      throw config_error(path + "k", "must be an integer >= 1");
    return InterarrivalLaw::erlang(stages.get<int>());
  }
  if (k == "hyperexponential") {
    const double cv = detail::number(detail::require(j, "cv", path), path + "cv");
    if (!(cv > 1.0))
      throw config_error(path + "cv", "must exceed 1");
    return InterarrivalLaw::hyperexponential(cv);
  }
  throw config_error(path + "kind",
                     "must be exponential, erlang or hyperexponential");
}

/// Validates the whole document before any work is done.
inline ExperimentConfig parse_config(const nlohmann::json &j) {
  if (!j.is_object())
    throw config_error("config", "must be a JSON object");
  ExperimentConfig c;
  c.dist = parse_dist(detail::require(j, "dist", ""));

  const auto &ht = detail::require(j, "heavy_traffic", "");
  const std::string hp = "heavy_traffic.";
  c.kappa = detail::number_or(ht, "kappa", 0.0, hp);
  c.w0 = detail::number_or(ht, "w0", 0.0, hp);
  if (!(c.w0 >= 0.0))
    throw config_error(hp + "w0", "must be nonnegative");
  if (ht.contains("interarrival"))
    c.interarrival = parse_interarrival(ht.at("interarrival"), hp + "interarrival.");
  c.r_values = detail::number_list(detail::require(ht, "r_values", hp),
                                   hp + "r_values");
  if (c.r_values.empty())
    throw config_error(hp + "r_values", "must not be empty");
  for (std::size_t i = 0; i < c.r_values.size(); ++i) {
    if (!(c.r_values[i] > 1.0))
      throw config_error(hp + "r_values", "every r must exceed 1");
    if (i > 0 && !(c.r_values[i] > c.r_values[i - 1]))
      throw config_error(hp + "r_values", "r_values not increasing");
    if (!(1.0 + c.kappa / c.r_values[i] > 0.0))
      throw config_error(hp + "kappa", "1 + kappa / r must be positive");
  }

  if (j.contains("epsilon"))
    c.epsilon = detail::number_list(j.at("epsilon"), "epsilon");
  if (c.epsilon.empty())
    throw config_error("epsilon", "must not be empty");
  for (double e : c.epsilon)
    if (!(e > 0.0))
      throw config_error("epsilon", "every epsilon must be positive");

  if (j.contains("fixed_x"))
    c.fixed_x = detail::number_list(j.at("fixed_x"), "fixed_x");
  for (double x : c.fixed_x)
    if (!(x > 0.0))
      throw config_error("fixed_x", "every threshold must be positive");

  if (j.contains("grid")) {
    const auto &g = j.at("grid");
    c.delta = detail::number_or(g, "delta", c.delta, "grid.");
    c.horizon = detail::number_or(g, "horizon", c.horizon, "grid.");
  }
  if (!(c.delta > 0.0))
    throw config_error("grid.delta", "must be positive");
  if (!(c.horizon > 0.0))
    throw config_error("grid.horizon", "must be positive");
  {
    const double steps = c.horizon / c.delta;
    if (std::abs(steps - std::round(steps)) > 1e-9 ||
        std::abs(std::round(steps) * c.delta - c.horizon) > 1e-12)
      throw config_error("grid.delta", "must divide grid.horizon");
  }

  if (j.contains("replications")) {
    const auto &n = j.at("replications");
    if (!n.is_number_integer() || n.get<long long>() < 1)
      throw config_error("replications", "must be an integer >= 1");
    c.replications = n.get<std::size_t>();
  }
  if (j.contains("base_seed")) {
    const auto &s = j.at("base_seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw config_error("base_seed", "must be a nonnegative integer");
    c.base_seed = s.get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string())
      throw config_error("output_dir", "must be a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("pipeline")) {
    const auto &p = j.at("pipeline");
    if (!p.is_string())
      throw config_error("pipeline", "must be a string");
    if (p.get<std::string>() == "trend")
      c.pipeline = Pipeline::Trend;
    else if (p.get<std::string>() == "fclt")
      c.pipeline = Pipeline::Fclt;
    else
      throw config_error("pipeline", "must be \"trend\" or \"fclt\"");
  }
  c.trend_margin = detail::number_or(j, "trend_margin", c.trend_margin, "");
  if (!(c.trend_margin >= 0.0))
    throw config_error("trend_margin", "must be nonnegative");
  c.dump_paths = detail::flag_or(j, "dump_paths", false);
  c.event_log = detail::flag_or(j, "event_log", false);
  if (c.pipeline == Pipeline::Fclt && c.replications < 2)
    throw config_error("replications", "fclt pipeline needs at least 2");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path &file) {
  std::ifstream in(file);
  if (!in)
    throw config_error("config", "cannot open " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw config_error("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Runs body(i) for i in [0, n) on `workers` threads. Results must be stored
/// by index so the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F &&body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n)
          return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure)
            failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

inline unsigned workers_from_env(unsigned fallback = 1) {
  if (const char *v = std::getenv("SRPT_LAB_WORKERS")) {
    try {
      const long n = std::stol(v);
      if (n >= 1)
        return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return fallback;
}

/// Thresholds tracked per replication: fixed x, 1 (for the 1 v chi weight),
/// and l, u for every epsilon.
inline std::vector<double> tracked_thresholds(const ExperimentConfig &c,
                                              const std::vector<Thresholds> &th) {
  std::vector<double> xs = c.fixed_x;
  xs.push_back(1.0);
  for (const auto &t : th) {
    if (t.l > 0.0)
      xs.push_back(t.l);
    xs.push_back(t.u);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

inline std::string r_tag(double r) { return format_label(r); }

struct ExperimentResult {
  std::vector<ReplicationEnsemble> ensembles;
  std::vector<TrendReport> trends;
  nlohmann::ordered_json fclt;
  std::vector<std::filesystem::path> files;
};

namespace detail {

class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec)
      throw std::runtime_error("cannot create output directory " +
                               dir_.string() + ": " + ec.message());
  }

  void write(const std::string &name, const std::string &content) {
    const auto file = dir_ / name;
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + file.string());
    out << content;
    out.close();
    if (!out)
      throw std::runtime_error("write failed for " + file.string());
    files_[name] = sha256_hex(content);
    sizes_[name] = content.size();
  }

  const std::map<std::string, std::string> &checksums() const { return files_; }
  const std::map<std::string, std::size_t> &sizes() const { return sizes_; }
  const std::filesystem::path &dir() const { return dir_; }

private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> files_;
  std::map<std::string, std::size_t> sizes_;
};

inline std::string ensemble_csv(const ReplicationEnsemble &e,
                                const ExperimentConfig &c) {
  std::ostringstream os;
  std::vector<std::string> cols{"replication", "gap", "terminal_qtilde",
                                "terminal_what"};
  for (double eps : c.epsilon) {
    const std::string s = r_tag(eps);
    cols.push_back("sup_mass_below_l_eps" + s);
    cols.push_back("sup_work_above_u_eps" + s);
    cols.push_back("sup_theta_eps" + s);
  }
  for (double x : c.fixed_x)
    cols.push_back("sup_theta_x" + r_tag(x));
  write_csv_header(os, cols);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < e.reps.size(); ++i) {
    const auto &rep = e.reps[i];
    std::vector<double> row{static_cast<double>(i), rep.gap,
                            rep.terminal_qtilde, rep.terminal_what};
    for (const auto &es : rep.eps) {
      row.push_back(es.sup_mass_below_l.value_or(nan));
      row.push_back(es.sup_work_above_u);
      row.push_back(es.sup_theta_eps.value_or(nan));
    }
    for (const auto &f : rep.fixed)
      row.push_back(f.sup_theta_stat);
    write_csv_row(os, row);
  }
  return os.str();
}

} // namespace detail

/// One r of the trend pipeline: n seeded SRPT replications, each scaled once
/// per epsilon and reduced to its summary.
inline ReplicationEnsemble
run_ensemble(const ExperimentConfig &c, double r,
             std::string *path_csv = nullptr, std::string *event_csv = nullptr) {
  const HeavyTrafficParams p = c.params();
  const SFunction sf(p.dist);
  const SystemConfig cfg = make_system(p, r, sf);
  std::vector<Thresholds> th;
  for (double eps : c.epsilon)
    th.push_back(thresholds(cfg, sf, eps));
  const std::vector<double> xs = tracked_thresholds(c, th);
  const std::vector<double> grid = scaled_grid(c.horizon, c.delta);
  const std::vector<double> phys = physical_grid(grid, r);
  const double horizon = r * r * c.horizon;

  ReplicationEnsemble ens;
  ens.r = r;
  ens.c_r = cfg.c_r;
  ens.reps.resize(c.replications);
  parallel_for(c.replications, c.workers, [&](std::size_t i) {
    EventLog log;
    const bool want_log = event_csv && i == 0;
    const RawPath raw = run(cfg, p, DisciplineKind::SRPT, horizon, phys, xs,
                            c.base_seed, i, want_log ? &log : nullptr);
    std::vector<ScaledPath> sps;
    for (const auto &t : th)
      sps.push_back(scale_path(raw, cfg, sf, t, grid));
    ens.reps[i] = summarize(sps, c.fixed_x);
    if (i == 0 && path_csv) {
      std::ostringstream os;
      write_scaled_csv(os, sps.front(),
                       c.fixed_x.empty() ? std::nullopt
                                         : std::optional<double>(c.fixed_x.front()));
      *path_csv = os.str();
    }
    if (want_log) {
      std::ostringstream os;
      log.write_csv(os);
      *event_csv = os.str();
    }
  });
  return ens;
}

/// Trend reports over the ensembles: gap, region masses and theta clocks.
inline std::vector<TrendReport>
pipeline_trends(const std::vector<ReplicationEnsemble> &ens,
                const ExperimentConfig &c) {
  std::vector<TrendReport> out;
  if (ens.empty() || ens.front().reps.size() < 2)
    return out;
  const std::optional<RbmParams> rbm =
      c.w0 == 0.0 ? std::optional<RbmParams>(rbm_params(c.params()))
                  : std::nullopt;
  if (ens.size() >= 3) {
    out.push_back(theorem_trend(ens, c.trend_margin, rbm, c.horizon));
  } else {
    TrendReport t = detail::trend_of(
        ens, "gap", c.trend_margin,
        [](const ReplicationSummary &s) -> std::optional<double> {
          return s.gap;
        });
    out.push_back(std::move(t));
  }
  for (double eps : c.epsilon) {
    out.push_back(region_mass_trend(ens, Region::BelowL, eps, 0.0));
    out.push_back(region_mass_trend(ens, Region::AboveU, eps, 0.0));
    out.push_back(lemma_theta_trend(ens, ThetaMode::eps(eps), 0.0));
  }
  for (double x : c.fixed_x)
    out.push_back(lemma_theta_trend(ens, ThetaMode::fixed_x(x), 0.0));
  return out;
}

inline std::string trend_file_name(const std::string &statistic) {
  std::string s = "trend_" + statistic + ".json";
  std::replace(s.begin(), s.end(), '=', '_');
  return s;
}

/// simulate -> scale -> aggregate -> report. Numeric outputs and the manifest
/// depend only on the config (output_dir and workers excluded).
inline ExperimentResult run_experiment(const ExperimentConfig &c) {
  detail::OutputSet out(c.output_dir);
  ExperimentResult res;
  const HeavyTrafficParams p = c.params();
  const SFunction sf(p.dist);

  if (c.pipeline == Pipeline::Trend) {
    for (double r : c.r_values) {
      std::string path_csv, event_csv;
      ReplicationEnsemble ens =
          run_ensemble(c, r, c.dump_paths ? &path_csv : nullptr,
                       c.event_log ? &event_csv : nullptr);
      out.write("ensemble_r" + r_tag(r) + ".csv", detail::ensemble_csv(ens, c));
      if (c.dump_paths)
        out.write("path_r" + r_tag(r) + "_rep0.csv", path_csv);
      if (c.event_log)
        out.write("events_r" + r_tag(r) + "_rep0.csv", event_csv);
      res.ensembles.push_back(std::move(ens));
    }
    res.trends = pipeline_trends(res.ensembles, c);
    for (const auto &t : res.trends)
      out.write(trend_file_name(t.statistic), t.to_json().dump(2) + "\n");
  } else {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (double r : c.r_values) {
      const SystemConfig cfg = make_system(p, r, sf);
      std::ostringstream os;
      write_csv_header(os, {"replication", "x", "vhat"});
      for (double x : c.fixed_x) {
        const FcltVarianceResult f = fclt_variance_check(
            cfg, p, x, c.horizon, c.replications, c.base_seed);
        for (std::size_t i = 0; i < f.samples.size(); ++i)
          write_csv_row(os, {static_cast<double>(i), x, f.samples[i]});
        nlohmann::ordered_json row;
        row["r"] = r;
        row["x"] = x;
        row["t"] = c.horizon;
        row["n"] = c.replications;
        row["sample_variance"] = f.sample_variance;
        row["predicted"] = f.predicted;
        rows.push_back(row);
      }
      out.write("fclt_r" + r_tag(r) + ".csv", os.str());
    }
    res.fclt = rows;
    out.write("fclt.json", rows.dump(2) + "\n");
  }

  nlohmann::ordered_json manifest;
  const std::string canonical = c.to_json().dump();
  manifest["config"] = nlohmann::ordered_json::parse(canonical);
  manifest["config_sha256"] = sha256_hex(canonical);
  manifest["base_seed"] = c.base_seed;
  manifest["seed_rule"] =
      "splitmix64 chain over (base_seed, bits(r), replication, stream_tag)";
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (double r : c.r_values)
    seeds.push_back(
        {{"r", r},
         {"replications", c.replications},
         {"rep0_interarrival_seed",
          derive_seed(c.base_seed, r, 0, StreamTag::Interarrival)},
         {"rep0_processing_seed",
          derive_seed(c.base_seed, r, 0, StreamTag::ProcessingTime)}});
  manifest["seeds"] = seeds;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto &[name, sum] : out.checksums())
    files.push_back(
        {{"name", name}, {"sha256", sum}, {"bytes", out.sizes().at(name)}});
  manifest["files"] = files;
  for (const auto &[name, sum] : out.checksums())
    res.files.push_back(out.dir() / name);
  out.write("manifest.json", manifest.dump(2) + "\n");
  res.files.push_back(out.dir() / "manifest.json");
  return res;
}

struct InversionRow {
  double y = 0.0;
  double s_inv = 0.0;
  double s_of_s_inv = 0.0;
  std::optional<double> weibull_ratio; // beta S^-1(y) / (ln y)^(1/alpha)
};

inline std::vector<InversionRow> invert_s(const ProcTimeDist &d,
                                          std::span<const double> ys) {
  const SFunction sf(d);
  std::vector<InversionRow> rows;
  for (double y : ys) {
    if (!(y > 0.0))
      throw domain_error("invert-s: y must be positive");
    InversionRow row;
    row.y = y;
    row.s_inv = sf.inverse(y);
    row.s_of_s_inv = sf.value(row.s_inv);
    if (y > 1.0)
      row.weibull_ratio =
          d.beta() * row.s_inv / std::pow(std::log(y), 1.0 / d.alpha());
    rows.push_back(row);
  }
  return rows;
}

struct RbmComparison {
  double statistic = 0.0;
  std::size_t n = 0;
  double t = 0.0;
  RbmParams params;
  std::vector<double> terminal;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["drift"] = params.drift;
    j["variance"] = params.variance;
    j["step"] = params.step;
    j["t"] = t;
    j["n"] = n;
    j["ks_statistic"] = statistic;
    return j;
  }
};

/// KS distance between simulated RBM terminal values at t and the analytic
/// marginal. Path i uses the seed derived from (seed, i).
inline RbmComparison compare_rbm(const RbmParams &p, double t, std::size_t n,
                                 std::uint64_t seed, unsigned workers = 1) {
  if (p.w0 != 0.0)
    throw unsupported_error("compare-rbm needs w0 = 0");
  if (n < 1)
    throw std::invalid_argument("compare-rbm needs n >= 1");
  RbmComparison res;
  res.n = n;
  res.t = t;
  res.params = p;
  res.terminal.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    res.terminal[i] =
        simulate_rbm(p, t, derive_seed(seed, 0.0, i, StreamTag::Brownian))
            .values.back();
  });
  res.statistic =
      ks_vs_cdf(res.terminal, [&](double w) { return marginal_cdf(p, t, w); });
  return res;
}

struct ReplayReport {
  std::size_t grid_points = 0;
  std::size_t arrivals = 0;
  std::size_t initial_jobs = 0;
  double max_q_diff = 0.0;
  double max_w_diff = 0.0;
  double final_w = 0.0;
  std::size_t final_q = 0;

  bool exact() const noexcept { return max_q_diff == 0.0 && max_w_diff == 0.0; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["grid_points"] = grid_points;
    j["initial_jobs"] = initial_jobs;
    j["arrivals"] = arrivals;
    j["max_q_diff"] = max_q_diff;
    j["max_w_diff"] = max_w_diff;
    j["final_q"] = final_q;
    j["final_w"] = final_w;
    j["exact"] = exact();
    return j;
  }
};

/// Re-derives Q and W at the logged grid times by rerunning the engine on the
/// logged primitives. Arrival records at time 0 are the initial jobs; the
/// crossing records give back the tracked thresholds.
inline ReplayReport replay(const EventLog &log, DisciplineKind discipline) {
  JobSet initial;
  std::vector<Arrival> arrivals;
  std::vector<double> grid;
  std::vector<double> xs;
  std::vector<const EventRecord *> grid_records;
  for (const auto &rec : log.records()) {
    if (rec.kind == EventKind::Arrival) {
      if (rec.time == 0.0)
        initial.insert({rec.residual_after, static_cast<std::uint64_t>(rec.job_seq)});
      else
        arrivals.push_back({rec.time, rec.residual_after});
    } else if (rec.kind == EventKind::Grid) {
      grid.push_back(rec.time);
      grid_records.push_back(&rec);
    } else if (rec.kind == EventKind::Crossing) {
      xs.push_back(rec.residual_after);
    }
  }
  ReplayReport rep;
  rep.initial_jobs = initial.total_count();
  rep.arrivals = arrivals.size();
  const RawPath path =
      inject_trace(arrivals, discipline, grid, xs, nullptr, std::move(initial));
  rep.grid_points = path.size();
  for (std::size_t j = 0; j < path.size(); ++j) {
    rep.max_q_diff = std::max(
        rep.max_q_diff, std::abs(static_cast<double>(path.q[j]) -
                                 static_cast<double>(grid_records[j]->q)));
    rep.max_w_diff =
        std::max(rep.max_w_diff, std::abs(path.w[j] - grid_records[j]->w));
  }
  if (path.size()) {
    rep.final_q = path.q.back();
    rep.final_w = path.w.back();
  }
  return rep;
}

} // namespace srpt_lab

#endif // SRPT_LAB_EXPERIMENT_HPP
