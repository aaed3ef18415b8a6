#ifndef SRPT_LAB_STATS_HPP
#define SRPT_LAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srpt_lab/dist.hpp"
#include "srpt_lab/htseq.hpp"
#include "srpt_lab/rbm.hpp"
#include "srpt_lab/scaling.hpp"
#include "srpt_lab/srpt_sim.hpp"

namespace srpt_lab {

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x)
      ++i;
    while (j < b.size() && b[j] == x)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

/// One-sample Kolmogorov-Smirnov distance to a continuous CDF.
inline double ks_vs_cdf(std::vector<double> samples,
                        const std::function<double(double)> &cdf) {
  if (samples.empty())
    throw std::invalid_argument("ks_vs_cdf: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

/// Median of a copy.
inline double median(std::vector<double> v) {
  if (v.empty())
    throw std::invalid_argument("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double sample_variance(const std::vector<double> &v) {
  if (v.size() < 2)
    throw std::invalid_argument("sample variance needs at least 2 values");
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

/// Per-epsilon summary of one replication. Fields are nullopt where l = 0.
struct EpsilonSummary {
  double epsilon = 0.0;
  double l = 0.0;
  double u = 0.0;
  std::optional<double> sup_mass_below_l;  // sup <(1 v chi) 1_[0,l], tilde Z>
  double sup_work_above_u = 0.0;           // sup <chi 1_(u,inf), hat Z>
  std::optional<double> sup_theta_eps;     // (c^r)^(2+eps) sup theta(., l)
};

struct FixedXSummary {
  double x = 0.0;
  double sup_theta_stat = 0.0; // c^r r sup theta(., x)
};

struct ReplicationSummary {
  double gap = 0.0;
  double terminal_qtilde = 0.0;
  double terminal_what = 0.0;
  std::vector<EpsilonSummary> eps;
  std::vector<FixedXSummary> fixed;
};

struct ReplicationEnsemble {
  double r = 0.0;
  double c_r = 0.0;
  std::vector<ReplicationSummary> reps;
};

inline double sup_of(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v)
    s = std::max(s, x);
  return s;
}

/// Builds the per-epsilon region and theta statistics from scaled paths that
/// share one raw path.
inline ReplicationSummary summarize(const std::vector<ScaledPath> &per_eps,
                                    std::span<const double> fixed_x) {
  if (per_eps.empty())
    throw std::invalid_argument("summarize: no scaled paths");
  const ScaledPath &sp0 = per_eps.front();
  ReplicationSummary s;
  s.gap = gap_statistic(sp0);
  s.terminal_qtilde = sp0.qtilde.back();
  s.terminal_what = sp0.what.back();
  for (const auto &sp : per_eps) {
    EpsilonSummary e;
    e.epsilon = sp.th.epsilon;
    e.l = sp.th.l;
    e.u = sp.th.u;
    e.sup_work_above_u = sup_of(sp.work_hi);
    if (sp.th.lower_available()) {
      e.sup_mass_below_l = sup_of(sp.mass_lo_tilde);
      e.sup_theta_eps =
          std::pow(sp.c_r, 2.0 + sp.th.epsilon) * sup_of(sp.threshold(sp.th.l).theta);
    }
    s.eps.push_back(e);
  }
  for (double x : fixed_x)
    s.fixed.push_back({x, sp0.c_r * sp0.r * sup_of(sp0.threshold(x).theta)});
  return s;
}

/// Medians of a statistic across increasing r; unavailable r are skipped.
struct TrendReport {
  std::string statistic;
  std::vector<double> r;
  std::vector<double> median;
  std::vector<double> skipped_r;
  bool monotone_decreasing = true;
  double margin = 0.05;
  std::optional<double> final_value;
  /// Terminal-marginal KS against the RBM law, per r; theorem trend only.
  std::vector<double> terminal_ks;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["statistic"] = statistic;
    j["r"] = r;
    j["median"] = median;
    j["monotone_decreasing"] = monotone_decreasing;
    j["margin"] = margin;
    if (!skipped_r.empty())
      j["unavailable_r"] = skipped_r;
    if (!terminal_ks.empty())
      j["terminal_ks"] = terminal_ks;
    return j;
  }
};

/// Each median must be <= previous * (1 - margin).
inline TrendReport make_trend(std::string statistic, std::vector<double> r,
                              std::vector<double> medians, double margin) {
  if (!(margin >= 0.0))
    throw std::invalid_argument("trend margin must be nonnegative");
  TrendReport t;
  t.statistic = std::move(statistic);
  t.r = std::move(r);
  t.median = std::move(medians);
  t.margin = margin;
  for (std::size_t i = 1; i < t.median.size(); ++i)
    if (!(t.median[i] <= t.median[i - 1] * (1.0 - margin)))
      t.monotone_decreasing = false;
  if (!t.median.empty())
    t.final_value = t.median.back();
  return t;
}

namespace detail {

inline void check_ensembles(const std::vector<ReplicationEnsemble> &ens,
                            std::size_t min_r) {
  if (ens.size() < min_r)
    throw std::invalid_argument("trend needs at least " +
                                std::to_string(min_r) + " r values");
  for (std::size_t i = 0; i < ens.size(); ++i) {
    if (ens[i].reps.size() < 2)
      throw std::invalid_argument("ensemble needs at least 2 replications");
    if (i > 0 && !(ens[i].r > ens[i - 1].r))
      throw std::invalid_argument("ensembles must have increasing r");
  }
}

template <class F>
TrendReport trend_of(const std::vector<ReplicationEnsemble> &ens,
                     std::string name, double margin, F &&stat) {
  std::vector<double> rs, meds, skipped;
  for (const auto &e : ens) {
    std::vector<double> vals;
    bool available = true;
    for (const auto &rep : e.reps) {
      const std::optional<double> v = stat(rep);
      if (!v) {
        available = false;
        break;
      }
      vals.push_back(*v);
    }
    if (!available) {
      skipped.push_back(e.r);
      continue;
    }
    rs.push_back(e.r);
    meds.push_back(median(std::move(vals)));
  }
  TrendReport t = make_trend(std::move(name), rs, meds, margin);
  t.skipped_r = std::move(skipped);
  return t;
}

inline const EpsilonSummary &find_eps(const ReplicationSummary &s, double eps) {
  for (const auto &e : s.eps)
    if (e.epsilon == eps)
      return e;
  throw lookup_error("epsilon " + std::to_string(eps) + " is not tracked");
}

inline const FixedXSummary &find_fixed(const ReplicationSummary &s, double x) {
  for (const auto &f : s.fixed)
    if (f.x == x)
      return f;
  throw lookup_error("threshold " + std::to_string(x) + " is not tracked");
}

} // namespace detail

/// Trend of the median sup |tilde Q - hat W| across r. When rbm is given
/// (w0 = 0) the terminal tilde Q marginal is compared with the RBM law at
/// time horizon.
inline TrendReport theorem_trend(const std::vector<ReplicationEnsemble> &ens,
                                 double margin = 0.05,
                                 std::optional<RbmParams> rbm = std::nullopt,
                                 double horizon = 1.0) {
  detail::check_ensembles(ens, 3);
  TrendReport t = detail::trend_of(
      ens, "gap", margin,
      [](const ReplicationSummary &s) -> std::optional<double> { return s.gap; });
  if (rbm && rbm->w0 == 0.0) {
    for (const auto &e : ens) {
      std::vector<double> terminal;
      for (const auto &rep : e.reps)
        terminal.push_back(rep.terminal_qtilde);
      t.terminal_ks.push_back(ks_vs_cdf(
          terminal, [&](double w) { return marginal_cdf(*rbm, horizon, w); }));
    }
  }
  return t;
}

struct ThetaMode {
  enum class Kind { FixedX, Epsilon };
  Kind kind = Kind::FixedX;
  double value = 1.0;

  static ThetaMode fixed_x(double x) { return {Kind::FixedX, x}; }
  static ThetaMode eps(double e) { return {Kind::Epsilon, e}; }
};

/// c r sup theta(., x) in fixed-x mode, (c)^(2+eps) sup theta(., l) in
/// epsilon mode; r with l = 0 are reported as unavailable.
inline TrendReport lemma_theta_trend(const std::vector<ReplicationEnsemble> &ens,
                                     ThetaMode mode, double margin = 0.0) {
  detail::check_ensembles(ens, 1);
  if (mode.kind == ThetaMode::Kind::FixedX)
    return detail::trend_of(
        ens, "theta_x=" + format_label(mode.value), margin,
        [&](const ReplicationSummary &s) -> std::optional<double> {
          return detail::find_fixed(s, mode.value).sup_theta_stat;
        });
  return detail::trend_of(
      ens, "theta_eps=" + format_label(mode.value), margin,
      [&](const ReplicationSummary &s) -> std::optional<double> {
        return detail::find_eps(s, mode.value).sup_theta_eps;
      });
}

enum class Region { BelowL, AboveU };

inline TrendReport region_mass_trend(const std::vector<ReplicationEnsemble> &ens,
                                     Region region, double eps,
                                     double margin = 0.0) {
  detail::check_ensembles(ens, 1);
  if (region == Region::BelowL)
    return detail::trend_of(
        ens, "mass_below_l_eps=" + format_label(eps), margin,
        [&](const ReplicationSummary &s) -> std::optional<double> {
          return detail::find_eps(s, eps).sup_mass_below_l;
        });
  return detail::trend_of(
      ens, "work_above_u_eps=" + format_label(eps), margin,
      [&](const ReplicationSummary &s) -> std::optional<double> {
        return detail::find_eps(s, eps).sup_work_above_u;
      });
}

struct FcltVarianceResult {
  double sample_variance = 0.0;
  double predicted = 0.0;
  std::vector<double> samples;
};

/// t (lambda Var(v 1{v<=x}) + E[v 1{v<=x}]^2 lambda^3 sigma_a^2)
inline double fclt_predicted_variance(const SystemConfig &cfg,
                                      const ProcTimeDist &dist, double x,
                                      double t) {
  const double m1 = dist.truncated_first_moment(x);
  const double m2 = dist.truncated_second_moment(x);
  const double lam = cfg.lambda_r;
  const double sa = cfg.sigma_a_r;
  return t * (lam * (m2 - m1 * m1) + m1 * m1 * lam * lam * lam * sa * sa);
}

/// Sample variance of Vhat_x(t) over n seeded replications against the
/// Brownian limit of the truncated load.
inline FcltVarianceResult fclt_variance_check(const SystemConfig &cfg,
                                              const HeavyTrafficParams &p,
                                              double x, double t,
                                              std::size_t n,
                                              std::uint64_t base_seed) {
  if (n < 2)
    throw std::invalid_argument("fclt_variance_check needs n >= 2");
  if (!(t > 0.0))
    throw std::invalid_argument("fclt_variance_check needs t > 0");
  const SFunction sf(p.dist);
  const double r2 = cfg.r * cfg.r;
  const double horizon = r2 * t;
  const std::vector<double> grid{0.0, horizon};
  const std::vector<double> xs{x};
  const double rho_x = cfg.rho_x(sf, x);
  HeavyTrafficParams empty_start = p;
  empty_start.w0 = 0.0;

  FcltVarianceResult res;
  res.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RawPath raw = run(cfg, empty_start, DisciplineKind::SRPT, horizon,
                            grid, xs, base_seed, i);
    const double v = raw.threshold(x).v.back();
    res.samples.push_back((v - rho_x * horizon) / cfg.r);
  }
  res.sample_variance = sample_variance(res.samples);
  res.predicted = fclt_predicted_variance(cfg, p.dist, x, t);
  return res;
}

} // namespace srpt_lab

#endif // SRPT_LAB_STATS_HPP
