#ifndef SRPT_LAB_HTSEQ_HPP
#define SRPT_LAB_HTSEQ_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "srpt_lab/dist.hpp"
#include "srpt_lab/job_set.hpp"

namespace srpt_lab {

/// Renewal interarrival family. Each is normalized to mean 1/lambda, so only
/// the coefficient of variation is a property of the family.
struct InterarrivalLaw {
  enum class Kind { Exponential, Erlang, Hyperexponential };

  Kind kind = Kind::Exponential;
  int stages = 1;  // Erlang
  double cv = 1.0; // Hyperexponential, > 1

  static InterarrivalLaw exponential() { return {}; }
  static InterarrivalLaw erlang(int k) {
    if (k < 1)
      throw domain_error("erlang stage count must be >= 1");
    return {Kind::Erlang, k, 1.0 / std::sqrt(static_cast<double>(k))};
  }
  static InterarrivalLaw hyperexponential(double cv) {
    if (!(cv > 1.0))
      throw domain_error("hyperexponential cv must exceed 1");
    return {Kind::Hyperexponential, 1, cv};
  }

  double coefficient_of_variation() const {
    switch (kind) {
    case Kind::Exponential:
      return 1.0;
    case Kind::Erlang:
      return 1.0 / std::sqrt(static_cast<double>(stages));
    case Kind::Hyperexponential:
      return cv;
    }
    return 1.0;
  }

  std::size_t variates_needed() const {
    switch (kind) {
    case Kind::Exponential:
      return 1;
    case Kind::Erlang:
      return static_cast<std::size_t>(stages);
    case Kind::Hyperexponential:
      return 2;
    }
    return 1;
  }

  /// Balanced-means two-phase mixture matching cv: branch probability p and
  /// phase rates 2 p lambda and 2 (1 - p) lambda.
  double hyper_branch_probability() const {
    const double c2 = cv * cv;
    return 0.5 * (1.0 + std::sqrt((c2 - 1.0) / (c2 + 1.0)));
  }

  std::string name() const {
    switch (kind) {
    case Kind::Exponential:
      return "exponential";
    case Kind::Erlang:
      return "erlang";
    case Kind::Hyperexponential:
      return "hyperexponential";
    }
    return "exponential";
  }
};

struct HeavyTrafficParams {
  double kappa = 0.0;
  InterarrivalLaw interarrival{};
  ProcTimeDist dist = ProcTimeDist::exponential(1.0);
  double w0 = 0.0;

  /// Limiting arrival rate 1/E[v].
  double lambda() const { return 1.0 / dist.mean(); }
  /// Limiting interarrival standard deviation.
  double sigma_a() const {
    return interarrival.coefficient_of_variation() * dist.mean();
  }
};

/// One member of the r-indexed heavy-traffic sequence.
struct SystemConfig {
  double r = 0.0;
  double lambda_r = 0.0;
  double rho_r = 0.0;
  double c_r = 0.0;
  double sigma_a_r = 0.0;

  /// rho_x = rho - lambda / S(x) = lambda E[v 1{v <= x}]
  double rho_x(const SFunction &sf, double x) const {
    return rho_r - lambda_r * sf.dist().tail_first_moment(x);
  }
};

struct Thresholds {
  double epsilon = 0.0;
  double l = 0.0;
  double u = 0.0;

  bool lower_available() const noexcept { return l > 0.0; }
};

inline SystemConfig make_system(const HeavyTrafficParams &p, double r,
                                const SFunction &sf) {
  if (!(r > 1.0))
    throw domain_error("scale index r must exceed 1");
  const double load = 1.0 + p.kappa / r;
  if (!(load > 0.0))
    throw domain_error("1 + kappa / r must be positive (negative arrival rate)");
  SystemConfig cfg;
  cfg.r = r;
  cfg.lambda_r = load / p.dist.mean();
  cfg.rho_r = cfg.lambda_r * p.dist.mean();
  cfg.c_r = sf.inverse(r);
  cfg.sigma_a_r = p.interarrival.coefficient_of_variation() / cfg.lambda_r;
  return cfg;
}

inline SystemConfig make_system(const HeavyTrafficParams &p, double r) {
  return make_system(p, r, SFunction(p.dist));
}

/// l = S^-1(r c^(-2-eps)), u = S^-1(r c^(2+eps)).
inline Thresholds thresholds(const SystemConfig &cfg, const SFunction &sf,
                             double eps) {
  if (!(eps > 0.0))
    throw domain_error("epsilon must be positive");
  if (!(cfg.c_r > 0.0))
    throw domain_error("thresholds need c_r > 0");
  Thresholds th;
  th.epsilon = eps;
  th.l = sf.inverse(cfg.r * std::pow(cfg.c_r, -2.0 - eps));
  th.u = sf.inverse(cfg.r * std::pow(cfg.c_r, 2.0 + eps));
  return th;
}

/// (c/l, c/u); nullopt when l collapses to 0 at this r.
inline std::optional<std::pair<double, double>>
ratio_diagnostic(const SystemConfig &cfg, const SFunction &sf, double eps) {
  const Thresholds th = thresholds(cfg, sf, eps);
  if (!th.lower_available())
    return std::nullopt;
  return std::pair{cfg.c_r / th.l, cfg.c_r / th.u};
}

/// Draws one interarrival time; consumes interarrival.variates_needed()
/// uniforms from u.
inline double interarrival_sample(const HeavyTrafficParams &p,
                                  const SystemConfig &cfg,
                                  std::span<const double> u) {
  const auto &law = p.interarrival;
  if (u.size() < law.variates_needed())
    throw domain_error("not enough uniform variates for interarrival law");
  for (std::size_t i = 0; i < law.variates_needed(); ++i)
    if (!(u[i] > 0.0 && u[i] < 1.0))
      throw domain_error("uniform variate must lie in (0,1)");

  const double lambda = cfg.lambda_r;
  switch (law.kind) {
  case InterarrivalLaw::Kind::Exponential:
    return -std::log1p(-u[0]) / lambda;
  case InterarrivalLaw::Kind::Erlang: {
    double sum = 0.0;
    for (int i = 0; i < law.stages; ++i)
      sum -= std::log1p(-u[static_cast<std::size_t>(i)]);
    return sum / (law.stages * lambda);
  }
  case InterarrivalLaw::Kind::Hyperexponential: {
    const double p1 = law.hyper_branch_probability();
    const double rate = u[0] < p1 ? 2.0 * p1 * lambda : 2.0 * (1.0 - p1) * lambda;
    return -std::log1p(-u[1]) / rate;
  }
  }
  return -std::log1p(-u[0]) / lambda;
}

/// floor(w0 r / c) jobs, each of size exactly c.
inline JobSet initial_condition(const HeavyTrafficParams &p,
                                const SystemConfig &cfg) {
  JobSet jobs;
  if (!(p.w0 > 0.0))
    return jobs;
  if (!(cfg.c_r > 0.0))
    throw domain_error("positive w0 requires c_r > 0");
  const auto n =
      static_cast<std::uint64_t>(std::floor(p.w0 * cfg.r / cfg.c_r));
  for (std::uint64_t i = 0; i < n; ++i)
    jobs.insert({cfg.c_r, i});
  return jobs;
}

} // namespace srpt_lab

#endif // SRPT_LAB_HTSEQ_HPP
