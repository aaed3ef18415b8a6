#ifndef SRPT_LAB_RBM_HPP
#define SRPT_LAB_RBM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "srpt_lab/dist.hpp"
#include "srpt_lab/htseq.hpp"
#include "srpt_lab/io.hpp"
#include "srpt_lab/random.hpp"

namespace srpt_lab {

struct RbmParams {
  double drift = 0.0;
  double variance = 1.0;
  double w0 = 0.0;
  double step = 1e-3;

  void validate() const {
    if (!(variance > 0.0))
      throw domain_error("rbm variance must be positive");
    if (!(step > 0.0))
      throw domain_error("rbm step must be positive");
    if (!(w0 >= 0.0))
      throw domain_error("rbm initial value must be nonnegative");
  }
};

/// One-dimensional Skorokhod regulator applied to w0 + path.
inline std::vector<double> reflect(std::span<const double> path, double w0) {
  if (!(w0 >= 0.0))
    throw domain_error("reflect: w0 must be nonnegative");
  std::vector<double> out(path.size());
  double regulator = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    regulator = std::max(regulator, -w0 - path[j]);
    out[j] = w0 + path[j] + regulator;
  }
  return out;
}

/// Box-Muller on a fixed uniform stream, so normal draws do not depend on the
/// standard library's distribution implementation.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : uniform_(seed) {}

  double uniform() { return uniform_(); }

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_()));
    const double angle = 2.0 * std::numbers::pi * uniform_();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  UniformStream uniform_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Regulator driven by per-step minima: minima[j] is the infimum of the free
/// path over [t_{j-1}, t_j] (minima[0] = path[0]).
inline std::vector<double> reflect_with_minima(std::span<const double> path,
                                               std::span<const double> minima,
                                               double w0) {
  if (!(w0 >= 0.0))
    throw domain_error("reflect: w0 must be nonnegative");
  if (minima.size() != path.size())
    throw domain_error("reflect: minima and path differ in length");
  std::vector<double> out(path.size());
  double regulator = 0.0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    regulator = std::max(regulator, -w0 - std::min(minima[j], path[j]));
    out[j] = w0 + path[j] + regulator;
  }
  return out;
}

struct RbmPath {
  double step = 0.0;
  std::vector<double> values;

  double time(std::size_t j) const { return static_cast<double>(j) * step; }
};

/// Euler increments drift*step + sqrt(variance*step) N(0,1), reflected at 0.
/// The regulator sees the Brownian-bridge minimum across each step.
inline RbmPath simulate_rbm(const RbmParams &p, double horizon,
                            std::uint64_t seed) {
  p.validate();
  if (!(horizon > 0.0))
    throw domain_error("rbm horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / p.step));
  NormalStream normal(seed);
  const double scale = std::sqrt(p.variance * p.step);
  std::vector<double> free(steps + 1, 0.0);
  std::vector<double> minima(steps + 1, 0.0);
  for (std::size_t j = 1; j <= steps; ++j) {
    free[j] = free[j - 1] + p.drift * p.step + scale * normal();
    const double d = free[j] - free[j - 1];
    const double e = -2.0 * p.variance * p.step * std::log(normal.uniform());
    minima[j] = 0.5 * (free[j - 1] + free[j] - std::sqrt(d * d + e));
  }
  return {p.step, reflect_with_minima(free, minima, p.w0)};
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// P(W*(t) <= w) for reflected Brownian motion started at 0.
inline double marginal_cdf(const RbmParams &p, double t, double w) {
  if (p.w0 != 0.0)
    throw unsupported_error("marginal_cdf is available for w0 = 0 only");
  if (!(p.variance > 0.0) || !(t > 0.0))
    throw domain_error("marginal_cdf needs variance > 0 and t > 0");
  if (w < 0.0)
    return 0.0;
  const double sd = std::sqrt(p.variance * t);
  const double k = p.drift;
  const double first = normal_cdf((w - k * t) / sd);
  const double tail = normal_cdf((-w - k * t) / sd);
  const double second =
      tail > 0.0 ? std::exp(2.0 * k * w / p.variance + std::log(tail)) : 0.0;
  return std::clamp(first - second, 0.0, 1.0);
}

struct SystemVariance {
  /// lambda (sigma_a^2 + sigma_s^2)
  double variance = 0.0;
  /// lambda^3 sigma_a^2
  double arrival_variance = 0.0;
};

inline SystemVariance system_variance(const HeavyTrafficParams &p) {
  const double lambda = p.lambda();
  const double sa = p.sigma_a();
  const double ss2 = p.dist.variance();
  return {lambda * (sa * sa + ss2), lambda * lambda * lambda * sa * sa};
}

inline RbmParams rbm_params(const HeavyTrafficParams &p, double step = 1e-3) {
  return {p.kappa, system_variance(p).variance, p.w0, step};
}

inline void write_rbm_csv(std::ostream &os, const RbmPath &path) {
  write_csv_header(os, {"t", "wstar"});
  for (std::size_t j = 0; j < path.values.size(); ++j)
    write_csv_row(os, {path.time(j), path.values[j]});
}

} // namespace srpt_lab

#endif // SRPT_LAB_RBM_HPP
