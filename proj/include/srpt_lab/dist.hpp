#ifndef SRPT_LAB_DIST_HPP
#define SRPT_LAB_DIST_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "srpt_lab/errors.hpp"

namespace srpt_lab {

/// Weibull processing-time law with tail exp(-(beta x)^alpha).
///
/// alpha = 1 is the exponential law with rate beta. Moments go through the
/// regularized incomplete gamma functions; the tail moment uses the upper one.
class WeibullDist {
public:
  WeibullDist(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw domain_error("weibull alpha must be positive and finite");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw domain_error("weibull beta must be positive and finite");
    mean_ = std::tgamma(1.0 + 1.0 / alpha_) / beta_;
    second_moment_ = std::tgamma(1.0 + 2.0 / alpha_) / (beta_ * beta_);
  }

  static WeibullDist exponential(double rate) { return {1.0, rate}; }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double mean() const noexcept { return mean_; }
  double second_moment() const noexcept { return second_moment_; }
  double variance() const noexcept { return second_moment_ - mean_ * mean_; }

  double cdf(double x) const { return -std::expm1(-scaled_power(x)); }

  double tail(double x) const { return std::exp(-scaled_power(x)); }

  /// E[v 1{v > x}]
  double tail_first_moment(double x) const {
    return mean_ * upper(1.0 + 1.0 / alpha_, x);
  }

  /// E[v 1{v <= x}]
  double truncated_first_moment(double x) const {
    return mean_ * lower(1.0 + 1.0 / alpha_, x);
  }

  /// E[v^2 1{v <= x}]
  double truncated_second_moment(double x) const {
    return second_moment_ * lower(1.0 + 2.0 / alpha_, x);
  }

  /// Inverse-CDF transform of a uniform variate on (0,1).
  double sample(double u) const {
    if (!(u > 0.0 && u < 1.0))
      throw domain_error("uniform variate must lie in (0,1)");
    return std::pow(-std::log1p(-u), 1.0 / alpha_) / beta_;
  }

  bool operator==(const WeibullDist &) const = default;

private:
  double scaled_power(double x) const {
    if (x < 0.0 || std::isnan(x))
      throw domain_error("processing-time argument must be nonnegative");
    return std::pow(beta_ * x, alpha_);
  }

  double lower(double a, double x) const {
    const double z = scaled_power(x);
    if (z == 0.0)
      return 0.0;
    if (std::isinf(z))
      return 1.0;
    return boost::math::gamma_p(a, z);
  }

  double upper(double a, double x) const {
    const double z = scaled_power(x);
    if (z == 0.0)
      return 1.0;
    if (std::isinf(z))
      return 0.0;
    return boost::math::gamma_q(a, z);
  }

  double alpha_;
  double beta_;
  double mean_;
  double second_moment_;
};

using ProcTimeDist = WeibullDist;

/// S(x) = 1 / E[v 1{v > x}] together with its right-continuous generalized
/// inverse inf{x >= 0 : S(x) > y}.
class SFunction {
public:
  explicit SFunction(ProcTimeDist dist, double inversion_tolerance = 1e-10)
      : dist_(dist), tol_(inversion_tolerance) {
    if (!(tol_ > 0.0))
      throw domain_error("inversion tolerance must be positive");
  }

  const ProcTimeDist &dist() const noexcept { return dist_; }
  double tolerance() const noexcept { return tol_; }

  double value(double x) const {
    const double m = dist_.tail_first_moment(x);
    return m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
  }

  double at_zero() const noexcept { return 1.0 / dist_.mean(); }

  double inverse(double y) const {
    if (!(y > 0.0) || std::isnan(y))
      throw domain_error("S inverse requires a positive argument");
    if (y <= at_zero())
      return 0.0;
    if (std::isinf(y))
      throw inversion_error("S inverse of +inf is unbounded");

    // Expand [0, 2^k] until S(2^k) > y.
    double lo = 0.0;
    double hi = 1.0;
    int expansions = 0;
    while (!(value(hi) > y)) {
      lo = hi;
      hi *= 2.0;
      if (++expansions > kMaxExpansions || !std::isfinite(hi))
        throw inversion_error("S inverse failed to bracket y = " +
                              std::to_string(y));
    }

    for (int it = 0; it < kMaxIterations; ++it) {
      if (hi - lo <= tol_ * (1.0 + hi))
        return hi;
      const double mid = 0.5 * (lo + hi);
      if (value(mid) > y)
        hi = mid;
      else
        lo = mid;
    }
    throw inversion_error("S inverse did not converge for y = " +
                          std::to_string(y));
  }

private:
  static constexpr int kMaxIterations = 200;
  static constexpr int kMaxExpansions = 1100;

  ProcTimeDist dist_;
  double tol_;
};

inline double tail(const ProcTimeDist &d, double x) { return d.tail(x); }
inline double tail_first_moment(const ProcTimeDist &d, double x) {
  return d.tail_first_moment(x);
}
inline double truncated_first_moment(const ProcTimeDist &d, double x) {
  return d.truncated_first_moment(x);
}
inline double truncated_second_moment(const ProcTimeDist &d, double x) {
  return d.truncated_second_moment(x);
}
inline double s_value(const SFunction &sf, double x) { return sf.value(x); }
inline double s_inverse(const SFunction &sf, double y) {
  return sf.inverse(y);
}
inline double sample(const ProcTimeDist &d, double u) { return d.sample(u); }

/// (f(c y) / f(y) - 1) ln f(y): tends to 0 for Weibull-type inverses and
/// does not for exp((ln y)^delta) with delta >= 1/2.
inline double svrate_statistic(const std::function<double(double)> &f,
                               double c, double y) {
  if (!(c > 1.0))
    throw domain_error("svrate constant must exceed 1");
  const double fy = f(y);
  if (!(fy > 1.0))
    throw domain_error("svrate requires f(y) > 1");
  return (f(c * y) / fy - 1.0) * std::log(fy);
}

} // namespace srpt_lab

#endif // SRPT_LAB_DIST_HPP
