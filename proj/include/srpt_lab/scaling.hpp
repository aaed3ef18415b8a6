#ifndef SRPT_LAB_SCALING_HPP
#define SRPT_LAB_SCALING_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "srpt_lab/dist.hpp"
#include "srpt_lab/htseq.hpp"
#include "srpt_lab/io.hpp"
#include "srpt_lab/srpt_sim.hpp"

namespace srpt_lab {

/// Truncated functionals of one tracked threshold in diffusion scaling.
/// theta and tau are in scaled time (physical divided by r^2).
struct ScaledThreshold {
  double x = 0.0;
  double rho_x = 0.0;
  std::vector<double> vhat;
  std::vector<double> work_in_hat;
  std::vector<double> theta;
  std::vector<double> work_at_tau_hat;
  std::vector<double> vhat_at_tau;
  std::vector<double> vhat_before_tau;
};

/// Hat and tilde processes on the scaled grid. Region arrays hold hat-scaled
/// counts and works of residuals in [0,l], (l,u] and (u,inf); multiply by c_r
/// for the tilde scaling.
struct ScaledPath {
  double r = 0.0;
  double c_r = 0.0;
  double lambda_r = 0.0;
  Thresholds th;

  std::vector<double> t;
  std::vector<double> qhat;
  std::vector<double> what;
  std::vector<double> qtilde;
  std::vector<double> ehat;

  std::vector<double> count_lo;
  std::vector<double> work_lo;
  std::vector<double> count_mid;
  std::vector<double> work_mid;
  std::vector<double> count_hi;
  std::vector<double> work_hi;
  /// <(1 v chi) 1_[0,l], tilde Z>
  std::vector<double> mass_lo_tilde;

  std::vector<ScaledThreshold> thresholds;

  std::size_t size() const noexcept { return t.size(); }

  const ScaledThreshold *find_threshold(double x) const noexcept {
    for (const auto &s : thresholds)
      if (s.x == x || std::abs(s.x - x) <= 1e-12 * std::max(1.0, std::abs(x)))
        return &s;
    return nullptr;
  }

  const ScaledThreshold &threshold(double x) const {
    if (const auto *s = find_threshold(x))
      return *s;
    throw lookup_error("threshold " + std::to_string(x) + " is not tracked");
  }
};

/// Scaled grid j * delta for j = 0..round(horizon / delta).
inline std::vector<double> scaled_grid(double horizon, double delta) {
  if (!(delta > 0.0) || !(horizon >= 0.0))
    throw std::invalid_argument("grid spacing must be positive");
  const double steps = horizon / delta;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - static_cast<double>(n)) > 1e-9)
    throw std::invalid_argument("grid spacing must divide the horizon");
  std::vector<double> g(n + 1);
  for (std::size_t j = 0; j <= n; ++j)
    g[j] = static_cast<double>(j) * delta;
  return g;
}

inline std::vector<double> physical_grid(std::span<const double> scaled,
                                         double r) {
  std::vector<double> g(scaled.size());
  for (std::size_t j = 0; j < scaled.size(); ++j)
    g[j] = r * r * scaled[j];
  return g;
}

inline ScaledPath scale_path(const RawPath &raw, const SystemConfig &cfg,
                             const SFunction &sf, const Thresholds &th,
                             std::span<const double> grid) {
  const double r = cfg.r;
  const double r2 = r * r;
  if (raw.size() != grid.size())
    throw std::invalid_argument("raw path and scaled grid differ in length");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double expect = r2 * grid[j];
    if (std::abs(raw.t[j] - expect) > 1e-9 * std::max(1.0, expect))
      throw std::invalid_argument("raw grid is not r^2 times the scaled grid");
  }

  const ThresholdSeries *lo = nullptr;
  if (th.l > 0.0)
    lo = &raw.threshold(th.l);
  const ThresholdSeries &hi = raw.threshold(th.u);
  const ThresholdSeries *unit = nullptr;
  if (th.l > 1.0)
    unit = &raw.threshold(1.0);

  ScaledPath sp;
  sp.r = r;
  sp.c_r = cfg.c_r;
  sp.lambda_r = cfg.lambda_r;
  sp.th = th;
  sp.t.assign(grid.begin(), grid.end());

  const std::size_t n = grid.size();
  for (auto *v : {&sp.qhat, &sp.what, &sp.qtilde, &sp.ehat, &sp.count_lo,
                  &sp.work_lo, &sp.count_mid, &sp.work_mid, &sp.count_hi,
                  &sp.work_hi, &sp.mass_lo_tilde})
    v->resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    const double q = static_cast<double>(raw.q[j]);
    sp.qhat[j] = q / r;
    sp.what[j] = raw.w[j] / r;
    sp.qtilde[j] = cfg.c_r * q / r;
    sp.ehat[j] =
        (static_cast<double>(raw.e[j]) - cfg.lambda_r * r2 * grid[j]) / r;

    const double n_lo = lo ? static_cast<double>(lo->count_in[j]) : 0.0;
    const double w_lo = lo ? lo->work_in[j] : 0.0;
    const double n_le_u = static_cast<double>(hi.count_in[j]);
    const double w_le_u = hi.work_in[j];
    sp.count_lo[j] = n_lo / r;
    sp.work_lo[j] = w_lo / r;
    sp.count_mid[j] = (n_le_u - n_lo) / r;
    sp.work_mid[j] = std::max(0.0, w_le_u - w_lo) / r;
    sp.count_hi[j] = (q - n_le_u) / r;
    sp.work_hi[j] = std::max(0.0, raw.w[j] - w_le_u) / r;

    // sum over residuals <= l of max(1, residual)
    double weighted = n_lo;
    if (unit) {
      weighted = static_cast<double>(unit->count_in[j]) +
                 std::max(0.0, w_lo - unit->work_in[j]);
    }
    sp.mass_lo_tilde[j] = cfg.c_r * weighted / r;
  }

  for (const auto &s : raw.thresholds) {
    ScaledThreshold st;
    st.x = s.x;
    st.rho_x = cfg.rho_x(sf, s.x);
    st.vhat.resize(n);
    st.work_in_hat.resize(n);
    st.theta.resize(n);
    st.work_at_tau_hat.resize(n);
    st.vhat_at_tau.resize(n);
    st.vhat_before_tau.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      st.vhat[j] = (s.v[j] - st.rho_x * raw.t[j]) / r;
      st.work_in_hat[j] = s.work_in[j] / r;
      st.theta[j] = (raw.t[j] - s.tau[j]) / r2;
      st.work_at_tau_hat[j] = s.work_at_tau[j] / r;
      st.vhat_at_tau[j] = (s.v_at_tau[j] - st.rho_x * s.tau[j]) / r;
      st.vhat_before_tau[j] = (s.v_before_tau[j] - st.rho_x * s.tau[j]) / r;
    }
    sp.thresholds.push_back(std::move(st));
  }
  return sp;
}

struct SqueezeTriple {
  double lhs = 0.0;
  double mid = 0.0;
  double rhs = 0.0;
};

/// (c/u <chi 1_(l,u], hat Z>, <1_(l,u], tilde Z>, c/l <chi 1_(l,u], hat Z>);
/// nullopt when l = 0.
inline std::optional<SqueezeTriple> squeeze_check(const ScaledPath &sp,
                                                  std::size_t j) {
  if (!sp.th.lower_available())
    return std::nullopt;
  const double c = sp.c_r;
  return SqueezeTriple{c / sp.th.u * sp.work_mid[j], c * sp.count_mid[j],
                       c / sp.th.l * sp.work_mid[j]};
}

/// sup over the grid of |tilde Q - hat W|.
inline double gap_statistic(const ScaledPath &sp) {
  double g = 0.0;
  for (std::size_t j = 0; j < sp.size(); ++j)
    g = std::max(g, std::abs(sp.qtilde[j] - sp.what[j]));
  return g;
}

struct RegionMasses {
  double count_lo_tilde = 0.0;
  double work_lo_tilde = 0.0;
  double count_mid_tilde = 0.0;
  double work_mid_hat = 0.0;
  double count_hi_hat = 0.0;
  double work_hi_hat = 0.0;
};

inline RegionMasses region_masses(const ScaledPath &sp, std::size_t j) {
  const double c = sp.c_r;
  return {c * sp.count_lo[j], c * sp.work_lo[j], c * sp.count_mid[j],
          sp.work_mid[j],     sp.count_hi[j],     sp.work_hi[j]};
}

/// Right side minus left side of the scaled bound
/// <chi 1_[0,x], hat Z(t)> <= <chi 1_[0,x], hat Z(0)> + Vhat(t) - Vhat(tau-)
///                            + (rho_x - 1) r theta + x / r.
inline double scaled_work_below_x_slack(const ScaledPath &sp, std::size_t j,
                                      double x) {
  const auto &s = sp.threshold(x);
  const double rhs = s.work_in_hat[0] + s.vhat[j] - s.vhat_before_tau[j] +
                     (s.rho_x - 1.0) * sp.r * s.theta[j] + s.x / sp.r;
  return rhs - s.work_in_hat[j];
}

/// Wide CSV, one row per grid point. theta_x and the l columns are 0 when the
/// threshold is not tracked.
inline void write_scaled_csv(std::ostream &os, const ScaledPath &sp,
                             std::optional<double> fixed_x) {
  write_csv_header(os, {"t", "qhat", "what", "qtilde", "ehat", "vhat_l",
                        "work_lo_tilde", "count_lo_tilde", "work_hi_hat",
                        "theta_l", "theta_x"});
  const ScaledThreshold *lo =
      sp.th.l > 0.0 ? sp.find_threshold(sp.th.l) : nullptr;
  const ScaledThreshold *fx = fixed_x ? sp.find_threshold(*fixed_x) : nullptr;
  for (std::size_t j = 0; j < sp.size(); ++j) {
    const auto m = region_masses(sp, j);
    write_csv_row(os, {sp.t[j], sp.qhat[j], sp.what[j], sp.qtilde[j],
                       sp.ehat[j], lo ? lo->vhat[j] : 0.0, m.work_lo_tilde,
                       m.count_lo_tilde, m.work_hi_hat,
                       lo ? lo->theta[j] : 0.0, fx ? fx->theta[j] : 0.0});
  }
}

} // namespace srpt_lab

#endif // SRPT_LAB_SCALING_HPP
