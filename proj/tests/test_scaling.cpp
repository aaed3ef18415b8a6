#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "srpt_lab/scaling.hpp"

using namespace srpt_lab;

namespace {

struct Fixture {
  HeavyTrafficParams p;
  SFunction sf{ProcTimeDist::exponential(1.0)};
  SystemConfig cfg;
  Thresholds th;
  std::vector<double> grid;
  std::vector<double> xs;

  Fixture(double r, double eps, double w0) {
    p.w0 = w0;
    cfg = make_system(p, r, sf);
    th = thresholds(cfg, sf, eps);
    grid = scaled_grid(1.0, 0.01);
    xs = {th.u, 1.0};
    if (th.l > 0.0)
      xs.push_back(th.l);
  }

  ScaledPath simulate(std::uint64_t seed) const {
    const auto phys = physical_grid(grid, cfg.r);
    const RawPath raw = run(cfg, p, DisciplineKind::SRPT, phys.back(), phys,
                            xs, seed);
    return scale_path(raw, cfg, sf, th, grid);
  }
};

} // namespace

TEST(Scaling, Grids) {
  const auto g = scaled_grid(1.0, 0.25);
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(physical_grid(g, 10.0)[4], 100.0);
  EXPECT_EQ(scaled_grid(1.0, 0.01).size(), 101u);
  EXPECT_THROW(scaled_grid(1.0, 0.3), std::invalid_argument);
  EXPECT_THROW(scaled_grid(1.0, 0.0), std::invalid_argument);
}

TEST(Scaling, Arithmetic) {
  RawPath raw;
  raw.t = {0.0, 100.0};
  raw.q = {0, 5};
  raw.w = {0.0, 3.0};
  raw.e = {0, 5};
  raw.busy_time = {0.0, 0.0};
  raw.arrived_work = {0.0, 0.0};
  ThresholdSeries s;
  s.x = 4.0;
  s.v = {0.0, 0.0};
  s.count_in = {0, 0};
  s.work_in = {0.0, 0.0};
  s.tau = {0.0, 100.0};
  s.work_at_tau = {0.0, 0.0};
  s.v_at_tau = {0.0, 0.0};
  s.v_before_tau = {0.0, 0.0};
  raw.thresholds.push_back(s);

  SystemConfig cfg;
  cfg.r = 10.0;
  cfg.c_r = 2.0;
  cfg.lambda_r = 0.05;
  cfg.rho_r = 0.05;
  const SFunction sf(ProcTimeDist::exponential(1.0));
  const Thresholds th{1.0, 0.0, 4.0};
  const std::vector<double> grid{0.0, 1.0};
  const ScaledPath sp = scale_path(raw, cfg, sf, th, grid);
  EXPECT_DOUBLE_EQ(sp.qhat[1], 0.5);
  EXPECT_DOUBLE_EQ(sp.qtilde[1], 1.0);
  EXPECT_DOUBLE_EQ(sp.what[1], 0.3);
  EXPECT_DOUBLE_EQ(sp.ehat[1], 0.0);
  EXPECT_DOUBLE_EQ(sp.work_hi[1], 0.3);
  EXPECT_FALSE(squeeze_check(sp, 1));

  const std::vector<double> wrong{0.0, 0.5};
  EXPECT_THROW(scale_path(raw, cfg, sf, th, wrong), std::invalid_argument);
}

TEST(Scaling, EmptyPathIsZero) {
  Fixture f(10.0, 1.0, 0.0);
  const auto phys = physical_grid(f.grid, f.cfg.r);
  const RawPath raw = inject_trace({}, DisciplineKind::SRPT, phys, f.xs);
  const ScaledPath sp = scale_path(raw, f.cfg, f.sf, f.th, f.grid);
  for (std::size_t j = 0; j < sp.size(); ++j) {
    EXPECT_EQ(sp.qtilde[j], 0.0);
    EXPECT_EQ(sp.what[j], 0.0);
    EXPECT_EQ(sp.work_hi[j], 0.0);
    EXPECT_EQ(sp.mass_lo_tilde[j], 0.0);
  }
  EXPECT_EQ(gap_statistic(sp), 0.0);
}

TEST(Scaling, InitialConditionExactAndInMiddleRegion) {
  for (double r : {10.0, 100.0, std::exp(10.0)}) {
    Fixture f(r, 1.0, 1.0);
    const std::vector<double> grid{0.0};
    const RawPath raw = inject_trace({}, DisciplineKind::SRPT, grid, f.xs,
                                     nullptr, initial_condition(f.p, f.cfg));
    const ScaledPath sp = scale_path(raw, f.cfg, f.sf, f.th, grid);
    EXPECT_EQ(sp.qtilde[0], sp.what[0]) << r;
    const auto m = region_masses(sp, 0);
    EXPECT_EQ(m.count_lo_tilde, 0.0);
    EXPECT_EQ(m.work_hi_hat, 0.0);
    EXPECT_EQ(sp.mass_lo_tilde[0], 0.0);
  }
}

TEST(Scaling, SingleAtomSqueeze) {
  HeavyTrafficParams p;
  const SFunction sf(p.dist);
  const SystemConfig cfg = make_system(p, std::exp(10.0), sf);
  const Thresholds th = thresholds(cfg, sf, 1.0);
  ASSERT_TRUE(th.lower_available());
  JobSet init;
  init.insert({cfg.c_r, 0});
  const std::vector<double> phys{0.0};
  const std::vector<double> xs{th.l, th.u, 1.0};
  const RawPath raw = inject_trace({}, DisciplineKind::SRPT, phys, xs, nullptr,
                                   std::move(init));
  const std::vector<double> grid{0.0};
  const ScaledPath sp = scale_path(raw, cfg, sf, th, grid);
  const auto sq = squeeze_check(sp, 0);
  ASSERT_TRUE(sq);
  const double c = cfg.c_r, r = cfg.r;
  EXPECT_NEAR(sq->lhs, c / th.u * (c / r), 1e-15);
  EXPECT_NEAR(sq->mid, c / r, 1e-15);
  EXPECT_NEAR(sq->rhs, c / th.l * (c / r), 1e-15);
  EXPECT_LT(sq->lhs, sq->mid);
  EXPECT_LT(sq->mid, sq->rhs);
}

TEST(Scaling, GiantJobAboveU) {
  Fixture f(std::exp(10.0), 1.0, 0.0);
  const double size = 2.0 * f.th.u;
  const std::vector<Arrival> one{{1e-9, size}};
  const std::vector<double> phys{0.0, 1.0};
  const RawPath raw = inject_trace(one, DisciplineKind::SRPT, phys, f.xs);
  const std::vector<double> grid{0.0, 1.0 / (f.cfg.r * f.cfg.r)};
  const ScaledPath sp = scale_path(raw, f.cfg, f.sf, f.th, grid);
  EXPECT_NEAR(sp.work_hi[1], (size - 1.0 + 1e-9) / f.cfg.r, 1e-12);
  EXPECT_EQ(sp.work_hi[0], 0.0);
}

TEST(Scaling, PathProperties) {
  for (double r : {10.0, 100.0}) {
    Fixture f(r, 0.1, 1.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const ScaledPath sp = f.simulate(seed);
      for (std::size_t j = 0; j < sp.size(); ++j) {
        EXPECT_DOUBLE_EQ(sp.qtilde[j], f.cfg.c_r * sp.qhat[j]);
        EXPECT_NEAR(sp.work_lo[j] + sp.work_mid[j] + sp.work_hi[j], sp.what[j],
                    1e-9);
        EXPECT_NEAR(sp.count_lo[j] + sp.count_mid[j] + sp.count_hi[j],
                    sp.qhat[j], 1e-9);
        for (double v : {sp.work_lo[j], sp.work_mid[j], sp.work_hi[j],
                         sp.count_lo[j], sp.count_mid[j], sp.count_hi[j]})
          EXPECT_GE(v, 0.0);
        if (const auto sq = squeeze_check(sp, j)) {
          EXPECT_LE(sq->lhs, sq->mid + 1e-12);
          EXPECT_LE(sq->mid, sq->rhs + 1e-12);
        }
        for (double x : f.xs)
          EXPECT_GE(scaled_work_below_x_slack(sp, j, x), -1e-9);
      }
      EXPECT_GE(gap_statistic(sp), 0.0);
      EXPECT_TRUE(std::isfinite(gap_statistic(sp)));
    }
  }
}

TEST(Scaling, EhatRecentering) {
  Fixture f(10.0, 1.0, 0.0);
  const auto phys = physical_grid(f.grid, f.cfg.r);
  const RawPath raw =
      run(f.cfg, f.p, DisciplineKind::SRPT, phys.back(), phys, f.xs, 2);
  const ScaledPath sp = scale_path(raw, f.cfg, f.sf, f.th, f.grid);
  for (std::size_t j = 0; j < sp.size(); ++j)
    EXPECT_NEAR(sp.ehat[j] + f.cfg.lambda_r * f.cfg.r * sp.t[j],
                static_cast<double>(raw.e[j]) / f.cfg.r, 1e-12);
}

TEST(Scaling, ScaleRequiresTrackedThresholds) {
  Fixture f(10.0, 1.0, 0.0);
  const auto phys = physical_grid(f.grid, f.cfg.r);
  const std::vector<double> none{1.0};
  const RawPath raw = inject_trace({}, DisciplineKind::SRPT, phys, none);
  EXPECT_THROW(scale_path(raw, f.cfg, f.sf, f.th, f.grid), lookup_error);
}

TEST(Scaling, CsvColumns) {
  Fixture f(10.0, 1.0, 1.0);
  const ScaledPath sp = f.simulate(1);
  std::ostringstream os;
  write_scaled_csv(os, sp, 1.0);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,qhat,what,qtilde,ehat,vhat_l,work_lo_tilde,"
                    "count_lo_tilde,work_hi_hat,theta_l,theta_x");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);)
    ++rows;
  EXPECT_EQ(rows, sp.size());
}
