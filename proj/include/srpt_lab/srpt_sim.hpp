#ifndef SRPT_LAB_SRPT_SIM_HPP
#define SRPT_LAB_SRPT_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srpt_lab/dist.hpp"
#include "srpt_lab/htseq.hpp"
#include "srpt_lab/job_set.hpp"
#include "srpt_lab/random.hpp"

namespace srpt_lab {

enum class DisciplineKind { SRPT, FIFO };

inline const char *to_string(DisciplineKind d) {
  return d == DisciplineKind::SRPT ? "srpt" : "fifo";
}

inline DisciplineKind parse_discipline(const std::string &s) {
  if (s == "srpt" || s == "SRPT")
    return DisciplineKind::SRPT;
  if (s == "fifo" || s == "FIFO")
    return DisciplineKind::FIFO;
  throw std::invalid_argument("unknown discipline '" + s + "'");
}

/// Grid samples of the truncated functionals for one threshold x.
///
/// tau is the last instant at or before t at which [0, x] held no job; the
/// *_at_tau columns are the right-limit state at tau and v_before_tau is the
/// left limit V_x(tau-).
struct ThresholdSeries {
  double x = 0.0;
  std::vector<double> v;
  std::vector<std::size_t> count_in;
  std::vector<double> work_in;
  std::vector<double> tau;
  std::vector<double> work_at_tau;
  std::vector<double> v_at_tau;
  std::vector<double> v_before_tau;

  double theta(std::size_t j, double t) const { return t - tau[j]; }
};

/// Physical-time trajectory observed on a grid.
struct RawPath {
  DisciplineKind discipline = DisciplineKind::SRPT;
  std::vector<double> t;
  std::vector<std::size_t> q;
  std::vector<double> w;
  std::vector<std::uint64_t> e;
  std::vector<double> busy_time;
  std::vector<double> arrived_work;
  std::vector<ThresholdSeries> thresholds;

  std::size_t size() const noexcept { return t.size(); }

  std::size_t grid_index(double time) const {
    auto it = std::lower_bound(t.begin(), t.end(),
                               time - 1e-12 * std::max(1.0, std::abs(time)));
    if (it == t.end() ||
        std::abs(*it - time) > 1e-12 * std::max(1.0, std::abs(time)))
      throw lookup_error("time " + std::to_string(time) + " is not on the grid");
    return static_cast<std::size_t>(it - t.begin());
  }

  const ThresholdSeries &threshold(double x) const {
    for (const auto &s : thresholds)
      if (s.x == x || std::abs(s.x - x) <= 1e-12 * std::max(1.0, std::abs(x)))
        return s;
    throw lookup_error("threshold " + std::to_string(x) + " is not tracked");
  }
};

enum class EventKind { Arrival, Completion, Crossing, Grid };

inline const char *to_string(EventKind k) {
  switch (k) {
  case EventKind::Arrival:
    return "arrival";
  case EventKind::Completion:
    return "completion";
  case EventKind::Crossing:
    return "crossing";
  case EventKind::Grid:
    return "grid";
  }
  return "grid";
}

inline EventKind parse_event_kind(const std::string &s) {
  if (s == "arrival")
    return EventKind::Arrival;
  if (s == "completion")
    return EventKind::Completion;
  if (s == "crossing")
    return EventKind::Crossing;
  if (s == "grid")
    return EventKind::Grid;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::Grid;
  std::int64_t job_seq = -1; // -1: no job involved
  double residual_after = 0.0;
  std::size_t q = 0;
  double w = 0.0;
};

/// Event log with a CSV form that round-trips doubles exactly.
class EventLog {
public:
  void push(const EventRecord &rec) { records_.push_back(rec); }
  const std::vector<EventRecord> &records() const noexcept { return records_; }

  void write_csv(std::ostream &os) const {
    os << "time,kind,job_seq,residual_after,q,w\n";
    char buf[128];
    for (const auto &r : records_) {
      std::snprintf(buf, sizeof buf, "%.17g,%s,%lld,%.17g,%zu,%.17g\n", r.time,
                    to_string(r.kind), static_cast<long long>(r.job_seq),
                    r.residual_after, r.q, r.w);
      os << buf;
    }
  }

  static EventLog read_csv(std::istream &is) {
    EventLog log;
    std::string line;
    if (!std::getline(is, line) || line.rfind("time,kind", 0) != 0)
      throw std::invalid_argument("event log: missing header");
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty())
        continue;
      std::stringstream ss(line);
      std::string f[6];
      for (auto &field : f)
        if (!std::getline(ss, field, ','))
          throw std::invalid_argument("event log: short record at line " +
                                      std::to_string(lineno));
      EventRecord r;
      r.time = std::stod(f[0]);
      r.kind = parse_event_kind(f[1]);
      r.job_seq = std::stoll(f[2]);
      r.residual_after = std::stod(f[3]);
      r.q = static_cast<std::size_t>(std::stoull(f[4]));
      r.w = std::stod(f[5]);
      log.push(r);
    }
    return log;
  }

private:
  std::vector<EventRecord> records_;
};

/// Exogenous arrival: physical time and processing requirement.
struct Arrival {
  double time = 0.0;
  double size = 0.0;
};

/// Pull-style source of arrivals in nondecreasing time; nullopt when done.
using ArrivalSource = std::function<std::optional<Arrival>()>;

namespace detail {

struct Tracker {
  double x = 0.0;
  double v = 0.0;
  std::size_t count_in = 0;
  CompensatedSum work_in;
  bool occupied = false;
  double tau = 0.0;
  double work_at_tau = 0.0;
  double v_at_tau = 0.0;
  double v_before_tau = 0.0;

  void occupy(double now, double v_before) {
    occupied = true;
    tau = now;
    work_at_tau = work_in.value();
    v_at_tau = v;
    v_before_tau = v_before;
  }
};

} // namespace detail

/// Event-driven single-server queue under SRPT (preemptive, always serving
/// the minimum residual) or FIFO (nonpreemptive head of line). Between events
/// the job in service loses residual at rate one. Grid observations and
/// crossings of the tracked thresholds by the served job are events, so
/// truncated functionals and busy-period clocks are exact at every grid time.
///
/// Equal-time events are processed completion, crossing, arrival, grid.
class Engine {
public:
  static constexpr double kCompletionEpsilon = 1e-12;

  Engine(DisciplineKind discipline, std::span<const double> thresholds,
         JobSet initial = {}, EventLog *log = nullptr)
      : discipline_(discipline), jobs_(std::move(initial)), log_(log) {
    std::vector<double> xs(thresholds.begin(), thresholds.end());
    for (double x : xs)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("thresholds must be finite and >= 0");
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
      detail::Tracker tr;
      tr.x = x;
      if (x > 0.0) {
        auto [n, w] = jobs_.mass_at_or_below(x);
        tr.count_in = n;
        tr.work_in.reset(w);
      }
      if (tr.count_in > 0)
        tr.occupy(0.0, 0.0);
      trackers_.push_back(tr);
    }
    for (const auto &j : jobs_) {
      next_seq_ = std::max(next_seq_, j.seq + 1);
      if (discipline_ == DisciplineKind::FIFO)
        fifo_.push_back(j);
    }
    std::sort(fifo_.begin(), fifo_.end(),
              [](const Job &a, const Job &b) { return a.seq < b.seq; });
    pick_served();
  }

  RawPath simulate(const ArrivalSource &source, std::span<const double> grid,
                   double horizon) {
    if (!(horizon >= 0.0))
      throw std::invalid_argument("horizon must be nonnegative");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] < 0.0 || grid[i] > horizon)
        throw std::invalid_argument("grid point outside [0, horizon]");
      if (i > 0 && !(grid[i] > grid[i - 1]))
        throw std::invalid_argument("grid must be strictly increasing");
    }

    RawPath path;
    path.discipline = discipline_;
    path.t.reserve(grid.size());
    for (const auto &tr : trackers_) {
      ThresholdSeries s;
      s.x = tr.x;
      path.thresholds.push_back(std::move(s));
    }

    if (log_)
      for (const auto &j : jobs_)
        log_->push({0.0, EventKind::Arrival, static_cast<std::int64_t>(j.seq),
                    j.residual, jobs_.total_count(), jobs_.total_work()});

    std::optional<Arrival> pending = source();
    double last_arrival = -std::numeric_limits<double>::infinity();
    std::size_t g = 0;
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (;;) {
      if (pending && pending->time < last_arrival)
        throw std::invalid_argument("arrival times must be nondecreasing");

      double t_complete = inf;
      double t_cross = inf;
      double x_cross = 0.0;
      if (served_) {
        t_complete = now_ + served_->residual;
        for (auto it = trackers_.rbegin(); it != trackers_.rend(); ++it) {
          if (it->x > 0.0 && it->x < served_->residual) {
            x_cross = it->x;
            t_cross = now_ + (served_->residual - it->x);
            break;
          }
        }
      }
      const double t_arrival =
          pending && pending->time <= horizon ? pending->time : inf;
      const double t_grid = g < grid.size() ? grid[g] : inf;

      const double t_next = std::min({t_complete, t_cross, t_arrival, t_grid});
      if (!(t_next <= horizon))
        break;

      if (t_complete <= t_next) {
        advance_to(t_complete, 0.0);
        complete_served();
      } else if (t_cross <= t_next) {
        advance_to(t_cross, x_cross);
        cross(x_cross);
      } else if (t_arrival <= t_next) {
        advance_to(t_arrival, std::nullopt);
        last_arrival = pending->time;
        arrive(pending->size);
        pending = source();
      } else {
        advance_to(t_grid, std::nullopt);
        observe(path);
        ++g;
      }
    }
    return path;
  }

  const JobSet &jobs() const noexcept { return jobs_; }
  double now() const noexcept { return now_; }

private:
  void pick_served() {
    if (jobs_.empty()) {
      served_.reset();
      return;
    }
    if (discipline_ == DisciplineKind::SRPT)
      served_ = jobs_.front();
    else
      served_ = fifo_.front();
  }

  // Moves the clock to t. A non-empty `exact` pins the served residual at t
  // (0 for a completion, x for a crossing).
  void advance_to(double t, std::optional<double> exact) {
    const double dt = t - now_;
    if (served_ && (dt > 0.0 || exact)) {
      const double before = served_->residual;
      const double after = exact ? *exact : before - dt;
      const double served_amount = before - after;
      for (auto &tr : trackers_)
        if (tr.x > 0.0 && before <= tr.x)
          tr.work_in.add(-served_amount);
      busy_.add(served_amount);
      if (!exact && after <= kCompletionEpsilon) {
        // Residual defect from rounding; treat as completion now.
        now_ = t;
        for (auto &tr : trackers_)
          if (tr.x > 0.0 && before <= tr.x)
            tr.work_in.add(-after);
        busy_.add(after);
        served_ = jobs_.serve(*served_, after);
        complete_served();
        return;
      }
      Job updated = jobs_.serve(*served_, after);
      served_ = updated;
      if (discipline_ == DisciplineKind::FIFO)
        fifo_.front() = updated;
    }
    now_ = t;
  }

  void complete_served() {
    const Job done = *served_;
    if (done.residual > 0.0)
      jobs_.serve(done, 0.0);
    if (discipline_ == DisciplineKind::FIFO)
      fifo_.pop_front();
    for (auto &tr : trackers_) {
      if (tr.x > 0.0 && tr.count_in > 0) {
        --tr.count_in;
        if (tr.count_in == 0) {
          tr.work_in.reset();
          tr.occupied = false;
        }
      }
    }
    pick_served();
    log(EventKind::Completion, static_cast<std::int64_t>(done.seq), 0.0);
  }

  void cross(double x) {
    for (auto &tr : trackers_) {
      if (tr.x == x) {
        const bool was_empty = tr.count_in == 0;
        ++tr.count_in;
        tr.work_in.add(x);
        if (was_empty)
          tr.occupy(now_, tr.v);
      }
    }
    log(EventKind::Crossing, static_cast<std::int64_t>(served_->seq),
        served_->residual);
  }

  void arrive(double size) {
    if (!(size > 0.0))
      throw std::invalid_argument("arrival size must be positive");
    const Job job{size, next_seq_++};
    ++arrivals_;
    arrived_work_.add(size);
    jobs_.insert(job);
    for (auto &tr : trackers_) {
      if (size <= tr.x) {
        const double v_before = tr.v;
        tr.v += size;
        const bool was_empty = tr.count_in == 0;
        ++tr.count_in;
        tr.work_in.add(size);
        if (was_empty)
          tr.occupy(now_, v_before);
      }
    }
    if (discipline_ == DisciplineKind::FIFO)
      fifo_.push_back(job);
    pick_served();
    log(EventKind::Arrival, static_cast<std::int64_t>(job.seq), size);
  }

  void observe(RawPath &path) {
    path.t.push_back(now_);
    path.q.push_back(jobs_.total_count());
    path.w.push_back(jobs_.total_work());
    path.e.push_back(arrivals_);
    path.busy_time.push_back(busy_.value());
    path.arrived_work.push_back(arrived_work_.value());
    for (std::size_t k = 0; k < trackers_.size(); ++k) {
      const auto &tr = trackers_[k];
      auto &s = path.thresholds[k];
      s.v.push_back(tr.v);
      s.count_in.push_back(tr.count_in);
      s.work_in.push_back(tr.count_in > 0 ? tr.work_in.value() : 0.0);
      if (tr.occupied) {
        s.tau.push_back(tr.tau);
        s.work_at_tau.push_back(tr.work_at_tau);
        s.v_at_tau.push_back(tr.v_at_tau);
        s.v_before_tau.push_back(tr.v_before_tau);
      } else {
        s.tau.push_back(now_);
        s.work_at_tau.push_back(0.0);
        s.v_at_tau.push_back(tr.v);
        s.v_before_tau.push_back(tr.v);
      }
    }
    if (served_)
      log(EventKind::Grid, static_cast<std::int64_t>(served_->seq),
          served_->residual);
    else
      log(EventKind::Grid, -1, 0.0);
  }

  void log(EventKind kind, std::int64_t seq, double residual) {
    if (log_)
      log_->push({now_, kind, seq, residual, jobs_.total_count(),
                  jobs_.total_work()});
  }

  DisciplineKind discipline_;
  JobSet jobs_;
  EventLog *log_;
  std::vector<detail::Tracker> trackers_;
  std::deque<Job> fifo_;
  std::optional<Job> served_;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t arrivals_ = 0;
  CompensatedSum busy_;
  CompensatedSum arrived_work_;
};

/// Arrivals from the renewal stream and i.i.d. sizes, both strictly after 0
/// and no later than horizon.
class RenewalArrivals {
public:
  RenewalArrivals(const HeavyTrafficParams &p, const SystemConfig &cfg,
                  std::uint64_t interarrival_seed, std::uint64_t size_seed)
      : params_(p), cfg_(cfg), gaps_(interarrival_seed), sizes_(size_seed),
        buffer_(p.interarrival.variates_needed()) {}

  Arrival next() {
    for (auto &u : buffer_)
      u = gaps_();
    clock_ += interarrival_sample(params_, cfg_, buffer_);
    return {clock_, params_.dist.sample(sizes_())};
  }

private:
  HeavyTrafficParams params_;
  SystemConfig cfg_;
  UniformStream gaps_;
  UniformStream sizes_;
  std::vector<double> buffer_;
  double clock_ = 0.0;
};

/// Simulates one replication of system cfg from its heavy-traffic initial
/// condition. grid and horizon are physical times; the random streams are
/// derived from (seed, r, replication).
inline RawPath run(const SystemConfig &cfg, const HeavyTrafficParams &p,
                   DisciplineKind discipline, double horizon,
                   std::span<const double> grid,
                   std::span<const double> thresholds, std::uint64_t seed,
                   std::uint64_t replication = 0, EventLog *log = nullptr) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("horizon must be positive");
  RenewalArrivals stream(
      p, cfg, derive_seed(seed, cfg.r, replication, StreamTag::Interarrival),
      derive_seed(seed, cfg.r, replication, StreamTag::ProcessingTime));
  ArrivalSource source = [&stream, horizon]() -> std::optional<Arrival> {
    Arrival a = stream.next();
    if (a.time > horizon)
      return std::nullopt;
    return a;
  };
  Engine engine(discipline, thresholds, initial_condition(p, cfg), log);
  return engine.simulate(source, grid, horizon);
}

/// Runs the engine on a supplied arrival trace from an empty system.
inline RawPath inject_trace(std::span<const Arrival> arrivals,
                            DisciplineKind discipline,
                            std::span<const double> grid,
                            std::span<const double> thresholds,
                            EventLog *log = nullptr, JobSet initial = {}) {
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    if (!(arrivals[i].size > 0.0))
      throw std::invalid_argument("trace sizes must be positive");
    if (i > 0 && !(arrivals[i].time > arrivals[i - 1].time))
      throw std::invalid_argument("trace arrival times must be strictly increasing");
    if (arrivals[i].time < 0.0)
      throw std::invalid_argument("trace arrival times must be nonnegative");
  }
  // Late enough for every job to finish.
  double horizon = arrivals.empty() ? 0.0 : arrivals.back().time;
  for (const auto &a : arrivals)
    horizon += a.size;
  horizon += initial.total_work();
  if (!grid.empty())
    horizon = std::max(horizon, grid.back());

  std::size_t next = 0;
  ArrivalSource source = [&]() -> std::optional<Arrival> {
    if (next < arrivals.size())
      return arrivals[next++];
    return std::nullopt;
  };
  Engine engine(discipline, thresholds, std::move(initial), log);
  return engine.simulate(source, grid, horizon);
}

/// Physical time since [0, x] last held no job, at grid time t.
inline double theta_at(const RawPath &path, double t, double x) {
  const std::size_t j = path.grid_index(t);
  const auto &s = path.threshold(x);
  return path.t[j] - s.tau[j];
}

/// Left side minus right side of the truncated-workload balance over
/// (tau(t,x), t], during which SRPT devotes the server to [0, x].
inline double balance_residual(const RawPath &path, double t, double x) {
  if (path.discipline != DisciplineKind::SRPT)
    throw unsupported_error("balance identity holds for SRPT only");
  const std::size_t j = path.grid_index(t);
  const auto &s = path.threshold(x);
  const double elapsed = path.t[j] - s.tau[j];
  return s.work_in[j] - s.work_at_tau[j] - (s.v[j] - s.v_at_tau[j]) + elapsed;
}

/// work_in(0,x) + jump of V_x at tau + x - work_in(tau,x); nonnegative for
/// SRPT because [0, x] is entered at tau either by an arrival of size <= x or
/// by the served job reaching residual x.
inline double entry_work_slack(const RawPath &path, std::size_t j, double x) {
  const auto &s = path.threshold(x);
  return s.work_in[0] + (s.v_at_tau[j] - s.v_before_tau[j]) + x -
         s.work_at_tau[j];
}

/// Right side minus left side of
/// work_in(t,x) <= work_in(0,x) + V_x(t) - V_x(tau-) - (t - tau) + x.
inline double work_below_x_slack(const RawPath &path, std::size_t j,
                                      double x) {
  const auto &s = path.threshold(x);
  const double elapsed = path.t[j] - s.tau[j];
  return s.work_in[0] + (s.v[j] - s.v_before_tau[j]) - elapsed + x -
         s.work_in[j];
}

} // namespace srpt_lab

#endif // SRPT_LAB_SRPT_SIM_HPP
