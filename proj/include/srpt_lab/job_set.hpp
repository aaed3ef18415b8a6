#ifndef SRPT_LAB_JOB_SET_HPP
#define SRPT_LAB_JOB_SET_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>

namespace srpt_lab {

struct Job {
  double residual = 0.0;
  std::uint64_t seq = 0;

  friend bool operator==(const Job &, const Job &) = default;
};

/// Shortest residual first, ties broken by arrival order.
struct ResidualOrder {
  bool operator()(const Job &a, const Job &b) const noexcept {
    if (a.residual != b.residual)
      return a.residual < b.residual;
    return a.seq < b.seq;
  }
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  CompensatedSum() = default;
  explicit CompensatedSum(double v) : sum_(v) {}

  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void reset(double v = 0.0) noexcept {
    sum_ = v;
    comp_ = 0.0;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// The state descriptor: a counting measure with a unit atom at each job's
/// residual processing time. Jobs with residual 0 are never stored.
class JobSet {
public:
  using container = std::set<Job, ResidualOrder>;
  using const_iterator = container::const_iterator;

  void insert(Job job) {
    if (!(job.residual > 0.0))
      throw std::invalid_argument("job residual must be positive");
    if (!jobs_.insert(job).second)
      throw std::invalid_argument("duplicate job sequence number");
    work_.add(job.residual);
  }

  void erase(const Job &job) {
    auto it = jobs_.find(job);
    if (it == jobs_.end())
      throw std::out_of_range("job not present");
    work_.add(-it->residual);
    jobs_.erase(it);
    if (jobs_.empty())
      work_.reset();
  }

  /// Replaces job's residual by new_residual, which must be smaller. A job
  /// driven to 0 is removed. Returns the updated job.
  Job serve(const Job &job, double new_residual) {
    auto node = jobs_.extract(job);
    if (node.empty())
      throw std::out_of_range("job not present");
    if (!(new_residual > 0.0)) {
      work_.add(-node.value().residual);
      if (jobs_.empty())
        work_.reset();
      return {0.0, job.seq};
    }
    work_.add(new_residual - node.value().residual);
    node.value().residual = new_residual;
    Job updated = node.value();
    jobs_.insert(std::move(node));
    return updated;
  }

  bool empty() const noexcept { return jobs_.empty(); }
  std::size_t total_count() const noexcept { return jobs_.size(); }
  double total_work() const noexcept { return work_.value(); }

  const Job &front() const { return *jobs_.begin(); }

  const_iterator begin() const noexcept { return jobs_.begin(); }
  const_iterator end() const noexcept { return jobs_.end(); }

  /// Plain left-to-right sum of residuals.
  double recomputed_work() const noexcept {
    double s = 0.0;
    for (const auto &j : jobs_)
      s += j.residual;
    return s;
  }

  /// Count and work of residuals in [0, x].
  std::pair<std::size_t, double> mass_at_or_below(double x) const noexcept {
    std::size_t n = 0;
    double w = 0.0;
    for (const auto &j : jobs_) {
      if (j.residual > x)
        break;
      ++n;
      w += j.residual;
    }
    return {n, w};
  }

private:
  container jobs_;
  CompensatedSum work_;
};

} // namespace srpt_lab

#endif // SRPT_LAB_JOB_SET_HPP
