#ifndef DISCOFLUX_ERRORS_HPP
#define DISCOFLUX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace discoflux {

/// Density or fugacity outside the domain of a closure / rate table.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested value beyond the reachable range of a monotone map (R, h, F).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// No steady state m with F(x, m) = alpha at the given position.
class NoSolutionError : public std::runtime_error {
 public:
  NoSolutionError(const std::string& what, double x, double lo, double hi)
      : std::runtime_error(what), x_(x), lo_(lo), hi_(hi) {}

  double position() const noexcept { return x_; }
  double attainable_lo() const noexcept { return lo_; }
  double attainable_hi() const noexcept { return hi_; }

 private:
  double x_, lo_, hi_;
};

/// Time step exceeding the CFL bound; carries the admissible step.
class CflError : public std::runtime_error {
 public:
  CflError(const std::string& what, double admissible_dt)
      : std::runtime_error(what), admissible_dt_(admissible_dt) {}
  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double admissible_dt_;
};

/// Riemann data outside the regime the exact evaluator covers.
class UnsupportedRegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coupled process lost its sitewise order; indicates a coupling bug.
class OrderingBrokenError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Simulation exceeded its event cap before reaching the target time.
class EventBudgetError : public std::runtime_error {
 public:
  EventBudgetError(const std::string& what, double reached_time, long long events)
      : std::runtime_error(what), reached_(reached_time), events_(events) {}
  double reached_time() const noexcept { return reached_; }
  long long events() const noexcept { return events_; }

 private:
  double reached_;
  long long events_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace discoflux

#endif  // DISCOFLUX_ERRORS_HPP
