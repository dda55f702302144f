#pragma once

#include <functional>
#include <span>
#include <string>

#include "fkbridge/grid.hpp"

namespace fkbridge {

/// Compact space-time box, used for local bounds on the potential.
struct Box {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// Feynman-Kac potential c(x,t), decomposed as c = c_plus - c_minus with
/// c_minus bounded (c >= -M everywhere) and c_plus bounded on compact
/// boxes. The two bounds are what kernel positivity estimates and series
/// splitting decisions consume.
class Potential {
 public:
  using Eval = std::function<double(double x, double t)>;
  using BoxBound = std::function<double(const Box&)>;

  Potential(std::string name, Eval eval, double lower_bound,
            BoxBound positive_part_bound, bool time_dependent);

  double operator()(double x, double t) const { return eval_(x, t); }

  /// M such that c(x,t) >= -M everywhere.
  double lower_bound() const { return lower_bound_m_; }

  /// Upper bound for c_plus = max(c, 0) on the box.
  double positive_part_bound(const Box& box) const;

  bool time_dependent() const { return time_dependent_; }
  const std::string& name() const { return name_; }

  /// The potential run backwards over [0, horizon]: c(x, horizon - t).
  Potential time_reversed(double horizon) const;

  /// Spot-checks both bound invariants on grid x times samples; throws
  /// DomainError on a violation.
  void check_bounds(const Grid& grid, std::span<const double> times) const;

  static Potential zero();
  static Potential constant(double level);

  /// Generic construction; the box bound is estimated by dense sampling.
  static Potential from_function(std::string name, Eval eval,
                                 double lower_bound, bool time_dependent);

 private:
  std::string name_;
  Eval eval_;
  double lower_bound_m_;
  BoxBound positive_part_bound_;
  bool time_dependent_;
};

}  // namespace fkbridge
