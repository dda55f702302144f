#include "fkbridge/potential.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fkbridge/errors.hpp"

namespace fkbridge {

Potential::Potential(std::string name, Eval eval, double lower_bound,
                     BoxBound positive_part_bound, bool time_dependent)
    : name_(std::move(name)),
      eval_(std::move(eval)),
      lower_bound_m_(lower_bound),
      positive_part_bound_(std::move(positive_part_bound)),
      time_dependent_(time_dependent) {}

double Potential::positive_part_bound(const Box& box) const {
  return positive_part_bound_(box);
}

Potential Potential::time_reversed(double horizon) const {
  Eval reversed = [eval = eval_, horizon](double x, double t) {
    return eval(x, horizon - t);
  };
  BoxBound bound = [inner = positive_part_bound_, horizon](const Box& box) {
    return inner(Box{box.x_lo, box.x_hi, horizon - box.t_hi,
                     horizon - box.t_lo});
  };
  return Potential(name_ + "_reversed", std::move(reversed), lower_bound_m_,
                   std::move(bound), time_dependent_);
}

void Potential::check_bounds(const Grid& grid,
                             std::span<const double> times) const {
  const Box box{grid.lo, grid.hi,
                times.empty() ? 0.0 : *std::min_element(times.begin(), times.end()),
                times.empty() ? 0.0 : *std::max_element(times.begin(), times.end())};
  const double plus_bound = positive_part_bound(box);
  for (double t : times) {
    for (double x : grid.points) {
      const double c = eval_(x, t);
      if (!std::isfinite(c)) {
        throw DomainError("potential '" + name_ + "' is not finite at (x=" +
                          std::to_string(x) + ", t=" + std::to_string(t) + ")");
      }
      if (c < -lower_bound_m_ - 1e-12 * (1.0 + std::abs(c))) {
        throw DomainError("potential '" + name_ +
                          "' violates its lower bound at (x=" +
                          std::to_string(x) + ", t=" + std::to_string(t) + ")");
      }
      if (std::max(c, 0.0) > plus_bound + 1e-12 * (1.0 + std::abs(c))) {
        throw DomainError("potential '" + name_ +
                          "' exceeds its positive-part box bound at (x=" +
                          std::to_string(x) + ", t=" + std::to_string(t) + ")");
      }
    }
  }
}

Potential Potential::zero() {
  return Potential(
      "zero", [](double, double) { return 0.0; }, 0.0,
      [](const Box&) { return 0.0; }, false);
}

Potential Potential::constant(double level) {
  return Potential(
      "constant", [level](double, double) { return level; },
      std::max(0.0, -level),
      [level](const Box&) { return std::max(0.0, level); }, false);
}

Potential Potential::from_function(std::string name, Eval eval,
                                   double lower_bound, bool time_dependent) {
  BoxBound sampled = [eval](const Box& box) {
    // Dense-sample c_plus over the box; by construction this dominates any
    // later spot check that uses the same or a coarser lattice.
    constexpr int kNx = 129;
    constexpr int kNt = 17;
    double best = 0.0;
    for (int i = 0; i < kNx; ++i) {
      const double x =
          box.x_lo + (box.x_hi - box.x_lo) * i / static_cast<double>(kNx - 1);
      for (int j = 0; j < kNt; ++j) {
        const double t = box.t_lo + (box.t_hi - box.t_lo) * j /
                                        static_cast<double>(kNt - 1);
        best = std::max(best, eval(x, t));
      }
    }
    return best;
  };
  return Potential(std::move(name), std::move(eval), lower_bound,
                   std::move(sampled), time_dependent);
}

}  // namespace fkbridge
