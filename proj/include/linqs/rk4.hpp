#pragma once

#include <cmath>
#include <cstddef>

#include "linqs/errors.hpp"

namespace linqs {

/// Fixed-step grid on [t0, t_final]. Full steps of size dt, then one
/// shortened step so the last node is exactly t_final. A remainder below
/// 1e-9·dt is folded into the preceding step. Shared by the moment and
/// density-matrix integrators so their samples land on identical times.
class TimeGrid {
 public:
  TimeGrid(double t0, double t_final, double dt) : t0_(t0), t_final_(t_final), dt_(dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("time step must be positive and finite");
    if (!(t_final > t0) || !std::isfinite(t_final))
      throw Error("t_final must be finite and greater than the initial time");
    const double span = t_final - t0;
    const double ratio = span / dt;
    auto full = static_cast<std::size_t>(std::floor(ratio));
    const double rem = ratio - static_cast<double>(full);
    if (rem > 1.0 - 1e-9) {
      ++full;
      steps_ = full;
    } else if (rem < 1e-9) {
      steps_ = full == 0 ? 1 : full;
    } else {
      steps_ = full + 1;
    }
  }

  std::size_t steps() const { return steps_; }
  double dt() const { return dt_; }

  /// Time of node k, k = 0 … steps(). The last node is exactly t_final.
  double time(std::size_t k) const {
    if (k >= steps_) return t_final_;
    return t0_ + static_cast<double>(k) * dt_;
  }

  /// Nodes recorded when keeping every `every`-th step plus the final one.
  bool is_sample(std::size_t k, std::size_t every) const {
    return k == 0 || k == steps_ || k % every == 0;
  }

 private:
  double t0_;
  double t_final_;
  double dt_;
  std::size_t steps_ = 0;
};

/// Increment y(t+h) − y(t) of one classical Runge–Kutta step. State needs
/// `+` and scalar `*` and must be constructible from the resulting expressions.
template <typename State, typename Rhs>
State rk4_increment(const Rhs& rhs, double t, const State& y, double h) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(y + h * k3));
  return State((h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

template <typename State, typename Rhs>
State rk4_step(const Rhs& rhs, double t, const State& y, double h) {
  return State(y + rk4_increment(rhs, t, y, h));
}

}  // namespace linqs
