#pragma once

#include <stdexcept>
#include <vector>

#include "sben/phase.hpp"

namespace sben {

/// Strictly increasing time nodes t_0 < ... < t_N, N >= 1.
class TimeGrid {
public:
  explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2)
      throw std::invalid_argument("TimeGrid: need at least two nodes");
    for (size_t k = 1; k < nodes_.size(); ++k)
      if (!(nodes_[k] > nodes_[k - 1]))
        throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
  }

  static TimeGrid uniform(double t0, double t_end, size_t steps) {
    if (steps < 1) throw std::invalid_argument("TimeGrid: steps >= 1 required");
    if (!(t_end > t0)) throw std::invalid_argument("TimeGrid: t_end > t0 required");
    std::vector<double> nodes(steps + 1);
    for (size_t k = 0; k <= steps; ++k)
      nodes[k] = t0 + (t_end - t0) * static_cast<double>(k) / static_cast<double>(steps);
    return TimeGrid(std::move(nodes));
  }

  size_t steps() const { return nodes_.size() - 1; }
  size_t size() const { return nodes_.size(); }
  double t(size_t k) const { return nodes_.at(k); }
  double dt(size_t k) const { return nodes_.at(k) - nodes_.at(k - 1); }  // k >= 1
  double t_end() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }

private:
  std::vector<double> nodes_;
};

/// Discrete evolution curve: states z_0..z_N on a time grid. Rates are
/// derived backward differences, never stored.
class Trajectory {
public:
  Trajectory(TimeGrid grid, std::vector<PhaseVector> states)
      : grid_(std::move(grid)), states_(std::move(states)) {
    if (states_.size() != grid_.size())
      throw std::invalid_argument("Trajectory: states.length must equal grid.length");
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<PhaseVector>& states() const { return states_; }
  const PhaseVector& state(size_t k) const { return states_.at(k); }
  size_t steps() const { return grid_.steps(); }

  /// Backward-difference rate over step k (1 <= k <= N).
  PhaseVector rate(size_t k) const {
    if (k < 1 || k >= states_.size())
      throw std::out_of_range("Trajectory::rate: 1 <= k <= N required");
    return (1.0 / grid_.dt(k)) * (states_[k] - states_[k - 1]);
  }

  /// Midpoint state of step k.
  PhaseVector midpoint(size_t k) const {
    if (k < 1 || k >= states_.size())
      throw std::out_of_range("Trajectory::midpoint: 1 <= k <= N required");
    return 0.5 * (states_[k] + states_[k - 1]);
  }

  double mid_time(size_t k) const { return 0.5 * (grid_.t(k) + grid_.t(k - 1)); }

private:
  TimeGrid grid_;
  std::vector<PhaseVector> states_;
};

}  // namespace sben
