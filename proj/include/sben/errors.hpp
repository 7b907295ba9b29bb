#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sben {

/// Nonlinear-solve failure at a time step, carrying the step index and
/// the last residual or gap value.
class SolveError : public std::runtime_error {
public:
  SolveError(size_t step, double residual, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) +
                           ", residual " + std::to_string(residual) + ")"),
        step_(step),
        residual_(residual) {}

  size_t step() const { return step_; }
  double residual() const { return residual_; }

private:
  size_t step_;
  double residual_;
};

}  // namespace sben
