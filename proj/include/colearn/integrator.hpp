#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colearn/system.hpp"

namespace colearn {

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-11;
  long max_steps = 2'000'000;
  double initial_step = 0.0;  // 0 selects the automatic starting-step estimate
  double max_step = 0.0;      // 0 means unbounded

  void validate() const;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Flat ODE right-hand side y' = f(t, y).
using FlatRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct FlatSolution {
  std::vector<std::vector<double>> samples;  // one per grid point reached
  IntegrationStats stats;
  bool ok = true;
  std::string message;
  double last_good_time = 0.0;
};

/// Dormand-Prince 5(4) with the free 4th-order continuous extension, sampled at
/// every grid point. grid[0] is the initial time.
FlatSolution integrate_flat(const FlatRhs& rhs, std::vector<double> y0, const std::vector<double>& grid,
                            const IntegratorConfig& cfg);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, Trajectory partial_traj, double last_time, IntegrationStats s)
      : std::runtime_error(what), partial(std::move(partial_traj)), last_good_time(last_time), stats(s) {}
  Trajectory partial;
  double last_good_time;
  IntegrationStats stats;
};

/// Integrates a system, returning states at exactly the grid times.
Trajectory integrate(const SystemSpec& spec, const SystemState& initial, const std::vector<double>& grid,
                     const IntegratorConfig& cfg = {}, IntegrationStats* stats = nullptr);

/// L equidistant times from t0 to t1 inclusive.
std::vector<double> uniform_grid(double t0, double t1, std::size_t count);

/// Fills trajectory derivatives by evaluating the right-hand side at every state.
void attach_exact_derivatives(const SystemSpec& spec, Trajectory& traj);

}  // namespace colearn
