#pragma once

#include <cmath>
#include <vector>

#include "colearn/system.hpp"

namespace testing_support {

// First-order, one type, energy channel only, no external force.
inline colearn::SystemSpec line_system(int n, int d, colearn::Kernel phi) {
  colearn::SystemSpec s;
  s.name = "line";
  s.order = colearn::Order::first;
  s.num_agents = n;
  s.dim = d;
  s.type_of.assign(static_cast<std::size_t>(n), 0);
  s.energy.active = true;
  s.energy.kernels = {std::move(phi)};
  s.validate();
  return s;
}

inline colearn::Trajectory constant_trajectory(const colearn::SystemState& st, std::size_t len, double t1 = 1.0) {
  colearn::Trajectory t;
  for (std::size_t l = 0; l < len; ++l) {
    t.times.push_back(t1 * static_cast<double>(l) / static_cast<double>(len - 1));
    t.states.push_back(st);
  }
  return t;
}

}  // namespace testing_support
