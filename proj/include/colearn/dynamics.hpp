#pragma once

#include <vector>

#include "colearn/system.hpp"

namespace colearn {

/// One ordered pair (i, j), i != j, with its distance and feature values.
struct PairRecord {
  int i = 0;
  int j = 0;
  double r = 0.0;
  double s_energy = 0.0;
  double s_alignment = 0.0;
  double s_environment = 0.0;
  bool singular = false;  // r below the collision threshold
};

inline constexpr double kCollisionDistance = 1e-12;

/// Rejects non-finite entries, naming the first offending agent.
void check_state(const SystemSpec& spec, const SystemState& state);

std::vector<PairRecord> pairwise_features(const SystemSpec& spec, const SystemState& state);

/// Right-hand side of the governing equations. `out` is resized as needed so a
/// caller can reuse it across calls.
void eval_rhs(const SystemSpec& spec, const SystemState& state, StateDerivative& out);
StateDerivative eval_rhs(const SystemSpec& spec, const SystemState& state);

/// Non-collective part only, in the same layout as eval_rhs (velocity slot
/// holds F/m for second-order systems, position slot holds V).
void eval_noncollective(const SystemSpec& spec, const SystemState& state, StateDerivative& out);

}  // namespace colearn
