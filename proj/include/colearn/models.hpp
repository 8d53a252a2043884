#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "colearn/system.hpp"

namespace colearn {

/// Named scalar parameters of a preset. Unknown names are rejected on access.
struct PresetParams {
  std::string model;
  std::map<std::string, double> values;

  double get(const std::string& key) const;
  void set(const std::string& key, double value);
  bool operator==(const PresetParams&) const = default;
};

const std::vector<std::string>& preset_names();
PresetParams default_params(const std::string& model);
void validate_params(const PresetParams& params);

SystemSpec build_system(const PresetParams& params, int num_agents);

SystemSpec build_od(int num_agents = 20);
SystemSpec build_cs(int num_agents = 20);
SystemSpec build_fm2d(int num_agents = 20);
SystemSpec build_fm3d(int num_agents = 20);
SystemSpec build_sod(double coupling_j = 0.1, double coupling_k = 1.0, int num_agents = 20);
SystemSpec build_gss();

/// True kernels of the preset kept for reference, e.g. OD's piecewise law.
double od_kernel(double r);

struct InitialConditionSampler {
  enum class Kind { uniform_box, gss_elliptical };
  Kind kind = Kind::uniform_box;
  int num_agents = 0;
  int dim = 0;
  bool with_velocity = false;
  bool with_xi = false;
  double x_lo = 0.0, x_hi = 0.0;
  double v_lo = 0.0, v_hi = 0.0;
  double xi_lo = 0.0, xi_hi = 0.0;
  // elliptical orbits around a central body at the origin (agent 0)
  double central_mu = 0.0;
  std::vector<double> perihelion;
  std::vector<double> aphelion;

  void validate() const;
};

InitialConditionSampler default_sampler(const PresetParams& params, const SystemSpec& spec);

/// Deterministic: item `index` depends only on (seed, index).
SystemState sample_initial_condition(const InitialConditionSampler& sampler, std::uint64_t seed, std::uint64_t index);
std::vector<SystemState> sample_initial_conditions(const InitialConditionSampler& sampler, int count,
                                                   std::uint64_t seed);

/// Total (kinetic + potential) energy of planet i relative to body 0, using the
/// physical masses in the parameters.
double gss_planet_energy(const PresetParams& params, const SystemState& state, int planet);

}  // namespace colearn
