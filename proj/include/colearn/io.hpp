#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "colearn/estimator.hpp"
#include "colearn/experiment.hpp"
#include "colearn/system.hpp"

namespace colearn {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- configs

/// Serializes every field, including the full preset parameter set.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Starts from the desk defaults of the named preset and overlays the given
/// keys. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

// ---------------------------------------------------------------- trajectories

/// Little-endian binary layout:
///   "CLTR" | u32 version (1) | u32 N | u32 d | u32 flags | u64 L
///   flags: bit0 velocities, bit1 xi, bit2 derivatives
///   L doubles of times, then per time: x (N*d), v (N*d if bit0), xi (N if bit1);
///   then, if bit2, the same per-time block for the derivatives.
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& path);

/// One row per (time, agent): t, agent, x..., v..., xi.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

// ---------------------------------------------------------------- estimates

nlohmann::json estimate_to_json(const KernelEstimate& est);
KernelEstimate estimate_from_json(const nlohmann::json& j);
void save_estimate(const KernelEstimate& est, const std::filesystem::path& path);
KernelEstimate load_estimate(const std::filesystem::path& path);

// ---------------------------------------------------------------- reports

/// Writes the tables, plot data and metadata of a run into `dir`.
void emit_reports(const RunArtifact& art, const std::filesystem::path& dir);

/// "undef" for an empty optional, otherwise the value at full precision.
std::string format_value(const std::optional<double>& v);

}  // namespace colearn
