#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "colearn/decoupling.hpp"
#include "colearn/estimator.hpp"
#include "colearn/integrator.hpp"
#include "colearn/measures.hpp"
#include "colearn/models.hpp"

namespace colearn {

struct ExperimentConfig {
  PresetParams params;  // params.model names the preset
  int num_agents = 20;
  int m_train = 50;
  int m_rho = 200;
  int m_test = 50;
  int num_times = 100;  // L
  double t0 = 0.0;
  double t_end = 10.0;  // T
  double t_final = 50.0;
  int trials = 3;
  std::uint64_t seed = 1;
  bool observed_derivatives = false;
  ChannelChoices bases;
  MeasureOptions rho_bins;
  IntegratorConfig integrator;          // training and measure runs
  IntegratorConfig predict_integrator;  // paired true/learned runs to T_f
  double solve_tolerance = 1e-12;
  double desk_scale = 1.0;  // multiplies m_train, m_rho, m_test and trials
  int workers = 0;          // 0: hardware concurrency
  bool share_rho = false;   // estimate rho once and reuse it in every trial
  bool predict = true;      // run the prediction and emergent-behavior stage
  Extension extension = Extension::hold_boundary;  // learned kernels outside their domain
  double decoupling_lambda = 1e-3;
  int plot_points = 500;
  std::string output_dir;

  const std::string& preset() const { return params.model; }
  int scaled(int count) const;
  int effective_trials() const { return scaled(trials); }
  int effective_train() const { return scaled(m_train); }
  int effective_rho() const { return scaled(m_rho); }
  int effective_test() const { return scaled(m_test); }
  void validate() const;
};

/// Desk-scale defaults for a preset.
ExperimentConfig default_config(const std::string& preset);

/// Runs fn(0..count-1) on a pool of worker threads; each index is processed
/// exactly once and callers store results by index.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

/// Times of the observation grid and of the longer prediction grid (same step).
std::vector<double> observation_grid(const ExperimentConfig& cfg);
std::vector<double> prediction_grid(const ExperimentConfig& cfg);

struct SimulationBatch {
  std::vector<SystemState> initial;
  std::vector<std::optional<Trajectory>> runs;  // empty where integration failed
  std::vector<std::string> errors;
  int failures() const;
  std::vector<Trajectory> successful() const;
};

/// Integrates every initial condition on the grid. Integration failures are
/// recorded per run and do not abort the batch.
SimulationBatch simulate_batch(const SystemSpec& spec, const std::vector<SystemState>& initial,
                               const std::vector<double>& grid, const IntegratorConfig& cfg, int workers);

/// Observation data of one trial: M initial conditions integrated on the
/// observation grid.
SimulationBatch simulate_training(const ExperimentConfig& cfg, const SystemSpec& spec, int trial);

struct LearnResult {
  std::shared_ptr<const KernelEstimate> estimate;
  LinearSystem motion;
  LinearSystem phase;
  std::uint64_t pair_evaluations = 0;
  std::uint64_t samples = 0;
};

/// Fills derivatives (exact or finite differences), builds the hypothesis
/// space on the observed ranges, assembles in fixed chunks and solves.
LearnResult learn(const SystemSpec& spec, std::vector<Trajectory>& observations, const ChannelChoices& bases,
                  bool observed_derivatives, double tolerance = 1e-12, int workers = 1);

struct KernelErrorRow {
  Channel channel = Channel::energy;
  int k = 0;
  int kp = 0;
  std::optional<double> error;  // empty when the true kernel has zero norm
  std::string weighting;
};

struct PredictionSet {
  std::string name;  // "train" or "test"
  int failures = 0;
  /// per run, keyed "<field>:<window>" with field in {x, v, xi} and window in {0-T, T-Tf}
  std::vector<std::map<std::string, double>> trajectory_errors;
  std::vector<EmergentScore> truth;
  std::vector<EmergentScore> predicted;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  int rho_failures = 0;
  int train_failures = 0;
  std::shared_ptr<const KernelEstimate> estimate;
  std::array<std::optional<ChannelMeasures>, 3> rho;
  std::vector<KernelErrorRow> kernel_errors;
  std::vector<PredictionSet> predictions;
  std::optional<Decomposition> decomposition;
  std::vector<KernelErrorRow> decoupled_errors;  // gss only
  std::uint64_t pair_evaluations = 0;
  std::map<std::string, double> seconds;  // wall time per stage
};

struct RunArtifact {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  std::string integrator_name = "Dormand-Prince 5(4), 4th-order dense output";
  double seconds = 0.0;
};

/// Empirical measures of every active channel from M_rho runs on the observation grid.
std::array<std::optional<ChannelMeasures>, 3> estimate_measures(const ExperimentConfig& cfg, const SystemSpec& spec,
                                                                 int trial, int* failures = nullptr);

/// Relative L2(rho) errors of an estimate for every active channel and pair.
std::vector<KernelErrorRow> kernel_errors(const SystemSpec& truth, const KernelEstimate& est,
                                          const std::array<std::optional<ChannelMeasures>, 3>& rho);

/// Re-integrates the true and learned systems from the given initial
/// conditions to T_f and scores both.
PredictionSet predict_and_score(const ExperimentConfig& cfg, const SystemSpec& truth, const SystemSpec& learned,
                                const std::vector<SystemState>& initial, const std::string& name);

using ProgressFn = std::function<void(const std::string&)>;

/// Full protocol for one trial. A given estimate skips the training and learning stages.
TrialResult run_trial(const ExperimentConfig& cfg, int trial,
                      std::shared_ptr<const KernelEstimate> given = nullptr,
                      const std::array<std::optional<ChannelMeasures>, 3>* shared_rho = nullptr,
                      const ProgressFn& progress = nullptr);

RunArtifact run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = nullptr);

// ---------------------------------------------------------------- summaries

/// Mean and spread over trials of the per-trial mean kernel error of a channel
/// pair.
MeanStd kernel_error_summary(const RunArtifact& art, Channel c, int k, int kp, bool decoupled = false);

/// Mean over trials of the per-trial mean trajectory error.
MeanStd trajectory_error_summary(const RunArtifact& art, const std::string& set, const std::string& key);

/// Confusion matrix over all trials' paired runs of one prediction set.
ConfusionMatrix pooled_confusion(const RunArtifact& art, const std::string& set);

/// Pattern indicators pooled over all trials of one prediction set.
PatternScores pooled_patterns(const RunArtifact& art, const std::string& set);

struct MassSummary {
  std::vector<double> truth;
  std::vector<MeanStd> estimated;
  std::vector<MeanStd> relative_error;
};
MassSummary mass_summary(const RunArtifact& art);

// ---------------------------------------------------------------- acceptance

struct AcceptanceCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;  // "<=", ">=", "=="
  bool pass = false;
};

/// Preset-specific pass/fail checks on a finished run.
std::vector<AcceptanceCheck> acceptance_checks(const RunArtifact& art);

}  // namespace colearn
