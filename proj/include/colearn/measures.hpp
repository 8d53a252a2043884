#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "colearn/estimator.hpp"
#include "colearn/models.hpp"
#include "colearn/system.hpp"

namespace colearn {

// ---------------------------------------------------------------- empirical measures

/// Weighting applied inside the kernel error norm.
enum class Weighting { none, distance_sq, speed_diff_sq, phase_diff_sq };

const char* to_string(Weighting w);

/// Histogram over r (dims = 1) or (r, s) (dims = 2). Per bin it keeps the
/// probability mass and the mass-weighted means of r^2, |v'-v|^2 and
/// (xi'-xi)^2, so norms can use bin-mean weights.
struct EmpiricalMeasure {
  int dims = 1;
  std::vector<double> edges_r;
  std::vector<double> edges_s;  // dims == 2 only
  std::vector<double> mass;     // bins_r * bins_s, row-major in r
  std::vector<double> mean_r2;
  std::vector<double> mean_rdot2;
  std::vector<double> mean_xi2;

  int bins_r() const { return static_cast<int>(edges_r.size()) - 1; }
  int bins_s() const { return dims == 2 ? static_cast<int>(edges_s.size()) - 1 : 1; }
  std::size_t bin_count() const { return mass.size(); }
  double center_r(int a) const { return 0.5 * (edges_r[static_cast<std::size_t>(a)] + edges_r[static_cast<std::size_t>(a) + 1]); }
  double center_s(int b) const {
    return dims == 2 ? 0.5 * (edges_s[static_cast<std::size_t>(b)] + edges_s[static_cast<std::size_t>(b) + 1]) : 0.0;
  }
  double total_mass() const;
  bool is_zero() const { return mass.empty() || total_mass() == 0.0; }
  /// Flat index of the bin containing (r, s), or -1 if outside.
  int locate(double r, double s = 0.0) const;
  double weight(std::size_t bin, Weighting w) const;
};

struct MeasureOptions {
  int bins_1d = 200;
  int bins_2d = 50;
};

/// Measures for one channel, one per ordered type pair (k * K + k').
struct ChannelMeasures {
  Channel channel = Channel::energy;
  int num_types = 1;
  std::vector<EmpiricalMeasure> pairs;
  const EmpiricalMeasure& at(int k, int kp) const { return pairs[static_cast<std::size_t>(k * num_types + kp)]; }
};

/// Empirical rho over every (trajectory, time, ordered pair i != j) with equal
/// weight per pair class. Pairs with N_{k,k'} = 0 get an empty measure.
ChannelMeasures estimate_rho(const SystemSpec& spec, const std::vector<Trajectory>& trajectories, Channel channel,
                             const MeasureOptions& opt = {});

/// Natural weighting of a channel's error norm for a given order.
Weighting default_weighting(Order order, Channel channel);

class ZeroNormError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Relative weighted L2(rho) error: sqrt(sum (phi - phi_hat)^2 w mass / sum phi^2 w mass)
/// with phi evaluated at bin centers. Throws ZeroNormError when the true kernel
/// has zero norm on the support.
double kernel_l2_error(const Kernel& truth, const Kernel& estimate, const EmpiricalMeasure& measure, Weighting w);

/// Absolute weighted L2(rho) norm of a kernel.
double kernel_l2_norm(const Kernel& phi, const EmpiricalMeasure& measure, Weighting w);

// ---------------------------------------------------------------- trajectories

enum class StateField { position, velocity, phase };

struct TimeWindow {
  double lo = -1e300;
  double hi = 1e300;
};

/// max_t S-norm(truth - predicted) / max_t S-norm(truth) over grid times inside
/// the window. Both trajectories must share the grid.
double trajectory_error(const SystemSpec& spec, const Trajectory& truth, const Trajectory& predicted, StateField field,
                        TimeWindow window = {});

// ---------------------------------------------------------------- clusters and scores

struct ClusterResult {
  std::vector<int> label;  // per agent
  std::vector<std::vector<double>> centers;
  bool separation_violated = false;
  int count() const { return static_cast<int>(centers.size()); }
};

/// Connected components of the graph with edges |x_i - x_j| < delta.
ClusterResult detect_clusters(const SystemState& state, double delta);

double hausdorff_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

/// Emergent-behavior observables of one run at its final time. Fields not
/// applicable to the model are left at their defaults.
struct EmergentScore {
  std::string model;
  bool event = false;
  bool defined = true;  // false when a score is 0/0 (e.g. all velocities zero)
  // od
  int clusters = 0;
  std::vector<std::vector<double>> centers;
  bool separation_violated = false;
  double max_speed = 0.0;
  // cs, fm2d, fm3d
  double i_flock = 0.0;
  double i_mill = 0.0;
  double i_s = 0.0;
  std::vector<double> v_cm;
  // sod
  double phase_mean = 0.0;
  double phase_var = 0.0;
  // gss (per planet 1..4, i.e. agents 1..N-1)
  std::vector<double> energy_mean;
  std::vector<double> energy_var;
};

struct ScoreContext {
  std::string model;
  const SystemSpec* system = nullptr;   // dynamics of the run being scored (true or learned)
  PresetParams params;                  // physical parameters (alpha, beta, G, masses, ...)
  double rtol = 1e-8;                    // integrator tolerance, sets the phase-variance floor
};

/// Scores a run. Uses the final state, plus the whole trajectory for GSS energy statistics.
EmergentScore score_emergent(const ScoreContext& ctx, const Trajectory& run);

// individual observables, exposed for testing
double cs_flock_score(const SystemState& s);
double fm2d_flock_score(const SystemState& s);
double fm2d_mill_score(const SystemState& s);
double fm3d_flock_score(const SystemState& s, double alpha, double beta);
double fm3d_mill_score(const SystemState& s, const StateDerivative& rhs, const std::vector<double>& masses);

// ---------------------------------------------------------------- confusion

struct ConfusionMatrix {
  // p[a][b]: a = event in the true system (0 no, 1 yes), b = event in the prediction
  double p11 = 0, p12 = 0, p21 = 0, p22 = 0;
  int runs = 0;
};

struct ConfusionStats {
  std::optional<double> accuracy, precision, recall, f_score;
};

ConfusionMatrix confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted);
ConfusionStats confusion_stats(const ConfusionMatrix& m);
/// Fraction of runs (0..1) where both agree.
double agreement(const ConfusionMatrix& m);

// ---------------------------------------------------------------- pattern indicators

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
  int count = 0;
};

MeanStd mean_std(const std::vector<double>& v);

/// |truth - pred| / |truth|, falling back to |truth - pred| when truth is 0.
double relative_error(double truth, double pred);
double relative_error(const std::vector<double>& truth, const std::vector<double>& pred);

struct PatternScores {
  std::string model;
  MeanStd pi1;
  MeanStd pi2;
};

PatternScores pattern_indicators(const std::string& model, const std::vector<EmergentScore>& truth,
                                 const std::vector<EmergentScore>& predicted);

}  // namespace colearn
