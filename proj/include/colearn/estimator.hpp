#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "colearn/basis.hpp"
#include "colearn/system.hpp"

namespace colearn {

inline constexpr std::array<Channel, 3> kAllChannels{Channel::energy, Channel::alignment, Channel::environment};
inline int channel_index(Channel c) { return static_cast<int>(c); }

// ---------------------------------------------------------------- derivatives

/// Second-order finite differences of a uniformly sampled scalar series:
/// central in the interior, three-point one-sided at both ends.
std::vector<double> differentiate_series(std::span<const double> y, double h);

/// Fills missing derivatives of a trajectory by finite differences. First-order:
/// d/dt of X and Xi. Second-order: V is used as dX/dt when present (otherwise
/// differenced from X) and differenced to obtain dV/dt. Observed derivatives
/// are left untouched.
void approximate_derivatives(Order order, Trajectory& traj);

// ---------------------------------------------------------------- hypothesis spaces

struct BasisChoice {
  BasisKind kind = BasisKind::pw_constant;
  int count_r = 1;
  int count_s = 0;
  double padding = 0.0;
  bool operator==(const BasisChoice&) const = default;
};

using ChannelChoices = std::array<std::optional<BasisChoice>, 3>;

/// Per channel, per ordered type pair (k, k'), an optional basis.
struct HypothesisSet {
  int num_types = 1;
  std::array<std::vector<std::optional<Basis>>, 3> bases;

  explicit HypothesisSet(int k = 1);
  const Basis* get(Channel c, int k, int kp) const;
  void set(Channel c, int k, int kp, Basis b);
  bool channel_used(Channel c) const;
  int channel_size(Channel c) const;
};

/// Streaming min/max of pairwise distances and features, per channel and type pair.
class DomainScanner {
 public:
  explicit DomainScanner(const SystemSpec& spec);
  void add(const Trajectory& traj);
  void add_state(const SystemState& state);
  void merge(const DomainScanner& other);
  std::optional<LearningDomain> domain(Channel c, int k, int kp, double padding) const;
  double min_distance() const;

 private:
  struct Range {
    double r_lo = 1e300, r_hi = -1e300, s_lo = 1e300, s_hi = -1e300;
    bool seen = false;
  };
  const SystemSpec* spec_;
  std::array<std::vector<Range>, 3> ranges_;
};

/// Builds a basis for every active channel and every type pair that has
/// interacting agents, on the domains observed by the scanner.
HypothesisSet build_hypothesis(const SystemSpec& spec, const DomainScanner& scanner, const ChannelChoices& choices);

// ---------------------------------------------------------------- assembly

struct ColumnBlock {
  Channel channel = Channel::energy;
  int k = 0;
  int kp = 0;
  int offset = 0;
  int size = 0;
};

/// Normal equations A alpha = b of one least-squares problem, normalized by the
/// number of (trajectory, time) samples.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double rhs_energy = 0.0;  // normalized sum of weighted squared residual targets
  double samples = 0.0;
  std::vector<ColumnBlock> blocks;

  int size() const { return static_cast<int>(b.size()); }
  /// Empirical loss of coefficients: a'Aa - 2a'b + rhs_energy.
  double loss(const Eigen::VectorXd& alpha) const;
};

/// Accumulates the motion system (energy and alignment columns jointly) and the
/// phase system (environment columns) one trajectory at a time.
class Assembler {
 public:
  Assembler(const SystemSpec& spec, const HypothesisSet& hyp);

  void add(const Trajectory& traj);
  void merge(const Assembler& other);

  LinearSystem motion_system() const;
  LinearSystem phase_system() const;
  std::uint64_t pair_evaluations() const { return pair_evals_; }
  std::uint64_t samples() const { return samples_; }

 private:
  const SystemSpec* spec_;
  const HypothesisSet* hyp_;
  std::vector<ColumnBlock> motion_blocks_, phase_blocks_;
  std::vector<int> motion_offset_, phase_offset_;  // per channel/pair, -1 if absent
  int motion_size_ = 0, phase_size_ = 0;
  Eigen::MatrixXd a_motion_, a_phase_;
  Eigen::VectorXd b_motion_, b_phase_;
  double e_motion_ = 0.0, e_phase_ = 0.0;
  std::uint64_t samples_ = 0;
  std::uint64_t pair_evals_ = 0;
};

/// Sums several systems weighted by their sample counts.
LinearSystem merge_systems(const std::vector<LinearSystem>& systems);

// ---------------------------------------------------------------- solve

struct Solution {
  Eigen::VectorXd coeffs;
  int rank = 0;
  double largest_singular_value = 0.0;
};

/// Minimum-norm least-squares solution through a truncated spectral
/// pseudo-inverse; singular values below tol * sigma_max are discarded.
Solution solve(const LinearSystem& sys, double tol = 1e-12);

/// Number of matrix decompositions performed by solve() in this process.
std::uint64_t decomposition_count();

// ---------------------------------------------------------------- estimates

struct Provenance {
  int trajectories = 0;
  int times = 0;
  std::uint64_t seed = 0;
  double tolerance = 1e-12;
  std::string merge_path = "direct";
};

struct KernelEstimate {
  HypothesisSet hypothesis;
  std::array<std::vector<Eigen::VectorXd>, 3> coeffs;
  Provenance provenance;

  KernelEstimate() = default;
  explicit KernelEstimate(HypothesisSet h);

  bool has(Channel c, int k, int kp) const;
  /// Sum of coefficients times basis functions; 0 outside the learning domain
  /// and for pairs without a basis.
  double eval(Channel c, int k, int kp, double r, double s = 0.0) const;
  const Eigen::VectorXd& coefficients(Channel c, int k, int kp) const;
  Eigen::VectorXd& coefficients(Channel c, int k, int kp);
};

double evaluate_kernel(const KernelEstimate& est, int k, int kp, Channel c, double r, double s = 0.0);

KernelEstimate make_estimate(const HypothesisSet& hyp, const LinearSystem& motion, const Solution& motion_sol,
                             const LinearSystem& phase, const Solution& phase_sol);

/// Solves both systems (one decomposition each, when non-empty).
KernelEstimate solve_estimate(const HypothesisSet& hyp, const LinearSystem& motion, const LinearSystem& phase,
                              double tol = 1e-12);

/// Merge path one: combine the systems of several batches, then solve.
KernelEstimate merge_estimates(const HypothesisSet& hyp, const std::vector<LinearSystem>& motion,
                               const std::vector<LinearSystem>& phase, double tol = 1e-12);
/// Merge path two: average the coefficient vectors of estimates on one hypothesis set.
KernelEstimate merge_estimates(const std::vector<KernelEstimate>& estimates);

/// How a learned kernel is evaluated outside its learning domain.
enum class Extension { zero, hold_boundary };
const char* to_string(Extension e);
Extension extension_from_string(const std::string& s);

/// Copy of `reference` (order, forces, features, masses) whose kernels are
/// replaced by the estimate. With hold_boundary, (r, s) is clamped into the
/// learning domain before evaluation.
SystemSpec learned_system(const SystemSpec& reference, std::shared_ptr<const KernelEstimate> est,
                          Extension outside = Extension::zero);

}  // namespace colearn
