#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace colearn {

enum class Order { first, second };

/// Interaction channels of the governing equations: energy-type kernels act on
/// position differences, alignment kernels on velocity differences, and the
/// environment channel drives the auxiliary scalar xi.
enum class Channel { energy, alignment, environment };

const char* to_string(Channel c);
Channel channel_from_string(const std::string& s);

/// Instantaneous configuration of all agents. Positions and velocities are
/// stored row-major (agent-major), one d-vector per agent.
struct SystemState {
  int num_agents = 0;
  int dim = 0;
  std::vector<double> x;
  std::vector<double> v;   // second-order systems only
  std::vector<double> xi;  // systems with an auxiliary scalar only

  SystemState() = default;
  SystemState(int n, int d, bool with_velocity, bool with_xi);

  std::span<const double> pos(int i) const { return {x.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> pos(int i) { return {x.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }
  std::span<const double> vel(int i) const { return {v.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }
  std::span<double> vel(int i) { return {v.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)}; }

  bool has_velocity() const { return !v.empty(); }
  bool has_xi() const { return !xi.empty(); }

  std::size_t flat_size() const { return x.size() + v.size() + xi.size(); }
  void pack(std::span<double> out) const;
  void unpack(std::span<const double> in);
};

/// Scalar kernel phi(r, s). One-variable kernels ignore s.
using Kernel = std::function<double(double r, double s)>;

/// Pairwise feature s_{i,i'} computed from the full state.
using FeatureMap = std::function<double(const SystemState&, int i, int j)>;

/// Non-collective force for every agent at once; writes N*d (or N) values.
/// Takes the full state because some forces (fluid coupling) are
/// state-dependent beyond the agent itself.
using AgentForce = std::function<void(const SystemState&, std::span<double> out)>;

struct KernelChannel {
  bool active = false;
  bool two_variable = false;  // kernel depends on (r, s)
  FeatureMap feature;         // required when two_variable
  std::vector<Kernel> kernels;  // num_types^2, row = receiving type, col = acting type

  const Kernel& at(int k, int kp, int num_types) const { return kernels[static_cast<std::size_t>(k * num_types + kp)]; }
};

/// Complete description of an interacting-agent system.
struct SystemSpec {
  std::string name;
  Order order = Order::first;
  int num_agents = 0;
  int dim = 0;
  bool has_xi = false;
  int num_types = 1;
  std::vector<int> type_of;     // 0-based type index per agent
  std::vector<double> masses;   // second-order only
  AgentForce force_motion;      // F^x (first-order) or F^v (second-order)
  AgentForce force_xi;
  KernelChannel energy;
  KernelChannel alignment;
  KernelChannel environment;

  const KernelChannel& channel(Channel c) const;
  KernelChannel& channel(Channel c);

  std::vector<int> type_counts() const;
  /// N_{k,k'}: number of ordered pairs (i in C_k, i' in C_k', i != i').
  std::int64_t pair_count(int k, int kp) const;
  void validate() const;
  SystemState make_state() const;
};

/// Time-derivative record, laid out like SystemState: x holds dx/dt,
/// v holds dv/dt, xi holds dxi/dt.
using StateDerivative = SystemState;

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::optional<std::vector<StateDerivative>> derivatives;

  std::size_t size() const { return times.size(); }
  void validate() const;
};

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KernelEvaluationError : public std::runtime_error {
 public:
  KernelEvaluationError(int i, int j, double r, Channel channel);
  int agent = 0;
  int other = 0;
  double distance = 0.0;
};

}  // namespace colearn
