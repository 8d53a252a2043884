#include "colearn/system.hpp"

#include <cmath>
#include <sstream>

namespace colearn {

const char* to_string(Channel c) {
  switch (c) {
    case Channel::energy: return "energy";
    case Channel::alignment: return "alignment";
    case Channel::environment: return "environment";
  }
  return "?";
}

Channel channel_from_string(const std::string& s) {
  if (s == "energy" || s == "x") return Channel::energy;
  if (s == "alignment" || s == "v") return Channel::alignment;
  if (s == "environment" || s == "xi") return Channel::environment;
  throw std::invalid_argument("unknown channel: " + s);
}

SystemState::SystemState(int n, int d, bool with_velocity, bool with_xi)
    : num_agents(n), dim(d), x(static_cast<std::size_t>(n) * d, 0.0) {
  if (with_velocity) v.assign(static_cast<std::size_t>(n) * d, 0.0);
  if (with_xi) xi.assign(static_cast<std::size_t>(n), 0.0);
}

void SystemState::pack(std::span<double> out) const {
  if (out.size() != flat_size()) throw StateError("pack: size mismatch");
  auto it = std::copy(x.begin(), x.end(), out.begin());
  it = std::copy(v.begin(), v.end(), it);
  std::copy(xi.begin(), xi.end(), it);
}

void SystemState::unpack(std::span<const double> in) {
  if (in.size() != flat_size()) throw StateError("unpack: size mismatch");
  auto it = in.begin();
  std::copy(it, it + static_cast<std::ptrdiff_t>(x.size()), x.begin());
  it += static_cast<std::ptrdiff_t>(x.size());
  std::copy(it, it + static_cast<std::ptrdiff_t>(v.size()), v.begin());
  it += static_cast<std::ptrdiff_t>(v.size());
  std::copy(it, it + static_cast<std::ptrdiff_t>(xi.size()), xi.begin());
}

const KernelChannel& SystemSpec::channel(Channel c) const {
  switch (c) {
    case Channel::energy: return energy;
    case Channel::alignment: return alignment;
    default: return environment;
  }
}

KernelChannel& SystemSpec::channel(Channel c) {
  return const_cast<KernelChannel&>(static_cast<const SystemSpec&>(*this).channel(c));
}

std::vector<int> SystemSpec::type_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(num_types), 0);
  for (int k : type_of) counts[static_cast<std::size_t>(k)]++;
  return counts;
}

std::int64_t SystemSpec::pair_count(int k, int kp) const {
  const auto counts = type_counts();
  const std::int64_t a = counts[static_cast<std::size_t>(k)];
  const std::int64_t b = counts[static_cast<std::size_t>(kp)];
  return k == kp ? a * (a - 1) : a * b;
}

void SystemSpec::validate() const {
  auto fail = [&](const std::string& msg) { throw std::invalid_argument(name + ": " + msg); };
  if (num_agents < 1) fail("need at least one agent");
  if (dim < 1) fail("dimension must be positive");
  if (num_types < 1) fail("need at least one type");
  if (static_cast<int>(type_of.size()) != num_agents) fail("type map size differs from agent count");
  for (int k : type_of)
    if (k < 0 || k >= num_types) fail("type index out of range");
  if (order == Order::second) {
    if (static_cast<int>(masses.size()) != num_agents) fail("masses missing");
    for (double m : masses)
      if (!(m > 0.0)) fail("masses must be positive");
  }
  if (order == Order::first && alignment.active) fail("alignment kernels require a second-order system");
  if (environment.active && !has_xi) fail("environment kernels require the auxiliary variable");
  const std::size_t kk = static_cast<std::size_t>(num_types * num_types);
  for (Channel c : {Channel::energy, Channel::alignment, Channel::environment}) {
    const auto& ch = channel(c);
    if (!ch.active) continue;
    if (ch.kernels.size() != kk) fail(std::string("kernel table size wrong for ") + to_string(c));
    if (ch.two_variable && !ch.feature) fail(std::string("feature map missing for ") + to_string(c));
  }
}

SystemState SystemSpec::make_state() const {
  return SystemState(num_agents, dim, order == Order::second, has_xi);
}

void Trajectory::validate() const {
  if (times.size() < 2) throw StateError("trajectory needs at least two time samples");
  if (states.size() != times.size()) throw StateError("trajectory state count differs from time count");
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(h > 0.0)) throw StateError("trajectory times must increase");
  for (std::size_t l = 1; l < times.size(); ++l) {
    const double step = times[l] - times[l - 1];
    if (!(step > 0.0)) throw StateError("trajectory times must increase");
    if (std::abs(step - h) > 1e-12 * (times.back() - times.front()))
      throw StateError("trajectory times are not uniformly spaced");
  }
  if (derivatives && derivatives->size() != times.size())
    throw StateError("derivative record count differs from time count");
}

namespace {
std::string kernel_error_message(int i, int j, double r, Channel c) {
  std::ostringstream os;
  os << "non-finite " << to_string(c) << " kernel value for agents (" << i << ", " << j << ") at r = " << r;
  return os.str();
}
}  // namespace

KernelEvaluationError::KernelEvaluationError(int i, int j, double r, Channel channel)
    : std::runtime_error(kernel_error_message(i, j, r, channel)), agent(i), other(j), distance(r) {}

}  // namespace colearn
