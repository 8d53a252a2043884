#include "colearn/dynamics.hpp"

#include <cmath>
#include <string>

namespace colearn {

namespace {

double distance(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) {
    const double t = b[c] - a[c];
    s += t * t;
  }
  return std::sqrt(s);
}

}  // namespace

void check_state(const SystemSpec& spec, const SystemState& state) {
  const bool second = spec.order == Order::second;
  if (state.num_agents != spec.num_agents || state.dim != spec.dim ||
      state.x.size() != static_cast<std::size_t>(spec.num_agents * spec.dim))
    throw StateError("state shape does not match system " + spec.name);
  if (second && state.v.size() != state.x.size()) throw StateError("second-order state is missing velocities");
  if (spec.has_xi && state.xi.size() != static_cast<std::size_t>(spec.num_agents))
    throw StateError("state is missing the auxiliary variable");
  const int d = spec.dim;
  for (int i = 0; i < spec.num_agents; ++i) {
    bool ok = true;
    for (int c = 0; c < d; ++c) {
      ok = ok && std::isfinite(state.x[static_cast<std::size_t>(i * d + c)]);
      if (second) ok = ok && std::isfinite(state.v[static_cast<std::size_t>(i * d + c)]);
    }
    if (spec.has_xi) ok = ok && std::isfinite(state.xi[static_cast<std::size_t>(i)]);
    if (!ok) throw StateError("non-finite state entry at agent " + std::to_string(i));
  }
}

std::vector<PairRecord> pairwise_features(const SystemSpec& spec, const SystemState& state) {
  check_state(spec, state);
  const int n = spec.num_agents;
  const int d = spec.dim;
  std::vector<PairRecord> out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      PairRecord p;
      p.i = i;
      p.j = j;
      p.r = distance(&state.x[static_cast<std::size_t>(i * d)], &state.x[static_cast<std::size_t>(j * d)], d);
      p.singular = p.r < kCollisionDistance;
      if (spec.energy.two_variable) p.s_energy = spec.energy.feature(state, i, j);
      if (spec.alignment.two_variable) p.s_alignment = spec.alignment.feature(state, i, j);
      if (spec.environment.two_variable) p.s_environment = spec.environment.feature(state, i, j);
      out.push_back(p);
    }
  }
  return out;
}

namespace {

void fill_noncollective(const SystemSpec& spec, const SystemState& state, StateDerivative& out, bool divide_by_mass) {
  const bool second = spec.order == Order::second;
  const int n = spec.num_agents;
  const int d = spec.dim;
  if (out.num_agents != n || out.dim != d || out.x.size() != state.x.size() || out.v.size() != state.v.size() ||
      out.xi.size() != state.xi.size()) {
    out = SystemState(n, d, second, spec.has_xi);
  }
  if (second) {
    out.x = state.v;
    if (spec.force_motion) {
      spec.force_motion(state, out.v);
      if (divide_by_mass)
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < d; ++c) out.v[static_cast<std::size_t>(i * d + c)] /= spec.masses[static_cast<std::size_t>(i)];
    } else {
      std::fill(out.v.begin(), out.v.end(), 0.0);
    }
  } else {
    if (spec.force_motion)
      spec.force_motion(state, out.x);
    else
      std::fill(out.x.begin(), out.x.end(), 0.0);
  }
  if (spec.has_xi) {
    if (spec.force_xi)
      spec.force_xi(state, out.xi);
    else
      std::fill(out.xi.begin(), out.xi.end(), 0.0);
  }
}

}  // namespace

void eval_noncollective(const SystemSpec& spec, const SystemState& state, StateDerivative& out) {
  fill_noncollective(spec, state, out, true);
}

void eval_rhs(const SystemSpec& spec, const SystemState& state, StateDerivative& out) {
  const bool second = spec.order == Order::second;
  const int n = spec.num_agents;
  const int d = spec.dim;
  const int kt = spec.num_types;
  fill_noncollective(spec, state, out, false);

  std::vector<double> inv_count(static_cast<std::size_t>(kt));
  {
    const auto counts = spec.type_counts();
    for (int k = 0; k < kt; ++k) inv_count[static_cast<std::size_t>(k)] = counts[static_cast<std::size_t>(k)] > 0 ? 1.0 / counts[static_cast<std::size_t>(k)] : 0.0;
  }

  const auto& en = spec.energy;
  const auto& al = spec.alignment;
  const auto& env = spec.environment;
  std::vector<double>& motion = second ? out.v : out.x;
  std::vector<double> diff(static_cast<std::size_t>(d));

  for (int i = 0; i < n; ++i) {
    const int ki = spec.type_of[static_cast<std::size_t>(i)];
    const double* xi_ = &state.x[static_cast<std::size_t>(i * d)];
    double* acc = &motion[static_cast<std::size_t>(i * d)];
    double acc_xi = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const int kj = spec.type_of[static_cast<std::size_t>(j)];
      const double w = inv_count[static_cast<std::size_t>(kj)];
      const double* xj = &state.x[static_cast<std::size_t>(j * d)];
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        diff[static_cast<std::size_t>(c)] = xj[c] - xi_[c];
        r2 += diff[static_cast<std::size_t>(c)] * diff[static_cast<std::size_t>(c)];
      }
      const double r = std::sqrt(r2);
      if (en.active) {
        const double s = en.two_variable ? en.feature(state, i, j) : 0.0;
        const double phi = en.at(ki, kj, kt)(r, s);
        if (!std::isfinite(phi)) throw KernelEvaluationError(i, j, r, Channel::energy);
        const double f = w * phi;
        for (int c = 0; c < d; ++c) acc[c] += f * diff[static_cast<std::size_t>(c)];
      }
      if (al.active) {
        const double s = al.two_variable ? al.feature(state, i, j) : 0.0;
        const double phi = al.at(ki, kj, kt)(r, s);
        if (!std::isfinite(phi)) throw KernelEvaluationError(i, j, r, Channel::alignment);
        const double f = w * phi;
        const double* vi = &state.v[static_cast<std::size_t>(i * d)];
        const double* vj = &state.v[static_cast<std::size_t>(j * d)];
        for (int c = 0; c < d; ++c) acc[c] += f * (vj[c] - vi[c]);
      }
      if (env.active) {
        const double s = env.two_variable ? env.feature(state, i, j) : 0.0;
        const double phi = env.at(ki, kj, kt)(r, s);
        if (!std::isfinite(phi)) throw KernelEvaluationError(i, j, r, Channel::environment);
        double term = w * phi;
        if (second) term *= state.xi[static_cast<std::size_t>(j)] - state.xi[static_cast<std::size_t>(i)];
        acc_xi += term;
      }
    }
    if (second) {
      const double m = spec.masses[static_cast<std::size_t>(i)];
      for (int c = 0; c < d; ++c) acc[c] /= m;
    }
    if (env.active) out.xi[static_cast<std::size_t>(i)] += acc_xi;
  }
}

StateDerivative eval_rhs(const SystemSpec& spec, const SystemState& state) {
  StateDerivative out;
  eval_rhs(spec, state, out);
  return out;
}

}  // namespace colearn
