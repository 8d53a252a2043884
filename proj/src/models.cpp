#include "colearn/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "colearn/rng.hpp"

namespace colearn {

double PresetParams::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw std::invalid_argument(model + ": unknown parameter '" + key + "'");
  return it->second;
}

void PresetParams::set(const std::string& key, double value) {
  auto it = values.find(key);
  if (it == values.end()) throw std::invalid_argument(model + ": unknown parameter '" + key + "'");
  it->second = value;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"od", "cs", "fm2d", "fm3d", "sod", "gss"};
  return names;
}

PresetParams default_params(const std::string& model) {
  PresetParams p;
  p.model = model;
  auto& v = p.values;
  if (model == "od") {
    v = {{"x_lo", 0.0}, {"x_hi", 5.0}};
  } else if (model == "cs") {
    v = {{"H", 1.0}, {"beta", 0.25}, {"x_lo", -5.0}, {"x_hi", 5.0}, {"v_lo", -5.0}, {"v_hi", 5.0}};
  } else if (model == "fm2d") {
    v = {{"C_a", 2.0}, {"l_a", 2.0}, {"C_r", 1.0},  {"l_r", 0.5}, {"alpha", 1.6},
         {"beta", 0.5}, {"x_lo", 0.0}, {"x_hi", 1.0}, {"v_lo", 0.0}, {"v_hi", 0.0}};
  } else if (model == "fm3d") {
    v = {{"C_a", 0.25},        {"l_a", 0.5},    {"C_r", 2.0},    {"l_r", 1.0},
         {"alpha", 1e-4},      {"beta", 1e-4 / 3.0}, {"G_fluid", 1e-4}, {"lambda", 1.0},
         {"gamma", 1e-4},      {"x_lo", 0.0},   {"x_hi", 2.8 * std::cbrt(3.0)},
         {"v_lo", 0.0},        {"v_hi", 0.0}};
  } else if (model == "sod") {
    v = {{"A", 1.0},     {"B", 1.0},    {"J", 0.1},     {"K", 1.0},
         {"v", 0.0},     {"omega", 0.0}, {"x_lo", -1.0}, {"x_hi", 1.0},
         {"xi_lo", -std::numbers::pi}, {"xi_hi", std::numbers::pi}};
  } else if (model == "gss") {
    v = {{"G", 8.64 * 8.64 * 6.67408e-6},
         {"m1", 1.989e6}, {"m2", 0.33}, {"m3", 4.87}, {"m4", 5.97}, {"m5", 0.642},
         {"perihelion2", 46.0}, {"perihelion3", 107.5}, {"perihelion4", 147.1}, {"perihelion5", 206.6},
         {"aphelion2", 69.9}, {"aphelion3", 108.9}, {"aphelion4", 152.1}, {"aphelion5", 249.2}};
  } else {
    throw std::invalid_argument("unknown preset: " + model);
  }
  return p;
}

void validate_params(const PresetParams& p) {
  auto positive = [&](const char* key) {
    if (!(p.get(key) > 0.0)) throw std::invalid_argument(p.model + ": parameter " + key + " must be positive");
  };
  auto ordered = [&](const char* lo, const char* hi) {
    if (p.get(lo) > p.get(hi)) throw std::invalid_argument(p.model + ": box lower bound exceeds upper bound");
  };
  const std::string& m = p.model;
  if (m != "gss") ordered("x_lo", "x_hi");
  if (m == "cs") {
    positive("H");
    if (p.get("beta") < 0.0) throw std::invalid_argument("cs: beta must be nonnegative");
    ordered("v_lo", "v_hi");
  } else if (m == "fm2d" || m == "fm3d") {
    for (const char* k : {"C_a", "C_r", "l_a", "l_r", "alpha", "beta"}) positive(k);
    ordered("v_lo", "v_hi");
    if (m == "fm3d") {
      const double lam = p.get("lambda");
      if (lam < 0.0 || lam > 1.0) throw std::invalid_argument("fm3d: perception coefficient must lie in [0, 1]");
      positive("gamma");
      if (p.get("G_fluid") < 0.0) throw std::invalid_argument("fm3d: fluid strength must be nonnegative");
    }
  } else if (m == "sod") {
    positive("A");
    positive("B");
    ordered("xi_lo", "xi_hi");
  } else if (m == "gss") {
    positive("G");
    for (int k = 1; k <= 5; ++k) positive(("m" + std::to_string(k)).c_str());
    for (int k = 2; k <= 5; ++k) {
      const std::string a = "perihelion" + std::to_string(k), b = "aphelion" + std::to_string(k);
      positive(a.c_str());
      ordered(a.c_str(), b.c_str());
    }
  }
}

double od_kernel(double r) {
  if (r < 1.0 / std::numbers::sqrt2) return 1.0;
  if (r < 1.0) return 0.1;
  return 0.0;
}

namespace {

SystemSpec base_spec(const std::string& name, Order order, int n, int d) {
  SystemSpec s;
  s.name = name;
  s.order = order;
  s.num_agents = n;
  s.dim = d;
  s.num_types = 1;
  s.type_of.assign(static_cast<std::size_t>(n), 0);
  if (order == Order::second) s.masses.assign(static_cast<std::size_t>(n), 1.0);
  return s;
}

KernelChannel single_kernel(Kernel k) {
  KernelChannel ch;
  ch.active = true;
  ch.kernels = {std::move(k)};
  return ch;
}

// Morse-type gradient kernel scaled by N so the 1/N in the sum cancels.
Kernel morse_kernel(double n, double ca, double la, double cr, double lr) {
  return [=](double r, double) {
    return n * (ca / la * std::exp(-r / la) - cr / lr * std::exp(-r / lr)) / r;
  };
}

SystemSpec make_od(const PresetParams&, int n) {
  SystemSpec s = base_spec("od", Order::first, n, 2);
  s.energy = single_kernel([](double r, double) { return od_kernel(r); });
  return s;
}

SystemSpec make_cs(const PresetParams& p, int n) {
  SystemSpec s = base_spec("cs", Order::second, n, 2);
  const double h = p.get("H"), b = p.get("beta");
  s.alignment = single_kernel([h, b](double r, double) { return h / std::pow(1.0 + r * r, b); });
  return s;
}

SystemSpec make_fm2d(const PresetParams& p, int n) {
  SystemSpec s = base_spec("fm2d", Order::second, n, 2);
  s.energy = single_kernel(morse_kernel(n, p.get("C_a"), p.get("l_a"), p.get("C_r"), p.get("l_r")));
  const double alpha = p.get("alpha"), beta = p.get("beta");
  s.force_motion = [alpha, beta](const SystemState& st, std::span<double> out) {
    const int d = st.dim;
    for (int i = 0; i < st.num_agents; ++i) {
      const auto v = st.vel(i);
      double sp2 = 0.0;
      for (double c : v) sp2 += c * c;
      const double f = alpha - beta * sp2;
      for (int c = 0; c < d; ++c) out[static_cast<std::size_t>(i * d + c)] = f * v[static_cast<std::size_t>(c)];
    }
  };
  return s;
}

SystemSpec make_fm3d(const PresetParams& p, int n) {
  SystemSpec s = base_spec("fm3d", Order::second, n, 3);
  s.energy = single_kernel(morse_kernel(n, p.get("C_a"), p.get("l_a"), p.get("C_r"), p.get("l_r")));
  const double alpha = p.get("alpha"), beta = p.get("beta"), g = p.get("G_fluid"), lam = p.get("lambda"),
               gamma = p.get("gamma");
  s.force_motion = [=](const SystemState& st, std::span<double> out) {
    const int nn = st.num_agents;
    const int d = st.dim;
    std::vector<double> speed(static_cast<std::size_t>(nn));
    for (int i = 0; i < nn; ++i) {
      double s2 = 0.0;
      for (double c : st.vel(i)) s2 += c * c;
      speed[static_cast<std::size_t>(i)] = std::sqrt(s2);
    }
    double u[3];
    for (int i = 0; i < nn; ++i) {
      u[0] = u[1] = u[2] = 0.0;
      const double vi = speed[static_cast<std::size_t>(i)];
      if (g != 0.0 && vi >= 1e-12) {
        const auto xi = st.pos(i);
        const auto vel = st.vel(i);
        for (int j = 0; j < nn; ++j) {
          if (j == i) continue;
          const double vj = speed[static_cast<std::size_t>(j)];
          if (vj < 1e-12) continue;
          const auto xj = st.pos(j);
          double rv[3], r2 = 0.0;
          for (int c = 0; c < d; ++c) {
            rv[c] = xj[static_cast<std::size_t>(c)] - xi[static_cast<std::size_t>(c)];
            r2 += rv[c] * rv[c];
          }
          if (r2 <= 0.0) continue;
          const double r = std::sqrt(r2);
          double cosang = 0.0;
          for (int c = 0; c < d; ++c) cosang += rv[c] / r * vel[static_cast<std::size_t>(c)] / vi;
          const double coef = g * vj / r2 * (3.0 * cosang * cosang - 1.0);
          for (int c = 0; c < d; ++c) u[c] += coef * rv[c] / r;
        }
      }
      const auto vel = st.vel(i);
      double rel2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double w = vel[static_cast<std::size_t>(c)] - lam * u[c];
        rel2 += w * w;
      }
      const double prop = alpha - beta * rel2;
      for (int c = 0; c < d; ++c) {
        const double vc = vel[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(i * d + c)] = -gamma * (vc - u[c]) + prop * (vc - lam * u[c]);
      }
    }
  };
  return s;
}

SystemSpec make_sod(const PresetParams& p, int n) {
  SystemSpec s = base_spec("sod", Order::first, n, 2);
  s.has_xi = true;
  const double a = p.get("A"), b = p.get("B"), jj = p.get("J"), kk = p.get("K"), v = p.get("v"),
               omega = p.get("omega");
  const FeatureMap phase_diff = [](const SystemState& st, int i, int j) {
    return st.xi[static_cast<std::size_t>(j)] - st.xi[static_cast<std::size_t>(i)];
  };
  s.energy = single_kernel([a, b, jj](double r, double sx) { return (a + jj * std::cos(sx)) / r - b / (r * r); });
  s.energy.two_variable = true;
  s.energy.feature = phase_diff;
  s.environment = single_kernel([kk](double r, double sxi) { return kk * std::sin(sxi) / r; });
  s.environment.two_variable = true;
  s.environment.feature = phase_diff;
  if (v != 0.0)
    s.force_motion = [v](const SystemState&, std::span<double> out) { std::fill(out.begin(), out.end(), v); };
  if (omega != 0.0)
    s.force_xi = [omega](const SystemState&, std::span<double> out) { std::fill(out.begin(), out.end(), omega); };
  return s;
}

SystemSpec make_gss(const PresetParams& p, int n) {
  if (n != 5) throw std::invalid_argument("gss: the system has exactly five bodies");
  SystemSpec s = base_spec("gss", Order::second, 5, 2);
  s.num_types = 5;
  for (int i = 0; i < 5; ++i) s.type_of[static_cast<std::size_t>(i)] = i;
  const double g = p.get("G");
  s.energy.active = true;
  s.energy.kernels.resize(25);
  for (int k = 0; k < 5; ++k) {
    for (int kp = 0; kp < 5; ++kp) {
      const double strength = k == kp ? 0.0 : g * p.get("m" + std::to_string(kp + 1));
      s.energy.kernels[static_cast<std::size_t>(k * 5 + kp)] = [strength](double r, double) {
        return strength == 0.0 ? 0.0 : strength / (r * r * r);
      };
    }
  }
  return s;
}

}  // namespace

SystemSpec build_system(const PresetParams& params, int num_agents) {
  validate_params(params);
  const std::string& m = params.model;
  SystemSpec s;
  if (m == "od") s = make_od(params, num_agents);
  else if (m == "cs") s = make_cs(params, num_agents);
  else if (m == "fm2d") s = make_fm2d(params, num_agents);
  else if (m == "fm3d") s = make_fm3d(params, num_agents);
  else if (m == "sod") s = make_sod(params, num_agents);
  else if (m == "gss") s = make_gss(params, num_agents);
  else throw std::invalid_argument("unknown preset: " + m);
  s.validate();
  return s;
}

SystemSpec build_od(int n) { return build_system(default_params("od"), n); }
SystemSpec build_cs(int n) { return build_system(default_params("cs"), n); }
SystemSpec build_fm2d(int n) { return build_system(default_params("fm2d"), n); }
SystemSpec build_fm3d(int n) { return build_system(default_params("fm3d"), n); }
SystemSpec build_sod(double j, double k, int n) {
  PresetParams p = default_params("sod");
  p.set("J", j);
  p.set("K", k);
  return build_system(p, n);
}
SystemSpec build_gss() { return build_system(default_params("gss"), 5); }

void InitialConditionSampler::validate() const {
  if (num_agents < 1 || dim < 1) throw std::invalid_argument("sampler needs positive agent count and dimension");
  if (x_lo > x_hi || v_lo > v_hi || xi_lo > xi_hi) throw std::invalid_argument("sampler box lower bound exceeds upper");
  if (kind == Kind::gss_elliptical) {
    if (perihelion.size() != aphelion.size() || static_cast<int>(perihelion.size()) != num_agents - 1)
      throw std::invalid_argument("orbital data must list every body except the central one");
    for (std::size_t k = 0; k < perihelion.size(); ++k)
      if (!(perihelion[k] > 0.0) || perihelion[k] > aphelion[k])
        throw std::invalid_argument("perihelion must be positive and not exceed aphelion");
    if (!(central_mu > 0.0)) throw std::invalid_argument("central gravitational parameter must be positive");
    if (dim != 2 || !with_velocity) throw std::invalid_argument("elliptical sampling is planar and second order");
  }
}

InitialConditionSampler default_sampler(const PresetParams& p, const SystemSpec& spec) {
  InitialConditionSampler s;
  s.num_agents = spec.num_agents;
  s.dim = spec.dim;
  s.with_velocity = spec.order == Order::second;
  s.with_xi = spec.has_xi;
  if (p.model == "gss") {
    s.kind = InitialConditionSampler::Kind::gss_elliptical;
    s.central_mu = p.get("G") * p.get("m1");
    for (int k = 2; k <= spec.num_agents; ++k) {
      s.perihelion.push_back(p.get("perihelion" + std::to_string(k)));
      s.aphelion.push_back(p.get("aphelion" + std::to_string(k)));
    }
  } else {
    s.x_lo = p.get("x_lo");
    s.x_hi = p.get("x_hi");
    if (s.with_velocity) {
      s.v_lo = p.get("v_lo");
      s.v_hi = p.get("v_hi");
    }
    if (s.with_xi) {
      s.xi_lo = p.get("xi_lo");
      s.xi_hi = p.get("xi_hi");
    }
  }
  s.validate();
  return s;
}

SystemState sample_initial_condition(const InitialConditionSampler& s, std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, 0, SeedPurpose::sampler, index));
  SystemState st(s.num_agents, s.dim, s.with_velocity, s.with_xi);
  if (s.kind == InitialConditionSampler::Kind::uniform_box) {
    for (double& c : st.x) c = rng.uniform(s.x_lo, s.x_hi);
    for (double& c : st.v) c = rng.uniform(s.v_lo, s.v_hi);
    for (double& c : st.xi) c = rng.uniform(s.xi_lo, s.xi_hi);
    return st;
  }
  // body 0 rests at the origin; others on prograde Keplerian ellipses with the focus at the origin
  for (int k = 1; k < s.num_agents; ++k) {
    const double peri = s.perihelion[static_cast<std::size_t>(k - 1)];
    const double aph = s.aphelion[static_cast<std::size_t>(k - 1)];
    const double a = 0.5 * (peri + aph);
    const double e = (aph - peri) / (aph + peri);
    const double semi_latus = a * (1.0 - e * e);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = semi_latus / (1.0 + e * std::cos(theta));
    const double vscale = std::sqrt(s.central_mu / semi_latus);
    st.x[static_cast<std::size_t>(2 * k)] = r * std::cos(theta);
    st.x[static_cast<std::size_t>(2 * k + 1)] = r * std::sin(theta);
    st.v[static_cast<std::size_t>(2 * k)] = -vscale * std::sin(theta);
    st.v[static_cast<std::size_t>(2 * k + 1)] = vscale * (e + std::cos(theta));
  }
  return st;
}

std::vector<SystemState> sample_initial_conditions(const InitialConditionSampler& sampler, int count,
                                                   std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  sampler.validate();
  std::vector<SystemState> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_initial_condition(sampler, seed, static_cast<std::uint64_t>(i)));
  return out;
}

double gss_planet_energy(const PresetParams& p, const SystemState& st, int planet) {
  const double g = p.get("G");
  const double m_sun = p.get("m1");
  const double m = p.get("m" + std::to_string(planet + 1));
  double r2 = 0.0, s2 = 0.0;
  for (int c = 0; c < st.dim; ++c) {
    const double dx = st.x[static_cast<std::size_t>(planet * st.dim + c)] - st.x[static_cast<std::size_t>(c)];
    r2 += dx * dx;
    const double vc = st.v[static_cast<std::size_t>(planet * st.dim + c)];
    s2 += vc * vc;
  }
  return -g * m_sun * m / std::sqrt(r2) + 0.5 * m * s2;
}

}  // namespace colearn
