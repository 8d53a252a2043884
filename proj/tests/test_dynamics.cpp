#include <doctest.h>

#include <cmath>
#include <numbers>

#include "colearn/dynamics.hpp"
#include "colearn/integrator.hpp"
#include "colearn/models.hpp"
#include "support.hpp"

using namespace colearn;
using testing_support::line_system;

TEST_CASE("pair table distances are symmetric") {
  auto spec = line_system(2, 1, [](double, double) { return 1.0; });
  auto st = spec.make_state();
  st.x = {0.0, 3.0};
  const auto pairs = pairwise_features(spec, st);
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) CHECK(p.r == doctest::Approx(3.0));
}

TEST_CASE("phase-difference feature of the swarmalator model") {
  auto spec = build_sod(0.1, 1.0, 2);
  auto st = spec.make_state();
  st.x = {0.0, 0.0, 1.0, 0.0};
  st.xi = {0.2, 0.5};
  for (const auto& p : pairwise_features(spec, st)) {
    if (p.i == 0) CHECK(p.s_energy == doctest::Approx(0.3));
    if (p.i == 1) CHECK(p.s_energy == doctest::Approx(-0.3));
  }
}

TEST_CASE("coincident agents are flagged singular") {
  auto spec = line_system(2, 2, [](double, double) { return 1.0; });
  auto st = spec.make_state();
  st.x = {1.0, 1.0, 1.0, 1.0};
  for (const auto& p : pairwise_features(spec, st)) {
    CHECK(p.r == 0.0);
    CHECK(p.singular);
  }
}

TEST_CASE("first-order right-hand side by hand") {
  auto spec = line_system(2, 1, [](double r, double) { return r < 1.0 ? 1.0 : 0.0; });
  auto st = spec.make_state();
  st.x = {0.0, 0.5};
  const auto d = eval_rhs(spec, st);
  CHECK(d.x[0] == doctest::Approx(0.25));
  CHECK(d.x[1] == doctest::Approx(-0.25));
}

TEST_CASE("a single agent feels only its own force") {
  auto spec = build_fm2d(1);
  auto st = spec.make_state();
  st.x = {0.3, -0.2};
  st.v = {1.0, 0.5};
  StateDerivative full, nc;
  eval_rhs(spec, st, full);
  eval_noncollective(spec, st, nc);
  for (std::size_t c = 0; c < 2; ++c) CHECK(full.v[c] == doctest::Approx(nc.v[c]));
}

TEST_CASE("planet is pulled toward the central body with G m / r^2") {
  const auto params = default_params("gss");
  auto spec = build_gss();
  auto st = spec.make_state();
  std::fill(st.x.begin(), st.x.end(), 0.0);
  std::fill(st.v.begin(), st.v.end(), 0.0);
  const double r = 100.0;
  // park the other planets far away along different axes so their pull is negligible
  st.x[2] = r;
  for (int k = 2; k < 5; ++k) st.x[static_cast<std::size_t>(2 * k + 1)] = 1e9 * k;
  const auto d = eval_rhs(spec, st);
  const double expected = params.get("G") * params.get("m1") / (r * r);
  CHECK(d.v[2] == doctest::Approx(-expected).epsilon(1e-9));
  CHECK(std::abs(d.v[3]) < 1e-12 * expected);
}

TEST_CASE("non-finite states are rejected") {
  auto spec = line_system(2, 1, [](double, double) { return 1.0; });
  auto st = spec.make_state();
  st.x = {0.0, std::nan("")};
  CHECK_THROWS_AS(check_state(spec, st), StateError);
}

TEST_CASE("zero dynamics stay constant") {
  auto spec = line_system(3, 2, [](double, double) { return 0.0; });
  auto st = spec.make_state();
  st.x = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const auto traj = integrate(spec, st, uniform_grid(0.0, 5.0, 11));
  for (const auto& s : traj.states) CHECK(s.x == st.x);
}

TEST_CASE("Kepler circular orbit conserves energy over one period") {
  SystemSpec s;
  s.name = "kepler";
  s.order = Order::second;
  s.num_agents = 2;
  s.dim = 2;
  s.num_types = 2;
  s.type_of = {0, 1};
  // kernels already carry the acting mass, so the inertial masses stay 1
  s.masses = {1.0, 1.0};
  const double body_mass[2] = {1.0, 1e-3};
  const double g = 1.0;
  s.energy.active = true;
  // kernel phi_{k,k'} = G m_{k'} / r^3, self-type pairs absent
  s.energy.kernels = {[](double, double) { return 0.0; },
                      [=](double r, double) { return g * 1e-3 / (r * r * r); },
                      [=](double r, double) { return g * 1.0 / (r * r * r); },
                      [](double, double) { return 0.0; }};
  s.validate();
  auto st = s.make_state();
  const double mu = g * (1.0 + 1e-3);
  const double r = 1.0, speed = std::sqrt(mu / r);
  // relative orbit with the center of mass at rest
  const double f1 = 1e-3 / (1.0 + 1e-3), f2 = 1.0 / (1.0 + 1e-3);
  st.x = {-f1 * r, 0.0, f2 * r, 0.0};
  st.v = {0.0, -f1 * speed, 0.0, f2 * speed};
  auto energy = [&](const SystemState& y) {
    double ke = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < 2; ++c) ke += 0.5 * body_mass[i] * y.v[static_cast<std::size_t>(2 * i + c)] * y.v[static_cast<std::size_t>(2 * i + c)];
    const double dx = y.x[2] - y.x[0], dy = y.x[3] - y.x[1];
    return ke - g * 1.0 * 1e-3 / std::hypot(dx, dy);
  };
  const double period = 2.0 * std::numbers::pi * std::sqrt(r * r * r / mu);
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-13;
  const auto traj = integrate(s, st, uniform_grid(0.0, period, 101), cfg);
  const double e0 = energy(traj.states.front());
  double drift = 0.0;
  for (const auto& y : traj.states) drift = std::max(drift, std::abs(energy(y) - e0) / std::abs(e0));
  CHECK(drift <= 1e-6);
  // back at the start after one period
  CHECK(traj.states.back().x[2] == doctest::Approx(st.x[2]).epsilon(1e-6));
}

TEST_CASE("alignment dynamics keep the mean velocity") {
  auto spec = build_cs(20);
  const auto sampler = default_sampler(default_params("cs"), spec);
  const auto ic = sample_initial_conditions(sampler, 1, 17).front();
  const auto traj = integrate(spec, ic, uniform_grid(0.0, 5.0, 51));
  auto mean_v = [](const SystemState& s) {
    std::vector<double> m(2, 0.0);
    for (int i = 0; i < s.num_agents; ++i)
      for (int c = 0; c < 2; ++c) m[static_cast<std::size_t>(c)] += s.v[static_cast<std::size_t>(2 * i + c)] / s.num_agents;
    return m;
  };
  const auto m0 = mean_v(traj.states.front());
  const double norm0 = std::hypot(m0[0], m0[1]);
  for (const auto& s : traj.states) {
    const auto m = mean_v(s);
    CHECK(std::hypot(m[0] - m0[0], m[1] - m0[1]) <= 1e-8 * std::max(norm0, 1.0));
  }
}

TEST_CASE("integration failures carry the last good time") {
  // phi = 1/r^3 with attraction collapses two agents in finite time
  auto spec = line_system(2, 1, [](double r, double) { return 1.0 / (r * r * r); });
  auto st = spec.make_state();
  st.x = {0.0, 1.0};
  IntegratorConfig cfg;
  cfg.max_steps = 5000;
  try {
    integrate(spec, st, uniform_grid(0.0, 10.0, 11), cfg);
    FAIL("collapse should not integrate");
  } catch (const IntegrationError& e) {
    CHECK(e.last_good_time < 10.0);
  } catch (const KernelEvaluationError&) {
    // also acceptable: the singularity is reached exactly
  }
}

TEST_CASE("exact derivatives match the right-hand side") {
  auto spec = build_od(4);
  const auto ic = sample_initial_conditions(default_sampler(default_params("od"), spec), 1, 3).front();
  auto traj = integrate(spec, ic, uniform_grid(0.0, 1.0, 5));
  attach_exact_derivatives(spec, traj);
  REQUIRE(traj.derivatives);
  const auto d = eval_rhs(spec, traj.states[2]);
  CHECK((*traj.derivatives)[2].x == d.x);
}
