#include <doctest.h>

#include <cmath>
#include <numbers>

#include "colearn/dynamics.hpp"
#include "colearn/models.hpp"

using namespace colearn;

namespace {
double phi(const SystemSpec& s, Channel c, double r, double sv = 0.0, int k = 0, int kp = 0) {
  return s.channel(c).at(k, kp, s.num_types)(r, sv);
}
}  // namespace

TEST_CASE("opinion kernel pieces") {
  const auto s = build_od();
  CHECK(phi(s, Channel::energy, 0.5) == 1.0);
  CHECK(phi(s, Channel::energy, 0.9) == 0.1);
  CHECK(phi(s, Channel::energy, 2.0) == 0.0);
  CHECK(phi(s, Channel::energy, 1.0 / std::sqrt(2.0) - 1e-9) == 1.0);
  CHECK(phi(s, Channel::energy, 1.0 / std::sqrt(2.0)) == 0.1);
  CHECK(phi(s, Channel::energy, 1.0) == 0.0);
  CHECK(s.order == Order::first);
  CHECK(s.dim == 2);
}

TEST_CASE("opinion dynamics vanish at coincident agents") {
  const auto s = build_od(2);
  auto st = s.make_state();
  st.x = {1.0, 2.0, 1.0, 2.0};
  const auto d = eval_rhs(s, st);
  for (double v : d.x) CHECK(v == 0.0);
}

TEST_CASE("flocking kernel values") {
  const auto s = build_cs();
  CHECK(phi(s, Channel::alignment, 0.0) == doctest::Approx(1.0));
  CHECK(phi(s, Channel::alignment, std::sqrt(3.0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  auto p = default_params("cs");
  CHECK(p.get("H") == 1.0);
  CHECK(p.get("beta") == 0.25);
  CHECK(s.alignment.active);
  CHECK_FALSE(s.energy.active);
}

TEST_CASE("2D milling model kernel and self-propulsion") {
  const int n = 20;
  const auto s = build_fm2d(n);
  CHECK(phi(s, Channel::energy, 1.0) / n == doctest::Approx(std::exp(-0.5) - 2.0 * std::exp(-2.0)));
  CHECK(phi(s, Channel::energy, 1e-6) < -1e6);
  // equilibrium speed sqrt(alpha / beta)
  auto st = s.make_state();
  std::fill(st.x.begin(), st.x.end(), 0.0);
  std::fill(st.v.begin(), st.v.end(), 0.0);
  const double speed = std::sqrt(1.6 / 0.5);
  st.v[0] = speed * 0.6;
  st.v[1] = speed * 0.8;
  StateDerivative nc;
  eval_noncollective(s, st, nc);
  CHECK(std::abs(nc.v[0]) < 1e-12);
  CHECK(std::abs(nc.v[1]) < 1e-12);
}

TEST_CASE("3D milling model") {
  const int n = 20;
  const auto s = build_fm3d(n);
  CHECK(phi(s, Channel::energy, 1.0) == doctest::Approx(n * (0.5 * std::exp(-2.0) - 2.0 * std::exp(-1.0))));

  SUBCASE("no fluid coupling gives Rayleigh-Helmholtz friction") {
    auto p = default_params("fm3d");
    p.set("G_fluid", 0.0);
    p.set("lambda", 0.0);
    const auto sys = build_system(p, 2);
    auto st = sys.make_state();
    st.x = {0, 0, 0, 5, 0, 0};
    st.v = {0.01, 0.02, -0.01, 0.0, 0.0, 0.0};
    StateDerivative nc;
    eval_noncollective(sys, st, nc);
    const double a = p.get("alpha"), b = p.get("beta"), g = p.get("gamma");
    const double v2 = 0.01 * 0.01 + 0.02 * 0.02 + 0.01 * 0.01;
    for (int c = 0; c < 3; ++c) CHECK(nc.v[static_cast<std::size_t>(c)] == doctest::Approx((a - b * v2 - g) * st.v[static_cast<std::size_t>(c)]));
  }

  SUBCASE("fluid term for a velocity perpendicular to the separation") {
    auto p = default_params("fm3d");
    p.set("lambda", 0.0);
    p.set("gamma", 1.0);
    const double gf = p.get("G_fluid");
    const auto sys = build_system(p, 2);
    auto st = sys.make_state();
    const double r = 2.0, vj = 3.0;
    st.x = {0, 0, 0, r, 0, 0};
    st.v = {0, 1.0, 0, vj, 0, 0};
    StateDerivative nc;
    eval_noncollective(sys, st, nc);
    // lambda = 0: out = -gamma (v - u) + (alpha - beta |v|^2) v, u = -G vj / r^2 * rhat
    const double u_x = -gf * vj / (r * r);
    CHECK(nc.v[0] == doctest::Approx(u_x));
    CHECK(nc.v[1] == doctest::Approx(-1.0 + p.get("alpha") - p.get("beta")));
  }
}

TEST_CASE("swarmalator kernels") {
  const auto s = build_sod(0.1, 1.0);
  for (double r : {0.1, 1.0, 3.0}) CHECK(phi(s, Channel::environment, r, 0.0) == doctest::Approx(0.0));
  CHECK(phi(s, Channel::energy, 1.0, 0.0) == doctest::Approx(0.1));
  CHECK(s.has_xi);
  CHECK(s.energy.two_variable);
  CHECK(s.environment.two_variable);
}

TEST_CASE("solar system constants") {
  const auto p = default_params("gss");
  CHECK(p.get("m1") == 1.989e6);
  CHECK(p.get("m2") == 0.33);
  CHECK(p.get("m3") == 4.87);
  CHECK(p.get("m4") == 5.97);
  CHECK(p.get("m5") == 0.642);
  CHECK(p.get("perihelion4") == 147.1);
  CHECK(p.get("aphelion4") == 152.1);
  const auto s = build_gss();
  for (int k = 0; k < 5; ++k) CHECK(phi(s, Channel::energy, 100.0, 0.0, k, k) == 0.0);
  CHECK(s.pair_count(0, 0) == 0);
  CHECK(s.pair_count(0, 3) == 1);
}

TEST_CASE("initial conditions are reproducible") {
  const auto s = build_od();
  const auto sampler = default_sampler(default_params("od"), s);
  const auto a = sample_initial_conditions(sampler, 3, 42);
  const auto b = sample_initial_conditions(sampler, 3, 42);
  REQUIRE(a.size() == 3);
  for (int m = 0; m < 3; ++m) CHECK(a[static_cast<std::size_t>(m)].x == b[static_cast<std::size_t>(m)].x);
  CHECK(a[0].x != a[1].x);
  for (double v : a[0].x) {
    CHECK(v >= 0.0);
    CHECK(v <= 5.0);
  }
}

TEST_CASE("degenerate box puts every agent at the origin") {
  auto p = default_params("od");
  p.set("x_lo", 0.0);
  p.set("x_hi", 0.0);
  const auto s = build_system(p, 4);
  const auto ic = sample_initial_conditions(default_sampler(p, s), 1, 1);
  for (double v : ic.front().x) CHECK(v == 0.0);
}

TEST_CASE("planets start on their ellipses with the vis-viva energy") {
  const auto p = default_params("gss");
  const auto s = build_gss();
  const auto ic = sample_initial_conditions(default_sampler(p, s), 4, 9);
  const double mu = p.get("G") * p.get("m1");
  for (const auto& st : ic)
    for (int k = 1; k < 5; ++k) {
      const double a = 0.5 * (p.get("perihelion" + std::to_string(k + 1)) + p.get("aphelion" + std::to_string(k + 1)));
      const double dx = st.x[static_cast<std::size_t>(2 * k)] - st.x[0], dy = st.x[static_cast<std::size_t>(2 * k + 1)] - st.x[1];
      const double vx = st.v[static_cast<std::size_t>(2 * k)] - st.v[0], vy = st.v[static_cast<std::size_t>(2 * k + 1)] - st.v[1];
      const double energy = 0.5 * (vx * vx + vy * vy) - mu / std::hypot(dx, dy);
      CHECK(energy == doctest::Approx(-mu / (2.0 * a)).epsilon(1e-10));
    }
}

TEST_CASE("parameter validation") {
  auto p = default_params("fm3d");
  p.set("lambda", 1.5);
  CHECK_THROWS(build_system(p, 20));
  auto q = default_params("cs");
  q.set("H", -1.0);
  CHECK_THROWS(build_system(q, 20));
  CHECK_THROWS(default_params("nope"));
}
