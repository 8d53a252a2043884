#include <doctest.h>

#include <cmath>
#include <random>

#include "colearn/dynamics.hpp"
#include "colearn/integrator.hpp"
#include "colearn/measures.hpp"
#include "colearn/models.hpp"
#include "support.hpp"

using namespace colearn;
using testing_support::constant_trajectory;
using testing_support::line_system;

TEST_CASE("constant distance puts all mass in one bin") {
  auto spec = line_system(2, 1, [](double, double) { return 0.0; });
  auto st = spec.make_state();
  st.x = {0.0, 1.234};
  const auto rho = estimate_rho(spec, {constant_trajectory(st, 7)}, Channel::energy);
  const auto& m = rho.at(0, 0);
  const int bin = m.locate(1.234);
  REQUIRE(bin >= 0);
  CHECK(m.mass[static_cast<std::size_t>(bin)] == doctest::Approx(1.0));
  CHECK(m.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("measures are normalized and empty classes stay empty") {
  auto spec = build_gss();
  const auto ics = sample_initial_conditions(default_sampler(default_params("gss"), spec), 2, 4);
  std::vector<Trajectory> runs;
  for (const auto& ic : ics) runs.push_back(integrate(spec, ic, uniform_grid(0.0, 50.0, 20)));
  const auto rho = estimate_rho(spec, runs, Channel::energy);
  for (int k = 0; k < 5; ++k)
    for (int kp = 0; kp < 5; ++kp) {
      if (k == kp) CHECK(rho.at(k, kp).is_zero());
      else CHECK(rho.at(k, kp).total_mass() == doctest::Approx(1.0));
    }
}

TEST_CASE("opinion measure concentrates at short range late in time") {
  auto spec = build_od();
  const auto ics = sample_initial_conditions(default_sampler(default_params("od"), spec), 10, 8);
  std::vector<Trajectory> late;
  for (const auto& ic : ics) {
    auto t = integrate(spec, ic, uniform_grid(0.0, 10.0, 50));
    Trajectory tail;
    tail.times.assign(t.times.end() - 10, t.times.end());
    tail.states.assign(t.states.end() - 10, t.states.end());
    late.push_back(tail);
  }
  const auto measures = estimate_rho(spec, late, Channel::energy);
  const auto& m = measures.at(0, 0);
  double below = 0.0;
  for (int a = 0; a < m.bins_r(); ++a)
    if (m.edges_r[static_cast<std::size_t>(a) + 1] <= 1.0) below += m.mass[static_cast<std::size_t>(a)];
  CHECK(below > 0.0);
  // mass beyond the interaction range belongs to separate clusters, not to contracting pairs
  CHECK(m.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("kernel error norms") {
  EmpiricalMeasure m;
  m.dims = 1;
  m.edges_r = {1.0, 2.0};
  m.mass = {1.0};
  m.mean_r2 = {1.5 * 1.5};
  m.mean_rdot2 = {0.0};
  m.mean_xi2 = {0.0};
  const Kernel phi = [](double, double) { return 2.0; };
  CHECK(kernel_l2_error(phi, phi, m, Weighting::distance_sq) == 0.0);
  const Kernel off = [](double, double) { return 1.5; };
  CHECK(kernel_l2_error(phi, off, m, Weighting::distance_sq) == doctest::Approx(0.25));
  CHECK(kernel_l2_norm(off, m, Weighting::distance_sq) == doctest::Approx(1.5 * 1.5));
  CHECK(kernel_l2_norm(off, m, Weighting::none) == doctest::Approx(1.5));
  const Kernel zero = [](double, double) { return 0.0; };
  CHECK_THROWS_AS(kernel_l2_error(zero, phi, m, Weighting::none), ZeroNormError);
  CHECK_THROWS_AS(kernel_l2_error(phi, phi, m, Weighting::speed_diff_sq), ZeroNormError);
}

TEST_CASE("natural weightings per channel") {
  CHECK(default_weighting(Order::first, Channel::energy) == Weighting::distance_sq);
  CHECK(default_weighting(Order::second, Channel::alignment) == Weighting::speed_diff_sq);
  CHECK(default_weighting(Order::first, Channel::environment) == Weighting::none);
  CHECK(default_weighting(Order::second, Channel::environment) == Weighting::phase_diff_sq);
}

TEST_CASE("trajectory errors") {
  auto spec = build_od(3);
  const auto ic = sample_initial_conditions(default_sampler(default_params("od"), spec), 1, 2).front();
  const auto t = integrate(spec, ic, uniform_grid(0.0, 2.0, 11));
  CHECK(trajectory_error(spec, t, t, StateField::position) == 0.0);
  auto twice = t;
  for (auto& s : twice.states)
    for (double& v : s.x) v *= 2.0;
  CHECK(trajectory_error(spec, t, twice, StateField::position) == doctest::Approx(1.0));
  CHECK(trajectory_error(spec, t, twice, StateField::position, TimeWindow{1.0, 2.0}) == doctest::Approx(1.0));
}

TEST_CASE("cluster detection") {
  auto spec = build_od(4);
  auto st = spec.make_state();
  SUBCASE("coincident") {
    std::fill(st.x.begin(), st.x.end(), 0.3);
    CHECK(detect_clusters(st, 0.01).count() == 1);
  }
  SUBCASE("two groups") {
    st.x = {0.0, 0.0, 0.0, 0.002, 1.0, 0.0, 1.0, 0.004};
    const auto c = detect_clusters(st, 0.01);
    REQUIRE(c.count() == 2);
    CHECK_FALSE(c.separation_violated);
    CHECK(c.centers[static_cast<std::size_t>(c.label[0])][1] == doctest::Approx(0.001));
    CHECK(c.centers[static_cast<std::size_t>(c.label[2])][0] == doctest::Approx(1.0));
  }
  SUBCASE("chain") {
    auto s1 = line_system(3, 1, [](double, double) { return 0.0; });
    auto c3 = s1.make_state();
    c3.x = {0.0, 0.009, 0.018};
    const auto c = detect_clusters(c3, 0.01);
    CHECK(c.count() == 1);
    CHECK(c.separation_violated);
  }
}

TEST_CASE("Hausdorff distance of singletons") {
  CHECK(hausdorff_distance({{0.0}}, {{0.03}}) == doctest::Approx(0.03));
  CHECK(hausdorff_distance({{0.0, 0.0}, {1.0, 0.0}}, {{0.0, 0.0}}) == doctest::Approx(1.0));
}

TEST_CASE("order parameters") {
  auto st = build_fm2d(3).make_state();
  // common velocity along the line the agents sit on
  st.x = {0.0, 0.0, 5.0, 1.0, -2.5, -0.5};
  st.v = {0.5, 0.1, 0.5, 0.1, 0.5, 0.1};
  CHECK(cs_flock_score(st) == 0.0);
  CHECK(fm2d_flock_score(st) == doctest::Approx(1.0));
  CHECK(fm2d_mill_score(st) == doctest::Approx(0.0).epsilon(1e-12));

  // off that line the per-agent cross products do not cancel
  st.x = {0.0, 0.0, 1.0, 0.0, 0.0, 2.0};
  CHECK(fm2d_flock_score(st) == doctest::Approx(1.0));
  CHECK(fm2d_mill_score(st) > 0.0);

  // a rotating ring mills and does not flock
  const int n = 8;
  auto ring = build_fm2d(n).make_state();
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    ring.x[static_cast<std::size_t>(2 * i)] = std::cos(a);
    ring.x[static_cast<std::size_t>(2 * i + 1)] = std::sin(a);
    ring.v[static_cast<std::size_t>(2 * i)] = -std::sin(a);
    ring.v[static_cast<std::size_t>(2 * i + 1)] = std::cos(a);
  }
  CHECK(fm2d_mill_score(ring) == doctest::Approx(1.0));
  CHECK(fm2d_flock_score(ring) == doctest::Approx(0.0).epsilon(1e-12));

  std::fill(st.v.begin(), st.v.end(), 0.0);
  CHECK(std::isnan(fm2d_flock_score(st)));
}

TEST_CASE("3D milling score of identical rotation axes") {
  auto spec = build_fm3d(3);
  auto st = spec.make_state();
  st.x = {0, 0, 0, 1, 0, 0, 0, 1, 0};
  st.v = {1, 0, 0, 2, 0, 0, 0.5, 0, 0};
  StateDerivative rhs = st;
  rhs.v = {0, 1, 0, 0, 3, 0, 0, 0.2, 0};
  CHECK(fm3d_mill_score(st, rhs, spec.masses) == doctest::Approx(1.0));
  const double a = default_params("fm3d").get("alpha"), b = default_params("fm3d").get("beta");
  auto flock = st;
  for (int i = 0; i < 3; ++i) flock.v[static_cast<std::size_t>(3 * i)] = 0.7;
  CHECK(fm3d_flock_score(flock, a, b) == doctest::Approx(1.0));
}

TEST_CASE("confusion matrices") {
  SUBCASE("all events agree") {
    const auto m = confusion({true, true, true}, {true, true, true});
    CHECK(m.p22 == 100.0);
    const auto s = confusion_stats(m);
    CHECK(*s.accuracy == 1.0);
    CHECK(*s.precision == 1.0);
    CHECK(*s.recall == 1.0);
    CHECK(*s.f_score == 1.0);
  }
  SUBCASE("half and half") {
    const auto s = confusion_stats(confusion({false, false, true, true}, {false, false, true, true}));
    CHECK(*s.accuracy == 1.0);
    CHECK(*s.precision == 1.0);
    CHECK(*s.recall == 1.0);
  }
  SUBCASE("one miss") {
    const auto m = confusion({true, true, true, true}, {false, true, true, true});
    CHECK(m.p21 == doctest::Approx(25.0));
    CHECK(m.p22 == doctest::Approx(75.0));
    const auto s = confusion_stats(m);
    CHECK(*s.precision == doctest::Approx(0.75));
    CHECK(*s.recall == doctest::Approx(1.0));
    CHECK(*s.f_score == doctest::Approx(6.0 / 7.0));
  }
  SUBCASE("no events anywhere") {
    const auto s = confusion_stats(confusion({false, false}, {false, false}));
    CHECK(*s.accuracy == 1.0);
    CHECK_FALSE(s.precision.has_value());
    CHECK_FALSE(s.recall.has_value());
    CHECK_FALSE(s.f_score.has_value());
  }
  CHECK_THROWS(confusion({true}, {true, false}));
}

TEST_CASE("pattern indicators of identical runs") {
  EmergentScore t;
  t.model = "od";
  t.clusters = 2;
  t.centers = {{0.0, 0.0}, {1.0, 1.0}};
  auto od = pattern_indicators("od", {t, t}, {t, t});
  CHECK(od.pi1.mean == 1.0);
  CHECK(od.pi2.mean == 0.0);
  EmergentScore c;
  c.model = "cs";
  c.i_flock = 0.3;
  c.v_cm = {1.0, -2.0};
  auto cs = pattern_indicators("cs", {c}, {c});
  CHECK(cs.pi1.mean == 0.0);
  CHECK(cs.pi2.mean == 0.0);
}

TEST_CASE("summary statistics") {
  const auto m = mean_std({1.0, 2.0, 3.0});
  CHECK(m.mean == 2.0);
  CHECK(m.stddev == doctest::Approx(1.0));
  CHECK(relative_error(2.0, 3.0) == doctest::Approx(0.5));
  CHECK(relative_error(0.0, 0.25) == 0.25);
}
