#include <doctest.h>

#include <cmath>
#include <random>

#include "colearn/estimator.hpp"
#include "colearn/experiment.hpp"
#include "colearn/integrator.hpp"
#include "colearn/models.hpp"
#include "support.hpp"

using namespace colearn;
using testing_support::constant_trajectory;
using testing_support::line_system;

TEST_CASE("quadratic series is differentiated exactly") {
  const double h = 0.1;
  std::vector<double> y(41);
  for (std::size_t l = 0; l < y.size(); ++l) y[l] = std::pow(h * l, 2);
  const auto d = differentiate_series(y, h);
  for (std::size_t l = 0; l < y.size(); ++l) CHECK(d[l] == doctest::Approx(2.0 * h * l).epsilon(1e-12).scale(1.0));
}

TEST_CASE("sine derivative within the Taylor bound") {
  const double h = 0.01;
  std::vector<double> y(629);
  for (std::size_t l = 0; l < y.size(); ++l) y[l] = std::sin(h * l);
  const auto d = differentiate_series(y, h);
  double worst = 0.0;
  for (std::size_t l = 1; l + 1 < y.size(); ++l) worst = std::max(worst, std::abs(d[l] - std::cos(h * l)));
  CHECK(worst <= 2e-5);
  CHECK(worst <= h * h / 6.0 + 1e-12);
}

TEST_CASE("constant trajectory has zero derivatives") {
  auto spec = build_cs(3);
  auto st = spec.make_state();
  std::fill(st.x.begin(), st.x.end(), 1.5);
  std::fill(st.v.begin(), st.v.end(), 0.0);
  auto traj = constant_trajectory(st, 6);
  approximate_derivatives(Order::second, traj);
  for (const auto& d : *traj.derivatives) {
    for (double v : d.x) CHECK(v == 0.0);
    for (double v : d.v) CHECK(v == 0.0);
  }
}

namespace {
// Two agents in 1D, one constant basis function on [0, 2].
struct HandExample {
  SystemSpec spec = line_system(2, 1, [](double, double) { return 1.0; });
  HypothesisSet hyp{1};
  Trajectory traj;
  HandExample(double v0 = 0.5) {
    hyp.set(Channel::energy, 0, 0, Basis(BasisSpec{BasisKind::pw_constant, 1, 0, LearningDomain{Interval{0.0, 2.0}, std::nullopt}}));
    auto st = spec.make_state();
    st.x = {0.0, 1.0};
    traj = constant_trajectory(st, 2);
    auto d = st;
    d.x = {v0, -v0};
    traj.derivatives = std::vector<StateDerivative>{d, d};
  }
};
}  // namespace

TEST_CASE("hand-assembled normal equation") {
  HandExample ex;
  Assembler asmb(ex.spec, ex.hyp);
  asmb.add(ex.traj);
  const auto sys = asmb.motion_system();
  REQUIRE(sys.size() == 1);
  const auto sol = solve(sys);
  CHECK(sol.coeffs(0) == doctest::Approx(1.0));
  CHECK(asmb.pair_evaluations() == 2u * 2u);
}

TEST_CASE("zero observed derivatives give a zero right-hand side") {
  HandExample ex(0.0);
  Assembler asmb(ex.spec, ex.hyp);
  asmb.add(ex.traj);
  CHECK(asmb.motion_system().b.isZero(0.0));
}

TEST_CASE("duplicating the data leaves the normalized system unchanged") {
  auto spec = build_od(5);
  const auto ics = sample_initial_conditions(default_sampler(default_params("od"), spec), 3, 11);
  std::vector<Trajectory> obs;
  for (const auto& ic : ics) {
    obs.push_back(integrate(spec, ic, uniform_grid(0.0, 2.0, 20)));
    attach_exact_derivatives(spec, obs.back());
  }
  DomainScanner scan(spec);
  for (const auto& t : obs) scan.add(t);
  ChannelChoices ch;
  ch[0] = BasisChoice{BasisKind::pw_constant, 12, 0, 0.0};
  const auto hyp = build_hypothesis(spec, scan, ch);
  Assembler once(spec, hyp), twice(spec, hyp), first(spec, hyp), second(spec, hyp);
  for (const auto& t : obs) {
    once.add(t);
    twice.add(t);
    twice.add(t);
  }
  const auto a = once.motion_system(), b = twice.motion_system();
  CHECK((a.A - b.A).cwiseAbs().maxCoeff() <= 1e-14 * a.A.cwiseAbs().maxCoeff());
  CHECK((a.b - b.b).cwiseAbs().maxCoeff() <= 1e-14 * a.b.cwiseAbs().maxCoeff());

  SUBCASE("two halves merged equal the whole") {
    first.add(obs[0]);
    second.add(obs[1]);
    second.add(obs[2]);
    const auto merged = merge_systems({first.motion_system(), second.motion_system()});
    CHECK((merged.A - a.A).cwiseAbs().maxCoeff() <= 1e-12 * a.A.cwiseAbs().maxCoeff());
    CHECK((merged.b - a.b).cwiseAbs().maxCoeff() <= 1e-12 * a.b.cwiseAbs().maxCoeff());
    first.merge(second);
    const auto direct = first.motion_system();
    CHECK((direct.A - a.A).cwiseAbs().maxCoeff() <= 1e-12 * a.A.cwiseAbs().maxCoeff());
  }

  SUBCASE("merging a system with itself") {
    const auto s1 = solve_estimate(hyp, a, once.phase_system());
    const auto s2 = merge_estimates(hyp, {a, a}, {once.phase_system(), once.phase_system()});
    CHECK((s1.coefficients(Channel::energy, 0, 0) - s2.coefficients(Channel::energy, 0, 0)).norm() <=
          1e-10 * s1.coefficients(Channel::energy, 0, 0).norm());
    const auto avg = merge_estimates(std::vector<KernelEstimate>{s1, s1});
    CHECK(avg.coefficients(Channel::energy, 0, 0) == s1.coefficients(Channel::energy, 0, 0));
    CHECK(avg.provenance.merge_path == "coefficient-average");
  }
}

TEST_CASE("pseudo-inverse by hand") {
  LinearSystem sys;
  SUBCASE("identity") {
    sys.A = Eigen::MatrixXd::Identity(3, 3);
    sys.b = Eigen::Vector3d(1.0, -2.0, 4.5);
    CHECK((solve(sys).coeffs - sys.b).norm() <= 1e-15);
  }
  SUBCASE("rank deficient") {
    sys.A = Eigen::Matrix2d{{1.0, 0.0}, {0.0, 0.0}};
    sys.b = Eigen::Vector2d(2.0, 3.0);
    const auto s = solve(sys);
    CHECK(s.coeffs(0) == doctest::Approx(2.0));
    CHECK(s.coeffs(1) == 0.0);
    CHECK(s.rank == 1);
  }
  SUBCASE("symmetric 2x2") {
    sys.A = Eigen::Matrix2d{{2.0, 1.0}, {1.0, 2.0}};
    sys.b = Eigen::Vector2d(3.0, 3.0);
    const auto s = solve(sys);
    CHECK(s.coeffs(0) == doctest::Approx(1.0));
    CHECK(s.coeffs(1) == doctest::Approx(1.0));
  }
  SUBCASE("empty system costs no decomposition") {
    sys.A.resize(0, 0);
    sys.b.resize(0);
    const auto before = decomposition_count();
    CHECK(solve(sys).coeffs.size() == 0);
    CHECK(decomposition_count() == before);
  }
}

TEST_CASE("kernel estimate evaluation") {
  HypothesisSet hyp(1);
  hyp.set(Channel::energy, 0, 0, Basis(BasisSpec{BasisKind::pw_linear, 5, 0, LearningDomain{Interval{1.0, 3.0}, std::nullopt}}));
  KernelEstimate est(hyp);
  for (double r : {1.0, 2.2, 3.0}) CHECK(est.eval(Channel::energy, 0, 0, r) == 0.0);
  est.coefficients(Channel::energy, 0, 0) << 1.0, 1.5, 2.0, 2.5, 3.0;
  for (double r = 1.0; r <= 3.0; r += 0.1) CHECK(std::abs(est.eval(Channel::energy, 0, 0, r) - r) <= 1e-12);
  CHECK(est.eval(Channel::energy, 0, 0, 3.5) == 0.0);
  CHECK(est.eval(Channel::alignment, 0, 0, 2.0) == 0.0);

  SUBCASE("hold-boundary extension") {
    auto spec = line_system(2, 1, [](double, double) { return 0.0; });
    auto ptr = std::make_shared<const KernelEstimate>(est);
    const auto zero = learned_system(spec, ptr, Extension::zero);
    const auto hold = learned_system(spec, ptr, Extension::hold_boundary);
    CHECK(zero.energy.at(0, 0, 1)(5.0, 0.0) == 0.0);
    CHECK(hold.energy.at(0, 0, 1)(5.0, 0.0) == doctest::Approx(3.0));
    CHECK(hold.energy.at(0, 0, 1)(0.2, 0.0) == doctest::Approx(1.0));
    CHECK(hold.energy.at(0, 0, 1)(2.0, 0.0) == doctest::Approx(2.0));
  }
}

TEST_CASE("in-span kernel is recovered from exact derivatives") {
  // constant-coefficient kernel lies in a one-piece space
  auto spec = line_system(4, 2, [](double, double) { return 0.7; });
  std::vector<Trajectory> obs;
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int m = 0; m < 3; ++m) {
    auto st = spec.make_state();
    for (double& v : st.x) v = u(g);
    obs.push_back(integrate(spec, st, uniform_grid(0.0, 1.0, 10)));
  }
  ChannelChoices ch;
  ch[0] = BasisChoice{BasisKind::pw_constant, 1, 0, 0.0};
  const auto lr = learn(spec, obs, ch, true);
  CHECK(lr.estimate->coefficients(Channel::energy, 0, 0)(0) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(lr.pair_evaluations == 3u * 10u * 4u * 3u);
}
