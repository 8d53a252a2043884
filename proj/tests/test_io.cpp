#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "colearn/experiment.hpp"
#include "colearn/integrator.hpp"
#include "colearn/io.hpp"

using namespace colearn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("colearn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_od() {
  auto cfg = default_config("od");
  cfg.trials = 1;
  cfg.m_train = 2;
  cfg.m_rho = 3;
  cfg.m_test = 2;
  cfg.num_times = 10;
  cfg.t_final = 20.0;
  return cfg;
}

const char* kTables[] = {"kernel_errors.csv",     "kernel_errors_summary.csv", "trajectory_errors.csv",
                         "trajectory_errors_summary.csv", "confusion.csv", "pattern_scores.csv",
                         "emergent_scores.csv",   "plot_energy_1_1.csv"};

}  // namespace

TEST_CASE("configs round-trip through JSON") {
  auto cfg = default_config("sod");
  cfg.seed = 99;
  cfg.params.set("J", 0.2);
  cfg.desk_scale = 0.5;
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.params.get("J") == 0.2);
  CHECK(back.bases == cfg.bases);
}

TEST_CASE("config overlays defaults and rejects unknown keys") {
  const auto cfg = config_from_json(nlohmann::json{{"preset", "cs"}, {"train_runs", 7}});
  CHECK(cfg.m_train == 7);
  CHECK(cfg.t_end == default_config("cs").t_end);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"preset", "cs"}, {"bogus", 1}}), IoError);
  CHECK_THROWS(config_from_json(nlohmann::json{{"preset", "xyz"}}));
  CHECK_THROWS(config_from_json(nlohmann::json{{"preset", "cs"}, {"t_end", 100.0}}));  // T beyond T_f
}

TEST_CASE("desk scale multiplies runs and trials only") {
  auto cfg = default_config("od");
  cfg.desk_scale = 2.0;
  CHECK(cfg.effective_train() == 2 * cfg.m_train);
  CHECK(cfg.effective_rho() == 2 * cfg.m_rho);
  CHECK(cfg.effective_trials() == 2 * cfg.trials);
  CHECK(observation_grid(cfg).size() == static_cast<std::size_t>(cfg.num_times));
}

TEST_CASE("prediction grid extends the observation step") {
  auto cfg = default_config("od");
  const auto obs = observation_grid(cfg);
  const auto pred = prediction_grid(cfg);
  CHECK(pred.front() == 0.0);
  CHECK(pred.back() == doctest::Approx(cfg.t_final));
  CHECK(pred[1] - pred[0] == doctest::Approx(obs[1] - obs[0]));
}

TEST_CASE("trajectory files round-trip bitwise") {
  const auto dir = scratch("traj");
  const auto spec = build_sod(0.1, 1.0, 4);
  const auto ic = sample_initial_conditions(default_sampler(default_params("sod"), spec), 1, 5).front();
  auto t = integrate(spec, ic, uniform_grid(0.0, 1.0, 6));
  attach_exact_derivatives(spec, t);
  write_trajectory(dir / "a.cltr", t);
  const auto back = read_trajectory(dir / "a.cltr");
  CHECK(back.times == t.times);
  for (std::size_t l = 0; l < t.size(); ++l) {
    CHECK(back.states[l].x == t.states[l].x);
    CHECK(back.states[l].xi == t.states[l].xi);
    CHECK((*back.derivatives)[l].xi == (*t.derivatives)[l].xi);
  }
  write_trajectory_csv(dir / "a.csv", t);
  const auto csv = slurp(dir / "a.csv");
  CHECK(csv.rfind("t,agent,x0,x1,xi\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6 * 4);

  std::ofstream(dir / "junk.cltr") << "nope";
  CHECK_THROWS_AS(read_trajectory(dir / "junk.cltr"), IoError);
}

TEST_CASE("estimates round-trip") {
  HypothesisSet hyp(2);
  hyp.set(Channel::energy, 0, 1, Basis(BasisSpec{BasisKind::pw_linear, 4, 0, LearningDomain{Interval{0.5, 2.0}, std::nullopt}}));
  hyp.set(Channel::environment, 1, 1,
          Basis(BasisSpec{BasisKind::tensor_pw_linear, 3, 3, LearningDomain{Interval{0.0, 1.0}, Interval{-1.0, 1.0}}}));
  KernelEstimate est(hyp);
  est.coefficients(Channel::energy, 0, 1) << 0.1, 1.0 / 3.0, -2.0, 1e-300;
  est.coefficients(Channel::environment, 1, 1).setLinSpaced(9, -1.0, 7.0);
  est.provenance.seed = 12345678901234567ull;
  const auto back = estimate_from_json(estimate_to_json(est));
  CHECK(back.coefficients(Channel::energy, 0, 1) == est.coefficients(Channel::energy, 0, 1));
  CHECK(back.coefficients(Channel::environment, 1, 1) == est.coefficients(Channel::environment, 1, 1));
  CHECK(back.hypothesis.get(Channel::environment, 1, 1)->spec() == hyp.get(Channel::environment, 1, 1)->spec());
  CHECK(back.provenance.seed == est.provenance.seed);
  CHECK_FALSE(back.has(Channel::energy, 1, 0));
}

TEST_CASE("undefined values render as undef") {
  CHECK(format_value(std::nullopt) == "undef");
  CHECK(format_value(0.5) == "0.5");
  CHECK(format_value(std::numeric_limits<double>::quiet_NaN()) == "undef");
}

TEST_CASE("tiny pipeline emits every report and is deterministic") {
  const auto cfg = tiny_od();
  const auto a = run_experiment(cfg);
  const auto da = scratch("run_a"), db = scratch("run_b"), dc = scratch("run_c");
  emit_reports(a, da);
  for (const char* t : kTables) CHECK_MESSAGE(fs::exists(da / t), t);
  CHECK(fs::exists(da / "metadata.json"));
  CHECK(fs::exists(da / "estimate_trial0.json"));

  emit_reports(run_experiment(cfg), db);
  for (const char* t : kTables) CHECK_MESSAGE(slurp(da / t) == slurp(db / t), t);

  SUBCASE("parallel and serial runs agree") {
    auto par = cfg;
    par.workers = 3;
    auto ser = cfg;
    ser.workers = 1;
    const auto dp = scratch("run_par"), ds = scratch("run_ser");
    emit_reports(run_experiment(par), dp);
    emit_reports(run_experiment(ser), ds);
    for (const char* t : kTables) CHECK_MESSAGE(slurp(dp / t) == slurp(ds / t), t);
  }

  SUBCASE("plot data cover the learning domain") {
    const auto& dom = a.trials[0].estimate->hypothesis.get(Channel::energy, 0, 0)->spec().domain.r;
    std::ifstream in(da / "plot_energy_1_1.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "r,phi,phi_hat_mean,phi_hat_min,phi_hat_max,rho_mass");
    std::vector<double> r;
    while (std::getline(in, line)) r.push_back(std::stod(line.substr(0, line.find(','))));
    CHECK(r.size() >= 500);
    CHECK(r.front() == doctest::Approx(dom.lo));
    CHECK(r.back() == doctest::Approx(dom.hi));
  }

  SUBCASE("stored estimate can be evaluated again") {
    const auto est = std::make_shared<const KernelEstimate>(load_estimate(da / "estimate_trial0.json"));
    const auto t = run_trial(cfg, 0, est);
    REQUIRE(t.kernel_errors.size() == 1);
    CHECK(*t.kernel_errors[0].error == doctest::Approx(*a.trials[0].kernel_errors[0].error));
  }

  CHECK_THROWS_AS(emit_reports(a, "/proc/colearn_cannot_write_here"), IoError);
}

TEST_CASE("multi-type artifacts get a kernel error matrix") {
  RunArtifact art;
  art.config = default_config("gss");
  art.config.predict = false;
  TrialResult t;
  for (int k = 0; k < 5; ++k)
    for (int kp = 0; kp < 5; ++kp)
      if (k != kp) t.kernel_errors.push_back(KernelErrorRow{Channel::energy, k, kp, 0.01 * (k + 1) + 0.001 * kp, "r^2"});
  art.trials.push_back(t);
  const auto dir = scratch("gss_matrix");
  emit_reports(art, dir);
  std::ifstream in(dir / "kernel_error_matrix.csv");
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 5);
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 5);
}

TEST_CASE("empty confusion denominators are undef in the table") {
  RunArtifact art;
  art.config = tiny_od();
  TrialResult t;
  PredictionSet p;
  p.name = "train";
  EmergentScore s;
  s.event = false;
  p.truth = {s, s};
  p.predicted = {s, s};
  p.trajectory_errors = {{}, {}};
  t.predictions.push_back(p);
  art.trials.push_back(t);
  const auto dir = scratch("undef");
  emit_reports(art, dir);
  const auto text = slurp(dir / "confusion.csv");
  CHECK(text.find("undef") != std::string::npos);
}
