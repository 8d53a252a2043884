#include "colearn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "colearn/dynamics.hpp"
#include "colearn/rng.hpp"

namespace colearn {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

BasisChoice choice(BasisKind kind, int nr, int ns = 0, double padding = 0.0) { return BasisChoice{kind, nr, ns, padding}; }

}  // namespace

// ---------------------------------------------------------------- config

int ExperimentConfig::scaled(int count) const {
  return std::max(1, static_cast<int>(std::lround(count * desk_scale)));
}

void ExperimentConfig::validate() const {
  validate_params(params);
  if (num_agents < 1) throw std::invalid_argument("agent count must be positive");
  if (m_train < 1 || m_rho < 1 || m_test < 0 || trials < 1) throw std::invalid_argument("run counts must be positive");
  if (num_times < 3) throw std::invalid_argument("at least three observation times are needed");
  if (!(t0 >= 0.0 && t0 < t_end && t_end <= t_final)) throw std::invalid_argument("times must satisfy 0 <= T0 < T <= T_f");
  if (!(desk_scale > 0.0)) throw std::invalid_argument("desk-scale factor must be positive");
  if (plot_points < 2) throw std::invalid_argument("plot resolution must be at least two points");
  integrator.validate();
  predict_integrator.validate();
  const SystemSpec spec = build_system(params, num_agents);
  for (Channel c : kAllChannels)
    if (spec.channel(c).active && !bases[static_cast<std::size_t>(channel_index(c))])
      throw std::invalid_argument(std::string("no basis configured for channel ") + to_string(c));
}

ExperimentConfig default_config(const std::string& preset) {
  ExperimentConfig c;
  c.params = default_params(preset);
  c.predict_integrator.rtol = 1e-6;
  c.predict_integrator.atol = 1e-9;
  const auto e = static_cast<std::size_t>(channel_index(Channel::energy));
  const auto a = static_cast<std::size_t>(channel_index(Channel::alignment));
  const auto x = static_cast<std::size_t>(channel_index(Channel::environment));
  if (preset == "od") {
    c.m_train = 50; c.m_rho = 200; c.m_test = 50; c.num_times = 100;
    c.t_end = 10.0; c.t_final = 50.0;
    c.bases[e] = choice(BasisKind::pw_constant, 99);
  } else if (preset == "cs") {
    c.m_train = 100; c.m_rho = 200; c.m_test = 100; c.num_times = 100;
    c.t_end = 5.0; c.t_final = 50.0;
    c.bases[a] = choice(BasisKind::pw_linear, 100);
  } else if (preset == "fm2d") {
    c.m_train = 100; c.m_rho = 200; c.m_test = 100; c.num_times = 100;
    c.t_end = 4.0; c.t_final = 20.0;
    c.bases[e] = choice(BasisKind::pw_constant, 122);
    // the learned kernel jumps at every piece boundary; a tight tolerance costs ~70x more steps
    c.predict_integrator.rtol = 1e-5;
    c.predict_integrator.atol = 1e-8;
  } else if (preset == "fm3d") {
    c.m_train = 100; c.m_rho = 200; c.m_test = 100; c.num_times = 100;
    c.t_end = 4.0; c.t_final = 20.0;
    c.bases[e] = choice(BasisKind::pw_linear, 74);
  } else if (preset == "sod") {
    c.m_train = 200; c.m_rho = 200; c.m_test = 50; c.num_times = 100;
    c.t_end = 4.0; c.t_final = 20.0;
    c.observed_derivatives = true;
    c.bases[e] = choice(BasisKind::tensor_pw_linear, 30, 30);
    c.bases[x] = choice(BasisKind::tensor_pw_linear, 30, 30);
  } else if (preset == "gss") {
    c.num_agents = 5;
    c.m_train = 100; c.m_rho = 200; c.m_test = 50; c.num_times = 500;
    c.t_end = 182.6; c.t_final = 913.0;
    c.observed_derivatives = true;
    c.bases[e] = choice(BasisKind::pw_linear, 100, 0, 0.02);
  } else {
    throw std::invalid_argument("unknown preset: " + preset);
  }
  return c;
}

// ---------------------------------------------------------------- workers

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int w = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  w = std::min(w, count);
  if (w == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- simulation

std::vector<double> observation_grid(const ExperimentConfig& cfg) {
  return uniform_grid(cfg.t0, cfg.t_end, static_cast<std::size_t>(cfg.num_times));
}

std::vector<double> prediction_grid(const ExperimentConfig& cfg) {
  const double h = (cfg.t_end - cfg.t0) / (cfg.num_times - 1);
  const auto steps = static_cast<std::size_t>(std::floor(cfg.t_final / h + 1e-9));
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) g[i] = h * static_cast<double>(i);
  return g;
}

int SimulationBatch::failures() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return !r.has_value(); }));
}

std::vector<Trajectory> SimulationBatch::successful() const {
  std::vector<Trajectory> out;
  for (const auto& r : runs)
    if (r) out.push_back(*r);
  return out;
}

SimulationBatch simulate_batch(const SystemSpec& spec, const std::vector<SystemState>& initial,
                               const std::vector<double>& grid, const IntegratorConfig& cfg, int workers) {
  SimulationBatch b;
  b.initial = initial;
  b.runs.resize(initial.size());
  b.errors.resize(initial.size());
  // integrate from t = 0 when the grid starts later, then drop the leading sample
  const bool prepend = grid.front() > 0.0;
  std::vector<double> full;
  if (prepend) full.push_back(0.0);
  full.insert(full.end(), grid.begin(), grid.end());
  parallel_for(static_cast<int>(initial.size()), workers, [&](int m) {
    try {
      Trajectory t = integrate(spec, initial[static_cast<std::size_t>(m)], full, cfg);
      if (prepend) {
        t.times.erase(t.times.begin());
        t.states.erase(t.states.begin());
      }
      b.runs[static_cast<std::size_t>(m)] = std::move(t);
    } catch (const std::exception& e) {
      b.errors[static_cast<std::size_t>(m)] = e.what();
    }
  });
  return b;
}

namespace {
std::vector<SystemState> draw(const ExperimentConfig& cfg, const SystemSpec& spec, int trial, SeedPurpose purpose,
                              int count) {
  const auto sampler = default_sampler(cfg.params, spec);
  return sample_initial_conditions(sampler, count, derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), purpose, 0));
}
}  // namespace

SimulationBatch simulate_training(const ExperimentConfig& cfg, const SystemSpec& spec, int trial) {
  return simulate_batch(spec, draw(cfg, spec, trial, SeedPurpose::training, cfg.effective_train()),
                        observation_grid(cfg), cfg.integrator, cfg.workers);
}

// ---------------------------------------------------------------- learning

LearnResult learn(const SystemSpec& spec, std::vector<Trajectory>& obs, const ChannelChoices& bases,
                  bool observed_derivatives, double tolerance, int workers) {
  if (obs.empty()) throw std::invalid_argument("no observations to learn from");
  for (auto& t : obs) {
    if (t.derivatives) continue;
    if (observed_derivatives)
      attach_exact_derivatives(spec, t);
    else
      approximate_derivatives(spec.order, t);
  }
  DomainScanner scanner(spec);
  for (const auto& t : obs) scanner.add(t);
  auto hyp = std::make_shared<HypothesisSet>(build_hypothesis(spec, scanner, bases));

  // fixed chunking keeps the summation order independent of the worker count
  const int chunks = std::min<int>(16, static_cast<int>(obs.size()));
  std::vector<std::optional<Assembler>> parts(static_cast<std::size_t>(chunks));
  parallel_for(chunks, workers, [&](int c) {
    Assembler a(spec, *hyp);
    const std::size_t lo = obs.size() * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunks);
    const std::size_t hi = obs.size() * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(chunks);
    for (std::size_t m = lo; m < hi; ++m) a.add(obs[m]);
    parts[static_cast<std::size_t>(c)] = std::move(a);
  });
  Assembler& total = *parts[0];
  for (int c = 1; c < chunks; ++c) total.merge(*parts[static_cast<std::size_t>(c)]);

  LearnResult out;
  out.motion = total.motion_system();
  out.phase = total.phase_system();
  out.pair_evaluations = total.pair_evaluations();
  out.samples = total.samples();
  auto est = std::make_shared<KernelEstimate>(solve_estimate(*hyp, out.motion, out.phase, tolerance));
  est->provenance.trajectories = static_cast<int>(obs.size());
  est->provenance.times = static_cast<int>(obs.front().size());
  out.estimate = std::move(est);
  return out;
}

// ---------------------------------------------------------------- evaluation

std::array<std::optional<ChannelMeasures>, 3> estimate_measures(const ExperimentConfig& cfg, const SystemSpec& spec,
                                                                 int trial, int* failures) {
  const auto batch = simulate_batch(spec, draw(cfg, spec, trial, SeedPurpose::rho_run, cfg.effective_rho()),
                                    observation_grid(cfg), cfg.integrator, cfg.workers);
  if (failures) *failures = batch.failures();
  const auto runs = batch.successful();
  if (runs.empty()) throw std::runtime_error("every measure-estimation run failed");
  std::array<std::optional<ChannelMeasures>, 3> rho;
  for (Channel c : kAllChannels)
    if (spec.channel(c).active) rho[static_cast<std::size_t>(channel_index(c))] = estimate_rho(spec, runs, c, cfg.rho_bins);
  return rho;
}

std::vector<KernelErrorRow> kernel_errors(const SystemSpec& truth, const KernelEstimate& est,
                                          const std::array<std::optional<ChannelMeasures>, 3>& rho) {
  std::vector<KernelErrorRow> rows;
  const int kt = truth.num_types;
  for (Channel c : kAllChannels) {
    const auto& ch = truth.channel(c);
    const auto& cm = rho[static_cast<std::size_t>(channel_index(c))];
    if (!ch.active || !cm) continue;
    const Weighting w = default_weighting(truth.order, c);
    for (int k = 0; k < kt; ++k)
      for (int kp = 0; kp < kt; ++kp) {
        if (truth.pair_count(k, kp) == 0) continue;
        KernelErrorRow row{c, k, kp, std::nullopt, to_string(w)};
        const Kernel& phi = ch.at(k, kp, kt);
        const Kernel hat = [&est, c, k, kp](double r, double s) { return est.eval(c, k, kp, r, s); };
        try {
          row.error = kernel_l2_error(phi, hat, cm->at(k, kp), w);
        } catch (const ZeroNormError&) {
        }
        rows.push_back(row);
      }
  }
  return rows;
}

namespace {

const char* field_name(StateField f) {
  switch (f) {
    case StateField::position: return "x";
    case StateField::velocity: return "v";
    case StateField::phase: return "xi";
  }
  return "?";
}

ScoreContext score_context(const ExperimentConfig& cfg, const SystemSpec& system) {
  ScoreContext ctx;
  ctx.model = cfg.preset();
  ctx.system = &system;
  ctx.params = cfg.params;
  ctx.rtol = cfg.predict_integrator.rtol;
  return ctx;
}

}  // namespace

PredictionSet predict_and_score(const ExperimentConfig& cfg, const SystemSpec& truth, const SystemSpec& learned,
                                const std::vector<SystemState>& initial, const std::string& name) {
  PredictionSet set;
  set.name = name;
  const auto grid = prediction_grid(cfg);
  const auto a = simulate_batch(truth, initial, grid, cfg.predict_integrator, cfg.workers);
  const auto b = simulate_batch(learned, initial, grid, cfg.predict_integrator, cfg.workers);
  std::vector<StateField> fields{StateField::position};
  if (truth.order == Order::second) fields.push_back(StateField::velocity);
  if (truth.has_xi) fields.push_back(StateField::phase);
  const ScoreContext ctx_true = score_context(cfg, truth);
  const ScoreContext ctx_pred = score_context(cfg, learned);
  for (std::size_t m = 0; m < initial.size(); ++m) {
    if (!a.runs[m] || !b.runs[m]) {
      ++set.failures;
      continue;
    }
    std::map<std::string, double> errs;
    for (StateField f : fields) {
      try {
        errs[std::string(field_name(f)) + ":0-T"] =
            trajectory_error(truth, *a.runs[m], *b.runs[m], f, TimeWindow{0.0, cfg.t_end});
        if (cfg.t_final > cfg.t_end)
          errs[std::string(field_name(f)) + ":T-Tf"] =
              trajectory_error(truth, *a.runs[m], *b.runs[m], f, TimeWindow{cfg.t_end, cfg.t_final});
      } catch (const ZeroNormError&) {
      }
    }
    set.trajectory_errors.push_back(std::move(errs));
    set.truth.push_back(score_emergent(ctx_true, *a.runs[m]));
    set.predicted.push_back(score_emergent(ctx_pred, *b.runs[m]));
  }
  return set;
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial, std::shared_ptr<const KernelEstimate> given,
                      const std::array<std::optional<ChannelMeasures>, 3>* shared_rho, const ProgressFn& progress) {
  auto note = [&](const std::string& s) {
    if (progress) progress("trial " + std::to_string(trial) + ": " + s);
  };
  TrialResult res;
  res.trial = trial;
  res.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), SeedPurpose::misc, 0);
  const SystemSpec spec = build_system(cfg.params, cfg.num_agents);

  auto t = Clock::now();
  if (shared_rho) {
    res.rho = *shared_rho;
  } else {
    note("estimating rho from " + std::to_string(cfg.effective_rho()) + " runs");
    res.rho = estimate_measures(cfg, spec, trial, &res.rho_failures);
  }
  res.seconds["rho"] = since(t);

  std::vector<SystemState> train_ic;
  if (given) {
    res.estimate = std::move(given);
    train_ic = draw(cfg, spec, trial, SeedPurpose::training, cfg.effective_train());
  } else {
    t = Clock::now();
    note("simulating " + std::to_string(cfg.effective_train()) + " training runs");
    auto batch = simulate_training(cfg, spec, trial);
    res.train_failures = batch.failures();
    for (std::size_t m = 0; m < batch.runs.size(); ++m)
      if (batch.runs[m]) train_ic.push_back(batch.initial[m]);
    auto obs = batch.successful();
    batch.runs.clear();
    res.seconds["simulate"] = since(t);
    t = Clock::now();
    note("learning");
    auto lr = learn(spec, obs, cfg.bases, cfg.observed_derivatives, cfg.solve_tolerance, cfg.workers);
    auto est = std::make_shared<KernelEstimate>(*lr.estimate);
    est->provenance.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial), SeedPurpose::training, 0);
    res.estimate = est;
    res.pair_evaluations = lr.pair_evaluations;
    res.seconds["learn"] = since(t);
  }
  res.kernel_errors = kernel_errors(spec, *res.estimate, res.rho);

  if (cfg.preset() == "gss") {
    const auto& rho_e = res.rho[static_cast<std::size_t>(channel_index(Channel::energy))];
    if (rho_e) {
      try {
        res.decomposition = decouple(*res.estimate, *rho_e, cfg.params.get("G"), MassGauge::profile_normalization, 0.0,
                                     cfg.decoupling_lambda);
        const auto& dec = *res.decomposition;
        const int kt = spec.num_types;
        for (int k = 0; k < kt; ++k)
          for (int kp = 0; kp < kt; ++kp) {
            if (spec.pair_count(k, kp) == 0) continue;
            KernelErrorRow row{Channel::energy, k, kp, std::nullopt, to_string(Weighting::distance_sq)};
            const Kernel hat = [&dec, k, kp](double r, double) { return decoupled_kernel(dec, k, kp, r); };
            try {
              row.error = kernel_l2_error(spec.energy.at(k, kp, kt), hat, rho_e->at(k, kp), Weighting::distance_sq);
            } catch (const ZeroNormError&) {
            }
            res.decoupled_errors.push_back(row);
          }
      } catch (const std::exception& e) {
        note(std::string("decoupling failed: ") + e.what());
      }
    }
  }

  if (cfg.predict) {
    const SystemSpec learned = learned_system(spec, res.estimate, cfg.extension);
    t = Clock::now();
    note("predicting from " + std::to_string(train_ic.size()) + " training initial conditions");
    res.predictions.push_back(predict_and_score(cfg, spec, learned, train_ic, "train"));
    if (cfg.effective_test() > 0 && cfg.m_test > 0) {
      note("predicting from " + std::to_string(cfg.effective_test()) + " fresh initial conditions");
      res.predictions.push_back(predict_and_score(
          cfg, spec, learned, draw(cfg, spec, trial, SeedPurpose::testing, cfg.effective_test()), "test"));
    }
    res.seconds["predict"] = since(t);
  }
  return res;
}

RunArtifact run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto start = Clock::now();
  RunArtifact art;
  art.config = cfg;
  std::optional<std::array<std::optional<ChannelMeasures>, 3>> shared;
  for (int trial = 0; trial < cfg.effective_trials(); ++trial) {
    if (cfg.share_rho && !shared) {
      const SystemSpec spec = build_system(cfg.params, cfg.num_agents);
      shared = estimate_measures(cfg, spec, 0);
    }
    art.trials.push_back(run_trial(cfg, trial, nullptr, shared ? &*shared : nullptr, progress));
  }
  art.seconds = since(start);
  return art;
}

// ---------------------------------------------------------------- summaries

MeanStd kernel_error_summary(const RunArtifact& art, Channel c, int k, int kp, bool decoupled) {
  std::vector<double> v;
  for (const auto& t : art.trials)
    for (const auto& row : decoupled ? t.decoupled_errors : t.kernel_errors)
      if (row.channel == c && row.k == k && row.kp == kp && row.error) v.push_back(*row.error);
  return mean_std(v);
}

MeanStd trajectory_error_summary(const RunArtifact& art, const std::string& set, const std::string& key) {
  std::vector<double> per_trial;
  for (const auto& t : art.trials)
    for (const auto& p : t.predictions) {
      if (p.name != set) continue;
      std::vector<double> v;
      for (const auto& e : p.trajectory_errors) {
        auto it = e.find(key);
        if (it != e.end()) v.push_back(it->second);
      }
      if (!v.empty()) per_trial.push_back(mean_std(v).mean);
    }
  return mean_std(per_trial);
}

namespace {
template <class F>
void for_each_set(const RunArtifact& art, const std::string& set, F&& f) {
  for (const auto& t : art.trials)
    for (const auto& p : t.predictions)
      if (p.name == set) f(p);
}
}  // namespace

ConfusionMatrix pooled_confusion(const RunArtifact& art, const std::string& set) {
  std::vector<bool> a, b;
  for_each_set(art, set, [&](const PredictionSet& p) {
    for (std::size_t m = 0; m < p.truth.size(); ++m) {
      a.push_back(p.truth[m].event);
      b.push_back(p.predicted[m].event);
    }
  });
  if (a.empty()) return ConfusionMatrix{};
  return confusion(a, b);
}

PatternScores pooled_patterns(const RunArtifact& art, const std::string& set) {
  std::vector<EmergentScore> a, b;
  for_each_set(art, set, [&](const PredictionSet& p) {
    a.insert(a.end(), p.truth.begin(), p.truth.end());
    b.insert(b.end(), p.predicted.begin(), p.predicted.end());
  });
  return pattern_indicators(art.config.preset(), a, b);
}

MassSummary mass_summary(const RunArtifact& art) {
  MassSummary s;
  const auto& p = art.config.params;
  for (int k = 1; k <= art.config.num_agents; ++k) s.truth.push_back(p.get("m" + std::to_string(k)));
  const std::size_t n = s.truth.size();
  std::vector<std::vector<double>> est(n), rel(n);
  for (const auto& t : art.trials) {
    if (!t.decomposition) continue;
    const auto& m = t.decomposition->masses.masses;
    for (std::size_t k = 0; k < n && k < m.size(); ++k) {
      est[k].push_back(m[k]);
      rel[k].push_back(std::abs(m[k] - s.truth[k]) / s.truth[k]);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    s.estimated.push_back(mean_std(est[k]));
    s.relative_error.push_back(mean_std(rel[k]));
  }
  return s;
}

// ---------------------------------------------------------------- acceptance

namespace {

AcceptanceCheck at_most(std::string name, double value, double limit) {
  return AcceptanceCheck{std::move(name), value, limit, "<=", std::isfinite(value) && value <= limit};
}
AcceptanceCheck at_least(std::string name, double value, double limit) {
  return AcceptanceCheck{std::move(name), value, limit, ">=", std::isfinite(value) && value >= limit};
}

double kernel_mean(const RunArtifact& art, Channel c, int k = 0, int kp = 0) {
  const auto s = kernel_error_summary(art, c, k, kp);
  return s.count > 0 ? s.mean : std::numeric_limits<double>::infinity();
}

double set_agreement(const RunArtifact& art, const std::string& set) {
  const auto m = pooled_confusion(art, set);
  return m.runs > 0 ? agreement(m) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::vector<AcceptanceCheck> acceptance_checks(const RunArtifact& art) {
  std::vector<AcceptanceCheck> out;
  const std::string& m = art.config.preset();
  const bool pred = art.config.predict;
  if (m == "od") {
    out.push_back(at_most("kernel error", kernel_mean(art, Channel::energy), 3e-1));
    if (pred) out.push_back(at_most("trajectory error x [0,T] (training ICs)", trajectory_error_summary(art, "train", "x:0-T").mean, 5e-2));
  } else if (m == "cs") {
    out.push_back(at_most("kernel error", kernel_mean(art, Channel::alignment), 5e-2));
    if (pred)
      for (const char* set : {"train", "test"}) {
        out.push_back(at_least(std::string("flocking agreement (") + set + ")", set_agreement(art, set), 0.95));
        out.push_back(at_most(std::string("PI2 v_CM relative error (") + set + ")", pooled_patterns(art, set).pi2.mean, 1e-10));
      }
  } else if (m == "fm2d" || m == "fm3d") {
    out.push_back(at_most("kernel error", kernel_mean(art, Channel::energy), m == "fm2d" ? 2e-1 : 4e-1));
    if (pred)
      for (const char* set : {"train", "test"})
        out.push_back(at_least(std::string("milling agreement (") + set + ")", set_agreement(art, set), 0.9));
  } else if (m == "sod") {
    out.push_back(at_most("kernel error energy", kernel_mean(art, Channel::energy), 8e-1));
    out.push_back(at_most("kernel error environment", kernel_mean(art, Channel::environment), 5e-1));
    if (pred) {
      double worst = 0.0;
      int both = 0;
      for (const char* set : {"train", "test"})
        for_each_set(art, set, [&](const PredictionSet& p) {
          for (std::size_t r = 0; r < p.truth.size(); ++r)
            if (p.truth[r].event && p.predicted[r].event) {
              ++both;
              worst = std::max(worst, relative_error(p.truth[r].phase_var, p.predicted[r].phase_var));
            }
        });
      AcceptanceCheck c{"PI1 phase variance when both synchronize (" + std::to_string(both) + " runs)", worst, 0.0, "==",
                        both > 0 && worst == 0.0};
      out.push_back(c);
    }
  } else if (m == "gss") {
    const int n = art.config.num_agents;
    for (int k = 1; k < n; ++k) {
      out.push_back(at_most("kernel error body 1 <- " + std::to_string(k + 1), kernel_mean(art, Channel::energy, 0, k), 1e-2));
      out.push_back(at_most("kernel error body " + std::to_string(k + 1) + " <- 1", kernel_mean(art, Channel::energy, k, 0), 1e-2));
    }
    const auto ms = mass_summary(art);
    for (int k = 0; k < n; ++k) {
      const auto& r = ms.relative_error[static_cast<std::size_t>(k)];
      out.push_back(at_most("mass relative error body " + std::to_string(k + 1),
                            r.count > 0 ? r.mean : std::numeric_limits<double>::infinity(), 5e-2));
    }
    if (pred)
      for (const char* set : {"train", "test"}) {
        int total = 0, conserved = 0;
        for_each_set(art, set, [&](const PredictionSet& p) {
          for (const auto& s : p.predicted) {
            ++total;
            conserved += s.event ? 1 : 0;
          }
        });
        out.push_back(at_least(std::string("energy conservation in predicted runs (") + set + ")",
                               total > 0 ? static_cast<double>(conserved) / total : 0.0, 1.0));
      }
  }
  return out;
}

}  // namespace colearn
