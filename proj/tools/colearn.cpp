#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "colearn/experiment.hpp"
#include "colearn/io.hpp"

namespace fs = std::filesystem;
using namespace colearn;

namespace {

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> desk_scale;
  std::optional<int> workers;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool preset_flag) {
  cmd->add_option("-c,--config", f.config, "experiment config (JSON)");
  if (preset_flag) cmd->add_option("-p,--preset", f.preset, "preset name when no config is given");
  cmd->add_option("-o,--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--desk-scale", f.desk_scale, "multiplier on run and trial counts")->check(CLI::PositiveNumber);
  cmd->add_option("-j,--workers", f.workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("-q,--quiet", f.quiet, "no progress output");
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw IoError("cannot open config " + f.config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError("malformed config " + f.config + ": " + e.what());
    }
    if (!f.preset.empty()) {
      if (j.contains("preset") && j["preset"] != f.preset)
        throw IoError("config preset '" + j["preset"].get<std::string>() + "' differs from requested '" + f.preset + "'");
      j["preset"] = f.preset;
    }
    cfg = config_from_json(j);
  } else if (!f.preset.empty()) {
    cfg = default_config(f.preset);
  } else {
    throw CLI::ValidationError("either --config or a preset is required");
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.desk_scale) cfg.desk_scale = *f.desk_scale;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (cfg.output_dir.empty()) cfg.output_dir = "out_" + cfg.preset();
  cfg.validate();
  return cfg;
}

ProgressFn progress_for(const CommonFlags& f) {
  if (f.quiet) return nullptr;
  return [](const std::string& s) { std::cerr << s << '\n'; };
}

int report_checks(const RunArtifact& art) {
  bool all = true;
  for (const auto& c : acceptance_checks(art)) {
    std::printf("%s %s: %s %s %g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), format_value(c.value).c_str(),
                c.comparison.c_str(), c.threshold);
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

int cmd_simulate(const CommonFlags& f, int trial, bool csv) {
  const auto cfg = resolve_config(f);
  const SystemSpec spec = build_system(cfg.params, cfg.num_agents);
  fs::create_directories(cfg.output_dir);
  auto batch = simulate_training(cfg, spec, trial);
  for (std::size_t m = 0; m < batch.runs.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%05zu", m);
    if (!batch.runs[m]) {
      std::cerr << name << ": " << batch.errors[m] << '\n';
      continue;
    }
    auto& tr = *batch.runs[m];
    if (cfg.observed_derivatives) attach_exact_derivatives(spec, tr);
    write_trajectory(fs::path(cfg.output_dir) / (std::string(name) + ".cltr"), tr);
    if (csv) write_trajectory_csv(fs::path(cfg.output_dir) / (std::string(name) + ".csv"), tr);
  }
  save_config(cfg, fs::path(cfg.output_dir) / "config.json");
  std::printf("%zu runs written to %s (%d failed)\n", batch.runs.size() - static_cast<std::size_t>(batch.failures()),
              cfg.output_dir.c_str(), batch.failures());
  return batch.failures() == 0 ? 0 : 1;
}

int cmd_learn(const CommonFlags& f, const std::string& data) {
  const auto cfg = resolve_config(f);
  const SystemSpec spec = build_system(cfg.params, cfg.num_agents);
  std::vector<Trajectory> obs;
  if (!data.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(data))
      if (e.path().extension() == ".cltr") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) obs.push_back(read_trajectory(p));
    if (obs.empty()) throw IoError("no .cltr trajectories in " + data);
  } else {
    obs = simulate_training(cfg, spec, 0).successful();
  }
  const bool have_derivs = std::all_of(obs.begin(), obs.end(), [](const Trajectory& t) { return t.derivatives.has_value(); });
  if (cfg.observed_derivatives && !have_derivs) throw IoError("config asks for observed derivatives but the data carry none");
  auto lr = learn(spec, obs, cfg.bases, cfg.observed_derivatives, cfg.solve_tolerance, cfg.workers);
  fs::create_directories(cfg.output_dir);
  save_estimate(*lr.estimate, fs::path(cfg.output_dir) / "estimate.json");
  save_config(cfg, fs::path(cfg.output_dir) / "config.json");
  std::printf("learned from %zu trajectories (%llu pair evaluations); estimate in %s\n", obs.size(),
              static_cast<unsigned long long>(lr.pair_evaluations), (fs::path(cfg.output_dir) / "estimate.json").c_str());
  return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& estimate_path) {
  const auto cfg = resolve_config(f);
  auto est = std::make_shared<const KernelEstimate>(load_estimate(estimate_path));
  RunArtifact art;
  art.config = cfg;
  const auto progress = progress_for(f);
  for (int trial = 0; trial < cfg.effective_trials(); ++trial) art.trials.push_back(run_trial(cfg, trial, est, nullptr, progress));
  emit_reports(art, cfg.output_dir);
  return report_checks(art);
}

int cmd_reproduce(const CommonFlags& f) {
  const auto cfg = resolve_config(f);
  const auto art = run_experiment(cfg, progress_for(f));
  emit_reports(art, cfg.output_dir);
  std::printf("reports in %s (%.1f s)\n", cfg.output_dir.c_str(), art.seconds);
  return report_checks(art);
}

int cmd_config(const std::string& preset, const std::string& out) {
  const auto cfg = default_config(preset);
  if (out.empty()) {
    std::printf("%s\n", config_to_json(cfg).dump(2).c_str());
  } else {
    save_config(cfg, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn interaction kernels of particle systems from trajectory data"};
  app.require_subcommand(1);

  CommonFlags sim_f, learn_f, eval_f, rep_f;
  int sim_trial = 0;
  bool sim_csv = false;
  auto* sim = app.add_subcommand("simulate", "integrate the training runs of one trial and store them");
  add_common(sim, sim_f, true);
  sim->add_option("--trial", sim_trial, "trial index used for seeding")->check(CLI::NonNegativeNumber);
  sim->add_flag("--csv", sim_csv, "also write CSV exports");

  std::string data;
  auto* lrn = app.add_subcommand("learn", "estimate kernels from stored or freshly simulated trajectories");
  add_common(lrn, learn_f, true);
  lrn->add_option("-d,--data", data, "directory of .cltr trajectories")->check(CLI::ExistingDirectory);

  std::string estimate_path;
  auto* ev = app.add_subcommand("evaluate", "score a stored estimate against the true system");
  add_common(ev, eval_f, true);
  ev->add_option("-e,--estimate", estimate_path, "estimate JSON")->required()->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("reproduce", "run the full protocol for a preset and check acceptance thresholds");
  add_common(rep, rep_f, false);
  rep->add_option("preset", rep_f.preset, "od, cs, fm2d, fm3d, sod or gss")->required();

  std::string cfg_preset, cfg_out;
  auto* cfgc = app.add_subcommand("config", "print or write the default config of a preset");
  cfgc->add_option("preset", cfg_preset, "od, cs, fm2d, fm3d, sod or gss")->required();
  cfgc->add_option("-o,--out", cfg_out, "file to write instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(sim_f, sim_trial, sim_csv);
    if (*lrn) return cmd_learn(learn_f, data);
    if (*ev) return cmd_evaluate(eval_f, estimate_path);
    if (*cfgc) return cmd_config(cfg_preset, cfg_out);
    return cmd_reproduce(rep_f);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
