#include "colearn/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "colearn/models.hpp"

namespace colearn {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "trajectory files assume a little-endian host");

// ---------------------------------------------------------------- configs

namespace {

json basis_to_json(const BasisChoice& b) {
  return json{{"kind", to_string(b.kind)}, {"count_r", b.count_r}, {"count_s", b.count_s}, {"padding", b.padding}};
}

BasisChoice basis_from_json(const json& j) {
  static const std::set<std::string> known{"kind", "count_r", "count_s", "padding"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw IoError("unknown basis key: " + k);
  BasisChoice b;
  b.kind = basis_kind_from_string(j.at("kind").get<std::string>());
  b.count_r = j.at("count_r").get<int>();
  b.count_s = j.value("count_s", 0);
  b.padding = j.value("padding", 0.0);
  return b;
}

json integrator_to_json(const IntegratorConfig& g) {
  return json{{"rtol", g.rtol}, {"atol", g.atol}, {"max_steps", g.max_steps}, {"initial_step", g.initial_step},
              {"max_step", g.max_step}};
}

void integrator_from_json(const json& j, IntegratorConfig& g) {
  static const std::set<std::string> known{"rtol", "atol", "max_steps", "initial_step", "max_step"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw IoError("unknown integrator key: " + k);
  g.rtol = j.value("rtol", g.rtol);
  g.atol = j.value("atol", g.atol);
  g.max_steps = j.value("max_steps", g.max_steps);
  g.initial_step = j.value("initial_step", g.initial_step);
  g.max_step = j.value("max_step", g.max_step);
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  json bases = json::object();
  for (Channel ch : kAllChannels) {
    const auto& b = c.bases[static_cast<std::size_t>(channel_index(ch))];
    if (b) bases[to_string(ch)] = basis_to_json(*b);
  }
  return json{
      {"preset", c.preset()},
      {"params", c.params.values},
      {"agents", c.num_agents},
      {"train_runs", c.m_train},
      {"rho_runs", c.m_rho},
      {"test_runs", c.m_test},
      {"times", c.num_times},
      {"t0", c.t0},
      {"t_end", c.t_end},
      {"t_final", c.t_final},
      {"trials", c.trials},
      {"seed", c.seed},
      {"derivatives", c.observed_derivatives ? "observed" : "finite-difference"},
      {"bases", bases},
      {"rho_bins", {{"1d", c.rho_bins.bins_1d}, {"2d", c.rho_bins.bins_2d}}},
      {"integrator", integrator_to_json(c.integrator)},
      {"predict_integrator", integrator_to_json(c.predict_integrator)},
      {"solve_tolerance", c.solve_tolerance},
      {"desk_scale", c.desk_scale},
      {"workers", c.workers},
      {"share_rho", c.share_rho},
      {"predict", c.predict},
      {"extension", to_string(c.extension)},
      {"decoupling_lambda", c.decoupling_lambda},
      {"plot_points", c.plot_points},
      {"output_dir", c.output_dir},
  };
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw IoError("config must be a JSON object");
  if (!j.contains("preset")) throw IoError("config lacks a preset name");
  ExperimentConfig c = default_config(j.at("preset").get<std::string>());
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") continue;
    if (key == "params") {
      for (const auto& [pk, pv] : v.items()) c.params.set(pk, pv.get<double>());
    } else if (key == "agents") c.num_agents = v.get<int>();
    else if (key == "train_runs") c.m_train = v.get<int>();
    else if (key == "rho_runs") c.m_rho = v.get<int>();
    else if (key == "test_runs") c.m_test = v.get<int>();
    else if (key == "times") c.num_times = v.get<int>();
    else if (key == "t0") c.t0 = v.get<double>();
    else if (key == "t_end") c.t_end = v.get<double>();
    else if (key == "t_final") c.t_final = v.get<double>();
    else if (key == "trials") c.trials = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "derivatives") {
      const auto s = v.get<std::string>();
      if (s != "observed" && s != "finite-difference") throw IoError("derivatives must be 'observed' or 'finite-difference'");
      c.observed_derivatives = s == "observed";
    } else if (key == "bases") {
      c.bases = ChannelChoices{};
      for (const auto& [ck, cv] : v.items())
        c.bases[static_cast<std::size_t>(channel_index(channel_from_string(ck)))] = basis_from_json(cv);
    } else if (key == "rho_bins") {
      c.rho_bins.bins_1d = v.value("1d", c.rho_bins.bins_1d);
      c.rho_bins.bins_2d = v.value("2d", c.rho_bins.bins_2d);
    } else if (key == "integrator") {
      integrator_from_json(v, c.integrator);
    } else if (key == "predict_integrator") {
      integrator_from_json(v, c.predict_integrator);
    } else if (key == "solve_tolerance") c.solve_tolerance = v.get<double>();
    else if (key == "desk_scale") c.desk_scale = v.get<double>();
    else if (key == "workers") c.workers = v.get<int>();
    else if (key == "share_rho") c.share_rho = v.get<bool>();
    else if (key == "predict") c.predict = v.get<bool>();
    else if (key == "extension") c.extension = extension_from_string(v.get<std::string>());
    else if (key == "decoupling_lambda") c.decoupling_lambda = v.get<double>();
    else if (key == "plot_points") c.plot_points = v.get<int>();
    else if (key == "output_dir") c.output_dir = v.get<std::string>();
    else throw IoError("unknown config key: " + key);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("malformed config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setw(2) << config_to_json(cfg) << '\n';
}

// ---------------------------------------------------------------- trajectories

namespace {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated trajectory file");
  return v;
}
void put_block(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void take_block(std::istream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw IoError("truncated trajectory file");
}

}  // namespace

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  if (traj.states.empty()) throw IoError("refusing to write an empty trajectory");
  const SystemState& s0 = traj.states.front();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::uint32_t flags = (s0.has_velocity() ? 1u : 0u) | (s0.has_xi() ? 2u : 0u) | (traj.derivatives ? 4u : 0u);
  out.write("CLTR", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s0.num_agents));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s0.dim));
  put<std::uint32_t>(out, flags);
  put<std::uint64_t>(out, traj.size());
  put_block(out, traj.times);
  auto body = [&](const std::vector<SystemState>& states) {
    for (const auto& s : states) {
      put_block(out, s.x);
      put_block(out, s.v);
      put_block(out, s.xi);
    }
  };
  body(traj.states);
  if (traj.derivatives) body(*traj.derivatives);
  if (!out) throw IoError("write failed for " + path.string());
}

Trajectory read_trajectory(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CLTR", 4) != 0) throw IoError(path.string() + " is not a trajectory file");
  if (take<std::uint32_t>(in) != 1) throw IoError("unsupported trajectory file version");
  const auto n = static_cast<int>(take<std::uint32_t>(in));
  const auto d = static_cast<int>(take<std::uint32_t>(in));
  const auto flags = take<std::uint32_t>(in);
  const auto len = take<std::uint64_t>(in);
  if (n < 1 || d < 1 || len < 1 || len > (1ull << 32)) throw IoError("implausible trajectory header");
  Trajectory t;
  t.times.resize(len);
  take_block(in, t.times);
  auto body = [&](std::vector<SystemState>& states) {
    states.assign(len, SystemState(n, d, flags & 1u, flags & 2u));
    for (auto& s : states) {
      take_block(in, s.x);
      take_block(in, s.v);
      take_block(in, s.xi);
    }
  };
  body(t.states);
  if (flags & 4u) {
    t.derivatives.emplace();
    body(*t.derivatives);
  }
  t.validate();
  return t;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (traj.states.empty()) return;
  const SystemState& s0 = traj.states.front();
  const int d = s0.dim;
  out << "t,agent";
  for (int c = 0; c < d; ++c) out << ",x" << c;
  if (s0.has_velocity())
    for (int c = 0; c < d; ++c) out << ",v" << c;
  if (s0.has_xi()) out << ",xi";
  out << '\n' << std::setprecision(17);
  for (std::size_t l = 0; l < traj.size(); ++l) {
    const auto& s = traj.states[l];
    for (int i = 0; i < s.num_agents; ++i) {
      out << traj.times[l] << ',' << i;
      for (int c = 0; c < d; ++c) out << ',' << s.x[static_cast<std::size_t>(i * d + c)];
      if (s.has_velocity())
        for (int c = 0; c < d; ++c) out << ',' << s.v[static_cast<std::size_t>(i * d + c)];
      if (s.has_xi()) out << ',' << s.xi[static_cast<std::size_t>(i)];
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------- estimates

json estimate_to_json(const KernelEstimate& est) {
  json kernels = json::array();
  const int kt = est.hypothesis.num_types;
  for (Channel c : kAllChannels)
    for (int k = 0; k < kt; ++k)
      for (int kp = 0; kp < kt; ++kp) {
        const Basis* b = est.hypothesis.get(c, k, kp);
        if (!b) continue;
        const auto& sp = b->spec();
        json dom{{"r", {sp.domain.r.lo, sp.domain.r.hi}}};
        if (sp.domain.s) dom["s"] = {sp.domain.s->lo, sp.domain.s->hi};
        const auto& a = est.coefficients(c, k, kp);
        kernels.push_back({{"channel", to_string(c)},
                           {"k", k},
                           {"kp", kp},
                           {"basis", {{"kind", to_string(sp.kind)}, {"count_r", sp.count_r}, {"count_s", sp.count_s}, {"domain", dom}}},
                           {"coefficients", std::vector<double>(a.data(), a.data() + a.size())}});
      }
  const auto& p = est.provenance;
  return json{{"format", "colearn-estimate-1"},
              {"num_types", kt},
              {"kernels", kernels},
              {"provenance",
               {{"trajectories", p.trajectories},
                {"times", p.times},
                {"seed", p.seed},
                {"tolerance", p.tolerance},
                {"merge_path", p.merge_path}}}};
}

KernelEstimate estimate_from_json(const json& j) {
  if (j.value("format", "") != "colearn-estimate-1") throw IoError("not an estimate document");
  const int kt = j.at("num_types").get<int>();
  HypothesisSet hyp(kt);
  struct Item {
    Channel c;
    int k, kp;
    std::vector<double> a;
  };
  std::vector<Item> items;
  for (const auto& e : j.at("kernels")) {
    const Channel c = channel_from_string(e.at("channel").get<std::string>());
    const int k = e.at("k").get<int>(), kp = e.at("kp").get<int>();
    if (k < 0 || kp < 0 || k >= kt || kp >= kt) throw IoError("kernel type index out of range");
    const auto& b = e.at("basis");
    BasisSpec sp;
    sp.kind = basis_kind_from_string(b.at("kind").get<std::string>());
    sp.count_r = b.at("count_r").get<int>();
    sp.count_s = b.at("count_s").get<int>();
    const auto r = b.at("domain").at("r").get<std::vector<double>>();
    sp.domain.r = Interval{r.at(0), r.at(1)};
    if (b.at("domain").contains("s")) {
      const auto s = b.at("domain").at("s").get<std::vector<double>>();
      sp.domain.s = Interval{s.at(0), s.at(1)};
    }
    hyp.set(c, k, kp, Basis(sp));
    items.push_back({c, k, kp, e.at("coefficients").get<std::vector<double>>()});
  }
  KernelEstimate est(std::move(hyp));
  for (const auto& it : items) {
    auto& dst = est.coefficients(it.c, it.k, it.kp);
    if (static_cast<std::size_t>(dst.size()) != it.a.size()) throw IoError("coefficient count differs from basis size");
    dst = Eigen::Map<const Eigen::VectorXd>(it.a.data(), static_cast<Eigen::Index>(it.a.size()));
  }
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    est.provenance.trajectories = p.value("trajectories", 0);
    est.provenance.times = p.value("times", 0);
    est.provenance.seed = p.value("seed", std::uint64_t{0});
    est.provenance.tolerance = p.value("tolerance", 1e-12);
    est.provenance.merge_path = p.value("merge_path", std::string("direct"));
  }
  return est;
}

void save_estimate(const KernelEstimate& est, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << estimate_to_json(est).dump(1) << '\n';
}

KernelEstimate load_estimate(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("malformed estimate " + path.string() + ": " + e.what());
  }
  return estimate_from_json(j);
}

// ---------------------------------------------------------------- reports

std::string format_value(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "undef";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

namespace {

std::string fmt(double v) { return format_value(std::optional<double>(v)); }

std::ofstream open_table(const fs::path& dir, const std::string& name) {
  std::ofstream out(dir / name);
  if (!out) throw IoError("cannot write " + (dir / name).string());
  return out;
}

std::string pm(const MeanStd& m) {
  if (m.count == 0) return "undef";
  return fmt(m.mean) + " +- " + fmt(m.stddev);
}

void write_kernel_tables(const RunArtifact& art, const fs::path& dir) {
  auto out = open_table(dir, "kernel_errors.csv");
  out << "trial,seed,variant,channel,k,kp,weighting,relative_error\n";
  for (const auto& t : art.trials) {
    for (const auto& r : t.kernel_errors)
      out << t.trial << ',' << t.seed << ",learned," << to_string(r.channel) << ',' << r.k + 1 << ',' << r.kp + 1 << ','
          << r.weighting << ',' << format_value(r.error) << '\n';
    for (const auto& r : t.decoupled_errors)
      out << t.trial << ',' << t.seed << ",decoupled," << to_string(r.channel) << ',' << r.k + 1 << ',' << r.kp + 1
          << ',' << r.weighting << ',' << format_value(r.error) << '\n';
  }
  auto sum = open_table(dir, "kernel_errors_summary.csv");
  sum << "variant,channel,k,kp,mean,std,trials\n";
  const SystemSpec spec = build_system(art.config.params, art.config.num_agents);
  const int kt = spec.num_types;
  for (int pass = 0; pass < 2; ++pass)
    for (Channel c : kAllChannels) {
      if (!spec.channel(c).active) continue;
      for (int k = 0; k < kt; ++k)
        for (int kp = 0; kp < kt; ++kp) {
          if (spec.pair_count(k, kp) == 0) continue;
          const auto m = kernel_error_summary(art, c, k, kp, pass == 1);
          if (pass == 1 && m.count == 0) continue;
          sum << (pass ? "decoupled," : "learned,") << to_string(c) << ',' << k + 1 << ',' << kp + 1 << ','
              << (m.count ? fmt(m.mean) : "undef") << ',' << (m.count ? fmt(m.stddev) : "undef") << ',' << m.count
              << '\n';
        }
    }
  if (kt > 1) {
    // square matrix layout for multi-type systems
    for (int pass = 0; pass < 2; ++pass) {
      auto mat = open_table(dir, pass ? "kernel_error_matrix_decoupled.csv" : "kernel_error_matrix.csv");
      mat << "k\\kp";
      for (int kp = 0; kp < kt; ++kp) mat << ",kp=" << kp + 1;
      mat << '\n';
      for (int k = 0; k < kt; ++k) {
        mat << "k=" << k + 1;
        for (int kp = 0; kp < kt; ++kp) {
          if (spec.pair_count(k, kp) == 0) {
            mat << ",0";
            continue;
          }
          mat << ',' << pm(kernel_error_summary(art, Channel::energy, k, kp, pass == 1));
        }
        mat << '\n';
      }
    }
  }
}

void write_prediction_tables(const RunArtifact& art, const fs::path& dir) {
  auto out = open_table(dir, "trajectory_errors.csv");
  out << "trial,seed,ic_set,field,window,mean,std,runs,failures\n";
  std::set<std::string> keys;
  for (const auto& t : art.trials)
    for (const auto& p : t.predictions) {
      std::map<std::string, std::vector<double>> by;
      for (const auto& e : p.trajectory_errors)
        for (const auto& [k, v] : e) {
          by[k].push_back(v);
          keys.insert(k);
        }
      for (const auto& [k, v] : by) {
        const auto ms = mean_std(v);
        const auto colon = k.find(':');
        out << t.trial << ',' << t.seed << ',' << p.name << ',' << k.substr(0, colon) << ',' << k.substr(colon + 1) << ','
            << fmt(ms.mean) << ',' << fmt(ms.stddev) << ',' << ms.count << ',' << p.failures << '\n';
      }
    }
  auto sum = open_table(dir, "trajectory_errors_summary.csv");
  sum << "ic_set,field,window,mean_over_trials,std_over_trials,trials\n";
  for (const char* set : {"train", "test"})
    for (const auto& k : keys) {
      const auto ms = trajectory_error_summary(art, set, k);
      if (ms.count == 0) continue;
      const auto colon = k.find(':');
      sum << set << ',' << k.substr(0, colon) << ',' << k.substr(colon + 1) << ',' << fmt(ms.mean) << ','
          << fmt(ms.stddev) << ',' << ms.count << '\n';
    }

  auto conf = open_table(dir, "confusion.csv");
  conf << "ic_set,runs,p11,p12,p21,p22,accuracy,precision,recall,f_score\n";
  auto pis = open_table(dir, "pattern_scores.csv");
  pis << "ic_set,pi1_mean,pi1_std,pi2_mean,pi2_std,runs\n";
  for (const char* set : {"train", "test"}) {
    const auto m = pooled_confusion(art, set);
    if (m.runs == 0) continue;
    const auto s = confusion_stats(m);
    conf << set << ',' << m.runs << ',' << fmt(m.p11) << ',' << fmt(m.p12) << ',' << fmt(m.p21) << ',' << fmt(m.p22)
         << ',' << format_value(s.accuracy) << ',' << format_value(s.precision) << ',' << format_value(s.recall) << ','
         << format_value(s.f_score) << '\n';
    const auto p = pooled_patterns(art, set);
    pis << set << ',' << fmt(p.pi1.mean) << ',' << fmt(p.pi1.stddev) << ',' << fmt(p.pi2.mean) << ','
        << fmt(p.pi2.stddev) << ',' << p.pi1.count << '\n';
  }

  auto sc = open_table(dir, "emergent_scores.csv");
  sc << "trial,ic_set,run,system,event,defined,clusters,max_speed,i_flock,i_mill,i_s,phase_mean,phase_var,energy_var_max\n";
  for (const auto& t : art.trials)
    for (const auto& p : t.predictions)
      for (std::size_t r = 0; r < p.truth.size(); ++r)
        for (int side = 0; side < 2; ++side) {
          const auto& s = side ? p.predicted[r] : p.truth[r];
          double evar = 0.0;
          for (double v : s.energy_var) evar = std::max(evar, v);
          sc << t.trial << ',' << p.name << ',' << r << ',' << (side ? "learned" : "true") << ',' << s.event << ','
             << s.defined << ',' << s.clusters << ',' << fmt(s.max_speed) << ',' << fmt(s.i_flock) << ','
             << fmt(s.i_mill) << ',' << fmt(s.i_s) << ',' << fmt(s.phase_mean) << ',' << fmt(s.phase_var) << ','
             << fmt(evar) << '\n';
        }
}

void write_masses(const RunArtifact& art, const fs::path& dir) {
  bool any = false;
  for (const auto& t : art.trials) any = any || t.decomposition.has_value();
  if (!any) return;
  const auto ms = mass_summary(art);
  auto out = open_table(dir, "masses.csv");
  out << "body,true_mass,estimated_mean,estimated_std,relative_error_mean,relative_error_std\n";
  for (std::size_t k = 0; k < ms.truth.size(); ++k)
    out << k + 1 << ',' << fmt(ms.truth[k]) << ',' << fmt(ms.estimated[k].mean) << ',' << fmt(ms.estimated[k].stddev)
        << ',' << fmt(ms.relative_error[k].mean) << ',' << fmt(ms.relative_error[k].stddev) << '\n';
  auto prof = open_table(dir, "plot_decoupled_profile.csv");
  prof << "trial,r,profile_sample,profile_smooth,inverse_cube_fit\n";
  for (const auto& t : art.trials) {
    if (!t.decomposition) continue;
    const auto& d = *t.decomposition;
    for (std::size_t q = 0; q < d.samples.radii.size(); ++q) {
      const double r = d.samples.radii[q];
      prof << t.trial << ',' << fmt(r) << ',' << fmt(d.step1.profile[q]) << ',' << fmt(d.step2(r)) << ','
           << fmt(d.masses.c2 / (r * r * r)) << '\n';
    }
  }
}

void write_plot_data(const RunArtifact& art, const fs::path& dir) {
  const SystemSpec spec = build_system(art.config.params, art.config.num_agents);
  const int kt = spec.num_types;
  const int points = std::max(500, art.config.plot_points);
  for (Channel c : kAllChannels) {
    const auto& ch = spec.channel(c);
    if (!ch.active) continue;
    for (int k = 0; k < kt; ++k)
      for (int kp = 0; kp < kt; ++kp) {
        if (spec.pair_count(k, kp) == 0) continue;
        double lo = 1e300, hi = -1e300, slo = 1e300, shi = -1e300;
        for (const auto& t : art.trials) {
          const Basis* b = t.estimate ? t.estimate->hypothesis.get(c, k, kp) : nullptr;
          if (!b) continue;
          lo = std::min(lo, b->spec().domain.r.lo);
          hi = std::max(hi, b->spec().domain.r.hi);
          if (b->spec().domain.s) {
            slo = std::min(slo, b->spec().domain.s->lo);
            shi = std::max(shi, b->spec().domain.s->hi);
          }
        }
        if (!(hi > lo)) continue;
        const std::string name = std::string("plot_") + to_string(c) + "_" + std::to_string(k + 1) + "_" +
                                 std::to_string(kp + 1) + ".csv";
        auto out = open_table(dir, name);
        const bool two = ch.two_variable;
        out << (two ? "r,s," : "r,") << "phi,phi_hat_mean,phi_hat_min,phi_hat_max,rho_mass\n";
        const int ns = two ? 50 : 1;
        for (int a = 0; a < points; ++a) {
          const double r = lo + (hi - lo) * a / (points - 1);
          for (int bs = 0; bs < ns; ++bs) {
            const double s = two ? slo + (shi - slo) * bs / (ns - 1) : 0.0;
            double sum = 0.0, mn = 1e300, mx = -1e300;
            int count = 0;
            double rho = 0.0;
            for (const auto& t : art.trials) {
              if (!t.estimate) continue;
              const double v = t.estimate->eval(c, k, kp, r, s);
              sum += v;
              mn = std::min(mn, v);
              mx = std::max(mx, v);
              ++count;
              const auto& cm = t.rho[static_cast<std::size_t>(channel_index(c))];
              if (cm && !cm->at(k, kp).is_zero()) {
                const int bin = cm->at(k, kp).locate(r, s);
                if (bin >= 0) rho += cm->at(k, kp).mass[static_cast<std::size_t>(bin)];
              }
            }
            if (count == 0) continue;
            out << fmt(r) << ',';
            if (two) out << fmt(s) << ',';
            const double truth = ch.at(k, kp, kt)(r, s);
            out << format_value(std::isfinite(truth) ? std::optional<double>(truth) : std::nullopt) << ','
                << fmt(sum / count) << ',' << fmt(mn) << ',' << fmt(mx) << ',' << fmt(rho / count) << '\n';
          }
        }
      }
  }
}

void write_metadata(const RunArtifact& art, const fs::path& dir) {
  json trials = json::array();
  for (const auto& t : art.trials) {
    int fail = 0;
    for (const auto& p : t.predictions) fail += p.failures;
    trials.push_back({{"trial", t.trial},
                      {"seed", t.seed},
                      {"rho_failures", t.rho_failures},
                      {"train_failures", t.train_failures},
                      {"prediction_failures", fail},
                      {"pair_evaluations", t.pair_evaluations},
                      {"seconds", t.seconds}});
  }
  json checks = json::array();
  for (const auto& c : acceptance_checks(art))
    checks.push_back({{"name", c.name}, {"value", format_value(c.value)}, {"threshold", c.threshold},
                      {"comparison", c.comparison}, {"pass", c.pass}});
  json meta{{"config", config_to_json(art.config)},
            {"integrator", art.integrator_name},
            {"effective_counts",
             {{"trials", art.config.effective_trials()},
              {"train_runs", art.config.effective_train()},
              {"rho_runs", art.config.effective_rho()},
              {"test_runs", art.config.effective_test()}}},
            {"trials", trials},
            {"acceptance", checks},
            {"seconds", art.seconds}};
  std::ofstream out(dir / "metadata.json");
  if (!out) throw IoError("cannot write metadata");
  out << std::setw(2) << meta << '\n';
}

}  // namespace

void emit_reports(const RunArtifact& art, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  write_kernel_tables(art, dir);
  write_prediction_tables(art, dir);
  write_masses(art, dir);
  write_plot_data(art, dir);
  for (const auto& t : art.trials)
    if (t.estimate) save_estimate(*t.estimate, dir / ("estimate_trial" + std::to_string(t.trial) + ".json"));
  write_metadata(art, dir);
}

}  // namespace colearn
