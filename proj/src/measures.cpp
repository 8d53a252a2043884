#include "colearn/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "colearn/dynamics.hpp"

namespace colearn {

const char* to_string(Weighting w) {
  switch (w) {
    case Weighting::none: return "none";
    case Weighting::distance_sq: return "r^2";
    case Weighting::speed_diff_sq: return "rdot^2";
    case Weighting::phase_diff_sq: return "xi^2";
  }
  return "?";
}

double EmpiricalMeasure::total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

namespace {

int bin_of(const std::vector<double>& edges, double v) {
  const int n = static_cast<int>(edges.size()) - 1;
  if (n < 1 || !(v >= edges.front() && v <= edges.back())) return -1;
  const double h = (edges.back() - edges.front()) / n;
  return std::clamp(static_cast<int>(std::floor((v - edges.front()) / h)), 0, n - 1);
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
  if (!(hi > lo)) {
    const double pad = 1e-6 * std::max(1.0, std::abs(lo));
    lo -= pad;
    hi += pad;
  }
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int a = 0; a <= bins; ++a) e[static_cast<std::size_t>(a)] = lo + (hi - lo) * a / bins;
  e.back() = hi;
  return e;
}

}  // namespace

int EmpiricalMeasure::locate(double r, double s) const {
  const int a = bin_of(edges_r, r);
  if (a < 0) return -1;
  if (dims == 1) return a;
  const int b = bin_of(edges_s, s);
  if (b < 0) return -1;
  return a * bins_s() + b;
}

double EmpiricalMeasure::weight(std::size_t bin, Weighting w) const {
  switch (w) {
    case Weighting::none: return 1.0;
    case Weighting::distance_sq: return mean_r2[bin];
    case Weighting::speed_diff_sq: return mean_rdot2[bin];
    case Weighting::phase_diff_sq: return mean_xi2[bin];
  }
  return 1.0;
}

Weighting default_weighting(Order order, Channel channel) {
  switch (channel) {
    case Channel::energy: return Weighting::distance_sq;
    case Channel::alignment: return Weighting::speed_diff_sq;
    case Channel::environment: return order == Order::second ? Weighting::phase_diff_sq : Weighting::none;
  }
  return Weighting::none;
}

ChannelMeasures estimate_rho(const SystemSpec& spec, const std::vector<Trajectory>& trajectories, Channel channel,
                             const MeasureOptions& opt) {
  const int kt = spec.num_types, n = spec.num_agents, d = spec.dim;
  const auto& ch = spec.channel(channel);
  const bool two = ch.active && ch.two_variable;
  ChannelMeasures out;
  out.channel = channel;
  out.num_types = kt;
  out.pairs.assign(static_cast<std::size_t>(kt * kt), EmpiricalMeasure{});
  if (!ch.active) return out;

  auto pair_index = [&](int i, int j) {
    return static_cast<std::size_t>(spec.type_of[static_cast<std::size_t>(i)] * kt + spec.type_of[static_cast<std::size_t>(j)]);
  };
  auto distance = [&](const SystemState& st, int i, int j) {
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
      const double t = st.x[static_cast<std::size_t>(j * d + c)] - st.x[static_cast<std::size_t>(i * d + c)];
      r2 += t * t;
    }
    return std::sqrt(r2);
  };

  // first pass: ranges
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 4>> range(static_cast<std::size_t>(kt * kt), {inf, -inf, inf, -inf});
  for (const auto& traj : trajectories)
    for (const auto& st : traj.states)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          auto& g = range[pair_index(i, j)];
          const double r = distance(st, i, j);
          g[0] = std::min(g[0], r);
          g[1] = std::max(g[1], r);
          if (two) {
            const double s = ch.feature(st, i, j);
            g[2] = std::min(g[2], s);
            g[3] = std::max(g[3], s);
          }
        }

  for (std::size_t p = 0; p < out.pairs.size(); ++p) {
    if (!(range[p][0] <= range[p][1])) continue;  // no samples for this pair class
    auto& m = out.pairs[p];
    m.dims = two ? 2 : 1;
    m.edges_r = uniform_edges(range[p][0], range[p][1], two ? opt.bins_2d : opt.bins_1d);
    if (two) m.edges_s = uniform_edges(range[p][2], range[p][3], opt.bins_2d);
    const std::size_t nb = static_cast<std::size_t>(m.bins_r() * m.bins_s());
    m.mass.assign(nb, 0.0);
    m.mean_r2.assign(nb, 0.0);
    m.mean_rdot2.assign(nb, 0.0);
    m.mean_xi2.assign(nb, 0.0);
  }

  // second pass: counts and weight sums
  for (const auto& traj : trajectories)
    for (const auto& st : traj.states)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          auto& m = out.pairs[pair_index(i, j)];
          const double r = distance(st, i, j);
          const double s = two ? ch.feature(st, i, j) : 0.0;
          const int bin = m.locate(r, s);
          if (bin < 0) continue;
          const std::size_t b = static_cast<std::size_t>(bin);
          m.mass[b] += 1.0;
          m.mean_r2[b] += r * r;
          if (st.has_velocity()) {
            double v2 = 0.0;
            for (int c = 0; c < d; ++c) {
              const double t = st.v[static_cast<std::size_t>(j * d + c)] - st.v[static_cast<std::size_t>(i * d + c)];
              v2 += t * t;
            }
            m.mean_rdot2[b] += v2;
          }
          if (st.has_xi()) {
            const double t = st.xi[static_cast<std::size_t>(j)] - st.xi[static_cast<std::size_t>(i)];
            m.mean_xi2[b] += t * t;
          }
        }

  for (auto& m : out.pairs) {
    const double total = m.total_mass();
    if (total == 0.0) continue;
    for (std::size_t b = 0; b < m.mass.size(); ++b) {
      if (m.mass[b] > 0.0) {
        m.mean_r2[b] /= m.mass[b];
        m.mean_rdot2[b] /= m.mass[b];
        m.mean_xi2[b] /= m.mass[b];
      }
      m.mass[b] /= total;
    }
  }
  return out;
}

namespace {
void quadrature(const Kernel& truth, const Kernel* estimate, const EmpiricalMeasure& m, Weighting w, double& num,
                double& den) {
  num = den = 0.0;
  for (int a = 0; a < m.bins_r(); ++a)
    for (int b = 0; b < m.bins_s(); ++b) {
      const std::size_t bin = static_cast<std::size_t>(a * m.bins_s() + b);
      if (m.mass[bin] == 0.0) continue;
      const double r = m.center_r(a), s = m.center_s(b);
      const double f = truth(r, s);
      const double wm = m.weight(bin, w) * m.mass[bin];
      den += f * f * wm;
      if (estimate) {
        const double e = f - (*estimate)(r, s);
        num += e * e * wm;
      }
    }
}
}  // namespace

double kernel_l2_norm(const Kernel& phi, const EmpiricalMeasure& measure, Weighting w) {
  double num = 0.0, den = 0.0;
  quadrature(phi, nullptr, measure, w, num, den);
  return std::sqrt(den);
}

double kernel_l2_error(const Kernel& truth, const Kernel& estimate, const EmpiricalMeasure& measure, Weighting w) {
  if (measure.is_zero()) throw ZeroNormError("kernel error requested on an empty measure");
  double num = 0.0, den = 0.0;
  quadrature(truth, &estimate, measure, w, num, den);
  if (!(den > 0.0)) throw ZeroNormError("true kernel has zero norm on the support of the measure");
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------- trajectories

double trajectory_error(const SystemSpec& spec, const Trajectory& truth, const Trajectory& predicted, StateField field,
                        TimeWindow window) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("trajectories do not share a grid");
  const auto counts = spec.type_counts();
  const double tol = 1e-9 * std::max(1.0, std::abs(truth.times.empty() ? 1.0 : truth.times.back()));
  double num = 0.0, den = 0.0;
  bool any = false;
  for (std::size_t l = 0; l < truth.size(); ++l) {
    if (std::abs(truth.times[l] - predicted.times[l]) > tol) throw std::invalid_argument("trajectories do not share a grid");
    const double t = truth.times[l];
    if (t < window.lo - tol || t > window.hi + tol) continue;
    any = true;
    const SystemState& a = truth.states[l];
    const SystemState& b = predicted.states[l];
    const std::vector<double>& va = field == StateField::position ? a.x : field == StateField::velocity ? a.v : a.xi;
    const std::vector<double>& vb = field == StateField::position ? b.x : field == StateField::velocity ? b.v : b.xi;
    if (va.empty() || va.size() != vb.size()) throw std::invalid_argument("requested field missing from trajectory");
    const std::size_t width = va.size() / static_cast<std::size_t>(spec.num_agents);
    double sn = 0.0, sd = 0.0;
    for (int i = 0; i < spec.num_agents; ++i) {
      const double w = 1.0 / counts[static_cast<std::size_t>(spec.type_of[static_cast<std::size_t>(i)])];
      double dn = 0.0, dd = 0.0;
      for (std::size_t c = 0; c < width; ++c) {
        const std::size_t q = static_cast<std::size_t>(i) * width + c;
        dn += (va[q] - vb[q]) * (va[q] - vb[q]);
        dd += va[q] * va[q];
      }
      sn += w * dn;
      sd += w * dd;
    }
    num = std::max(num, std::sqrt(sn));
    den = std::max(den, std::sqrt(sd));
  }
  if (!any) throw std::invalid_argument("no grid time inside the requested window");
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw ZeroNormError("true trajectory is identically zero in the window");
  }
  return num / den;
}

// ---------------------------------------------------------------- clusters

ClusterResult detect_clusters(const SystemState& st, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("cluster radius must be positive");
  const int n = st.num_agents, d = st.dim;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  auto dist = [&](int i, int j) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double t = st.x[static_cast<std::size_t>(i * d + c)] - st.x[static_cast<std::size_t>(j * d + c)];
      s += t * t;
    }
    return std::sqrt(s);
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(i, j) < delta) parent[static_cast<std::size_t>(find(i))] = find(j);

  ClusterResult out;
  out.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> root_label(static_cast<std::size_t>(n), -1);
  std::vector<int> sizes;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_label[static_cast<std::size_t>(r)] < 0) {
      root_label[static_cast<std::size_t>(r)] = static_cast<int>(out.centers.size());
      out.centers.emplace_back(static_cast<std::size_t>(d), 0.0);
      sizes.push_back(0);
    }
    const int lab = root_label[static_cast<std::size_t>(r)];
    out.label[static_cast<std::size_t>(i)] = lab;
    for (int c = 0; c < d; ++c) out.centers[static_cast<std::size_t>(lab)][static_cast<std::size_t>(c)] += st.x[static_cast<std::size_t>(i * d + c)];
    ++sizes[static_cast<std::size_t>(lab)];
  }
  for (std::size_t k = 0; k < out.centers.size(); ++k)
    for (double& c : out.centers[k]) c /= sizes[k];
  for (int i = 0; i < n && !out.separation_violated; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = dist(i, j);
      const bool same = out.label[static_cast<std::size_t>(i)] == out.label[static_cast<std::size_t>(j)];
      if ((same && r >= delta) || (!same && r <= delta)) {
        out.separation_violated = true;
        break;
      }
    }
  return out;
}

double hausdorff_distance(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto d = [](const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) s += (p[c] - q[c]) * (p[c] - q[c]);
    return std::sqrt(s);
  };
  auto directed = [&](const auto& from, const auto& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, d(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

// ---------------------------------------------------------------- emergent scores

namespace {

double norm(const double* v, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) s += v[c] * v[c];
  return std::sqrt(s);
}

// 3-vector cross product; 2D inputs are embedded with a zero third component.
std::array<double, 3> cross(const double* a, const double* b, int d) {
  const double a3[3] = {a[0], a[1], d == 3 ? a[2] : 0.0};
  const double b3[3] = {b[0], b[1], d == 3 ? b[2] : 0.0};
  return {a3[1] * b3[2] - a3[2] * b3[1], a3[2] * b3[0] - a3[0] * b3[2], a3[0] * b3[1] - a3[1] * b3[0]};
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double cs_flock_score(const SystemState& s) {
  const int n = s.num_agents, d = s.dim;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double q = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = s.v[static_cast<std::size_t>(i * d + c)] - s.v[static_cast<std::size_t>(j * d + c)];
        q += t * t;
      }
      total += std::sqrt(q);
    }
  return total;
}

double fm2d_flock_score(const SystemState& s) {
  const int n = s.num_agents, d = s.dim;
  std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
  double speeds = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* v = &s.v[static_cast<std::size_t>(i * d)];
    for (int c = 0; c < d; ++c) sum[static_cast<std::size_t>(c)] += v[c];
    speeds += norm(v, d);
  }
  if (speeds == 0.0) return kNaN;
  return norm(sum.data(), d) / speeds;
}

double fm2d_mill_score(const SystemState& s) {
  const int n = s.num_agents, d = s.dim;
  std::vector<double> cm(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) cm[static_cast<std::size_t>(c)] += s.x[static_cast<std::size_t>(i * d + c)] / n;
  double num = 0.0, den = 0.0;
  std::vector<double> rel(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) rel[static_cast<std::size_t>(c)] = s.x[static_cast<std::size_t>(i * d + c)] - cm[static_cast<std::size_t>(c)];
    const double* v = &s.v[static_cast<std::size_t>(i * d)];
    const auto cr = cross(rel.data(), v, d);
    num += norm(cr.data(), 3);
    den += norm(rel.data(), d) * norm(v, d);
  }
  if (den == 0.0) return kNaN;
  return num / den;
}

double fm3d_flock_score(const SystemState& s, double alpha, double beta) {
  const int n = s.num_agents, d = s.dim;
  std::vector<double> vcm(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) vcm[static_cast<std::size_t>(c)] += s.v[static_cast<std::size_t>(i * d + c)] / n;
  double spread = 0.0;
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) diff[static_cast<std::size_t>(c)] = s.v[static_cast<std::size_t>(i * d + c)] - vcm[static_cast<std::size_t>(c)];
    spread += norm(diff.data(), d);
  }
  return 1.0 - spread / (n * std::sqrt(alpha / beta));
}

double fm3d_mill_score(const SystemState& s, const StateDerivative& rhs, const std::vector<double>& masses) {
  const int n = s.num_agents, d = s.dim;
  if (n < 2) return kNaN;
  std::vector<std::array<double, 3>> omega(static_cast<std::size_t>(n), {0.0, 0.0, 0.0});
  std::vector<double> force(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    const double* v = &s.v[static_cast<std::size_t>(i * d)];
    for (int c = 0; c < d; ++c) force[static_cast<std::size_t>(c)] = masses[static_cast<std::size_t>(i)] * rhs.v[static_cast<std::size_t>(i * d + c)];
    const double den = norm(v, d) * norm(force.data(), d);
    if (den == 0.0) return kNaN;
    auto cr = cross(v, force.data(), d);
    for (double& c : cr) c /= den;
    omega[static_cast<std::size_t>(i)] = cr;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        const auto& a = omega[static_cast<std::size_t>(i)];
        const auto& b = omega[static_cast<std::size_t>(j)];
        total += a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
      }
  return total / (static_cast<double>(n) * (n - 1));
}

EmergentScore score_emergent(const ScoreContext& ctx, const Trajectory& run) {
  if (run.states.empty()) throw std::invalid_argument("cannot score an empty run");
  const SystemState& fin = run.states.back();
  const int n = fin.num_agents, d = fin.dim;
  EmergentScore sc;
  sc.model = ctx.model;
  const std::string& m = ctx.model;
  if (m == "od") {
    const auto cl = detect_clusters(fin, 0.01);
    sc.clusters = cl.count();
    sc.centers = cl.centers;
    sc.separation_violated = cl.separation_violated;
    if (!ctx.system) throw std::invalid_argument("clustering score needs the system to measure agent speeds");
    const auto rhs = eval_rhs(*ctx.system, fin);
    for (int i = 0; i < n; ++i) sc.max_speed = std::max(sc.max_speed, norm(&rhs.x[static_cast<std::size_t>(i * d)], d));
    sc.event = sc.clusters > 1 && sc.max_speed < 1e-4;
  } else if (m == "cs" || m == "fm2d" || m == "fm3d") {
    sc.v_cm.assign(static_cast<std::size_t>(d), 0.0);
    double total_mass = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mi = ctx.system ? ctx.system->masses[static_cast<std::size_t>(i)] : 1.0;
      total_mass += mi;
      for (int c = 0; c < d; ++c) sc.v_cm[static_cast<std::size_t>(c)] += mi * fin.v[static_cast<std::size_t>(i * d + c)];
    }
    for (double& c : sc.v_cm) c /= total_mass;
    if (m == "cs") {
      sc.i_flock = cs_flock_score(fin);
      sc.event = sc.i_flock < 0.1;
    } else if (m == "fm2d") {
      sc.i_flock = fm2d_flock_score(fin);
      sc.i_mill = fm2d_mill_score(fin);
      sc.i_s = sc.i_flock - sc.i_mill;
      sc.defined = std::isfinite(sc.i_s);
      sc.event = sc.defined && sc.i_s <= -0.5;
    } else {
      if (!ctx.system) throw std::invalid_argument("milling score needs the system to evaluate accelerations");
      sc.i_flock = fm3d_flock_score(fin, ctx.params.get("alpha"), ctx.params.get("beta"));
      const auto rhs = eval_rhs(*ctx.system, fin);
      sc.i_mill = fm3d_mill_score(fin, rhs, ctx.system->masses);
      sc.i_s = sc.i_flock - sc.i_mill;
      sc.defined = std::isfinite(sc.i_s);
      sc.event = sc.defined && sc.i_s <= -0.5;
    }
  } else if (m == "sod") {
    double mean = 0.0, peak = 0.0;
    for (double x : fin.xi) {
      mean += x;
      peak = std::max(peak, std::abs(x));
    }
    mean /= n;
    double var = 0.0;
    for (double x : fin.xi) var += (x - mean) * (x - mean);
    var /= n;
    // below the integrator's resolution the spread is indistinguishable from zero
    const double floor = std::pow(ctx.rtol * (1.0 + peak), 2);
    sc.phase_mean = mean;
    sc.phase_var = var < floor ? 0.0 : var;
    sc.event = sc.phase_var < 0.01;
  } else if (m == "gss") {
    const int planets = n - 1;
    sc.energy_mean.assign(static_cast<std::size_t>(planets), 0.0);
    sc.energy_var.assign(static_cast<std::size_t>(planets), 0.0);
    const double count = static_cast<double>(run.states.size());
    sc.event = true;
    for (int p = 1; p <= planets; ++p) {
      double s = 0.0, s2 = 0.0;
      std::vector<double> e;
      e.reserve(run.states.size());
      for (const auto& st : run.states) e.push_back(gss_planet_energy(ctx.params, st, p));
      for (double x : e) s += x;
      const double mean = s / count;
      for (double x : e) s2 += (x - mean) * (x - mean);
      sc.energy_mean[static_cast<std::size_t>(p - 1)] = mean;
      sc.energy_var[static_cast<std::size_t>(p - 1)] = s2 / count;
      if (!(s2 / count < 1e-2)) sc.event = false;
    }
  } else {
    throw std::invalid_argument("no emergent score defined for model " + m);
  }
  return sc;
}

// ---------------------------------------------------------------- confusion

ConfusionMatrix confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("event lists differ in length");
  if (truth.empty()) throw std::invalid_argument("confusion matrix needs at least one run");
  int c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t k = 0; k < truth.size(); ++k) ++c[truth[k] ? 1 : 0][predicted[k] ? 1 : 0];
  const double scale = 100.0 / static_cast<double>(truth.size());
  ConfusionMatrix m;
  m.p11 = c[0][0] * scale;
  m.p12 = c[0][1] * scale;
  m.p21 = c[1][0] * scale;
  m.p22 = c[1][1] * scale;
  m.runs = static_cast<int>(truth.size());
  return m;
}

ConfusionStats confusion_stats(const ConfusionMatrix& m) {
  ConfusionStats s;
  if (m.runs == 0) return s;
  s.accuracy = (m.p11 + m.p22) / (m.p11 + m.p12 + m.p21 + m.p22);
  if (m.p21 + m.p22 > 0.0) s.precision = m.p22 / (m.p21 + m.p22);
  if (m.p12 + m.p22 > 0.0) s.recall = m.p22 / (m.p12 + m.p22);
  if (s.precision && s.recall && *s.precision + *s.recall > 0.0)
    s.f_score = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
  return s;
}

double agreement(const ConfusionMatrix& m) { return (m.p11 + m.p22) / 100.0; }

// ---------------------------------------------------------------- pattern indicators

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  out.count = static_cast<int>(v.size());
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double s = 0.0;
    for (double x : v) s += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(s / static_cast<double>(v.size() - 1));
  }
  return out;
}

double relative_error(double truth, double pred) {
  const double diff = std::abs(truth - pred);
  return truth == 0.0 ? diff : diff / std::abs(truth);
}

double relative_error(const std::vector<double>& truth, const std::vector<double>& pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("vectors differ in length");
  double dn = 0.0, tn = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    dn += (truth[k] - pred[k]) * (truth[k] - pred[k]);
    tn += truth[k] * truth[k];
  }
  return tn == 0.0 ? std::sqrt(dn) : std::sqrt(dn / tn);
}

PatternScores pattern_indicators(const std::string& model, const std::vector<EmergentScore>& truth,
                                 const std::vector<EmergentScore>& predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("runs must be paired");
  std::vector<double> a, b;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto& t = truth[k];
    const auto& p = predicted[k];
    if (!t.defined || !p.defined) continue;
    if (model == "od") {
      a.push_back(t.clusters == p.clusters ? 1.0 : 0.0);
      b.push_back(hausdorff_distance(t.centers, p.centers));
    } else if (model == "cs") {
      a.push_back(relative_error(t.i_flock, p.i_flock));
      b.push_back(relative_error(t.v_cm, p.v_cm));
    } else if (model == "fm2d" || model == "fm3d") {
      a.push_back(relative_error(t.i_s, p.i_s));
      b.push_back(relative_error(std::vector<double>{t.i_flock, t.i_mill}, std::vector<double>{p.i_flock, p.i_mill}));
    } else if (model == "sod") {
      a.push_back(relative_error(t.phase_var, p.phase_var));
      b.push_back(relative_error(t.phase_mean, p.phase_mean));
    } else if (model == "gss") {
      a.push_back(relative_error(t.energy_var, p.energy_var));
      b.push_back(relative_error(t.energy_mean, p.energy_mean));
    } else {
      throw std::invalid_argument("no pattern indicators defined for model " + model);
    }
  }
  return PatternScores{model, mean_std(a), mean_std(b)};
}

}  // namespace colearn
