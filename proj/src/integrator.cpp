#include "colearn/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "colearn/dynamics.hpp"

namespace colearn {

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("integrator tolerances must be positive");
  if (rtol < std::numeric_limits<double>::epsilon())
    throw std::invalid_argument("relative tolerance below machine epsilon");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace

FlatSolution integrate_flat(const FlatRhs& rhs, std::vector<double> y, const std::vector<double>& grid,
                            const IntegratorConfig& cfg) {
  cfg.validate();
  FlatSolution sol;
  if (grid.empty()) return sol;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("integration grid must be strictly increasing");

  const std::size_t n = y.size();
  const double t_end = grid.back();
  double t = grid.front();
  sol.samples.reserve(grid.size());
  sol.samples.push_back(y);
  sol.last_good_time = t;
  if (grid.size() == 1) return sol;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  std::vector<double> r1(n), r2(n), r3(n), r4(n), r5(n);

  auto call = [&](double tt, const std::vector<double>& yy, std::vector<double>& out) {
    rhs(tt, yy, out);
    sol.stats.rhs_evals++;
  };
  auto fail = [&](const std::string& msg) {
    sol.ok = false;
    sol.message = msg;
    return sol;
  };

  try {
    call(t, y, k1);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  if (!all_finite(k1)) return fail("non-finite derivative at the initial state");

  const double span = t_end - t;
  const double hmax = cfg.max_step > 0.0 ? std::min(cfg.max_step, span) : span;

  double h = cfg.initial_step;
  if (!(h > 0.0)) {
    // starting step estimate (Hairer, Norsett & Wanner)
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k1[i];
    try {
      call(t + h, ytmp, k2);
    } catch (const std::exception&) {
      std::fill(k2.begin(), k2.end(), 0.0);
    }
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
      const double q = (k2[i] - k1[i]) / sk;
      der2 += q * q;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, hmax});
  }
  if (n == 0) h = span;

  std::size_t next = 1;
  bool last_rejected = false;
  const double eps = std::numeric_limits<double>::epsilon();

  while (next < grid.size()) {
    if (sol.stats.accepted + sol.stats.rejected >= cfg.max_steps) {
      std::ostringstream os;
      os << "step budget of " << cfg.max_steps << " exhausted at t = " << t;
      return fail(os.str());
    }
    if (h < 16.0 * eps * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow at t = " << t;
      return fail(os.str());
    }
    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }

    try {
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      call(t + c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      call(t + c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      call(t + c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      call(t + c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      call(t + h, ytmp, k6);
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      call(t + h, ynew, k7);
    } catch (const std::exception& e) {
      // A failing trial stage is retried with a smaller step; the state at t is still good.
      if (h <= 64.0 * eps * std::max(1.0, std::abs(t))) return fail(e.what());
      h *= 0.25;
      sol.stats.rejected++;
      last_rejected = true;
      if (sol.stats.rejected > cfg.max_steps) return fail(e.what());
      sol.message = e.what();
      continue;
    }

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]) / sk;
      err += ei * ei;
      finite = finite && std::isfinite(ynew[i]) && std::isfinite(k7[i]);
    }
    err = n > 0 ? std::sqrt(err / static_cast<double>(n)) : 0.0;
    if (!finite || !std::isfinite(err)) {
      h *= 0.25;
      sol.stats.rejected++;
      last_rejected = true;
      continue;
    }

    double fac = err > 0.0 ? kSafety * std::pow(err, -0.2) : kFacMax;
    fac = std::clamp(fac, kFacMin, last_rejected ? 1.0 : kFacMax);

    if (err <= 1.0) {
      sol.stats.accepted++;
      // dense output coefficients for this step
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        r1[i] = y[i];
        r2[i] = ydiff;
        r3[i] = bspl;
        r4[i] = ydiff - h * k7[i] - bspl;
        r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      const double t_new = last ? t_end : t + h;
      while (next < grid.size() && grid[next] <= t_new) {
        if (next + 1 == grid.size() && last) {
          sol.samples.push_back(ynew);
        } else {
          const double theta = (grid[next] - t) / h;
          const double theta1 = 1.0 - theta;
          std::vector<double> out(n);
          for (std::size_t i = 0; i < n; ++i)
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
          sol.samples.push_back(std::move(out));
        }
        ++next;
      }
      t = t_new;
      y.swap(ynew);
      k1.swap(k7);
      sol.last_good_time = t;
      last_rejected = false;
      sol.message.clear();
      h = std::min(h * fac, hmax);
    } else {
      sol.stats.rejected++;
      last_rejected = true;
      h *= fac;
    }
  }
  return sol;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t count) {
  if (count < 2) throw std::invalid_argument("a time grid needs at least two points");
  if (!(t1 > t0)) throw std::invalid_argument("time grid end must exceed its start");
  std::vector<double> g(count);
  const double span = t1 - t0;
  for (std::size_t i = 0; i < count; ++i) g[i] = t0 + span * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = t1;
  return g;
}

Trajectory integrate(const SystemSpec& spec, const SystemState& initial, const std::vector<double>& grid,
                     const IntegratorConfig& cfg, IntegrationStats* stats) {
  check_state(spec, initial);
  SystemState work = initial;
  StateDerivative deriv = spec.make_state();
  const FlatRhs f = [&](double, std::span<const double> y, std::span<double> dy) {
    work.unpack(y);
    eval_rhs(spec, work, deriv);
    deriv.pack(dy);
  };
  std::vector<double> y0(initial.flat_size());
  initial.pack(y0);
  FlatSolution sol = integrate_flat(f, std::move(y0), grid, cfg);
  if (stats) *stats = sol.stats;

  Trajectory traj;
  traj.times.assign(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(sol.samples.size()));
  traj.states.reserve(sol.samples.size());
  for (const auto& s : sol.samples) {
    SystemState st = initial;
    st.unpack(s);
    traj.states.push_back(std::move(st));
  }
  if (!sol.ok) {
    std::ostringstream os;
    os << spec.name << ": integration failed (" << sol.message << "), last good time " << sol.last_good_time;
    throw IntegrationError(os.str(), std::move(traj), sol.last_good_time, sol.stats);
  }
  return traj;
}

void attach_exact_derivatives(const SystemSpec& spec, Trajectory& traj) {
  std::vector<StateDerivative> d;
  d.reserve(traj.states.size());
  for (const auto& s : traj.states) d.push_back(eval_rhs(spec, s));
  traj.derivatives = std::move(d);
}

}  // namespace colearn
