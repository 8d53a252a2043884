#include "colearn/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "colearn/dynamics.hpp"

namespace colearn {

// ---------------------------------------------------------------- derivatives

std::vector<double> differentiate_series(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("finite differences need at least three samples");
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  std::vector<double> d(n);
  const double inv = 1.0 / (2.0 * h);
  d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) * inv;
  for (std::size_t l = 1; l + 1 < n; ++l) d[l] = (y[l + 1] - y[l - 1]) * inv;
  d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) * inv;
  return d;
}

namespace {

// Differentiates member `field` of every state into the same member of `out`.
void difference_field(const std::vector<SystemState>& states, double h, std::vector<double> SystemState::*field,
                      std::vector<StateDerivative>& out) {
  const std::size_t nl = states.size();
  const std::size_t width = (states[0].*field).size();
  std::vector<double> series(nl);
  for (std::size_t c = 0; c < width; ++c) {
    for (std::size_t l = 0; l < nl; ++l) series[l] = (states[l].*field)[c];
    const auto d = differentiate_series(series, h);
    for (std::size_t l = 0; l < nl; ++l) (out[l].*field)[c] = d[l];
  }
}

}  // namespace

void approximate_derivatives(Order order, Trajectory& traj) {
  if (traj.derivatives) return;
  traj.validate();
  if (traj.size() < 3) throw std::invalid_argument("finite differences need at least three time samples");
  const double h = (traj.times.back() - traj.times.front()) / static_cast<double>(traj.size() - 1);
  const SystemState& s0 = traj.states.front();
  std::vector<StateDerivative> out(traj.size(), SystemState(s0.num_agents, s0.dim, !s0.v.empty(), !s0.xi.empty()));
  if (order == Order::first) {
    difference_field(traj.states, h, &SystemState::x, out);
  } else {
    if (s0.v.empty()) throw std::invalid_argument("second-order trajectory without velocities");
    for (std::size_t l = 0; l < traj.size(); ++l) out[l].x = traj.states[l].v;
    difference_field(traj.states, h, &SystemState::v, out);
  }
  if (!s0.xi.empty()) difference_field(traj.states, h, &SystemState::xi, out);
  traj.derivatives = std::move(out);
}

// ---------------------------------------------------------------- hypothesis

HypothesisSet::HypothesisSet(int k) : num_types(k) {
  for (auto& v : bases) v.assign(static_cast<std::size_t>(k * k), std::nullopt);
}

const Basis* HypothesisSet::get(Channel c, int k, int kp) const {
  const auto& slot = bases[static_cast<std::size_t>(channel_index(c))][static_cast<std::size_t>(k * num_types + kp)];
  return slot ? &*slot : nullptr;
}

void HypothesisSet::set(Channel c, int k, int kp, Basis b) {
  bases[static_cast<std::size_t>(channel_index(c))][static_cast<std::size_t>(k * num_types + kp)] = std::move(b);
}

bool HypothesisSet::channel_used(Channel c) const {
  for (const auto& b : bases[static_cast<std::size_t>(channel_index(c))])
    if (b) return true;
  return false;
}

int HypothesisSet::channel_size(Channel c) const {
  int n = 0;
  for (const auto& b : bases[static_cast<std::size_t>(channel_index(c))])
    if (b) n += b->size();
  return n;
}

DomainScanner::DomainScanner(const SystemSpec& spec) : spec_(&spec) {
  for (auto& r : ranges_) r.assign(static_cast<std::size_t>(spec.num_types * spec.num_types), Range{});
}

void DomainScanner::add_state(const SystemState& st) {
  const auto& spec = *spec_;
  const int n = spec.num_agents, d = spec.dim, kt = spec.num_types;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double r2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = st.x[static_cast<std::size_t>(j * d + c)] - st.x[static_cast<std::size_t>(i * d + c)];
        r2 += t * t;
      }
      const double r = std::sqrt(r2);
      const std::size_t pair =
          static_cast<std::size_t>(spec.type_of[static_cast<std::size_t>(i)] * kt + spec.type_of[static_cast<std::size_t>(j)]);
      for (Channel c : kAllChannels) {
        const auto& ch = spec.channel(c);
        if (!ch.active) continue;
        Range& g = ranges_[static_cast<std::size_t>(channel_index(c))][pair];
        g.seen = true;
        g.r_lo = std::min(g.r_lo, r);
        g.r_hi = std::max(g.r_hi, r);
        if (ch.two_variable) {
          const double s = ch.feature(st, i, j);
          g.s_lo = std::min(g.s_lo, s);
          g.s_hi = std::max(g.s_hi, s);
        }
      }
    }
  }
}

void DomainScanner::add(const Trajectory& traj) {
  for (const auto& s : traj.states) add_state(s);
}

void DomainScanner::merge(const DomainScanner& o) {
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < ranges_[c].size(); ++p) {
      Range& a = ranges_[c][p];
      const Range& b = o.ranges_[c][p];
      if (!b.seen) continue;
      a.seen = true;
      a.r_lo = std::min(a.r_lo, b.r_lo);
      a.r_hi = std::max(a.r_hi, b.r_hi);
      a.s_lo = std::min(a.s_lo, b.s_lo);
      a.s_hi = std::max(a.s_hi, b.s_hi);
    }
}

std::optional<LearningDomain> DomainScanner::domain(Channel c, int k, int kp, double padding) const {
  const Range& g = ranges_[static_cast<std::size_t>(channel_index(c))][static_cast<std::size_t>(k * spec_->num_types + kp)];
  if (!g.seen) return std::nullopt;
  const double r[2] = {g.r_lo, g.r_hi};
  if (spec_->channel(c).two_variable) {
    const double s[2] = {g.s_lo, g.s_hi};
    return domain_from_data(r, s, padding);
  }
  return domain_from_data(r, padding);
}

double DomainScanner::min_distance() const {
  double m = 1e300;
  for (const auto& ch : ranges_)
    for (const auto& g : ch)
      if (g.seen) m = std::min(m, g.r_lo);
  return m;
}

HypothesisSet build_hypothesis(const SystemSpec& spec, const DomainScanner& scanner, const ChannelChoices& choices) {
  HypothesisSet hyp(spec.num_types);
  for (Channel c : kAllChannels) {
    const auto& ch = spec.channel(c);
    const auto& choice = choices[static_cast<std::size_t>(channel_index(c))];
    if (!ch.active) continue;
    if (!choice) throw std::invalid_argument(std::string("no basis chosen for active channel ") + to_string(c));
    const bool tensor = choice->kind == BasisKind::tensor_pw_linear;
    if (tensor != ch.two_variable)
      throw std::invalid_argument(std::string("basis arity does not match the kernel arity for channel ") + to_string(c));
    for (int k = 0; k < spec.num_types; ++k)
      for (int kp = 0; kp < spec.num_types; ++kp) {
        if (spec.pair_count(k, kp) == 0) continue;
        auto dom = scanner.domain(c, k, kp, choice->padding);
        if (!dom) continue;
        hyp.set(c, k, kp, Basis(BasisSpec{choice->kind, choice->count_r, choice->count_s, *dom}));
      }
  }
  return hyp;
}

// ---------------------------------------------------------------- assembly

double LinearSystem::loss(const Eigen::VectorXd& alpha) const {
  return alpha.dot(A * alpha) - 2.0 * alpha.dot(b) + rhs_energy;
}

Assembler::Assembler(const SystemSpec& spec, const HypothesisSet& hyp) : spec_(&spec), hyp_(&hyp) {
  const int kt = spec.num_types;
  if (hyp.num_types != kt) throw std::invalid_argument("hypothesis set does not match the number of types");
  motion_offset_.assign(static_cast<std::size_t>(3 * kt * kt), -1);
  phase_offset_.assign(static_cast<std::size_t>(3 * kt * kt), -1);
  for (Channel c : kAllChannels) {
    const auto& ch = spec.channel(c);
    if (!ch.active) continue;
    const bool phase = c == Channel::environment;
    for (int k = 0; k < kt; ++k)
      for (int kp = 0; kp < kt; ++kp) {
        if (spec.pair_count(k, kp) == 0) continue;
        const Basis* b = hyp.get(c, k, kp);
        if (!b) throw std::invalid_argument(std::string("missing basis for an active pair in channel ") + to_string(c));
        if (b->two_variable() != ch.two_variable)
          throw std::invalid_argument("basis arity does not match the kernel arity");
        const std::size_t slot = static_cast<std::size_t>(channel_index(c) * kt * kt + k * kt + kp);
        int& size = phase ? phase_size_ : motion_size_;
        (phase ? phase_offset_ : motion_offset_)[slot] = size;
        (phase ? phase_blocks_ : motion_blocks_).push_back(ColumnBlock{c, k, kp, size, b->size()});
        size += b->size();
      }
  }
  a_motion_ = Eigen::MatrixXd::Zero(motion_size_, motion_size_);
  b_motion_ = Eigen::VectorXd::Zero(motion_size_);
  a_phase_ = Eigen::MatrixXd::Zero(phase_size_, phase_size_);
  b_phase_ = Eigen::VectorXd::Zero(phase_size_);
}

namespace {

// Sparse accumulator for one agent's rows of the design matrix: a width-vector
// per touched column, zeroed lazily.
struct RowAccumulator {
  int width = 1;
  std::vector<double> values;  // columns * width
  std::vector<char> used;
  std::vector<int> touched;

  void reset(int columns, int w) {
    width = w;
    values.assign(static_cast<std::size_t>(columns) * static_cast<std::size_t>(w), 0.0);
    used.assign(static_cast<std::size_t>(columns), 0);
    touched.clear();
  }
  double* column(int c) {
    if (!used[static_cast<std::size_t>(c)]) {
      used[static_cast<std::size_t>(c)] = 1;
      touched.push_back(c);
    }
    return &values[static_cast<std::size_t>(c) * static_cast<std::size_t>(width)];
  }
  // A += w G'G, b += w G'rho, over touched columns; then clears.
  void flush(double w, const double* rho, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
    const std::size_t t = touched.size();
    for (std::size_t p = 0; p < t; ++p) {
      const int cp = touched[p];
      const double* gp = &values[static_cast<std::size_t>(cp) * static_cast<std::size_t>(width)];
      double bp = 0.0;
      for (int c = 0; c < width; ++c) bp += gp[c] * rho[c];
      b(cp) += w * bp;
      for (std::size_t q = p; q < t; ++q) {
        const int cq = touched[q];
        const double* gq = &values[static_cast<std::size_t>(cq) * static_cast<std::size_t>(width)];
        double s = 0.0;
        for (int c = 0; c < width; ++c) s += gp[c] * gq[c];
        s *= w;
        a(cp, cq) += s;
        if (cq != cp) a(cq, cp) += s;
      }
    }
    for (int c : touched) {
      used[static_cast<std::size_t>(c)] = 0;
      std::fill_n(&values[static_cast<std::size_t>(c) * static_cast<std::size_t>(width)], width, 0.0);
    }
    touched.clear();
  }
};

}  // namespace

void Assembler::add(const Trajectory& traj) {
  if (!traj.derivatives) throw std::invalid_argument("assembly needs derivatives; approximate them first");
  const auto& spec = *spec_;
  const auto& hyp = *hyp_;
  const int n = spec.num_agents, d = spec.dim, kt = spec.num_types;
  const bool second = spec.order == Order::second;
  const auto counts = spec.type_counts();

  const bool use_energy = spec.energy.active, use_align = spec.alignment.active, use_env = spec.environment.active;
  RowAccumulator motion_row, phase_row;
  motion_row.reset(motion_size_, d);
  phase_row.reset(phase_size_, 1);
  StateDerivative nc;
  std::vector<double> rho(static_cast<std::size_t>(d));
  int idx[Basis::kMaxSupport];
  double val[Basis::kMaxSupport];

  for (std::size_t l = 0; l < traj.size(); ++l) {
    const SystemState& st = traj.states[l];
    const StateDerivative& der = (*traj.derivatives)[l];
    check_state(spec, st);
    eval_noncollective(spec, st, nc);
    for (int i = 0; i < n; ++i) {
      const int ki = spec.type_of[static_cast<std::size_t>(i)];
      const double w = 1.0 / counts[static_cast<std::size_t>(ki)];
      const double inv_mass = second ? 1.0 / spec.masses[static_cast<std::size_t>(i)] : 1.0;
      const double* xi_ = &st.x[static_cast<std::size_t>(i * d)];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        ++pair_evals_;
        const int kj = spec.type_of[static_cast<std::size_t>(j)];
        const double scale = 1.0 / counts[static_cast<std::size_t>(kj)];
        const double* xj = &st.x[static_cast<std::size_t>(j * d)];
        double r2 = 0.0;
        for (int c = 0; c < d; ++c) r2 += (xj[c] - xi_[c]) * (xj[c] - xi_[c]);
        const double r = std::sqrt(r2);
        const std::size_t pair = static_cast<std::size_t>(ki * kt + kj);
        if (use_energy) {
          const int off = motion_offset_[static_cast<std::size_t>(channel_index(Channel::energy) * kt * kt) + pair];
          if (off >= 0) {
            const double s = spec.energy.two_variable ? spec.energy.feature(st, i, j) : 0.0;
            const Basis* b = hyp.get(Channel::energy, ki, kj);
            const int m = b->nonzero(r, s, idx, val);
            for (int q = 0; q < m; ++q) {
              double* col = motion_row.column(off + idx[q]);
              const double f = val[q] * scale * inv_mass;
              for (int c = 0; c < d; ++c) col[c] += f * (xj[c] - xi_[c]);
            }
          }
        }
        if (use_align) {
          const int off = motion_offset_[static_cast<std::size_t>(channel_index(Channel::alignment) * kt * kt) + pair];
          if (off >= 0) {
            const double s = spec.alignment.two_variable ? spec.alignment.feature(st, i, j) : 0.0;
            const Basis* b = hyp.get(Channel::alignment, ki, kj);
            const int m = b->nonzero(r, s, idx, val);
            const double* vi = &st.v[static_cast<std::size_t>(i * d)];
            const double* vj = &st.v[static_cast<std::size_t>(j * d)];
            for (int q = 0; q < m; ++q) {
              double* col = motion_row.column(off + idx[q]);
              const double f = val[q] * scale * inv_mass;
              for (int c = 0; c < d; ++c) col[c] += f * (vj[c] - vi[c]);
            }
          }
        }
        if (use_env) {
          const int off = phase_offset_[static_cast<std::size_t>(channel_index(Channel::environment) * kt * kt) + pair];
          if (off >= 0) {
            const double s = spec.environment.two_variable ? spec.environment.feature(st, i, j) : 0.0;
            const Basis* b = hyp.get(Channel::environment, ki, kj);
            const int m = b->nonzero(r, s, idx, val);
            double f0 = scale;
            if (second) f0 *= st.xi[static_cast<std::size_t>(j)] - st.xi[static_cast<std::size_t>(i)];
            for (int q = 0; q < m; ++q) *phase_row.column(off + idx[q]) += f0 * val[q];
          }
        }
      }
      if (motion_size_ > 0) {
        const std::vector<double>& target = second ? der.v : der.x;
        const std::vector<double>& force = second ? nc.v : nc.x;
        double e = 0.0;
        for (int c = 0; c < d; ++c) {
          rho[static_cast<std::size_t>(c)] =
              target[static_cast<std::size_t>(i * d + c)] - force[static_cast<std::size_t>(i * d + c)];
          e += rho[static_cast<std::size_t>(c)] * rho[static_cast<std::size_t>(c)];
        }
        e_motion_ += w * e;
        motion_row.flush(w, rho.data(), a_motion_, b_motion_);
      }
      if (phase_size_ > 0) {
        const double rp = der.xi[static_cast<std::size_t>(i)] - nc.xi[static_cast<std::size_t>(i)];
        e_phase_ += w * rp * rp;
        phase_row.flush(w, &rp, a_phase_, b_phase_);
      }
    }
    ++samples_;
  }
}

void Assembler::merge(const Assembler& o) {
  if (o.motion_size_ != motion_size_ || o.phase_size_ != phase_size_)
    throw std::invalid_argument("cannot merge assemblers over different hypothesis sets");
  a_motion_ += o.a_motion_;
  b_motion_ += o.b_motion_;
  a_phase_ += o.a_phase_;
  b_phase_ += o.b_phase_;
  e_motion_ += o.e_motion_;
  e_phase_ += o.e_phase_;
  samples_ += o.samples_;
  pair_evals_ += o.pair_evals_;
}

namespace {
LinearSystem normalized(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double e, std::uint64_t samples,
                        const std::vector<ColumnBlock>& blocks) {
  LinearSystem s;
  const double inv = samples > 0 ? 1.0 / static_cast<double>(samples) : 0.0;
  s.A = a * inv;
  s.b = b * inv;
  s.rhs_energy = e * inv;
  s.samples = static_cast<double>(samples);
  s.blocks = blocks;
  return s;
}
}  // namespace

LinearSystem Assembler::motion_system() const {
  return normalized(a_motion_, b_motion_, e_motion_, samples_, motion_blocks_);
}

LinearSystem Assembler::phase_system() const {
  return normalized(a_phase_, b_phase_, e_phase_, samples_, phase_blocks_);
}

LinearSystem merge_systems(const std::vector<LinearSystem>& systems) {
  if (systems.empty()) throw std::invalid_argument("nothing to merge");
  LinearSystem out;
  const int n = systems.front().size();
  out.A = Eigen::MatrixXd::Zero(n, n);
  out.b = Eigen::VectorXd::Zero(n);
  out.blocks = systems.front().blocks;
  double total = 0.0;
  for (const auto& s : systems) {
    if (s.size() != n) throw std::invalid_argument("cannot merge systems of different sizes");
    out.A += s.samples * s.A;
    out.b += s.samples * s.b;
    out.rhs_energy += s.samples * s.rhs_energy;
    total += s.samples;
  }
  if (total > 0.0) {
    out.A /= total;
    out.b /= total;
    out.rhs_energy /= total;
  }
  out.samples = total;
  return out;
}

// ---------------------------------------------------------------- solve

namespace {
std::atomic<std::uint64_t> g_decompositions{0};
}

std::uint64_t decomposition_count() { return g_decompositions.load(); }

Solution solve(const LinearSystem& sys, double tol) {
  const int n = sys.size();
  if (sys.A.rows() != n || sys.A.cols() != n) throw std::invalid_argument("system matrix and right-hand side disagree");
  if (!sys.A.allFinite() || !sys.b.allFinite()) throw std::invalid_argument("system has non-finite entries");
  if (!(tol >= 0.0)) throw std::invalid_argument("truncation tolerance must be nonnegative");
  Solution out;
  out.coeffs = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;
  // A is symmetric positive semidefinite, so its eigen-decomposition is its SVD.
  const Eigen::MatrixXd sym = 0.5 * (sys.A + sys.A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  g_decompositions.fetch_add(1);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen-decomposition failed to converge");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double smax = lam.cwiseAbs().maxCoeff();
  out.largest_singular_value = smax;
  if (smax == 0.0) return out;
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * sys.b;
  Eigen::VectorXd scaled = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(lam(i)) > tol * smax) {
      scaled(i) = proj(i) / lam(i);
      ++out.rank;
    }
  }
  out.coeffs = es.eigenvectors() * scaled;
  return out;
}

// ---------------------------------------------------------------- estimates

KernelEstimate::KernelEstimate(HypothesisSet h) : hypothesis(std::move(h)) {
  const std::size_t kk = static_cast<std::size_t>(hypothesis.num_types * hypothesis.num_types);
  for (Channel c : kAllChannels) {
    auto& v = coeffs[static_cast<std::size_t>(channel_index(c))];
    v.assign(kk, Eigen::VectorXd());
    for (std::size_t p = 0; p < kk; ++p) {
      const auto& b = hypothesis.bases[static_cast<std::size_t>(channel_index(c))][p];
      if (b) v[p] = Eigen::VectorXd::Zero(b->size());
    }
  }
}

bool KernelEstimate::has(Channel c, int k, int kp) const { return hypothesis.get(c, k, kp) != nullptr; }

const Eigen::VectorXd& KernelEstimate::coefficients(Channel c, int k, int kp) const {
  return coeffs[static_cast<std::size_t>(channel_index(c))][static_cast<std::size_t>(k * hypothesis.num_types + kp)];
}

Eigen::VectorXd& KernelEstimate::coefficients(Channel c, int k, int kp) {
  return coeffs[static_cast<std::size_t>(channel_index(c))][static_cast<std::size_t>(k * hypothesis.num_types + kp)];
}

double KernelEstimate::eval(Channel c, int k, int kp, double r, double s) const {
  const Basis* b = hypothesis.get(c, k, kp);
  if (!b) return 0.0;
  const auto& a = coefficients(c, k, kp);
  return b->combine(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())), r, s);
}

double evaluate_kernel(const KernelEstimate& est, int k, int kp, Channel c, double r, double s) {
  return est.eval(c, k, kp, r, s);
}

KernelEstimate make_estimate(const HypothesisSet& hyp, const LinearSystem& motion, const Solution& motion_sol,
                             const LinearSystem& phase, const Solution& phase_sol) {
  KernelEstimate est(hyp);
  auto scatter = [&](const LinearSystem& sys, const Solution& sol) {
    if (sol.coeffs.size() != sys.size()) throw std::invalid_argument("solution size differs from system size");
    for (const auto& blk : sys.blocks) est.coefficients(blk.channel, blk.k, blk.kp) = sol.coeffs.segment(blk.offset, blk.size);
  };
  scatter(motion, motion_sol);
  scatter(phase, phase_sol);
  return est;
}

KernelEstimate solve_estimate(const HypothesisSet& hyp, const LinearSystem& motion, const LinearSystem& phase,
                              double tol) {
  const Solution ms = solve(motion, tol);
  const Solution ps = solve(phase, tol);
  KernelEstimate est = make_estimate(hyp, motion, ms, phase, ps);
  est.provenance.tolerance = tol;
  return est;
}

KernelEstimate merge_estimates(const HypothesisSet& hyp, const std::vector<LinearSystem>& motion,
                               const std::vector<LinearSystem>& phase, double tol) {
  KernelEstimate est = solve_estimate(hyp, merge_systems(motion), merge_systems(phase), tol);
  est.provenance.merge_path = "systems";
  return est;
}

KernelEstimate merge_estimates(const std::vector<KernelEstimate>& estimates) {
  if (estimates.empty()) throw std::invalid_argument("nothing to merge");
  KernelEstimate out = estimates.front();
  for (Channel c : kAllChannels) {
    auto& dst = out.coeffs[static_cast<std::size_t>(channel_index(c))];
    for (std::size_t p = 0; p < dst.size(); ++p) {
      if (dst[p].size() == 0) continue;
      for (std::size_t e = 1; e < estimates.size(); ++e) {
        const auto& src = estimates[e].coeffs[static_cast<std::size_t>(channel_index(c))][p];
        if (src.size() != dst[p].size()) throw std::invalid_argument("estimates live on different hypothesis sets");
        dst[p] += src;
      }
      dst[p] /= static_cast<double>(estimates.size());
    }
  }
  out.provenance.merge_path = "coefficient-average";
  return out;
}

const char* to_string(Extension e) { return e == Extension::zero ? "zero" : "hold-boundary"; }

Extension extension_from_string(const std::string& s) {
  if (s == "zero") return Extension::zero;
  if (s == "hold-boundary") return Extension::hold_boundary;
  throw std::invalid_argument("unknown extension rule: " + s);
}

SystemSpec learned_system(const SystemSpec& reference, std::shared_ptr<const KernelEstimate> est, Extension outside) {
  SystemSpec s = reference;
  s.name = reference.name + "-learned";
  const int kt = reference.num_types;
  for (Channel c : kAllChannels) {
    auto& ch = s.channel(c);
    if (!ch.active) continue;
    for (int k = 0; k < kt; ++k)
      for (int kp = 0; kp < kt; ++kp) {
        const Basis* b = est->hypothesis.get(c, k, kp);
        if (outside == Extension::hold_boundary && b) {
          const LearningDomain dom = b->spec().domain;
          ch.kernels[static_cast<std::size_t>(k * kt + kp)] = [est, c, k, kp, dom](double r, double sv) {
            r = std::clamp(r, dom.r.lo, dom.r.hi);
            if (dom.s) sv = std::clamp(sv, dom.s->lo, dom.s->hi);
            return est->eval(c, k, kp, r, sv);
          };
        } else {
          ch.kernels[static_cast<std::size_t>(k * kt + kp)] = [est, c, k, kp](double r, double sv) {
            return est->eval(c, k, kp, r, sv);
          };
        }
      }
  }
  return s;
}

}  // namespace colearn
