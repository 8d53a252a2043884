#include "colearn/decoupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace colearn {

CoupledSamples sample_coupled_kernels(const KernelEstimate& est, const ChannelMeasures& rho) {
  const int kt = est.hypothesis.num_types;
  if (kt < 2) throw std::invalid_argument("decoupling needs a central body and at least one other body");
  struct Row {
    double r;
    int body;
  };
  std::vector<Row> rows;
  CoupledSamples s;
  s.num_bodies = kt;
  s.r_lo = 1e300;
  s.r_hi = -1e300;
  for (int k = 1; k < kt; ++k) {
    const Basis* b = est.hypothesis.get(Channel::energy, 0, k);
    if (!b) throw std::invalid_argument("missing learned kernel between the central body and body " + std::to_string(k));
    s.r_lo = std::min(s.r_lo, b->spec().domain.r.lo);
    s.r_hi = std::max(s.r_hi, b->spec().domain.r.hi);
    for (double r : b->interval_centers()) rows.push_back({r, k});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.r < b.r; });
  for (const auto& row : rows) {
    if (!s.radii.empty() && !(row.r > s.radii.back())) continue;  // keep radii strictly increasing
    const EmpiricalMeasure& m = rho.at(0, row.body);
    const int bin = m.is_zero() ? -1 : m.locate(row.r);
    s.radii.push_back(row.r);
    s.body.push_back(row.body);
    s.weight.push_back(bin < 0 ? 0.0 : m.mass[static_cast<std::size_t>(bin)]);
    s.central_on.push_back(est.eval(Channel::energy, row.body, 0, row.r));
    s.on_central.push_back(est.eval(Channel::energy, 0, row.body, row.r));
  }
  if (std::accumulate(s.weight.begin(), s.weight.end(), 0.0) <= 0.0)
    throw std::invalid_argument("measures carry no mass at any query radius");
  return s;
}

namespace {

double f1_value(const CoupledSamples& s, const std::vector<double>& beta, const std::vector<double>& phi) {
  double f = 0.0;
  for (std::size_t q = 0; q < s.radii.size(); ++q) {
    const double a = s.central_on[q] - beta[0] * phi[q];
    const double b = s.on_central[q] - beta[static_cast<std::size_t>(s.body[q])] * phi[q];
    f += s.weight[q] * (a * a + b * b);
  }
  return f;
}

// beta_0 and the per-body betas given a profile; nonnegative.
void update_betas(const CoupledSamples& s, const std::vector<double>& phi, std::vector<double>& beta) {
  const std::size_t kt = static_cast<std::size_t>(s.num_bodies);
  std::vector<double> num(kt, 0.0), den(kt, 0.0);
  double num0 = 0.0, den0 = 0.0;
  for (std::size_t q = 0; q < s.radii.size(); ++q) {
    const double w = s.weight[q];
    num0 += w * s.central_on[q] * phi[q];
    den0 += w * phi[q] * phi[q];
    num[static_cast<std::size_t>(s.body[q])] += w * s.on_central[q] * phi[q];
    den[static_cast<std::size_t>(s.body[q])] += w * phi[q] * phi[q];
  }
  if (den0 > 0.0) beta[0] = std::max(0.0, num0 / den0);
  for (std::size_t k = 1; k < kt; ++k)
    if (den[k] > 0.0) beta[k] = std::max(0.0, num[k] / den[k]);
}

}  // namespace

ProfileFit fit_profile(const CoupledSamples& s, int max_sweeps, double tol) {
  const std::size_t nq = s.radii.size();
  ProfileFit fit;
  fit.beta.assign(static_cast<std::size_t>(s.num_bodies), 0.0);
  fit.beta[0] = 1.0;
  fit.profile = s.central_on;
  update_betas(s, fit.profile, fit.beta);
  double prev = f1_value(s, fit.beta, fit.profile);
  const double wsum = std::accumulate(s.weight.begin(), s.weight.end(), 0.0);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double b0 = fit.beta[0], bk = fit.beta[static_cast<std::size_t>(s.body[q])];
      const double den = b0 * b0 + bk * bk;
      if (den > 0.0) fit.profile[q] = (b0 * s.central_on[q] + bk * s.on_central[q]) / den;
    }
    update_betas(s, fit.profile, fit.beta);
    double ms = 0.0;
    for (std::size_t q = 0; q < nq; ++q) ms += s.weight[q] * fit.profile[q] * fit.profile[q];
    const double scale = std::sqrt(ms / wsum);
    if (scale > 0.0) {
      for (double& p : fit.profile) p /= scale;
      for (double& b : fit.beta) b *= scale;
    }
    const double f = f1_value(s, fit.beta, fit.profile);
    fit.objective.push_back(f);
    fit.sweeps = sweep + 1;
    const bool done = f == 0.0 || (prev - f) <= tol * prev;
    prev = f;
    if (done) break;
  }
  return fit;
}

double SplineFit::operator()(double r) const {
  return basis.combine(std::span<const double>(coeffs.data(), static_cast<std::size_t>(coeffs.size())), r);
}

SplineFit extend_profile(const std::vector<double>& radii, const std::vector<double>& values, double lo, double hi,
                         double lambda) {
  const int q = static_cast<int>(radii.size());
  if (q < 3) throw std::invalid_argument("profile extension needs at least three samples");
  if (values.size() != radii.size()) throw std::invalid_argument("radii and values differ in length");
  if (!(lambda >= 0.0)) throw std::invalid_argument("roughness weight must be nonnegative");
  SplineFit fit{Basis(BasisSpec{BasisKind::bspline2, q, 0, LearningDomain{Interval{lo, hi}, std::nullopt}}),
                Eigen::VectorXd(), lambda};
  Eigen::MatrixXd gram = lambda * fit.basis.roughness_matrix();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
  int idx[Basis::kMaxSupport];
  double val[Basis::kMaxSupport];
  for (int p = 0; p < q; ++p) {
    const int m = fit.basis.nonzero(radii[static_cast<std::size_t>(p)], 0.0, idx, val);
    for (int a = 0; a < m; ++a) {
      rhs(idx[a]) += val[a] * values[static_cast<std::size_t>(p)];
      for (int b = 0; b < m; ++b) gram(idx[a], idx[b]) += val[a] * val[b];
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw std::logic_error("regularized spline system is not positive definite");
  fit.coeffs = llt.solve(rhs);
  return fit;
}

BetaRescale rescale_betas(const CoupledSamples& s, const SplineFit& profile) {
  const std::size_t kt = static_cast<std::size_t>(s.num_bodies);
  std::vector<double> cross_c(kt, 0.0), energy_c(kt, 0.0), cross_o(kt, 0.0), prof2(kt, 0.0);
  for (std::size_t q = 0; q < s.radii.size(); ++q) {
    const std::size_t k = static_cast<std::size_t>(s.body[q]);
    const double w = s.weight[q];
    const double p = profile(s.radii[q]);
    cross_c[k] += w * s.central_on[q] * p;
    energy_c[k] += w * s.central_on[q] * s.central_on[q];
    cross_o[k] += w * s.on_central[q] * p;
    prof2[k] += w * p * p;
  }
  BetaRescale out;
  out.beta.assign(kt, 0.0);
  out.clamped.assign(kt, false);
  double num0 = 0.0, den0 = 0.0;
  for (std::size_t k = 1; k < kt; ++k) {
    if (energy_c[k] > 0.0) {
      num0 += cross_c[k] / energy_c[k];
      den0 += prof2[k] / energy_c[k];
    }
    if (prof2[k] > 0.0) {
      const double b = cross_o[k] / prof2[k];
      out.clamped[k] = b < 0.0;
      out.beta[k] = std::max(0.0, b);
    }
  }
  if (den0 > 0.0) {
    const double b = num0 / den0;
    out.clamped[0] = b < 0.0;
    out.beta[0] = std::max(0.0, b);
  }
  return out;
}

MassRecovery recover_masses(const std::vector<double>& beta, double gravity, MassGauge gauge,
                            const CoupledSamples& s, const SplineFit& profile, double known_central_mass) {
  if (!(gravity > 0.0)) throw std::invalid_argument("gravitational constant must be positive");
  MassRecovery out;
  out.gauge = gauge;
  if (gauge == MassGauge::profile_normalization) {
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < s.radii.size(); ++q) {
      const double inv3 = 1.0 / (s.radii[q] * s.radii[q] * s.radii[q]);
      num += s.weight[q] * profile(s.radii[q]) * inv3;
      den += s.weight[q] * inv3 * inv3;
    }
    if (!(num > 0.0 && den > 0.0)) throw std::invalid_argument("profile does not decay like an inverse cube");
    out.c2 = num / den;
    out.c1 = gravity / out.c2;
  } else {
    if (!(known_central_mass > 0.0 && beta.at(0) > 0.0))
      throw std::invalid_argument("central-mass gauge needs a positive central mass and coupling");
    out.c1 = beta[0] / known_central_mass;
    out.c2 = gravity / out.c1;
  }
  out.masses.resize(beta.size());
  for (std::size_t k = 0; k < beta.size(); ++k) out.masses[k] = beta[k] / out.c1;
  return out;
}

Decomposition decouple(const KernelEstimate& est, const ChannelMeasures& rho, double gravity, MassGauge gauge,
                       double known_central_mass, double lambda) {
  Decomposition d;
  d.samples = sample_coupled_kernels(est, rho);
  d.step1 = fit_profile(d.samples);
  d.step2 = extend_profile(d.samples.radii, d.step1.profile, d.samples.r_lo, d.samples.r_hi, lambda);
  d.step3 = rescale_betas(d.samples, d.step2);
  d.masses = recover_masses(d.step3.beta, gravity, gauge, d.samples, d.step2, known_central_mass);
  return d;
}

double decoupled_kernel(const Decomposition& dec, int k, int kp, double r) {
  if (k == kp) return 0.0;
  const double beta = dec.step3.beta.at(static_cast<std::size_t>(kp));
  // inside the fitted range use the smooth profile, outside its inverse-cube tail
  if (r >= dec.samples.r_lo && r <= dec.samples.r_hi) return beta * dec.step2(r);
  return beta * dec.masses.c2 / (r * r * r);
}

}  // namespace colearn
