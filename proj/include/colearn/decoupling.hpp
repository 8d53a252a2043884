#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "colearn/basis.hpp"
#include "colearn/estimator.hpp"
#include "colearn/measures.hpp"

namespace colearn {

/// Learned kernels coupling the central body (type 0) with every other body,
/// sampled at query radii together with the measure weights there.
///
/// Kernel phi_{k,k'} is the influence of k' on k, so `central_on[k]` samples
/// phi_{k,0} and `on_central[k]` samples phi_{0,k}.
struct CoupledSamples {
  std::vector<double> radii;          // r_q, strictly increasing
  std::vector<int> body;              // body whose distance range contains r_q (1..K-1)
  std::vector<double> weight;         // measure mass at r_q
  std::vector<double> central_on;     // phi_{body,0}(r_q)
  std::vector<double> on_central;     // phi_{0,body}(r_q)
  int num_bodies = 0;                 // K, including the central one
  double r_lo = 0.0, r_hi = 0.0;      // union of the learning domains
};

/// Query radii are the sub-interval centers of the bases of phi_{0,k}; the
/// measure weight is rho_{0,k} mass of the bin containing r_q.
CoupledSamples sample_coupled_kernels(const KernelEstimate& est, const ChannelMeasures& rho);

struct ProfileFit {
  std::vector<double> beta;      // beta_0 .. beta_{K-1}
  std::vector<double> profile;   // phi_m at r_q, unit weighted quadratic mean
  std::vector<double> objective; // f1 after every sweep
  int sweeps = 0;
};

/// Alternating minimization of
///   sum_q w_q (central_on_q - beta_0 phi_q)^2 + w_q (on_central_q - beta_{body(q)} phi_q)^2
/// over beta >= 0 and phi, until the relative decrease is below tol.
ProfileFit fit_profile(const CoupledSamples& samples, int max_sweeps = 500, double tol = 1e-10);

struct SplineFit {
  Basis basis;
  Eigen::VectorXd coeffs;
  double lambda = 1e-3;
  double operator()(double r) const;
};

/// Penalized least squares with Q quadratic clamped B-splines on [lo, hi]:
/// minimizes |Psi a - y|^2 + lambda a'Ra.
SplineFit extend_profile(const std::vector<double>& radii, const std::vector<double>& values, double lo, double hi,
                         double lambda = 1e-3);

struct BetaRescale {
  std::vector<double> beta;
  std::vector<bool> clamped;  // true where the unconstrained solution was negative
};

/// Closed-form betas against the smooth profile. beta_0 balances each body's
/// block by its own energy so the heaviest body does not dominate.
BetaRescale rescale_betas(const CoupledSamples& samples, const SplineFit& profile);

enum class MassGauge { profile_normalization, central_mass };

struct MassRecovery {
  std::vector<double> masses;
  double c1 = 0.0;
  double c2 = 0.0;
  MassGauge gauge = MassGauge::profile_normalization;
};

/// profile_normalization: fit phi_m ~ C2 / r^3 under the measure, C1 = G / C2.
/// central_mass: C1 = beta_0 / known_central_mass, C2 = G / C1.
MassRecovery recover_masses(const std::vector<double>& beta, double gravity, MassGauge gauge,
                            const CoupledSamples& samples, const SplineFit& profile, double known_central_mass = 0.0);

struct Decomposition {
  CoupledSamples samples;
  ProfileFit step1;
  SplineFit step2;
  BetaRescale step3;
  MassRecovery masses;
};

Decomposition decouple(const KernelEstimate& est, const ChannelMeasures& rho, double gravity,
                       MassGauge gauge = MassGauge::profile_normalization, double known_central_mass = 0.0,
                       double lambda = 1e-3);

/// Kernel phi_{k,k'}(r) = beta_{k'} phi_m(r) for k != k', 0 on the diagonal.
double decoupled_kernel(const Decomposition& dec, int k, int kp, double r);

}  // namespace colearn
