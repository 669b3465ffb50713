#pragma once

// Gaussian density ratios and the energy E(v) = int_Sigma rho(y + v) J dH^n
// of normal graphs over a model shrinker.
//
// The discrete energy is the weighted sum E_h(v) = sum_j w_j rho(r_j) J(r_j, v'_j)
// with r = R + v and v' a fourth-order difference. grad_energy returns its
// exact discrete L^2 gradient, (dE_h/dv_j) / w_j, which approximates
// -<H + x^perp/2, nu_Sigma> rho J. The rescaled graph velocity and the
// dissipation are built from the same gradient, so dE_h/dtau = -D_h holds
// exactly for the semi-discrete flow. In codimension one the normal
// projection and the normal-bundle metric reduce to products with nu_Sigma.

#include <vector>

#include "shrinker/geometry.hpp"
#include "shrinker/trajectory.hpp"

namespace shrinker {

struct DensityRecord {
  Vec2 center;
  double t0 = 0.0;
  double t = 0.0;
  double value = 0.0;
};

/// Theta_{x0,t0}(M, t) by quadrature over the sampled surface.
DensityRecord density_ratio(const DiscreteSurface& surface, Vec2 center, double t0, double t);

/// Everything the flow and the diagnostics need from one section, in one pass.
struct GraphState {
  double energy = 0.0;
  std::vector<double> gradient;      // discrete L^2 gradient of E
  std::vector<double> velocity;      // rescaled graph velocity dv/dtau
  std::vector<double> normal_speed;  // <H + x^perp/2, nu_M>
  std::vector<double> density;       // rho(y + v) J
  std::vector<double> tilt;          // <nu_Sigma, nu_M>
  double dissipation = 0.0;
  double grad_norm = 0.0;
  double velocity_norm = 0.0;
  double gamma = 0.0;
};

inline constexpr double kMinTilt = 0.1;

/// Throws GraphOverflow, or ExcessiveTilt when <nu_Sigma, nu_M> <= 0.1.
GraphState evaluate_graph(const NormalSection& v);

double energy(const NormalSection& v);
NormalSection grad_energy(const NormalSection& v);
double dissipation(const NormalSection& v);

struct EnergyReport {
  double energy = 0.0;
  double grad_norm = 0.0;
  double dissipation = 0.0;
  double floor = 0.0;
  /// Largest gamma with D >= gamma ||grad E|| ||dv/dtau|| for this state.
  double gamma = 0.0;
  /// Largest g with D >= g^2 ||grad E||^2.
  double gradient_gamma = 0.0;
};

EnergyReport energy_report(const NormalSection& v);

struct MonotonicityResidual {
  std::vector<double> residual;  // index i corresponds to steps[i + 1]
  double max_abs = 0.0;
  double rms = 0.0;
};

/// r_i = (E_{i+1} - E_{i-1}) / (2 dtau) + D_i. Throws DomainError on fewer than
/// three steps or non-uniform spacing.
MonotonicityResidual monotonicity_residual(const Trajectory& trajectory);

}  // namespace shrinker
