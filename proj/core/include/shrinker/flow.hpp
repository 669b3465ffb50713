#pragma once

// The rescaled mean curvature flow of normal graphs over a model shrinker,
//   dv/dtau = <H + x^perp/2, nu_M> / <nu_Sigma, nu_M>,
// and the tools that keep its unstable modes (dilation and translations)
// from swamping long runs.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "shrinker/energy.hpp"
#include "shrinker/geometry.hpp"
#include "shrinker/trajectory.hpp"

namespace shrinker {

enum class TimeScheme {
  /// Stabilised second-order backward differentiation: the principal
  /// (second-derivative) part is treated implicitly through a linear
  /// Laplacian stabiliser, everything else by extrapolation.
  semi_implicit,
  /// Classical explicit Runge-Kutta; requires dtau <= 0.2 h^2.
  rk4,
};

struct RescaledOptions {
  double dtau = 1e-4;
  double tau_max = 20.0;  // absolute rescaled time at which the run stops
  double conv_tol = 1e-8;
  TimeScheme scheme = TimeScheme::semi_implicit;
  std::size_t snapshot_every = 100;
  /// Coefficient of the implicit stabiliser; <= 0 picks 1 / (R - sigma)^2.
  double stabilization = 0.0;
};

/// Scalar graph velocity of the rescaled flow.
NormalSection rescaled_rhs(const NormalSection& v);

/// Integrates the rescaled flow from v0 (starting at v0.tau).
/// Throws GraphOverflow if v0 itself is outside the tube.
Trajectory run_rescaled(const NormalSection& v0, const RescaledOptions& options);

/// L^2-orthonormal basis of the unstable eigenfunctions of the linearised
/// rescaled flow at the model: the constant (dilation) and the coordinate
/// functions (translations; only the axial one for profiles).
std::vector<std::vector<double>> unstable_modes(const ShrinkerModel& model);

/// Growth rates matching unstable_modes: 1 for dilation, 1/2 for translations.
std::vector<double> unstable_rates(const ShrinkerModel& model);

/// Coefficients of v along unstable_modes.
std::vector<double> unstable_coefficients(const NormalSection& v);

/// v with its unstable components removed (the "correct dilation" projection
/// used for synthetic rescaled-only runs).
NormalSection project_out_unstable(const NormalSection& v);

struct ShootingOptions {
  std::vector<double> horizons = {3.0, 6.0, 9.0, 12.0};  // relative to the start tau
  int max_iterations = 8;
  double tolerance = 1e-15;  // on unstable amplitudes scaled back to the start
  double jacobian_step = 1e-7;
};

struct ShootingResult {
  std::vector<double> parameters;
  std::vector<double> residual;  // last unstable amplitudes, scaled to the start
  double horizon = 0.0;
  int runs = 0;
};

/// Family of initial sections indexed by a parameter vector.
using InitialFamily = std::function<NormalSection(std::span<const double>)>;

/// Adjusts the parameters of an initial family so that the flow does not
/// excite the unstable modes: Newton iteration on the unstable coefficients
/// at increasing horizons, with the Jacobian rescaled by the linear growth
/// rates between horizons. The number of parameters must equal the number
/// of unstable modes.
ShootingResult shoot_neutral(const InitialFamily& family, std::vector<double> guess,
                             const RescaledOptions& flow, const ShootingOptions& options);

}  // namespace shrinker
