#pragma once

// Fits and checks on trajectories: the Lojasiewicz exponent, the drift
// bounds it implies, power-law decay of the energy gap and of the distance
// to the limit, and the tangent-flow uniqueness experiment.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shrinker/geometry.hpp"
#include "shrinker/physical.hpp"
#include "shrinker/trajectory.hpp"

namespace shrinker {

/// alpha = 2 theta / (1 - 2 theta); infinite for theta >= 1/2.
double decay_alpha(double theta);

struct LojasiewiczOptions {
  double gap_min = 1e-10;
  double gap_max = 1e-3;
  std::size_t min_samples = 50;
  /// Fits with theta at or above this value are reported as exponential.
  double exponential_threshold = 0.49;
};

struct LojasiewiczFit {
  double theta = 0.0;
  /// Largest c with grad >= c gap^{1 - theta} on the window.
  double constant = 0.0;
  double alpha = 0.0;  // infinite in the exponential regime
  bool exponential = false;
  double r_squared = 0.0;
  double tau_begin = 0.0;
  double tau_end = 0.0;
  std::size_t first = 0;  // step indices of the window, inclusive
  std::size_t last = 0;
  std::size_t samples = 0;
  /// min over the window of log grad - (1 - theta) log gap - log c (>= 0).
  double min_log_margin = 0.0;
};

/// Regression of log grad against log gap over gap in [gap_min, gap_max].
/// Throws FitError when fewer than min_samples fall in the window.
LojasiewiczFit fit_lojasiewicz(std::span<const double> tau, std::span<const double> gap,
                               std::span<const double> grad,
                               const LojasiewiczOptions& options = {});
LojasiewiczFit fit_lojasiewicz(const Trajectory& trajectory,
                               const LojasiewiczOptions& options = {});

struct BoundsOptions {
  /// Fixed gamma instead of the largest admissible one.
  std::optional<double> gamma;
};

struct BoundsReport {
  double theta = 0.0;
  /// Largest gamma with drift <= gap^theta / (gamma theta) at every sample;
  /// zero when no positive gamma works.
  double gamma = 0.0;
  /// gamma of the dissipation chain: min state gamma times the Lojasiewicz constant.
  double gamma_chain = 0.0;
  bool violated = false;
  std::vector<double> tau;
  std::vector<double> drift;         // int_tau^end ||dv/dtau|| dtau
  std::vector<double> bound;         // gap^theta / (gamma theta)
  std::vector<double> drift_margin;  // bound - drift
  std::vector<double> sup_tau;       // snapshot times used for the distance check
  std::vector<double> sup_distance;  // sup_{s >= tau} ||v(s) - v(tau)||
  std::vector<double> sup_margin;
  double min_drift_margin = 0.0;
  double min_sup_margin = 0.0;
};

/// Drift bounds on the samples tau_i with a given exponent. When gamma is not
/// fixed, a sample with positive drift and non-positive gap admits no gamma:
/// the report is flagged and every margin is -drift.
BoundsReport check_drift(std::span<const double> tau, std::span<const double> gap,
                         std::span<const double> vdot, double theta,
                         const BoundsOptions& options = {});

/// check_drift on the Lojasiewicz window of a trajectory plus the sup-distance
/// check against the same right-hand side on its snapshots.
BoundsReport check_bounds(const Trajectory& trajectory, const LojasiewiczFit& fit,
                          const BoundsOptions& options = {});

struct DecayOptions {
  /// theta used for the exponents when the fit is exponential.
  double exponential_theta = 0.45;
  /// Fraction of the tail used to calibrate the constants.
  double calibration_fraction = 0.5;
};

struct DecayReport {
  double theta = 0.0;
  double alpha = 0.0;
  double energy_exponent = 0.0;    // 1 + alpha
  double distance_exponent = 0.0;  // theta (1 + alpha)
  double energy_constant = 0.0;
  double distance_constant = 0.0;
  /// Same constants refitted in the variable log(-1/t), t = -exp(-tau).
  double energy_constant_log = 0.0;
  double distance_constant_log = 0.0;
  double min_energy_margin = 0.0;  // relative margins on the checked part
  double min_distance_margin = 0.0;
  double energy_rate = 0.0;        // fitted exponential rates on the window
  double distance_rate = 0.0;
  double tau_begin = 0.0;
  double tau_end = 0.0;
  bool holds = false;
};

/// Checks gap <= C tau^-(1+alpha) and ||v - v'|| <= C' tau^-theta(1+alpha) on
/// the tail tau >= max(fit.tau_begin, 1), and in the exponential regime also
/// tau >= exponent / rate. The constants are calibrated on the first part of
/// the tail and must hold with strictly positive margin on the rest.
DecayReport fit_decay(const Trajectory& trajectory, const NormalSection& limit,
                      const LojasiewiczFit& fit, const DecayOptions& options = {});

/// Distance between two sampled surfaces: L2 of the radial section over the
/// model when star-shaped, symmetric Hausdorff distance otherwise.
struct SliceDistance {
  double value = 0.0;
  bool graphical = true;
};
SliceDistance distance_to_model(const DiscreteSurface& rescaled, const ModelPtr& model);

struct UniquenessOptions {
  std::vector<double> bases = {2.0, 3.0};
  double tolerance = 1e-3;
  double max_extinction_residual = 1e-6;
  double reach_fraction = 0.01;  // data must end within this fraction of T
  Vec2 center_offset;            // added to x0 (negative control)
};

struct LambdaSequence {
  double base = 0.0;
  std::vector<double> lambda;
  std::vector<double> time;      // physical time T - 1/lambda^2 of each slice
  std::vector<double> distance;
  std::vector<bool> graphical;
  bool decreasing = false;
  bool converged = false;
  /// Power-law fit distance ~ c (log(-1/t))^-exponent with -1/t = lambda^2.
  double decay_constant = 0.0;
  double decay_exponent = 0.0;
};

struct UniquenessReport {
  std::vector<LambdaSequence> sequences;
  Vec2 center;
  double T = 0.0;
  bool unique = false;
  std::string verdict;
};

/// Rescales the time -1 slices T - 1/lambda_i^2 of a physical flow about the
/// fitted extinction point and measures their distance to the model.
UniquenessReport tangent_uniqueness_experiment(const PhysicalTrajectory& trajectory,
                                               const ExtinctionEstimate& extinction,
                                               const ModelPtr& model,
                                               const UniquenessOptions& options = {});

/// Rescaled section of a physical flow at rescaled time tau about (x0, T):
/// the slices bracketing t = T - e^{-tau} are rescaled by their own factor and
/// interpolated linearly in tau.
NormalSection rescaled_slice(const PhysicalTrajectory& trajectory,
                             const ExtinctionEstimate& extinction, const ModelPtr& model,
                             double tau);

struct RouteComparison {
  std::vector<double> tau;
  std::vector<double> distance;  // L2 distance between the two routes
  double max_distance = 0.0;
};

/// L2 distance between the rescaled run and the rescaled physical flow at the
/// run's snapshots with tau in [tau_begin, tau_end].
RouteComparison compare_routes(const PhysicalTrajectory& physical,
                               const ExtinctionEstimate& extinction, const Trajectory& rescaled,
                               double tau_begin, double tau_end);

}  // namespace shrinker
