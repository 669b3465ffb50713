#pragma once

// Mean curvature flow x_t = H of closed curves and of rotationally symmetric
// profiles, extinction-point estimation and parabolic rescaling.

#include <cstddef>
#include <utility>
#include <vector>

#include "shrinker/geometry.hpp"
#include "shrinker/numerics.hpp"

namespace shrinker {

struct PhysicalOptions {
  /// Time step at the initial enclosed measure.
  double dt = 1e-4;
  /// The run stops once the enclosed area (volume for profiles) is <= stop_area.
  double stop_area = 1e-4;
  /// Scale dt with the squared effective radius, so that steps are nearly
  /// uniform in log(T - t).
  bool area_scaled_steps = true;
  std::size_t snapshot_every = 10;
  std::size_t intersection_check_every = 100;
  std::size_t max_steps = 5'000'000;
};

struct PhysicalRecord {
  double t = 0.0;
  double enclosed = 0.0;
  Vec2 centroid;
};

enum class PhysicalStatus { reached_stop_area, step_limit };

struct PhysicalTrajectory {
  std::vector<PhysicalRecord> steps;
  std::vector<DiscreteSurface> snapshots;
  std::vector<std::size_t> snapshot_steps;
  PhysicalStatus status = PhysicalStatus::step_limit;

  int dimension() const { return snapshots.front().dimension(); }
  Topology topology() const { return snapshots.front().topology(); }
};

/// Evolves S0 by Crank-Nicolson steps in the curvature term followed by an
/// arclength redistribution of the nodes. Throws SelfIntersection when the
/// polygon stops being embedded.
PhysicalTrajectory run_physical(const DiscreteSurface& s0, const PhysicalOptions& options);

/// One semi-implicit step of size dt, including the redistribution.
DiscreteSurface physical_step(const DiscreteSurface& s, double dt);

/// True when two non-adjacent edges of the closed polygon intersect.
bool self_intersects(std::span<const Vec2> polygon);

struct ExtinctionOptions {
  double window_fraction = 0.3;   // last part of the recorded steps used by the fit
  double exclude_fraction = 0.05; // final part left out of the window
  double max_residual = 1e-3;     // relative RMS residual of the radius fit
};

struct ExtinctionEstimate {
  Vec2 x0;
  double T = 0.0;
  double residual = 0.0;           // relative RMS residual of r_eff^2 against t
  double centroid_residual = 0.0;  // RMS residual of the centroid fits
  double slope = 0.0;              // d r_eff^2 / dt, -2n for the exact flow
  double window_begin = 0.0;
  double window_end = 0.0;
};

/// Fits r_eff^2 = (V / |B^{n+1}|)^{2/(n+1)} linearly in t over the window and
/// extrapolates the centroid to the zero crossing T.
ExtinctionEstimate estimate_extinction(const PhysicalTrajectory& trajectory,
                                       const ExtinctionOptions& options = {});

/// (x, t) -> (lambda (x - x0), lambda^2 (t - t0)).
std::pair<DiscreteSurface, double> parabolic_rescale(const DiscreteSurface& s, double t,
                                                     double lambda, Vec2 x0, double t0);

/// Snapshot pair bracketing time t and the linear interpolation weight of the later one.
struct SnapshotBracket {
  std::size_t before = 0;
  std::size_t after = 0;
  double weight = 0.0;
};
SnapshotBracket bracket_snapshots(const PhysicalTrajectory& trajectory, double t);

}  // namespace shrinker
