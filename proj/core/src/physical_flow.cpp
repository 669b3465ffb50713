#include "shrinker/physical.hpp"

#include <algorithm>
#include <cmath>

#include "shrinker/error.hpp"

namespace shrinker {

namespace {

// Coefficients of the semi-discrete flow
//   m_j x_j' = w_{j+1/2} (x_{j+1} - x_j) - w_{j-1/2} (x_j - x_{j-1}) - r_j e_rho.
// Curves: m = q, w = 1, r = 0 with q_j = |x_{j+1} - x_j| |x_j - x_{j-1}|, so
// that the right-hand side over m is the curvature vector (exact on regular
// polygons inscribed in circles). Profiles: a finite-volume form of
// Delta_M x on cells between half nodes, with m = q <rho^{n-1}>, w = rho^{n-1}
// at half nodes (zero at the poles) and r = q (n-1) <rho^{n-2}>, where <.> is
// the cell mean for rho linear across the cell. The means make the 1/rho
// terms cancel exactly at the first cell for every n.
struct FlowCoefficients {
  std::vector<double> mass;
  std::vector<double> flux;  // flux[j] couples j and j+1 (cyclically for curves)
  std::vector<double> reaction;
};

// (a^m - b^m) / (m (a - b)), the mean of s^{m-1} over [b, a].
double power_mean(double a, double b, int m) {
  if (m == 0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += std::pow(a, m - 1 - i) * std::pow(b, i);
  return sum / m;
}

FlowCoefficients coefficients(std::span<const Vec2> pts, bool periodic, int dimension) {
  const std::size_t n = pts.size();
  FlowCoefficients c;
  c.mass.resize(n);
  c.flux.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    Vec2 left, right;
    if (periodic) {
      left = pts[(j + n - 1) % n];
      right = pts[(j + 1) % n];
    } else {
      left = j > 0 ? pts[j - 1] : Vec2{-pts[0].x, pts[0].y};
      right = j + 1 < n ? pts[j + 1] : Vec2{-pts[n - 1].x, pts[n - 1].y};
    }
    c.mass[j] = norm(right - pts[j]) * norm(pts[j] - left);
  }
  if (periodic) return c;
  std::vector<double> half(n + 1, 0.0);  // rho at half nodes, zero on the axis
  for (std::size_t j = 1; j < n; ++j) half[j] = 0.5 * (pts[j - 1].x + pts[j].x);
  c.reaction.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = half[j + 1], b = half[j];
    c.reaction[j] = c.mass[j] * (dimension - 1) * power_mean(a, b, dimension - 1);
    c.mass[j] *= power_mean(a, b, dimension);
    c.flux[j] = j + 1 < n ? std::pow(half[j + 1], dimension - 1) : 0.0;
  }
  return c;
}

// Crank-Nicolson in the flux term with frozen coefficients:
//   (m + dt/2 A) x_new = (m - dt/2 A) x_old - dt r.
std::vector<double> crank_nicolson(std::span<const double> old, const FlowCoefficients& c,
                                   bool with_reaction, double dt, bool periodic) {
  const std::size_t n = old.size();
  const double k = 0.5 * dt;
  std::vector<double> diag(n), rhs(n), x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t prev = j > 0 ? j - 1 : n - 1;
    const bool has_prev = periodic || j > 0;
    const bool has_next = periodic || j + 1 < n;
    const double wl = has_prev ? c.flux[prev] : 0.0;
    const double wr = has_next ? c.flux[j] : 0.0;
    const double xl = has_prev ? old[prev] : 0.0;
    const double xr = has_next ? old[(j + 1) % n] : 0.0;
    const double a = wr * (xr - old[j]) - wl * (old[j] - xl);
    diag[j] = c.mass[j] + k * (wl + wr);
    rhs[j] = c.mass[j] * old[j] + k * a - (with_reaction ? dt * c.reaction[j] : 0.0);
  }
  if (periodic) {
    std::vector<double> off(n);
    for (std::size_t j = 0; j < n; ++j) off[j] = -k * c.flux[j];
    solve_cyclic_tridiagonal(diag, off, rhs, x);
    return x;
  }
  std::vector<double> off(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) off[j] = -k * c.flux[j];
  solve_tridiagonal(diag, off, off, rhs, x);
  return x;
}

// Resamples a closed polygon at equal chord-length spacing, starting at node 0.
std::vector<Vec2> redistribute_curve(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  std::vector<double> c(n), xs(n), ys(n);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = pts[j].x;
    ys[j] = pts[j].y;
    if (j > 0) c[j] = c[j - 1] + norm(pts[j] - pts[j - 1]);
  }
  const double length = c[n - 1] + norm(pts[0] - pts[n - 1]);
  const PeriodicSpline sx(c, xs, length), sy(c, ys, length);
  std::vector<Vec2> out(n);
  out[0] = pts[0];
  for (std::size_t j = 1; j < n; ++j) {
    const double s = length * static_cast<double>(j) / static_cast<double>(n);
    out[j] = {sx(s), sy(s)};
  }
  return out;
}

// Resamples a profile at cell-centred chord-length positions between the poles,
// using the mirror curve so that the spline is smooth across the axis.
std::vector<Vec2> redistribute_profile(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  std::vector<double> c(2 * n), xs(2 * n), ys(2 * n);
  for (std::size_t j = 0; j < 2 * n; ++j) {
    const Vec2 p = j < n ? pts[j] : Vec2{-pts[2 * n - 1 - j].x, pts[2 * n - 1 - j].y};
    xs[j] = p.x;
    ys[j] = p.y;
    if (j > 0) c[j] = c[j - 1] + std::hypot(xs[j] - xs[j - 1], ys[j] - ys[j - 1]);
  }
  const double north = 2.0 * pts[0].x;
  const double south = c[n] - c[n - 1];
  const double length = c[2 * n - 1] + north;
  const PeriodicSpline sx(c, xs, length), sy(c, ys, length);
  const double start = -0.5 * north;
  const double half = c[n - 1] + 0.5 * south - start;
  std::vector<Vec2> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = start + half * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    out[j] = {std::abs(sx(s)), sy(s)};
  }
  return out;
}

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0.0) != (o2 > 0.0)) && ((o3 > 0.0) != (o4 > 0.0)) && o1 != 0.0 && o2 != 0.0 &&
         o3 != 0.0 && o4 != 0.0;
}

double effective_radius_sq(double enclosed, int n) {
  return std::pow(enclosed / unit_ball_volume(n + 1), 2.0 / (n + 1));
}

}  // namespace

bool self_intersects(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto lo = [&](std::size_t i) { return std::min(polygon[i].x, polygon[(i + 1) % n].x); };
  auto hi = [&](std::size_t i) { return std::max(polygon[i].x, polygon[(i + 1) % n].x); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo(a) < lo(b); });
  std::vector<std::size_t> active;
  for (std::size_t i : order) {
    const double x = lo(i);
    std::erase_if(active, [&](std::size_t k) { return hi(k) < x; });
    for (std::size_t k : active) {
      const std::size_t gap = (i + n - k) % n;
      if (gap == 1 || gap == n - 1) continue;
      if (segments_cross(polygon[i], polygon[(i + 1) % n], polygon[k], polygon[(k + 1) % n])) {
        return true;
      }
    }
    active.push_back(i);
  }
  return false;
}

DiscreteSurface physical_step(const DiscreteSurface& s, double dt) {
  const auto pts = s.points();
  const std::size_t n = pts.size();
  const bool periodic = s.topology() == Topology::closed_curve;
  std::vector<double> xs(n), ys(n);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = pts[j].x;
    ys[j] = pts[j].y;
  }
  auto solve = [&](const FlowCoefficients& c) {
    const auto nx = crank_nicolson(xs, c, !periodic, dt, periodic);
    const auto ny = crank_nicolson(ys, c, false, dt, periodic);
    std::vector<Vec2> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = {nx[j], ny[j]};
    return out;
  };
  // Predictor with coefficients of the old state, corrector with the
  // coefficients of the midpoint geometry.
  const auto predicted = solve(coefficients(pts, periodic, s.dimension()));
  std::vector<Vec2> mid(n);
  for (std::size_t j = 0; j < n; ++j) mid[j] = 0.5 * (pts[j] + predicted[j]);
  const auto moved = solve(coefficients(mid, periodic, s.dimension()));
  if (periodic) return DiscreteSurface::curve(redistribute_curve(moved));
  return DiscreteSurface::profile(s.dimension(), redistribute_profile(moved));
}

PhysicalTrajectory run_physical(const DiscreteSurface& s0, const PhysicalOptions& options) {
  if (!(options.dt > 0.0)) throw DomainError("dt must be positive");
  if (!(options.stop_area > 0.0)) throw DomainError("stop_area must be positive");
  if (self_intersects(s0.closed_polygon())) throw SelfIntersection("initial surface is not embedded");
  const int n = s0.dimension();
  const std::size_t every = std::max<std::size_t>(1, options.snapshot_every);
  const std::size_t check_every = std::max<std::size_t>(1, options.intersection_check_every);

  PhysicalTrajectory traj;
  DiscreteSurface s = s0;
  double t = 0.0;
  const double r0_sq = effective_radius_sq(s0.enclosed_measure(), n);
  for (std::size_t step = 0;; ++step) {
    const double enclosed = s.enclosed_measure();
    traj.steps.push_back({t, enclosed, s.enclosed_centroid()});
    const bool done = enclosed <= options.stop_area;
    if (step % every == 0 || done || step == options.max_steps) {
      traj.snapshots.push_back(s);
      traj.snapshot_steps.push_back(step);
    }
    if (done) {
      traj.status = PhysicalStatus::reached_stop_area;
      break;
    }
    if (step == options.max_steps) {
      traj.status = PhysicalStatus::step_limit;
      break;
    }
    double dt = options.dt;
    if (options.area_scaled_steps) dt *= effective_radius_sq(enclosed, n) / r0_sq;
    s = physical_step(s, dt);
    t += dt;
    if ((step + 1) % check_every == 0 && self_intersects(s.closed_polygon())) {
      throw SelfIntersection("self-intersection at t = " + std::to_string(t));
    }
  }
  return traj;
}

// ------------------------------------------------------------- extinction --

ExtinctionEstimate estimate_extinction(const PhysicalTrajectory& trajectory,
                                       const ExtinctionOptions& options) {
  const auto& steps = trajectory.steps;
  if (steps.size() < 10) throw DomainError("extinction fit needs at least 10 recorded steps");
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i].enclosed < steps[i - 1].enclosed)) {
      throw DomainError("enclosed measure is not strictly decreasing");
    }
  }
  const int n = trajectory.dimension();
  const auto count = static_cast<double>(steps.size());
  const auto end = static_cast<std::size_t>(std::floor(count * (1.0 - options.exclude_fraction)));
  const auto begin = static_cast<std::size_t>(
      std::floor(count * (1.0 - options.exclude_fraction - options.window_fraction)));
  if (end <= begin + 2) throw FitError("extinction fit window is empty");

  std::vector<double> t, r2, cx, cy;
  for (std::size_t i = begin; i < end; ++i) {
    t.push_back(steps[i].t);
    r2.push_back(effective_radius_sq(steps[i].enclosed, n));
    cx.push_back(steps[i].centroid.x);
    cy.push_back(steps[i].centroid.y);
  }
  const LinearFit fit = fit_line(t, r2);
  if (!(fit.slope < 0.0)) throw FitError("effective radius is not shrinking");

  ExtinctionEstimate est;
  est.T = -fit.intercept / fit.slope;
  est.slope = fit.slope;
  est.residual = fit.rms_residual / *std::max_element(r2.begin(), r2.end());
  est.window_begin = t.front();
  est.window_end = t.back();
  const LinearFit fx = fit_line(t, cx);
  const LinearFit fy = fit_line(t, cy);
  est.x0 = {fx.intercept + fx.slope * est.T, fy.intercept + fy.slope * est.T};
  if (trajectory.topology() == Topology::axisymmetric_profile) est.x0.x = 0.0;
  est.centroid_residual = std::hypot(fx.rms_residual, fy.rms_residual);

  if (!(est.T > steps.back().t)) throw FitError("fitted extinction time precedes the data");
  if (!(est.residual <= options.max_residual)) {
    throw FitError("extinction fit residual " + std::to_string(est.residual) +
                   " above threshold " + std::to_string(options.max_residual));
  }
  return est;
}

std::pair<DiscreteSurface, double> parabolic_rescale(const DiscreteSurface& s, double t,
                                                     double lambda, Vec2 x0, double t0) {
  return {s.rescaled(lambda, x0), lambda * lambda * (t - t0)};
}

SnapshotBracket bracket_snapshots(const PhysicalTrajectory& trajectory, double t) {
  const auto& idx = trajectory.snapshot_steps;
  auto time = [&](std::size_t k) { return trajectory.steps[idx[k]].t; };
  if (idx.empty() || t < time(0) || t > time(idx.size() - 1)) {
    throw DomainError("time " + std::to_string(t) + " outside the recorded snapshots");
  }
  std::size_t lo = 0, hi = idx.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (time(mid) <= t ? lo : hi) = mid;
  }
  SnapshotBracket b{lo, hi, 0.0};
  const double span = time(hi) - time(lo);
  b.weight = span > 0.0 ? (t - time(lo)) / span : 0.0;
  return b;
}

}  // namespace shrinker
