#include "shrinker/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shrinker/error.hpp"

namespace shrinker {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::running: return "running";
    case RunStatus::converged: return "converged";
    case RunStatus::graph_overflow: return "graph-overflow";
    case RunStatus::step_limit: return "step-limit";
  }
  return "unknown";
}

DensityRecord density_ratio(const DiscreteSurface& surface, Vec2 center, double t0, double t) {
  if (!(t < t0)) throw DomainError("density ratio requires t < t0");
  if (surface.topology() == Topology::axisymmetric_profile && center.x != 0.0) {
    throw DomainError("density centers for profiles must lie on the symmetry axis");
  }
  const auto pts = surface.points();
  const auto area = surface.area_elements();
  const int n = surface.dimension();
  double sum = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Vec2 d = pts[j] - center;
    sum += area[j] * gaussian_weight_sq(dot(d, d), n, t0, t);
  }
  return {center, t0, t, sum};
}

namespace {

struct Integrand {
  std::vector<double> value;  // rho J
  std::vector<double> d_height;
  std::vector<double> d_slope;
  std::vector<double> d_check;
  std::vector<double> tilt;
};

// len also carries e = D4 v / (16 h): O(h^3) on smooth sections, eps / h on eps (-1)^j.
constexpr double kCheckScale = 1.0 / 16.0;

Integrand integrand(const NormalSection& v) {
  const auto& model = *v.model;
  const double radius = model.radius();
  const int n = model.dimension();
  const auto slope = angular_derivative(v);
  const std::size_t size = v.size();
  std::vector<double> check(size);
  fourth_difference(v.values, model.boundary(), check);
  const double check_scale = kCheckScale / model.spacing();
  Integrand f;
  f.value.resize(size);
  f.d_height.resize(size);
  f.d_slope.resize(size);
  f.d_check.resize(size);
  f.tilt.resize(size);
  const double rho0 = static_gaussian_weight(0.0, n);
  for (std::size_t j = 0; j < size; ++j) {
    const double r = radius + v.values[j];
    const double p = slope[j];
    const double e = check_scale * check[j];
    const double plane = r * r + p * p;
    const double len = std::sqrt(plane + e * e);
    const double ratio = r / radius;
    double lower = 1.0;  // ratio^(n-2)
    for (int k = 2; k < n; ++k) lower *= ratio;
    const double lateral = n == 1 ? 1.0 : lower * ratio;
    const double jac = lateral * len / radius;
    const double djdr = (n - 1) * lower / radius * len / radius + lateral * r / (radius * len);
    const double djdp = lateral * p / (radius * len);
    const double rho = rho0 * std::exp(-0.25 * r * r);
    f.value[j] = rho * jac;
    f.d_height[j] = rho * (djdr - 0.5 * r * jac);
    f.d_slope[j] = rho * djdp;
    f.d_check[j] = rho * lateral * e / (radius * len) * check_scale;
    f.tilt[j] = r / std::sqrt(plane);
  }
  return f;
}

std::vector<double> gradient_from(const NormalSection& v, const Integrand& f) {
  const auto& model = *v.model;
  const auto w = model.weights();
  const std::size_t size = v.size();
  std::vector<double> weighted(size);
  for (std::size_t j = 0; j < size; ++j) weighted[j] = w[j] * f.d_slope[j];
  std::vector<double> grad(size, 0.0);
  first_derivative_transpose_add(weighted, model.spacing(), model.boundary(), grad);
  for (std::size_t j = 0; j < size; ++j) weighted[j] = w[j] * f.d_check[j];
  fourth_difference_transpose_add(weighted, model.boundary(), grad);
  for (std::size_t j = 0; j < size; ++j) grad[j] = f.d_height[j] + grad[j] / w[j];
  return grad;
}

}  // namespace

GraphState evaluate_graph(const NormalSection& v) {
  require_in_tube(v);
  const auto f = integrand(v);
  const auto& model = *v.model;
  const auto w = model.weights();
  const std::size_t size = v.size();

  GraphState s;
  s.gradient = gradient_from(v, f);
  s.velocity.resize(size);
  s.normal_speed.resize(size);
  s.density = f.value;
  s.tilt = f.tilt;

  double inv_min = std::numeric_limits<double>::infinity();
  double inv_max = 0.0;
  for (std::size_t j = 0; j < size; ++j) {
    const double c = f.tilt[j];
    if (!(c > kMinTilt)) throw ExcessiveTilt(j, c);
    const double mass = f.value[j] * c * c;
    s.velocity[j] = -s.gradient[j] / mass;
    s.normal_speed[j] = s.velocity[j] * c;
    s.energy += w[j] * f.value[j];
    s.dissipation += w[j] * f.value[j] * s.normal_speed[j] * s.normal_speed[j];
    s.grad_norm += w[j] * s.gradient[j] * s.gradient[j];
    s.velocity_norm += w[j] * s.velocity[j] * s.velocity[j];
    inv_min = std::min(inv_min, mass);
    inv_max = std::max(inv_max, mass);
  }
  s.grad_norm = std::sqrt(s.grad_norm);
  s.velocity_norm = std::sqrt(s.velocity_norm);
  // D = sum w g^2 / m >= ||g||^2 / max m and D = sum w m vdot^2 >= min m ||vdot||^2.
  s.gamma = std::sqrt(inv_min / inv_max);
  return s;
}

double energy(const NormalSection& v) {
  require_in_tube(v);
  const auto f = integrand(v);
  const auto w = v.model->weights();
  double e = 0.0;
  for (std::size_t j = 0; j < f.value.size(); ++j) e += w[j] * f.value[j];
  return e;
}

NormalSection grad_energy(const NormalSection& v) {
  require_in_tube(v);
  NormalSection g = NormalSection::zero(v.model, v.tau);
  g.values = gradient_from(v, integrand(v));
  return g;
}

double dissipation(const NormalSection& v) { return evaluate_graph(v).dissipation; }

EnergyReport energy_report(const NormalSection& v) {
  const auto s = evaluate_graph(v);
  EnergyReport r;
  r.energy = s.energy;
  r.grad_norm = s.grad_norm;
  r.dissipation = s.dissipation;
  r.floor = v.model->density();
  r.gamma = s.gamma;
  double max_mass = 0.0;
  for (std::size_t j = 0; j < s.density.size(); ++j) {
    max_mass = std::max(max_mass, s.density[j] * s.tilt[j] * s.tilt[j]);
  }
  r.gradient_gamma = 1.0 / std::sqrt(max_mass);
  return r;
}

MonotonicityResidual monotonicity_residual(const Trajectory& trajectory) {
  const auto& steps = trajectory.steps;
  if (steps.size() < 3) throw DomainError("monotonicity residual needs at least three steps");
  const double dtau = trajectory.dtau;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const double step = steps[i].tau - steps[i - 1].tau;
    if (std::abs(step - dtau) > 1e-9 * std::max(1.0, std::abs(steps[i].tau))) {
      throw DomainError("non-uniform steps in trajectory; resample first");
    }
  }
  MonotonicityResidual out;
  out.residual.resize(steps.size() - 2);
  double sq = 0.0;
  for (std::size_t i = 1; i + 1 < steps.size(); ++i) {
    const double r =
        (steps[i + 1].energy - steps[i - 1].energy) / (2.0 * dtau) + steps[i].dissipation;
    out.residual[i - 1] = r;
    out.max_abs = std::max(out.max_abs, std::abs(r));
    sq += r * r;
  }
  out.rms = std::sqrt(sq / static_cast<double>(out.residual.size()));
  return out;
}

}  // namespace shrinker
