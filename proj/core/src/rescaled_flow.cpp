#include "shrinker/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <gsl/gsl_linalg.h>

#include "shrinker/error.hpp"

namespace shrinker {

namespace {

// Linear stabiliser: the Laplace-Beltrami operator of the model written in
// the angle variable (without the 1/R^2 factor), as a tridiagonal stencil.
class Stabilizer {
 public:
  Stabilizer(const ShrinkerModel& model, double coefficient)
      : periodic_(model.boundary() == Boundary::periodic), kappa_(coefficient) {
    const std::size_t n = model.nodes();
    const double h2 = model.spacing() * model.spacing();
    lower_.resize(n);
    upper_.resize(n);
    if (periodic_) {
      std::fill(lower_.begin(), lower_.end(), 1.0 / h2);
      std::fill(upper_.begin(), upper_.end(), 1.0 / h2);
      return;
    }
    // (1/s_j) [s_{j+1/2}(v_{j+1} - v_j) - s_{j-1/2}(v_j - v_{j-1})] / h^2,
    // s = sin^{n-1}; the flux through the poles vanishes.
    const int power = model.dimension() - 1;
    const auto angles = model.angles();
    for (std::size_t j = 0; j < n; ++j) {
      const double s = std::pow(std::sin(angles[j]), power);
      const double up = j + 1 < n ? std::pow(std::sin(angles[j] + 0.5 * model.spacing()), power) : 0.0;
      const double down = j > 0 ? std::pow(std::sin(angles[j] - 0.5 * model.spacing()), power) : 0.0;
      upper_[j] = up / (s * h2);
      lower_[j] = down / (s * h2);
    }
  }

  double kappa() const { return kappa_; }

  void apply(std::span<const double> v, std::span<double> out) const {
    const std::size_t n = v.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double left = j > 0 ? v[j - 1] : (periodic_ ? v[n - 1] : v[j]);
      const double right = j + 1 < n ? v[j + 1] : (periodic_ ? v[0] : v[j]);
      out[j] = upper_[j] * (right - v[j]) - lower_[j] * (v[j] - left);
    }
  }

  /// Solves (alpha I - kappa L) x = b.
  void solve(double alpha, std::span<const double> b, std::span<double> x) const {
    const std::size_t n = b.size();
    std::vector<double> diag(n);
    for (std::size_t j = 0; j < n; ++j) diag[j] = alpha + kappa_ * (upper_[j] + lower_[j]);
    if (periodic_) {
      std::vector<double> off(n, -kappa_ * upper_[0]);
      solve_cyclic_tridiagonal(diag, off, b, x);
      return;
    }
    std::vector<double> super(n - 1), sub(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      super[j] = -kappa_ * upper_[j];
      sub[j] = -kappa_ * lower_[j + 1];
    }
    solve_tridiagonal(diag, super, sub, b, x);
  }

 private:
  bool periodic_;
  double kappa_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

StepRecord make_record(double tau, const GraphState& s, const NormalSection& v, double floor) {
  StepRecord r;
  r.tau = tau;
  r.energy = s.energy;
  r.gap = s.energy - floor;
  r.grad_norm = s.grad_norm;
  r.dissipation = s.dissipation;
  r.vdot_norm = s.velocity_norm;
  r.max_abs_v = v.max_abs();
  r.gamma = s.gamma;
  return r;
}

std::optional<std::size_t> first_outside(const NormalSection& v) {
  const double bound = v.model->graph_bound();
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(std::abs(v.values[j]) < bound)) return j;
  }
  return std::nullopt;
}

}  // namespace

NormalSection rescaled_rhs(const NormalSection& v) {
  auto s = evaluate_graph(v);
  NormalSection out = NormalSection::zero(v.model, v.tau);
  out.values = std::move(s.velocity);
  return out;
}

Trajectory run_rescaled(const NormalSection& v0, const RescaledOptions& options) {
  require_in_tube(v0);
  if (!(options.dtau > 0.0)) throw DomainError("dtau must be positive");
  const auto& model = *v0.model;
  if (options.scheme == TimeScheme::rk4) {
    const double h = model.radius() * model.spacing();
    if (options.dtau > 0.2 * h * h) {
      throw DomainError("explicit RK4 requires dtau <= 0.2 h^2");
    }
  }
  const double sigma = model.graph_bound();
  const double kappa = options.stabilization > 0.0
                           ? options.stabilization
                           : 1.0 / ((model.radius() - sigma) * (model.radius() - sigma));
  const Stabilizer stab(model, kappa);
  const std::size_t every = std::max<std::size_t>(1, options.snapshot_every);

  Trajectory traj;
  traj.model = v0.model;
  traj.dtau = options.dtau;
  traj.energy_floor = model.density();

  const std::size_t n = v0.size();
  NormalSection v = v0;
  std::vector<double> prev_values, prev_velocity;
  std::vector<double> lap(n), rhs(n), next(n);

  auto push_snapshot = [&](std::size_t step) {
    if (!traj.snapshot_steps.empty() && traj.snapshot_steps.back() == step) return;
    traj.snapshots.push_back(v);
    traj.snapshot_steps.push_back(step);
  };

  for (std::size_t step = 0;; ++step) {
    v.tau = v0.tau + static_cast<double>(step) * options.dtau;
    GraphState s;
    try {
      s = evaluate_graph(v);
    } catch (const ExcessiveTilt& e) {
      traj.status = RunStatus::graph_overflow;
      traj.overflow_node = e.node();
      traj.overflow_tau = v.tau;
      break;
    }
    traj.steps.push_back(make_record(v.tau, s, v, traj.energy_floor));
    if (step % every == 0) push_snapshot(step);

    if (s.velocity_norm < options.conv_tol) {
      traj.status = RunStatus::converged;
      push_snapshot(step);
      break;
    }
    if (v.tau >= options.tau_max - 1e-12) {
      traj.status = RunStatus::step_limit;
      push_snapshot(step);
      break;
    }

    if (options.scheme == TimeScheme::semi_implicit) {
      if (prev_values.empty()) {
        // First step: stabilised backward Euler.
        stab.apply(v.values, lap);
        for (std::size_t j = 0; j < n; ++j) {
          rhs[j] = v.values[j] / options.dtau + s.velocity[j] - kappa * lap[j];
        }
        stab.solve(1.0 / options.dtau, rhs, next);
      } else {
        std::vector<double> extrap(n);
        for (std::size_t j = 0; j < n; ++j) extrap[j] = 2.0 * v.values[j] - prev_values[j];
        stab.apply(extrap, lap);
        for (std::size_t j = 0; j < n; ++j) {
          rhs[j] = (4.0 * v.values[j] - prev_values[j]) / (2.0 * options.dtau) +
                   2.0 * s.velocity[j] - prev_velocity[j] - kappa * lap[j];
        }
        stab.solve(1.5 / options.dtau, rhs, next);
      }
      prev_values = v.values;
      prev_velocity = std::move(s.velocity);
      v.values = next;
    } else {
      const double dt = options.dtau;
      std::vector<double> k1 = std::move(s.velocity);
      NormalSection stage = v;
      bool failed = false;
      auto velocity_at = [&](const std::vector<double>& k, double c) -> std::vector<double> {
        for (std::size_t j = 0; j < n; ++j) stage.values[j] = v.values[j] + c * dt * k[j];
        if (first_outside(stage)) {
          failed = true;
          return {};
        }
        return evaluate_graph(stage).velocity;
      };
      try {
        auto k2 = velocity_at(k1, 0.5);
        auto k3 = failed ? k2 : velocity_at(k2, 0.5);
        auto k4 = failed ? k3 : velocity_at(k3, 1.0);
        if (!failed) {
          for (std::size_t j = 0; j < n; ++j) {
            v.values[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
          }
        }
      } catch (const ExcessiveTilt&) {
        failed = true;
      }
      if (failed) {
        traj.status = RunStatus::graph_overflow;
        traj.overflow_tau = v.tau + dt;
        break;
      }
    }

    if (auto node = first_outside(v)) {
      traj.status = RunStatus::graph_overflow;
      traj.overflow_node = node;
      traj.overflow_tau = v0.tau + static_cast<double>(step + 1) * options.dtau;
      // v now holds the first state outside the tube; keep the last valid one.
      if (!prev_values.empty()) v.values = prev_values;
      v.tau = traj.steps.back().tau;
      push_snapshot(step);
      break;
    }
  }
  return traj;
}

// ---------------------------------------------------------- unstable modes --

std::vector<std::vector<double>> unstable_modes(const ShrinkerModel& model) {
  const auto angles = model.angles();
  const std::size_t n = model.nodes();
  std::vector<std::vector<double>> raw;
  raw.emplace_back(n, 1.0);
  if (model.kind() == ShrinkerKind::circle) {
    std::vector<double> c(n), s(n);
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = std::cos(angles[j]);
      s[j] = std::sin(angles[j]);
    }
    raw.push_back(std::move(c));
    raw.push_back(std::move(s));
  } else {
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = std::cos(angles[j]);
    raw.push_back(std::move(c));
  }
  // Gram-Schmidt in the weighted inner product.
  for (std::size_t k = 0; k < raw.size(); ++k) {
    for (std::size_t i = 0; i < k; ++i) {
      const double p = inner_product(model, raw[k], raw[i]);
      for (std::size_t j = 0; j < n; ++j) raw[k][j] -= p * raw[i][j];
    }
    const double nk = l2_norm(model, raw[k]);
    for (double& x : raw[k]) x /= nk;
  }
  return raw;
}

std::vector<double> unstable_rates(const ShrinkerModel& model) {
  if (model.kind() == ShrinkerKind::circle) return {1.0, 0.5, 0.5};
  return {1.0, 0.5};
}

std::vector<double> unstable_coefficients(const NormalSection& v) {
  const auto modes = unstable_modes(*v.model);
  std::vector<double> c;
  c.reserve(modes.size());
  for (const auto& e : modes) c.push_back(inner_product(*v.model, v.values, e));
  return c;
}

NormalSection project_out_unstable(const NormalSection& v) {
  const auto modes = unstable_modes(*v.model);
  NormalSection out = v;
  for (const auto& e : modes) {
    const double c = inner_product(*v.model, v.values, e);
    for (std::size_t j = 0; j < out.size(); ++j) out.values[j] -= c * e[j];
  }
  return out;
}

// ----------------------------------------------------------------- shooting --

namespace {

std::vector<double> solve_small(std::vector<double> matrix, std::vector<double> b) {
  const std::size_t m = b.size();
  gsl_matrix_view a = gsl_matrix_view_array(matrix.data(), m, m);
  gsl_vector_view bv = gsl_vector_view_array(b.data(), m);
  std::vector<double> x(m);
  gsl_vector_view xv = gsl_vector_view_array(x.data(), m);
  gsl_permutation* perm = gsl_permutation_alloc(m);
  int sign = 0;
  int status = gsl_linalg_LU_decomp(&a.matrix, perm, &sign);
  if (status == GSL_SUCCESS) status = gsl_linalg_LU_solve(&a.matrix, perm, &bv.vector, &xv.vector);
  gsl_permutation_free(perm);
  if (status != GSL_SUCCESS) throw FitError("singular shooting Jacobian");
  return x;
}

double sup_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

ShootingResult shoot_neutral(const InitialFamily& family, std::vector<double> guess,
                             const RescaledOptions& flow, const ShootingOptions& options) {
  ShootingResult result;
  result.parameters = std::move(guess);
  const std::size_t m = result.parameters.size();

  auto residual = [&](std::span<const double> p, double horizon) {
    const NormalSection v0 = family(p);
    if (v0.model->nodes() == 0 || unstable_rates(*v0.model).size() != m) {
      throw DomainError("shooting needs one parameter per unstable mode");
    }
    RescaledOptions opts = flow;
    opts.tau_max = v0.tau + horizon;
    opts.conv_tol = 0.0;
    opts.snapshot_every = std::numeric_limits<std::size_t>::max();
    const Trajectory traj = run_rescaled(v0, opts);
    ++result.runs;
    const NormalSection& end = traj.final_state();
    auto c = unstable_coefficients(end);
    const auto rates = unstable_rates(*v0.model);
    const double elapsed = end.tau - v0.tau;
    for (std::size_t k = 0; k < m; ++k) c[k] *= std::exp(-rates[k] * elapsed);
    return c;
  };

  auto jacobian = [&](std::span<const double> p, std::span<const double> base, double horizon) {
    std::vector<double> jac(m * m);
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<double> q(p.begin(), p.end());
      const double step = options.jacobian_step * std::max(1.0, std::abs(q[k]));
      q[k] += step;
      const auto r = residual(q, horizon);
      for (std::size_t i = 0; i < m; ++i) jac[i * m + k] = (r[i] - base[i]) / step;
    }
    return jac;
  };

  std::vector<double> jac;
  for (double horizon : options.horizons) {
    result.horizon = horizon;
    auto r = residual(result.parameters, horizon);
    if (jac.empty()) jac = jacobian(result.parameters, r, horizon);
    for (int it = 0; it < options.max_iterations && sup_norm(r) > options.tolerance; ++it) {
      auto delta = solve_small(jac, r);
      std::vector<double> trial = result.parameters;
      for (std::size_t k = 0; k < m; ++k) trial[k] -= delta[k];
      auto r_trial = residual(trial, horizon);
      if (sup_norm(r_trial) > 0.5 * sup_norm(r)) {
        // Slow or failed contraction: refresh the Jacobian where we stand.
        jac = jacobian(result.parameters, r, horizon);
        delta = solve_small(jac, r);
        trial = result.parameters;
        for (std::size_t k = 0; k < m; ++k) trial[k] -= delta[k];
        r_trial = residual(trial, horizon);
        if (sup_norm(r_trial) >= sup_norm(r)) break;
      }
      result.parameters = std::move(trial);
      r = std::move(r_trial);
    }
    result.residual = r;
  }
  return result;
}

}  // namespace shrinker
