#include "shrinker/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "shrinker/error.hpp"

namespace shrinker {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> difference_norms(const NormalSection& a, const NormalSection& b) {
  std::vector<double> d(a.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = a.values[j] - b.values[j];
  return d;
}

double section_distance(const NormalSection& a, const NormalSection& b) {
  return l2_norm(*a.model, difference_norms(a, b));
}

NormalSection blend(const NormalSection& a, const NormalSection& b, double w) {
  NormalSection out = a;
  for (std::size_t j = 0; j < out.size(); ++j) {
    out.values[j] = (1.0 - w) * a.values[j] + w * b.values[j];
  }
  out.tau = (1.0 - w) * a.tau + w * b.tau;
  return out;
}

double hausdorff_to_model(const DiscreteSurface& s, const ShrinkerModel& model) {
  const auto poly = s.closed_polygon();
  const double radius = model.radius();
  double to_model = 0.0;
  for (const auto& p : poly) to_model = std::max(to_model, std::abs(norm(p) - radius));
  // The model circle (meridian circle for profiles) against the polygon edges.
  const std::size_t samples = 4 * poly.size();
  double to_surface = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(samples);
    const Vec2 y{radius * std::cos(a), radius * std::sin(a)};
    double best = kInf;
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const Vec2 p = poly[j];
      const Vec2 e = poly[(j + 1) % poly.size()] - p;
      const double len2 = dot(e, e);
      const double u = len2 > 0.0 ? std::clamp(dot(y - p, e) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, norm(y - (p + u * e)));
    }
    to_surface = std::max(to_surface, best);
  }
  return std::max(to_model, to_surface);
}

}  // namespace

double decay_alpha(double theta) {
  if (theta >= 0.5) return kInf;
  return 2.0 * theta / (1.0 - 2.0 * theta);
}

// --------------------------------------------------------------- lojasiewicz --

LojasiewiczFit fit_lojasiewicz(std::span<const double> tau, std::span<const double> gap,
                               std::span<const double> grad,
                               const LojasiewiczOptions& options) {
  if (tau.size() != gap.size() || tau.size() != grad.size()) {
    throw DomainError("lojasiewicz fit needs matching series");
  }
  std::vector<double> x, y;
  LojasiewiczFit fit;
  bool any = false;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!(gap[i] >= options.gap_min && gap[i] <= options.gap_max && grad[i] > 0.0)) continue;
    if (!any) {
      fit.first = i;
      fit.tau_begin = tau[i];
      any = true;
    }
    fit.last = i;
    fit.tau_end = tau[i];
    x.push_back(std::log(gap[i]));
    y.push_back(std::log(grad[i]));
  }
  fit.samples = x.size();
  if (fit.samples < options.min_samples) {
    throw FitError("lojasiewicz window holds " + std::to_string(fit.samples) +
                   " samples with gap in [" + std::to_string(options.gap_min) + ", " +
                   std::to_string(options.gap_max) + "], need " +
                   std::to_string(options.min_samples));
  }
  const LinearFit line = fit_line(x, y);
  fit.theta = 1.0 - line.slope;
  fit.r_squared = line.r_squared;
  double log_c = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) log_c = std::min(log_c, y[i] - line.slope * x[i]);
  fit.constant = std::exp(log_c);
  fit.min_log_margin = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fit.min_log_margin = std::min(fit.min_log_margin, y[i] - line.slope * x[i] - log_c);
  }
  fit.exponential = fit.theta >= options.exponential_threshold;
  fit.alpha = fit.exponential ? kInf : decay_alpha(fit.theta);
  return fit;
}

LojasiewiczFit fit_lojasiewicz(const Trajectory& trajectory, const LojasiewiczOptions& options) {
  if (trajectory.status != RunStatus::converged) {
    throw DomainError("lojasiewicz fit needs a converged trajectory");
  }
  std::vector<double> tau, gap, grad;
  for (const auto& s : trajectory.steps) {
    tau.push_back(s.tau);
    gap.push_back(s.gap);
    grad.push_back(s.grad_norm);
  }
  return fit_lojasiewicz(tau, gap, grad, options);
}

// -------------------------------------------------------------------- bounds --

namespace {

BoundsReport drift_report(std::span<const double> tau, std::span<const double> gap,
                          std::span<const double> vdot, std::size_t evaluated, double theta,
                          const BoundsOptions& options) {
  const std::size_t n = tau.size();
  if (gap.size() != n || vdot.size() != n || evaluated > n) {
    throw DomainError("drift check needs matching series");
  }
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  BoundsReport r;
  r.theta = theta;
  std::vector<double> tail(n, 0.0);
  for (std::size_t i = n; i-- > 1;) {
    tail[i - 1] = tail[i] + 0.5 * (vdot[i] + vdot[i - 1]) * (tau[i] - tau[i - 1]);
  }
  r.tau.assign(tau.begin(), tau.begin() + static_cast<long>(evaluated));
  r.drift.assign(tail.begin(), tail.begin() + static_cast<long>(evaluated));

  auto lifted = [&](std::size_t i) { return std::pow(std::max(gap[i], 0.0), theta); };
  if (options.gamma) {
    r.gamma = *options.gamma;
  } else {
    r.gamma = kInf;
    for (std::size_t i = 0; i < evaluated; ++i) {
      if (!(r.drift[i] > 0.0)) continue;
      if (!(gap[i] > 0.0)) {
        r.violated = true;
        break;
      }
      r.gamma = std::min(r.gamma, lifted(i) / (theta * r.drift[i]));
    }
  }
  r.bound.resize(evaluated);
  r.drift_margin.resize(evaluated);
  r.min_drift_margin = kInf;
  for (std::size_t i = 0; i < evaluated; ++i) {
    if (r.violated) {
      r.bound[i] = 0.0;
      r.drift_margin[i] = -r.drift[i];
    } else {
      r.bound[i] = std::isinf(r.gamma) ? 0.0 : lifted(i) / (r.gamma * theta);
      // drift (gamma_i / gamma - 1) is exactly zero at the sample fixing gamma.
      const double own = r.drift[i] > 0.0 ? lifted(i) / (theta * r.drift[i]) : kInf;
      r.drift_margin[i] = r.drift[i] > 0.0 && !std::isinf(r.gamma)
                              ? r.drift[i] * (own / r.gamma - 1.0)
                              : r.bound[i] - r.drift[i];
    }
    r.min_drift_margin = std::min(r.min_drift_margin, r.drift_margin[i]);
  }
  if (r.violated) r.gamma = 0.0;
  if (r.min_drift_margin < 0.0) r.violated = true;
  if (evaluated == 0) r.min_drift_margin = 0.0;
  return r;
}

}  // namespace

BoundsReport check_drift(std::span<const double> tau, std::span<const double> gap,
                         std::span<const double> vdot, double theta,
                         const BoundsOptions& options) {
  return drift_report(tau, gap, vdot, tau.size(), theta, options);
}

BoundsReport check_bounds(const Trajectory& trajectory, const LojasiewiczFit& fit,
                          const BoundsOptions& options) {
  const auto& steps = trajectory.steps;
  if (fit.last >= steps.size() || fit.first > fit.last) {
    throw DomainError("fit window does not belong to this trajectory");
  }
  const double theta = std::min(fit.theta, 0.999);
  std::vector<double> tau, gap, vdot;
  for (std::size_t i = fit.first; i < steps.size(); ++i) {
    tau.push_back(steps[i].tau);
    gap.push_back(steps[i].gap);
    vdot.push_back(steps[i].vdot_norm);
  }
  BoundsReport r = drift_report(tau, gap, vdot, fit.last - fit.first + 1, theta, options);

  double min_state_gamma = kInf;
  for (std::size_t i = fit.first; i <= fit.last; ++i) {
    min_state_gamma = std::min(min_state_gamma, steps[i].gamma);
  }
  r.gamma_chain = min_state_gamma * fit.constant;

  const auto& snaps = trajectory.snapshots;
  const auto& idx = trajectory.snapshot_steps;
  r.min_sup_margin = kInf;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    if (idx[k] < fit.first || idx[k] > fit.last) continue;
    double sup = 0.0;
    for (std::size_t m = k + 1; m < snaps.size(); ++m) {
      sup = std::max(sup, section_distance(snaps[m], snaps[k]));
    }
    const double g = std::max(steps[idx[k]].gap, 0.0);
    double bound = 0.0;
    if (!r.violated || options.gamma) {
      bound = std::isinf(r.gamma) ? 0.0 : std::pow(g, theta) / (r.gamma * theta);
    }
    r.sup_tau.push_back(steps[idx[k]].tau);
    r.sup_distance.push_back(sup);
    r.sup_margin.push_back(bound - sup);
    r.min_sup_margin = std::min(r.min_sup_margin, bound - sup);
  }
  if (r.sup_margin.empty()) r.min_sup_margin = 0.0;
  if (r.min_sup_margin < 0.0) r.violated = true;
  return r;
}

// --------------------------------------------------------------------- decay --

namespace {

struct PowerCheck {
  double constant = 0.0;
  double constant_log = 0.0;
  double min_margin = kInf;
};

// C = max over the calibration part of value * tau^p; margins 1 - value tau^p / C
// on the remainder. The constant is refitted in L = log(-1/t), t = -e^{-tau}.
PowerCheck power_check(std::span<const double> tau, std::span<const double> value, double p,
                       double calibration_fraction) {
  PowerCheck c;
  const std::size_t n = tau.size();
  const auto split = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(calibration_fraction * static_cast<double>(n))));
  for (std::size_t i = 0; i < split; ++i) {
    c.constant = std::max(c.constant, value[i] * std::pow(tau[i], p));
    const double t = -std::exp(-tau[i]);
    c.constant_log = std::max(c.constant_log, value[i] * std::pow(std::log(-1.0 / t), p));
  }
  for (std::size_t i = split; i < n; ++i) {
    c.min_margin = std::min(c.min_margin, 1.0 - value[i] * std::pow(tau[i], p) / c.constant);
  }
  return c;
}

// Rate of the least-squares fit log value = a - rate tau over positive values.
double exponential_rate(std::span<const double> tau, std::span<const double> value) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < value.size(); ++k) {
    if (value[k] > 0.0) {
      x.push_back(tau[k]);
      y.push_back(std::log(value[k]));
    }
  }
  return x.size() >= 2 ? -fit_line(x, y).slope : 0.0;
}

}  // namespace

DecayReport fit_decay(const Trajectory& trajectory, const NormalSection& limit,
                      const LojasiewiczFit& fit, const DecayOptions& options) {
  if (trajectory.status != RunStatus::converged) {
    throw DomainError("decay check needs a converged trajectory");
  }
  DecayReport r;
  r.theta = fit.exponential ? options.exponential_theta : fit.theta;
  r.alpha = decay_alpha(r.theta);
  r.energy_exponent = 1.0 + r.alpha;
  r.distance_exponent = r.theta * (1.0 + r.alpha);

  const auto& steps = trajectory.steps;
  std::vector<double> tau_e, gap;
  for (std::size_t i = fit.first; i <= fit.last && i < steps.size(); ++i) {
    tau_e.push_back(steps[i].tau);
    gap.push_back(steps[i].gap);
  }
  std::vector<double> tau_d, dist;
  const auto& snaps = trajectory.snapshots;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const auto step = trajectory.snapshot_steps[k];
    if (step < fit.first) continue;
    tau_d.push_back(steps[step].tau);
    dist.push_back(section_distance(snaps[k], limit));
  }
  r.energy_rate = exponential_rate(tau_e, gap);
  r.distance_rate = exponential_rate(tau_d, dist);

  // value * tau^p decreases once tau > p / rate; in the exponential regime the
  // tail starts there.
  auto tail_start = [&](double p, double rate) {
    double start = 1.0;
    if (fit.exponential && rate > 0.0) start = std::max(start, p / rate);
    return start;
  };
  auto trim = [](std::vector<double>& tau, std::vector<double>& value, double start) {
    const auto it = std::lower_bound(tau.begin(), tau.end(), start);
    const auto k = it - tau.begin();
    tau.erase(tau.begin(), it);
    value.erase(value.begin(), value.begin() + k);
  };
  trim(tau_e, gap, tail_start(r.energy_exponent, r.energy_rate));
  trim(tau_d, dist, tail_start(r.distance_exponent, r.distance_rate));
  if (tau_e.size() < 4 || tau_d.size() < 4) throw FitError("decay tail too short");
  r.tau_begin = std::min(tau_e.front(), tau_d.front());
  r.tau_end = std::max(tau_e.back(), tau_d.back());

  const PowerCheck e = power_check(tau_e, gap, r.energy_exponent, options.calibration_fraction);
  const PowerCheck d = power_check(tau_d, dist, r.distance_exponent, options.calibration_fraction);
  r.energy_constant = e.constant;
  r.energy_constant_log = e.constant_log;
  r.distance_constant = d.constant;
  r.distance_constant_log = d.constant_log;
  r.min_energy_margin = e.min_margin;
  r.min_distance_margin = d.min_margin;
  r.holds = r.min_energy_margin > 0.0 && r.min_distance_margin > 0.0;
  return r;
}

// ---------------------------------------------------------------- uniqueness --

SliceDistance distance_to_model(const DiscreteSurface& rescaled, const ModelPtr& model) {
  try {
    const auto v = radial_section(rescaled, {0.0, 0.0}, 1.0, model);
    return {l2_norm(*model, v.values), true};
  } catch (const DomainError&) {
    return {hausdorff_to_model(rescaled, *model), false};
  }
}

UniquenessReport tangent_uniqueness_experiment(const PhysicalTrajectory& trajectory,
                                               const ExtinctionEstimate& extinction,
                                               const ModelPtr& model,
                                               const UniquenessOptions& options) {
  if (!(extinction.residual <= options.max_extinction_residual)) {
    throw FitError("extinction residual " + std::to_string(extinction.residual) +
                   " above " + std::to_string(options.max_extinction_residual) +
                   "; uniqueness experiment refused");
  }
  const double T = extinction.T;
  const double t_first = trajectory.steps[trajectory.snapshot_steps.front()].t;
  const double t_last = trajectory.steps[trajectory.snapshot_steps.back()].t;
  if (!(T - t_last <= options.reach_fraction * std::abs(T))) {
    throw DomainError("physical flow stops too far from the extinction time");
  }
  if (options.bases.size() < 2) throw DomainError("need at least two lambda sequences");

  UniquenessReport report;
  report.T = T;
  report.center = extinction.x0 + options.center_offset;
  const Vec2 center = report.center;
  report.unique = true;
  for (double base : options.bases) {
    if (!(base > 1.0)) throw DomainError("lambda bases must exceed 1");
    LambdaSequence seq;
    seq.base = base;
    for (int i = 0;; ++i) {
      const double lambda = std::pow(base, i);
      const double t = T - 1.0 / (lambda * lambda);
      if (t < t_first) continue;
      if (t > t_last) break;
      const auto b = bracket_snapshots(trajectory, t);
      const auto sa = parabolic_rescale(trajectory.snapshots[b.before],
                                        trajectory.steps[trajectory.snapshot_steps[b.before]].t,
                                        lambda, center, T).first;
      const auto sb = parabolic_rescale(trajectory.snapshots[b.after],
                                        trajectory.steps[trajectory.snapshot_steps[b.after]].t,
                                        lambda, center, T).first;
      double distance = 0.0;
      bool graphical = true;
      try {
        const auto va = radial_section(sa, {0.0, 0.0}, 1.0, model);
        const auto vb = radial_section(sb, {0.0, 0.0}, 1.0, model);
        distance = l2_norm(*model, blend(va, vb, b.weight).values);
      } catch (const DomainError&) {
        graphical = false;
        distance = (1.0 - b.weight) * hausdorff_to_model(sa, *model) +
                   b.weight * hausdorff_to_model(sb, *model);
      }
      seq.lambda.push_back(lambda);
      seq.time.push_back(t);
      seq.distance.push_back(distance);
      seq.graphical.push_back(graphical);
    }
    seq.decreasing = seq.distance.size() >= 2;
    for (std::size_t i = 1; i < seq.distance.size(); ++i) {
      if (!(seq.distance[i] < seq.distance[i - 1])) seq.decreasing = false;
    }
    seq.converged = !seq.distance.empty() && seq.distance.back() <= options.tolerance;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < seq.lambda.size(); ++i) {
      if (seq.lambda[i] > 1.0 && seq.distance[i] > 0.0) {
        x.push_back(std::log(std::log(seq.lambda[i] * seq.lambda[i])));
        y.push_back(std::log(seq.distance[i]));
      }
    }
    if (x.size() >= 2) {
      const LinearFit f = fit_line(x, y);
      seq.decay_constant = std::exp(f.intercept);
      seq.decay_exponent = -f.slope;
    }
    report.unique = report.unique && seq.decreasing && seq.converged;
    report.sequences.push_back(std::move(seq));
  }
  report.verdict = report.unique ? "unique" : "not unique / bad center";
  return report;
}

NormalSection rescaled_slice(const PhysicalTrajectory& trajectory,
                             const ExtinctionEstimate& extinction, const ModelPtr& model,
                             double tau) {
  const double T = extinction.T;
  const double t = T - std::exp(-tau);
  const auto b = bracket_snapshots(trajectory, t);
  auto section = [&](std::size_t k) {
    const double tk = trajectory.steps[trajectory.snapshot_steps[k]].t;
    return radial_section(trajectory.snapshots[k], extinction.x0, std::sqrt(T - tk), model,
                          -std::log(T - tk));
  };
  const auto va = section(b.before);
  if (b.before == b.after) return va;
  const auto vb = section(b.after);
  const double w = (tau - va.tau) / (vb.tau - va.tau);
  NormalSection out = blend(va, vb, w);
  out.tau = tau;
  return out;
}

RouteComparison compare_routes(const PhysicalTrajectory& physical,
                               const ExtinctionEstimate& extinction, const Trajectory& rescaled,
                               double tau_begin, double tau_end) {
  RouteComparison c;
  for (const auto& v : rescaled.snapshots) {
    if (v.tau < tau_begin - 1e-12 || v.tau > tau_end + 1e-12) continue;
    const auto p = rescaled_slice(physical, extinction, rescaled.model, v.tau);
    const double d = section_distance(v, p);
    c.tau.push_back(v.tau);
    c.distance.push_back(d);
    c.max_distance = std::max(c.max_distance, d);
  }
  if (c.tau.empty()) throw DomainError("no rescaled snapshots in the comparison window");
  return c;
}

}  // namespace shrinker
