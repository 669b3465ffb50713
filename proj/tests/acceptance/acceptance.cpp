// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "shrinker/analysis.hpp"
#include "shrinker/energy.hpp"
#include "shrinker/flow.hpp"
#include "shrinker/lab/config.hpp"
#include "shrinker/lab/experiments.hpp"
#include "shrinker/physical.hpp"

using namespace shrinker;

namespace {

// Tolerances.
constexpr double kResidualMax = 1e-3;
constexpr double kOrderLow = 1.7, kOrderHigh = 2.3;
constexpr double kDensityTol = 1e-6;
constexpr double kConstancyTol = 1e-6;
constexpr double kEnergyIncreaseTol = 1e-9;
constexpr double kMonotonicityOrderMin = 0.9;
constexpr double kGradientRelTol = 1e-4;
constexpr double kFinalDistanceMax = 1e-4;
constexpr double kRoundnessMax = 1e-3;
constexpr double kThetaLow = 0.3, kThetaHigh = 0.55;
constexpr double kRSquaredMin = 0.95;
constexpr double kSyntheticThetaTol = 0.02;
constexpr double kUniquenessTol = 1e-3;
constexpr double kRouteMax = 5e-3;
constexpr double kExitRelTol = 0.01;

// Runtime limits in seconds.
constexpr double kFastLimit = 1.0;
constexpr double kMonotonicityLimit = 120.0;
constexpr double kGradientLimit = 10.0;
constexpr double kPipelineLimit = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Runs a criterion, turning exceptions into a failure line.
void criterion(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

std::vector<Vec2> circle_points(std::size_t n, double radius) {
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    pts[j] = {radius * std::cos(t), radius * std::sin(t)};
  }
  return pts;
}

NormalSection random_smooth(const ModelPtr& model, std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NormalSection v = NormalSection::zero(model);
  for (int k = 0; k <= 6; ++k) {
    const double a = u(rng) / (1 + k * k), b = u(rng) / (1 + k * k);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double t = model->angles()[j];
      v.values[j] += a * std::cos(k * t) + b * std::sin(k * t);
    }
  }
  const double scale = size / v.max_abs();
  for (double& x : v.values) x *= scale;
  return v;
}

double round_radius_sq(double r0, double tau) { return 2 + (r0 * r0 - 2) * std::exp(tau); }

void residuals() {
  const auto t0 = Clock::now();
  double worst = 0.0, order_lo = 1e300, order_hi = -1e300;
  for (auto kind : {ShrinkerKind::circle, ShrinkerKind::round_sphere}) {
    const int n = kind == ShrinkerKind::circle ? 1 : 2;
    const double coarse = shrinker_residual(embed_graph(NormalSection::zero(make_shrinker(kind, n, 512))));
    const double fine = shrinker_residual(embed_graph(NormalSection::zero(make_shrinker(kind, n, 1024))));
    const double order = std::log2(coarse / fine);
    worst = std::max(worst, coarse);
    order_lo = std::min(order_lo, order);
    order_hi = std::max(order_hi, order);
  }
  const double elapsed = seconds_since(t0);
  report(1, worst <= kResidualMax && order_lo >= kOrderLow && order_hi <= kOrderHigh && elapsed < kFastLimit,
         fmt("max residual %.3e (<= %.0e), orders [%.3f, %.3f] in [%.1f, %.1f], %.3f s", worst,
             kResidualMax, order_lo, order_hi, kOrderLow, kOrderHigh, elapsed));
}

void densities() {
  const auto t0 = Clock::now();
  const double circle = make_shrinker(ShrinkerKind::circle, 1, 512)->density();
  const double sphere = make_shrinker(ShrinkerKind::round_sphere, 2, 512)->density();
  const double ec = std::abs(circle - std::sqrt(2 * M_PI / M_E));
  const double es = std::abs(sphere - 4 / M_E);
  const double elapsed = seconds_since(t0);
  report(2, ec <= kDensityTol && es <= kDensityTol && elapsed < kFastLimit,
         fmt("circle %.9f (err %.2e), sphere %.9f (err %.2e), %.3f s", circle, ec, sphere, es, elapsed));
}

void constancy() {
  const auto t0 = Clock::now();
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 18; ++i) {
    const double t = -1.0 + 0.05 * i;
    const auto s = DiscreteSurface::curve(circle_points(512, std::sqrt(-2 * t)));
    const double d = density_ratio(s, {0.0, 0.0}, 0.0, t).value;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const double elapsed = seconds_since(t0);
  report(3, hi - lo <= kConstancyTol && elapsed < kFastLimit,
         fmt("variation %.3e over t in [-1, -0.1], %.3f s", hi - lo, elapsed));
}

void gradient() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  for (int pair = 0; pair < 20; ++pair) {
    const auto v = random_smooth(model, rng, 0.1);
    const auto f = random_smooth(model, rng, 1.0);
    const double eps = 1e-6;
    NormalSection plus = v, minus = v;
    for (std::size_t j = 0; j < v.size(); ++j) {
      plus.values[j] += eps * f.values[j];
      minus.values[j] -= eps * f.values[j];
    }
    const double fd = (energy(plus) - energy(minus)) / (2 * eps);
    const double an = inner_product(*model, grad_energy(v).values, f.values);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  const double elapsed = seconds_since(t0);
  report(5, worst <= kGradientRelTol && elapsed < kGradientLimit,
         fmt("max relative error %.3e over 20 pairs, %.3f s", worst, elapsed));
}

void synthetic_theta(double& worst) {
  for (double theta : {0.3, 0.4, 0.45}) {
    const double p = 1 + decay_alpha(theta);
    std::vector<double> tau, gap, grad;
    for (double t = 1.0; t <= 1e5; t *= 1.01) {
      tau.push_back(t);
      gap.push_back(std::pow(t, -p));
      grad.push_back(0.7 * std::pow(gap.back(), 1 - theta));
    }
    worst = std::max(worst, std::abs(fit_lojasiewicz(tau, gap, grad).theta - theta));
  }
  std::vector<double> tau, gap, grad;
  for (double t = 0.0; t <= 12.0; t += 1e-3) {
    tau.push_back(t);
    gap.push_back(std::exp(-2 * t));
    grad.push_back(std::sqrt(2.0) * std::exp(-t));
  }
  worst = std::max(worst, std::abs(fit_lojasiewicz(tau, gap, grad).theta - 0.5));
}

bool synthetic_violation_flagged() {
  std::vector<double> tau, gap, vdot;
  for (int i = 0; i <= 500; ++i) {
    tau.push_back(0.01 * i);
    gap.push_back(i < 250 ? std::exp(-0.02 * i) : 0.0);
    vdot.push_back(std::sqrt(2.0) * std::exp(-0.01 * i));
  }
  const auto r = check_drift(tau, gap, vdot, 0.5);
  return r.violated && r.min_drift_margin < 0.0;
}

void dilation_exit() {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  NormalSection v = NormalSection::zero(model);
  std::fill(v.values.begin(), v.values.end(), -0.2);
  RescaledOptions o;
  o.dtau = 1e-4;
  o.tau_max = 5.0;
  const auto t = run_rescaled(v, o);
  const double r0 = std::sqrt(2.0) - 0.2;
  const double r_exit = model->radius() - model->graph_bound();
  // Exit when R^2 = r_exit^2 on the closed-form radius curve.
  const double exact = std::log((2 - r_exit * r_exit) / (2 - r0 * r0));
  const bool exited = t.status == RunStatus::graph_overflow && t.overflow_tau.has_value();
  const double rel = exited ? std::abs(*t.overflow_tau - exact) / exact : INFINITY;
  report(12, exited && rel <= kExitRelTol,
         fmt("exit tau %.5f vs ODE %.5f (rel %.2e), R^2 at exit %.5f", exited ? *t.overflow_tau : NAN,
             exact, rel, round_radius_sq(r0, exact)));
}

}  // namespace

int main() {
  criterion(1, residuals);
  criterion(2, densities);
  criterion(3, constancy);

  lab::ExperimentConfig config;
  const auto resolved = lab::resolve(config, "circle-perturb");
  std::optional<lab::Pipeline> pipeline;
  double pipeline_seconds = 0.0;
  std::string pipeline_error;
  {
    const auto t0 = Clock::now();
    try {
      pipeline = lab::run_pipeline(config, resolved);
    } catch (const std::exception& e) {
      pipeline_error = e.what();
    }
    pipeline_seconds = seconds_since(t0);
  }
  auto need_pipeline = [&]() -> const lab::Pipeline& {
    if (!pipeline) throw std::runtime_error("pipeline failed: " + pipeline_error);
    return *pipeline;
  };

  criterion(4, [&] {
    const auto& p = need_pipeline();
    const auto& steps = p.rescaled.steps;
    double increase = -INFINITY;
    for (std::size_t i = 1; i < steps.size(); ++i) increase = std::max(increase, steps[i].energy - steps[i - 1].energy);
    const double run_residual = monotonicity_residual(p.rescaled).max_abs;

    const auto t0 = Clock::now();
    NormalSection v0 = p.start;
    if (p.shooting) {
      const auto modes = unstable_modes(*p.model);
      for (std::size_t k = 0; k < modes.size(); ++k) {
        for (std::size_t j = 0; j < v0.size(); ++j) v0.values[j] += p.shooting->parameters[k] * modes[k][j];
      }
    }
    std::vector<double> dtaus = {4e-4, 2e-4, 1e-4}, res;
    for (double dtau : dtaus) {
      RescaledOptions o;
      o.dtau = dtau;
      o.tau_max = v0.tau + 1.0;
      o.conv_tol = 0.0;
      o.snapshot_every = 1000000;
      res.push_back(monotonicity_residual(run_rescaled(v0, o)).max_abs);
    }
    double min_order = INFINITY;
    for (std::size_t k = 1; k < res.size(); ++k) min_order = std::min(min_order, std::log2(res[k - 1] / res[k]));
    const double elapsed = pipeline_seconds + seconds_since(t0);
    report(4, increase <= kEnergyIncreaseTol && min_order >= kMonotonicityOrderMin && elapsed < kMonotonicityLimit,
           fmt("max step increase %.3e (<= %.0e), run residual %.3e, refinement residuals %.3e %.3e %.3e, "
               "min order %.3f, %.1f s",
               increase, kEnergyIncreaseTol, run_residual, res[0], res[1], res[2], min_order, elapsed));
  });

  criterion(5, gradient);

  criterion(6, [&] {
    const auto& p = need_pipeline();
    const bool converged = p.rescaled.status == RunStatus::converged;
    report(6, converged && p.final_distance <= kFinalDistanceMax && p.roundness <= kRoundnessMax &&
                  pipeline_seconds < kPipelineLimit,
           fmt("status %s at tau %.3f, ||v - v'|| %.3e (<= %.0e), distance to round %.3e (<= %.0e), "
               "T %.6f, %.1f s",
               std::string(to_string(p.rescaled.status)).c_str(), p.rescaled.steps.back().tau,
               p.final_distance, kFinalDistanceMax, p.roundness, kRoundnessMax, p.extinction.T,
               pipeline_seconds));
  });

  criterion(7, [&] {
    const auto& p = need_pipeline();
    if (!p.fit) throw std::runtime_error("no Lojasiewicz fit: " + p.fit_skipped);
    const auto& f = *p.fit;
    double synthetic = 0.0;
    synthetic_theta(synthetic);
    report(7, f.theta > kThetaLow && f.theta < kThetaHigh && f.r_squared >= kRSquaredMin &&
                  f.min_log_margin >= 0.0 && synthetic <= kSyntheticThetaTol,
           fmt("theta %.4f in (%.2f, %.2f), R^2 %.5f, constant %.4e, min log margin %.3e, "
               "synthetic error %.2e",
               f.theta, kThetaLow, kThetaHigh, f.r_squared, f.constant, f.min_log_margin, synthetic));
  });

  criterion(8, [&] {
    const auto& p = need_pipeline();
    if (!p.bounds) throw std::runtime_error("no drift bounds: " + p.fit_skipped);
    const auto& b = *p.bounds;
    const bool flagged = synthetic_violation_flagged();
    report(8, !b.violated && b.min_drift_margin >= 0.0 && b.min_sup_margin >= 0.0 && flagged,
           fmt("gamma %.4f, min drift margin %.3e, min sup margin %.3e, synthetic violation %s", b.gamma,
               b.min_drift_margin, b.min_sup_margin, flagged ? "flagged" : "missed"));
  });

  criterion(9, [&] {
    const auto& p = need_pipeline();
    if (!p.decay) throw std::runtime_error("no decay fit: " + p.fit_skipped);
    const auto& d = *p.decay;
    report(9, d.holds && d.min_energy_margin > 0.0 && d.min_distance_margin > 0.0,
           fmt("exponents %.3f / %.3f, margins energy %.3e distance %.3e on tau [%.2f, %.2f]",
               d.energy_exponent, d.distance_exponent, d.min_energy_margin, d.min_distance_margin,
               d.tau_begin, d.tau_end));
  });

  criterion(10, [&] {
    const auto t0 = Clock::now();
    const auto m = lab::resolve(config, "tangent-uniqueness");
    const auto model = lab::build_model(m);
    const auto initial = lab::initial_surface(config, m);
    const auto [physical, ext] = lab::run_physical_stage(config, initial);
    UniquenessOptions o;
    o.tolerance = kUniquenessTol;
    const auto main = tangent_uniqueness_experiment(physical, ext, model, o);
    o.center_offset = m.control_offset;
    const auto control = tangent_uniqueness_experiment(physical, ext, model, o);
    const double elapsed = seconds_since(t0);
    std::string detail;
    for (const auto& s : main.sequences) {
      detail += fmt("base %g: %zu slices, last %.3e, %s; ", s.base, s.distance.size(),
                    s.distance.empty() ? NAN : s.distance.back(), s.decreasing ? "decreasing" : "not decreasing");
    }
    report(10, main.unique && !control.unique && elapsed < kPipelineLimit,
           detail + fmt("verdict '%s', control '%s', %.1f s", main.verdict.c_str(), control.verdict.c_str(),
                        elapsed));
  });

  criterion(11, [&] {
    const auto& p = need_pipeline();
    if (!p.route) throw std::runtime_error("no route comparison");
    report(11, p.route->max_distance <= kRouteMax,
           fmt("max L2 distance %.3e (<= %.0e) over tau [%.3f, %.3f]", p.route->max_distance, kRouteMax,
               p.route->tau.front(), p.route->tau.back()));
  });

  criterion(12, dilation_exit);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
