#include "shrinker/lab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include "shrinker/energy.hpp"

namespace shrinker::lab {

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string kind_name(ShrinkerKind kind) {
  return kind == ShrinkerKind::circle ? "circle" : "sphere";
}

std::string list_text(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + format_number(values[i]);
  return out;
}

double radius_factor(const ResolvedModel& m, double angle) {
  double f = 1.0;
  for (const auto& t : m.cos_terms) f += t.amplitude * std::cos(t.k * angle);
  for (const auto& t : m.sin_terms) f += t.amplitude * std::sin(t.k * angle);
  return f;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> log10_or_nan(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? std::log10(v[i]) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<double> out;
  for (std::size_t i = 1; i < err.size(); ++i) {
    out.push_back(std::log(err[i - 1] / err[i]) / std::log(h[i - 1] / h[i]));
  }
  return out;
}

RescaledOptions rescaled_options(const ExperimentConfig& c, const ResolvedModel& m, double tau0) {
  RescaledOptions o;
  o.dtau = m.dtau;
  o.tau_max = tau0 + c.tau_length;
  o.conv_tol = m.conv_tol;
  o.scheme = c.scheme;
  o.snapshot_every = c.rescaled_snapshot_every.value_or(
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.01 / m.dtau))));
  return o;
}

Table trajectory_table(const Trajectory& t) {
  std::vector<double> tau, e, gap, grad, diss, vdot, maxv;
  for (const auto& s : t.steps) {
    tau.push_back(s.tau);
    e.push_back(s.energy);
    gap.push_back(s.gap);
    grad.push_back(s.grad_norm);
    diss.push_back(s.dissipation);
    vdot.push_back(s.vdot_norm);
    maxv.push_back(s.max_abs_v);
  }
  Table table;
  table.add_column("tau", std::move(tau));
  table.add_column("energy", std::move(e));
  table.add_column("gap", std::move(gap));
  table.add_column("grad_norm", std::move(grad));
  table.add_column("dissipation", std::move(diss));
  table.add_column("vdot_norm", std::move(vdot));
  table.add_column("max_abs_v", std::move(maxv));
  return table;
}

Table physical_table(const PhysicalTrajectory& p) {
  std::vector<double> t, a, cx, cy;
  for (const auto& r : p.steps) {
    t.push_back(r.t);
    a.push_back(r.enclosed);
    cx.push_back(r.centroid.x);
    cy.push_back(r.centroid.y);
  }
  Table table;
  table.add_column("t", std::move(t));
  table.add_column("enclosed", std::move(a));
  table.add_column("centroid_x", std::move(cx));
  table.add_column("centroid_y", std::move(cy));
  return table;
}

void describe_model(Summary& s, const ModelPtr& model) {
  s.set("model.kind", kind_name(model->kind()));
  s.set("model.dimension", model->dimension());
  s.set("model.nodes", model->nodes());
  s.set("model.radius", model->radius());
  s.set("model.density", model->density());
  s.set("model.graph_bound", model->graph_bound());
}

void describe_extinction(Summary& s, const PhysicalTrajectory& p, const ExtinctionEstimate& e) {
  s.set("physical.steps", p.steps.size());
  s.set("physical.final_t", p.steps.back().t);
  s.set("physical.final_enclosed", p.steps.back().enclosed);
  s.set("extinction.T", e.T);
  s.set("extinction.x0", format_number(e.x0.x) + ", " + format_number(e.x0.y));
  s.set("extinction.residual", e.residual);
  s.set("extinction.centroid_residual", e.centroid_residual);
  s.set("extinction.slope", e.slope);
}

// ------------------------------------------------------------------ presets --

int density_table(const ExperimentConfig& c, const std::filesystem::path& dir, Summary& s) {
  std::vector<double> dims, quad, ratio, closed, err;
  for (int n : c.density_dimensions) {
    const auto kind = n == 1 ? ShrinkerKind::circle : ShrinkerKind::round_sphere;
    const auto model = make_shrinker(kind, n, c.density_nodes);
    const double R = std::sqrt(2.0 * n);
    const double exact = unit_sphere_area(n) * std::pow(R, n) * std::pow(4.0 * kPi, -0.5 * n) *
                         std::exp(-0.5 * n);
    const auto surface = embed_graph(NormalSection::zero(model));
    dims.push_back(n);
    quad.push_back(model->density());
    ratio.push_back(density_ratio(surface, {0.0, 0.0}, 0.0, -1.0).value);
    closed.push_back(exact);
    err.push_back(std::abs(model->density() - exact));
    const std::string key = n == 1 ? "density.circle" : "density.sphere_n" + std::to_string(n);
    s.set(key, model->density());
  }
  Table table;
  table.add_column("dimension", dims);
  table.add_column("density", quad);
  table.add_column("density_ratio", ratio);
  table.add_column("closed_form", closed);
  table.add_column("abs_error", err);
  write_csv(dir / "density.csv", table);
  s.set("density.nodes", c.density_nodes);
  s.set("density.max_abs_error", *std::max_element(err.begin(), err.end()));
  return 0;
}

int perturb(const ExperimentConfig& c, const std::string& preset, const std::filesystem::path& dir,
            Summary& s) {
  const ResolvedModel m = resolve(c, preset);
  const Pipeline p = run_pipeline(c, m);
  describe_model(s, p.model);
  describe_extinction(s, p.physical, p.extinction);
  write_csv(dir / "physical.csv", physical_table(p.physical));
  write_csv(dir / "trajectory.csv", trajectory_table(p.rescaled));

  const auto& steps = p.rescaled.steps;
  double max_increase = -std::numeric_limits<double>::infinity();
  double min_gap = steps.front().gap;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    max_increase = std::max(max_increase, steps[i].energy - steps[i - 1].energy);
    min_gap = std::min(min_gap, steps[i].gap);
  }
  s.set("rescaled.tau0", p.start.tau);
  s.set("rescaled.dtau", p.rescaled.dtau);
  s.set("rescaled.start_max_abs", p.start.max_abs());
  if (p.shooting) {
    s.set("shooting.runs", static_cast<std::size_t>(p.shooting->runs));
    s.set("shooting.parameters", list_text(p.shooting->parameters));
    s.set("shooting.residual", list_text(p.shooting->residual));
  }
  s.set("rescaled.status", std::string(to_string(p.rescaled.status)));
  s.set("rescaled.steps", steps.size());
  s.set("rescaled.final_tau", steps.back().tau);
  s.set("rescaled.energy_floor", p.rescaled.energy_floor);
  s.set("rescaled.final_gap", steps.back().gap);
  s.set("rescaled.min_gap", min_gap);
  s.set("rescaled.max_energy_increase", steps.size() > 1 ? max_increase : 0.0);
  s.set("rescaled.final_distance", p.final_distance);
  s.set("rescaled.roundness", p.roundness);
  const bool converged = p.rescaled.status == RunStatus::converged;

  bool holds = converged;
  if (p.fit) {
    const auto& f = *p.fit;
    s.set("lojasiewicz.theta", f.theta);
    s.set("lojasiewicz.r_squared", f.r_squared);
    s.set("lojasiewicz.constant", f.constant);
    s.set("lojasiewicz.alpha", f.alpha);
    s.set("lojasiewicz.exponential", f.exponential);
    s.set("lojasiewicz.window", format_number(f.tau_begin) + ", " + format_number(f.tau_end));
    s.set("lojasiewicz.samples", f.samples);
    s.set("lojasiewicz.min_log_margin", f.min_log_margin);
    const auto& b = *p.bounds;
    s.set("bounds.theta", b.theta);
    s.set("bounds.gamma", b.gamma);
    s.set("bounds.gamma_chain", b.gamma_chain);
    s.set("bounds.min_drift_margin", b.min_drift_margin);
    s.set("bounds.min_sup_margin", b.min_sup_margin);
    s.set("bounds.violated", b.violated);
    const auto& d = *p.decay;
    s.set("decay.theta", d.theta);
    s.set("decay.alpha", d.alpha);
    s.set("decay.energy_exponent", d.energy_exponent);
    s.set("decay.distance_exponent", d.distance_exponent);
    s.set("decay.energy_constant", d.energy_constant);
    s.set("decay.distance_constant", d.distance_constant);
    s.set("decay.energy_constant_log", d.energy_constant_log);
    s.set("decay.distance_constant_log", d.distance_constant_log);
    s.set("decay.min_energy_margin", d.min_energy_margin);
    s.set("decay.min_distance_margin", d.min_distance_margin);
    s.set("decay.energy_rate", d.energy_rate);
    s.set("decay.distance_rate", d.distance_rate);
    s.set("decay.window", format_number(d.tau_begin) + ", " + format_number(d.tau_end));
    s.set("decay.holds", d.holds);
    holds = holds && !b.violated && d.holds;

    Table bt;
    bt.add_column("tau", b.tau);
    bt.add_column("drift", b.drift);
    bt.add_column("bound", b.bound);
    bt.add_column("margin", b.drift_margin);
    write_csv(dir / "bounds.csv", bt);
  } else {
    s.set("lojasiewicz.skipped", p.fit_skipped);
    s.set("bounds.min_drift_margin", 0.0);
    s.set("bounds.min_sup_margin", 0.0);
  }
  if (p.route) {
    s.set("route.max_distance", p.route->max_distance);
    Table rt;
    rt.add_column("tau", p.route->tau);
    rt.add_column("distance", p.route->distance);
    write_csv(dir / "route.csv", rt);
  }

  if (c.plots) {
    std::vector<double> tau, gap;
    for (const auto& st : steps) {
      tau.push_back(st.tau);
      gap.push_back(st.gap);
    }
    write_svg(dir / "energy_gap.svg",
              {"energy gap", "tau", "log10(E - E_floor)", {{"gap", tau, log10_or_nan(gap)}}});
    if (p.fit) {
      std::vector<double> lg, lgr, line;
      for (std::size_t i = p.fit->first; i <= p.fit->last; ++i) {
        lg.push_back(steps[i].gap);
        lgr.push_back(steps[i].grad_norm);
      }
      lg = log10_or_nan(lg);
      lgr = log10_or_nan(lgr);
      for (double x : lg) {
        line.push_back(std::log10(p.fit->constant) + (1.0 - p.fit->theta) * x);
      }
      write_svg(dir / "lojasiewicz.svg", {"gradient against energy gap", "log10(E - E_floor)",
                                          "log10 ||grad E||",
                                          {{"trajectory", lg, lgr}, {"c gap^(1 - theta)", lg, line}}});
    }
  }
  s.set("verdict", holds ? "converged, bounds hold" : "failed");
  return holds ? 0 : 2;
}

int tangent_uniqueness(const ExperimentConfig& c, const std::filesystem::path& dir, Summary& s) {
  const ResolvedModel m = resolve(c, "tangent-uniqueness");
  const ModelPtr model = build_model(m);
  describe_model(s, model);
  const auto initial = stage("initial", [&] { return initial_surface(c, m); });
  auto [physical, ext] = run_physical_stage(c, initial);
  describe_extinction(s, physical, ext);
  write_csv(dir / "physical.csv", physical_table(physical));

  UniquenessOptions opts;
  opts.bases = c.lambda_bases;
  opts.tolerance = c.tolerance;
  const auto report =
      stage("uniqueness", [&] { return tangent_uniqueness_experiment(physical, ext, model, opts); });
  opts.center_offset = m.control_offset;
  const auto control =
      stage("control", [&] { return tangent_uniqueness_experiment(physical, ext, model, opts); });

  auto emit = [&](const UniquenessReport& r, const std::string& name) {
    std::vector<double> base, index, lambda, time, dist, graphical;
    std::vector<PlotSeries> series;
    for (const auto& seq : r.sequences) {
      PlotSeries ps{"lambda = " + short_number(seq.base) + "^i", {}, {}};
      for (std::size_t i = 0; i < seq.lambda.size(); ++i) {
        base.push_back(seq.base);
        index.push_back(std::round(std::log(seq.lambda[i]) / std::log(seq.base)));
        lambda.push_back(seq.lambda[i]);
        time.push_back(seq.time[i]);
        dist.push_back(seq.distance[i]);
        graphical.push_back(seq.graphical[i] ? 1.0 : 0.0);
        ps.x.push_back(std::log10(seq.lambda[i]));
        ps.y.push_back(seq.distance[i] > 0.0 ? std::log10(seq.distance[i])
                                             : std::numeric_limits<double>::quiet_NaN());
      }
      series.push_back(std::move(ps));
      const std::string key = name + ".base_" + short_number(seq.base);
      s.set(key + ".distances", list_text(seq.distance));
      s.set(key + ".decreasing", seq.decreasing);
      s.set(key + ".converged", seq.converged);
      s.set(key + ".decay_constant", seq.decay_constant);
      s.set(key + ".decay_exponent", seq.decay_exponent);
    }
    Table t;
    t.add_column("base", base);
    t.add_column("index", index);
    t.add_column("lambda", lambda);
    t.add_column("time", time);
    t.add_column("distance", dist);
    t.add_column("graphical", graphical);
    write_csv(dir / (name + ".csv"), t);
    s.set(name + ".center", format_number(r.center.x) + ", " + format_number(r.center.y));
    s.set(name + ".verdict", r.verdict);
    if (c.plots) {
      write_svg(dir / (name + ".svg"),
                {"time -1 slices against the model", "log10 lambda", "log10 distance", series});
    }
  };
  emit(report, "uniqueness");
  emit(control, "control");
  const bool ok = report.unique && !control.unique;
  s.set("verdict", report.verdict);
  s.set("control_rejected", !control.unique);
  return ok ? 0 : 2;
}

int convergence_order(const ExperimentConfig& c, const std::filesystem::path& dir, Summary& s) {
  std::vector<double> nodes, h, circle_res, sphere_res, circle_grad, sphere_grad;
  for (std::size_t n : c.convergence_nodes) {
    const auto circle = make_shrinker(ShrinkerKind::circle, 1, n);
    const auto sphere = make_shrinker(ShrinkerKind::round_sphere, 2, n);
    nodes.push_back(static_cast<double>(n));
    h.push_back(circle->spacing());
    circle_res.push_back(shrinker_residual(embed_graph(NormalSection::zero(circle))));
    sphere_res.push_back(shrinker_residual(embed_graph(NormalSection::zero(sphere))));
    circle_grad.push_back(l2_norm(*circle, grad_energy(NormalSection::zero(circle)).values));
    sphere_grad.push_back(l2_norm(*sphere, grad_energy(NormalSection::zero(sphere)).values));
  }
  Table grid;
  grid.add_column("nodes", nodes);
  grid.add_column("circle_residual", circle_res);
  grid.add_column("sphere_residual", sphere_res);
  grid.add_column("circle_grad_norm", circle_grad);
  grid.add_column("sphere_grad_norm", sphere_grad);
  write_csv(dir / "grid_refinement.csv", grid);
  const auto circle_orders = observed_orders(h, circle_res);
  const auto sphere_orders = observed_orders(h, sphere_res);
  s.set("residual.circle", list_text(circle_res));
  s.set("residual.circle_orders", list_text(circle_orders));
  s.set("residual.sphere", list_text(sphere_res));
  s.set("residual.sphere_orders", list_text(sphere_orders));
  s.set("criticality.circle", list_text(circle_grad));
  s.set("criticality.sphere", list_text(sphere_grad));

  // Monotonicity identity residual under step refinement on a fixed grid.
  const auto model = make_shrinker(ShrinkerKind::circle, 1, c.convergence_nodes.front());
  const ResolvedModel m = resolve(c, "circle-perturb");
  NormalSection v0 = NormalSection::zero(model);
  for (std::size_t j = 0; j < v0.size(); ++j) {
    v0.values[j] = model->radius() * (radius_factor(m, model->angles()[j]) - 1.0);
  }
  v0 = project_out_unstable(v0);
  std::vector<double> mono;
  for (double dtau : c.convergence_dtaus) {
    RescaledOptions o;
    o.dtau = dtau;
    o.tau_max = c.convergence_tau_length;
    o.conv_tol = 0.0;
    o.snapshot_every = 1'000'000;
    const auto traj = stage("rescaled", [&] { return run_rescaled(v0, o); });
    mono.push_back(monotonicity_residual(traj).max_abs);
  }
  Table steps;
  steps.add_column("dtau", c.convergence_dtaus);
  steps.add_column("monotonicity_residual", mono);
  write_csv(dir / "step_refinement.csv", steps);
  const auto mono_orders = observed_orders(c.convergence_dtaus, mono);
  s.set("monotonicity.residual", list_text(mono));
  s.set("monotonicity.orders", list_text(mono_orders));

  if (c.plots) {
    write_svg(dir / "grid_refinement.svg",
              {"shrinker residual", "log10 N", "log10 max |H + x^perp/2|",
               {{"circle", log10_or_nan(nodes), log10_or_nan(circle_res)},
                {"sphere n = 2", log10_or_nan(nodes), log10_or_nan(sphere_res)}}});
  }
  bool ok = true;
  for (double o : circle_orders) ok = ok && o >= 1.7 && o <= 2.3;
  for (double o : sphere_orders) ok = ok && o >= 1.7 && o <= 2.3;
  ok = ok && mono_orders.back() >= 0.9;
  s.set("verdict", ok ? "orders in range" : "orders out of range");
  return ok ? 0 : 2;
}

}  // namespace

// ----------------------------------------------------------------- pipeline --

ModelPtr build_model(const ResolvedModel& m) {
  return stage("model", [&] { return make_shrinker(m.kind, m.dimension, m.nodes, m.graph_bound); });
}

DiscreteSurface initial_surface(const ExperimentConfig& c, const ResolvedModel& m) {
  const bool curve = m.kind == ShrinkerKind::circle;
  if (c.generator == Generator::file) {
    auto points = read_point_list(c.file);
    return curve ? DiscreteSurface::curve(std::move(points))
                 : DiscreteSurface::profile(m.dimension, std::move(points));
  }
  ResolvedModel terms = m;
  if (c.random_modes > 0 && c.random_amplitude > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> amp(-c.random_amplitude, c.random_amplitude);
    for (std::size_t k = 2; k < c.random_modes + 2; ++k) {
      terms.cos_terms.push_back({static_cast<int>(k), amp(rng)});
      if (curve) terms.sin_terms.push_back({static_cast<int>(k), amp(rng)});
    }
  }
  const double R = c.radius.value_or(std::sqrt(2.0 * m.dimension));
  std::vector<Vec2> points(m.nodes);
  for (std::size_t j = 0; j < m.nodes; ++j) {
    const double a = curve ? 2.0 * kPi * static_cast<double>(j) / static_cast<double>(m.nodes)
                           : kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(m.nodes);
    const double r = R * radius_factor(terms, a);
    points[j] = curve ? c.center + Vec2{r * std::cos(a), r * std::sin(a)}
                      : c.center + Vec2{r * std::sin(a), r * std::cos(a)};
  }
  return curve ? DiscreteSurface::curve(std::move(points))
               : DiscreteSurface::profile(m.dimension, std::move(points));
}

std::pair<PhysicalTrajectory, ExtinctionEstimate> run_physical_stage(
    const ExperimentConfig& c, const DiscreteSurface& initial) {
  PhysicalOptions po;
  po.dt = c.dt;
  po.stop_area = c.stop_area;
  po.snapshot_every = c.physical_snapshot_every;
  auto physical = stage("physical", [&] { return run_physical(initial, po); });
  ExtinctionOptions eo;
  eo.window_fraction = c.window_fraction;
  eo.exclude_fraction = c.exclude_fraction;
  eo.max_residual = c.max_residual;
  auto ext = stage("extinction", [&] { return estimate_extinction(physical, eo); });
  return {std::move(physical), ext};
}

Pipeline run_pipeline(const ExperimentConfig& c, const ResolvedModel& m, bool compare_route) {
  Pipeline p;
  p.model = build_model(m);
  p.initial = stage("initial", [&] { return initial_surface(c, m); });
  std::tie(p.physical, p.extinction) = run_physical_stage(c, *p.initial);
  const double T = p.extinction.T;
  if (!(T > 0.0)) throw StageError("extinction", "extinction time must be positive");
  const double tau0 = -std::log(T);
  p.start = stage("recentre", [&] {
    return radial_section(*p.initial, p.extinction.x0, std::sqrt(T), p.model, tau0);
  });

  const RescaledOptions ro = rescaled_options(c, m, tau0);
  NormalSection v0 = p.start;
  const double start_speed =
      stage("rescaled", [&] { return l2_norm(*p.model, rescaled_rhs(p.start).values); });
  if (c.shoot && start_speed >= m.conv_tol) {
    const auto modes = unstable_modes(*p.model);
    const NormalSection base = p.start;
    InitialFamily family = [&](std::span<const double> q) {
      NormalSection v = base;
      for (std::size_t k = 0; k < q.size(); ++k) {
        for (std::size_t j = 0; j < v.size(); ++j) v.values[j] += q[k] * modes[k][j];
      }
      return v;
    };
    ShootingOptions so;
    so.horizons.clear();
    for (int k = 1; k <= 4 * m.dimension; ++k) so.horizons.push_back(3.0 * k);
    p.shooting = stage("shooting", [&] {
      return shoot_neutral(family, std::vector<double>(modes.size(), 0.0), ro, so);
    });
    v0 = family(p.shooting->parameters);
  }
  p.rescaled = stage("rescaled", [&] { return run_rescaled(v0, ro); });

  const NormalSection& limit = p.rescaled.final_state();
  for (const auto& snap : p.rescaled.snapshots) {
    if (snap.tau < limit.tau - 1.0) continue;
    std::vector<double> d(snap.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = snap.values[j] - limit.values[j];
    p.final_distance = std::max(p.final_distance, l2_norm(*p.model, d));
  }
  p.roundness = l2_norm(*p.model, project_out_unstable(limit).values);

  if (p.rescaled.status != RunStatus::converged) {
    p.fit_skipped = "rescaled flow ended with status " + std::string(to_string(p.rescaled.status));
  } else {
    LojasiewiczOptions lo;
    lo.gap_min = c.gap_min;
    lo.gap_max = c.gap_max;
    lo.min_samples = c.min_samples;
    try {
      p.fit = fit_lojasiewicz(p.rescaled, lo);
    } catch (const FitError& e) {
      p.fit_skipped = e.what();
    }
    if (p.fit) {
      p.bounds = stage("bounds", [&] { return check_bounds(p.rescaled, *p.fit); });
      DecayOptions dopt;
      dopt.exponential_theta = c.exponential_theta;
      p.decay = stage("decay", [&] { return fit_decay(p.rescaled, limit, *p.fit, dopt); });
    }
  }

  if (compare_route) {
    RescaledOptions route = ro;
    route.tau_max = tau0 + c.route_window + 10.0 * ro.dtau;
    route.conv_tol = 0.0;
    const auto plain = stage("route", [&] { return run_rescaled(p.start, route); });
    p.route = stage("route", [&] {
      return compare_routes(p.physical, p.extinction, plain, tau0, tau0 + c.route_window);
    });
  }
  return p;
}

// ------------------------------------------------------------------ drivers --

ExperimentResult run_preset(const ExperimentConfig& c, const std::string& preset,
                            const std::filesystem::path& directory) {
  ExperimentResult r;
  r.preset = preset;
  r.directory = directory / preset;
  r.summary.set("preset", preset);
  try {
    std::filesystem::create_directories(r.directory);
    {
      std::ofstream cfg(r.directory / "config.ini");
      cfg << to_ini(c);
    }
    if (preset == "density-table") {
      r.status = density_table(c, r.directory, r.summary);
    } else if (preset == "circle-perturb" || preset == "sphere-perturb") {
      r.status = perturb(c, preset, r.directory, r.summary);
    } else if (preset == "tangent-uniqueness") {
      r.status = tangent_uniqueness(c, r.directory, r.summary);
    } else if (preset == "convergence-order") {
      r.status = convergence_order(c, r.directory, r.summary);
    } else {
      throw ConfigError("experiment.presets", "unknown preset '" + preset + "'");
    }
    r.message = r.summary.get("verdict");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.status = 2;
    r.message = preset + "/" + e.what();
    r.summary.set("error", r.message);
  }
  r.summary.set("status", r.status == 0 ? "ok" : "failed");
  try {
    r.summary.write(r.directory / "summary.txt");
  } catch (const std::exception& e) {
    r.status = 2;
    r.message = e.what();
  }
  return r;
}

std::vector<ExperimentResult> run_experiment(const ExperimentConfig& c,
                                             const std::filesystem::path& directory,
                                             unsigned jobs) {
  validate(c);
  const std::size_t n = c.presets.size();
  std::vector<ExperimentResult> results(n);
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = run_preset(c, c.presets[i], directory);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        results[i] = run_preset(c, c.presets[i], directory);
      }
    });
  }
  for (auto& t : workers) t.join();
  return results;
}

}  // namespace shrinker::lab
