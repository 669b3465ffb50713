#include <doctest.h>

#include <cmath>
#include <random>

#include "shrinker/energy.hpp"
#include "shrinker/error.hpp"

using namespace shrinker;

namespace {

// Gaussian energy of the round circle of radius r.
double round_circle_energy(double r) {
  return 2 * M_PI * r / std::sqrt(4 * M_PI) * std::exp(-r * r / 4);
}

double round_circle_energy_derivative(double r) {
  return 2 * M_PI / std::sqrt(4 * M_PI) * std::exp(-r * r / 4) * (1 - r * r / 2);
}

NormalSection constant(const ModelPtr& model, double c) {
  NormalSection v = NormalSection::zero(model);
  std::fill(v.values.begin(), v.values.end(), c);
  return v;
}

NormalSection random_smooth(const ModelPtr& model, std::mt19937_64& rng, double size) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NormalSection v = NormalSection::zero(model);
  for (int k = 0; k <= 5; ++k) {
    const double a = u(rng) / (1 + k * k), b = u(rng) / (1 + k * k);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double t = model->angles()[j];
      v.values[j] += model->kind() == ShrinkerKind::circle ? a * std::cos(k * t) + b * std::sin(k * t)
                                                           : a * std::cos(k * t);
    }
  }
  const double scale = size / v.max_abs();
  for (double& x : v.values) x *= scale;
  return v;
}

std::vector<Vec2> circle_points(std::size_t n, double radius) {
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    pts[j] = {radius * std::cos(t), radius * std::sin(t)};
  }
  return pts;
}

}  // namespace

TEST_CASE("model densities") {
  const auto circle = make_shrinker(ShrinkerKind::circle, 1, 512);
  const auto sphere = make_shrinker(ShrinkerKind::round_sphere, 2, 512);
  CHECK(std::abs(circle->density() - std::sqrt(2 * M_PI / M_E)) <= 1e-6);
  CHECK(std::abs(sphere->density() - 4 / M_E) <= 1e-6);
  CHECK(energy(NormalSection::zero(circle)) == doctest::Approx(circle->density()).epsilon(1e-14));
  CHECK(energy(NormalSection::zero(sphere)) == doctest::Approx(sphere->density()).epsilon(1e-14));
}

TEST_CASE("density ratio is constant along the shrinking circle") {
  double lo = 1e300, hi = -1e300;
  for (double t : {-1.0, -0.5, -0.1}) {
    const auto s = DiscreteSurface::curve(circle_points(512, std::sqrt(-2 * t)));
    const auto d = density_ratio(s, {0.0, 0.0}, 0.0, t);
    CHECK(d.t == t);
    lo = std::min(lo, d.value);
    hi = std::max(hi, d.value);
  }
  CHECK(hi - lo <= 1e-6);
  CHECK(hi == doctest::Approx(std::sqrt(2 * M_PI / M_E)).epsilon(1e-6));
  const auto s = DiscreteSurface::curve(circle_points(64, 1.0));
  CHECK_THROWS_AS(density_ratio(s, {0.0, 0.0}, 0.0, 0.0), DomainError);
}

TEST_CASE("energy of constant sections follows the round closed form") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  const double R = std::sqrt(2.0);
  CHECK(energy(constant(model, 0.1)) == doctest::Approx(round_circle_energy(R + 0.1)).epsilon(1e-12));
  CHECK(energy(constant(model, 0.1)) < energy(NormalSection::zero(model)));
  CHECK(energy(constant(model, -0.1)) < energy(NormalSection::zero(model)));
}

TEST_CASE("energy self-convergence under grid refinement") {
  auto e = [](std::size_t n) {
    const auto model = make_shrinker(ShrinkerKind::circle, 1, n);
    NormalSection v = NormalSection::zero(model);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double t = model->angles()[j];
      v.values[j] = std::sqrt(2.0) * (0.05 * std::cos(2 * t) + 0.03 * std::sin(3 * t));
    }
    return energy(v);
  };
  CHECK(std::abs(e(512) - e(1024)) <= 1e-8);
}

TEST_CASE("gradient of a constant section") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 256);
  const auto g = grad_energy(constant(model, 0.07));
  const double expected = round_circle_energy_derivative(std::sqrt(2.0) + 0.07) / (2 * M_PI * std::sqrt(2.0));
  for (double x : g.values) CHECK(x == doctest::Approx(expected).epsilon(1e-10));
  for (double x : grad_energy(NormalSection::zero(model)).values) CHECK(std::abs(x) <= 1e-12);
}

TEST_CASE("gradient matches central differences of the energy") {
  std::mt19937_64 rng(11);
  for (auto model : {make_shrinker(ShrinkerKind::circle, 1, 256),
                     make_shrinker(ShrinkerKind::round_sphere, 2, 128)}) {
    for (int trial = 0; trial < 5; ++trial) {
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
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(std::abs(an), 1e-3));
    }
  }
}

TEST_CASE("dissipation") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  CHECK(dissipation(NormalSection::zero(model)) <= 1e-6);

  // |H + x/2|^2 rho over the unit circle: (1 - 1/2)^2 * 2 pi (4 pi)^{-1/2} e^{-1/4}
  const double expected = 0.25 * 2 * M_PI / std::sqrt(4 * M_PI) * std::exp(-0.25);
  CHECK(dissipation(constant(model, 1.0 - std::sqrt(2.0))) == doctest::Approx(expected).epsilon(1e-8));

  const auto r = energy_report(constant(model, -0.1));
  CHECK(r.floor == doctest::Approx(model->density()));
  CHECK(r.dissipation > 0.0);
  const auto s = evaluate_graph(constant(model, -0.1));
  CHECK(s.dissipation >= s.gamma * s.grad_norm * s.velocity_norm * (1 - 1e-12));
  CHECK(r.gradient_gamma > 0.0);
  CHECK(r.dissipation >= r.gradient_gamma * r.gradient_gamma * r.grad_norm * r.grad_norm * (1 - 1e-12));
}

TEST_CASE("monotonicity residual") {
  Trajectory t;
  t.model = make_shrinker(ShrinkerKind::circle, 1, 64);
  t.dtau = 0.1;
  for (int i = 0; i < 5; ++i) t.steps.push_back({.tau = 0.1 * i, .energy = 1.5});
  const auto r = monotonicity_residual(t);
  CHECK(r.residual.size() == 3);
  CHECK(r.max_abs == 0.0);
  CHECK(r.rms == 0.0);

  // E = e^{-tau}, D = e^{-tau}: residual is the central-difference error.
  Trajectory e = t;
  for (auto& s : e.steps) s.energy = s.dissipation = std::exp(-s.tau);
  const auto re = monotonicity_residual(e);
  const double h = 0.1;
  CHECK(re.residual[0] == doctest::Approx(std::exp(-0.1) * (1 - std::sinh(h) / h)).epsilon(1e-12));

  t.steps[3].tau = 0.35;
  CHECK_THROWS_AS(monotonicity_residual(t), DomainError);
  t.steps.resize(2);
  CHECK_THROWS_AS(monotonicity_residual(t), DomainError);
}

TEST_CASE("graph evaluation rejects sections outside the tube") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 64);
  CHECK_THROWS_AS(evaluate_graph(constant(model, 0.5)), GraphOverflow);
}
