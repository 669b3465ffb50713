#include <doctest.h>

#include <cmath>
#include <random>

#include "shrinker/error.hpp"
#include "shrinker/geometry.hpp"

using namespace shrinker;

namespace {

// Positive root of R/2 - n/R by bisection.
double shrinker_radius_by_bisection(int n) {
  double lo = 0.1, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid / 2 - n / mid < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

NormalSection section(const ModelPtr& model, double (*f)(double)) {
  NormalSection v = NormalSection::zero(model);
  for (std::size_t j = 0; j < v.size(); ++j) v.values[j] = f(model->angles()[j]);
  return v;
}

// Arclength of the polar curve r(t) by a fine trapezoid rule (spectral for periodic r).
double polar_length(double (*r)(double), double (*dr)(double)) {
  const int M = 8192;
  double sum = 0.0;
  for (int i = 0; i < M; ++i) {
    const double t = 2 * M_PI * i / M;
    sum += std::hypot(r(t), dr(t));
  }
  return sum * 2 * M_PI / M;
}

std::vector<Vec2> circle_points(std::size_t n, double radius, Vec2 center = {}) {
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    pts[j] = center + Vec2{radius * std::cos(t), radius * std::sin(t)};
  }
  return pts;
}

}  // namespace

TEST_CASE("model radius solves the shrinker equation") {
  const auto circle = make_shrinker(ShrinkerKind::circle, 1, 256);
  CHECK(circle->radius() == doctest::Approx(shrinker_radius_by_bisection(1)).epsilon(1e-12));
  CHECK(circle->radius() == doctest::Approx(1.41421).epsilon(1e-5));

  const auto sphere = make_shrinker(ShrinkerKind::round_sphere, 2, 256);
  CHECK(sphere->radius() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sphere->scalar_mean_curvature() == doctest::Approx(sphere->radius() / 2));
  for (double a : sphere->angles()) CHECK(norm(sphere->position(a)) == doctest::Approx(2.0));
}

TEST_CASE("circle density matches the closed form") {
  const auto circle = make_shrinker(ShrinkerKind::circle, 1, 256);
  const double closed = 2 * M_PI * std::sqrt(2.0) / std::sqrt(4 * M_PI) * std::exp(-0.5);
  CHECK(circle->density() == doctest::Approx(closed).epsilon(1e-12));
  CHECK(circle->density() == doctest::Approx(std::sqrt(2 * M_PI / M_E)).epsilon(1e-12));
  CHECK(circle->density() > 1.0);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(make_shrinker(ShrinkerKind::circle, 2, 64), DomainError);
  CHECK_THROWS_AS(make_shrinker(ShrinkerKind::round_sphere, 1, 64), DomainError);
  CHECK_THROWS_AS(make_shrinker(ShrinkerKind::circle, 1, 15), DomainError);
}

TEST_CASE("normals are unit and the default graph bound is 0.3 R") {
  for (auto model : {make_shrinker(ShrinkerKind::circle, 1, 64),
                     make_shrinker(ShrinkerKind::round_sphere, 3, 64)}) {
    for (double a : model->angles()) CHECK(norm(model->normal(a)) == doctest::Approx(1.0));
    CHECK(model->graph_bound() == doctest::Approx(0.3 * model->radius()));
  }
}

TEST_CASE("zero section embeds to the model samples exactly") {
  for (auto model : {make_shrinker(ShrinkerKind::circle, 1, 128),
                     make_shrinker(ShrinkerKind::round_sphere, 2, 128)}) {
    const auto s = embed_graph(NormalSection::zero(model));
    for (std::size_t j = 0; j < s.size(); ++j) {
      const Vec2 y = model->position(model->angles()[j]);
      CHECK(s.points()[j].x == y.x);
      CHECK(s.points()[j].y == y.y);
    }
  }
}

TEST_CASE("constant section is a round circle of radius sqrt 2 + c") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 256);
  NormalSection v = NormalSection::zero(model);
  std::fill(v.values.begin(), v.values.end(), 0.1);
  const auto s = embed_graph(v);
  for (auto p : s.points()) CHECK(norm(p) == doctest::Approx(std::sqrt(2.0) + 0.1).epsilon(1e-14));
}

TEST_CASE("graph curvature matches the polar curvature formula") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  const auto v = section(model, [](double t) { return 0.05 * std::cos(2 * t); });
  const auto s = embed_graph(v);
  double worst = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double t = model->angles()[j];
    const double r = std::sqrt(2.0) + 0.05 * std::cos(2 * t);
    const double r1 = -0.1 * std::sin(2 * t);
    const double r2 = -0.2 * std::cos(2 * t);
    const double kappa = (r * r + 2 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
    worst = std::max(worst, std::abs(norm(s.mean_curvature()[j]) - kappa));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("mean curvature of round circles and spheres") {
  const auto unit = DiscreteSurface::curve(circle_points(256, 1.0));
  const auto H = mean_curvature(unit);
  for (std::size_t j = 0; j < H.size(); ++j) {
    CHECK(norm(H[j]) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(dot(H[j], unit.points()[j]) < 0.0);  // points inward
  }

  std::vector<Vec2> profile(128);
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const double phi = M_PI * (j + 0.5) / 128;
    profile[j] = {2 * std::sin(phi), 2 * std::cos(phi)};
  }
  const auto sphere = DiscreteSurface::profile(2, profile);
  for (auto h : sphere.mean_curvature()) CHECK(norm(h) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("ellipse curvature at the end of the major axis") {
  std::vector<Vec2> pts(512);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double t = 2 * M_PI * j / 512.0;
    pts[j] = {2 * std::cos(t), std::sin(t)};
  }
  const auto s = DiscreteSurface::curve(pts);
  // ab / (a^2 sin^2 + b^2 cos^2)^{3/2} at t = 0
  const double exact = 2.0 * 1.0 / std::pow(1.0, 1.5);
  CHECK(std::abs(norm(s.mean_curvature()[0]) - exact) <= 1e-3);
}

TEST_CASE("area jacobian") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  for (double J : area_jacobian(NormalSection::zero(model))) CHECK(J == 1.0);

  NormalSection c = NormalSection::zero(model);
  std::fill(c.values.begin(), c.values.end(), -0.2);
  for (double J : area_jacobian(c)) {
    CHECK(J == doctest::Approx((std::sqrt(2.0) - 0.2) / std::sqrt(2.0)).epsilon(1e-13));
  }

  const auto v = section(model, [](double t) { return 0.08 * std::cos(3 * t); });
  const auto J = area_jacobian(v);
  double integral = 0.0;
  for (std::size_t j = 0; j < J.size(); ++j) integral += model->weights()[j] * J[j];
  const double length = polar_length([](double t) { return std::sqrt(2.0) + 0.08 * std::cos(3 * t); },
                                     [](double t) { return -0.24 * std::sin(3 * t); });
  CHECK(std::abs(integral - length) <= 1e-6);
  CHECK(embed_graph(v).measure() == doctest::Approx(integral).epsilon(1e-14));
}

TEST_CASE("area jacobian integrates to the measure of random smooth graphs") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    double a[4], b[4];
    for (int k = 0; k < 4; ++k) a[k] = u(rng), b[k] = u(rng);
    NormalSection v = NormalSection::zero(model);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double t = model->angles()[j];
      for (int k = 0; k < 4; ++k) v.values[j] += a[k] * std::cos((k + 1) * t) + b[k] * std::sin((k + 1) * t);
    }
    const double scale = 0.1 / v.max_abs();
    for (double& x : v.values) x *= scale;
    // Exact length of the polar curve sqrt2 + v by a fine trapezoid rule.
    const int M = 16384;
    double length = 0.0;
    for (int i = 0; i < M; ++i) {
      const double t = 2 * M_PI * i / M;
      double r = std::sqrt(2.0), dr = 0.0;
      for (int k = 0; k < 4; ++k) {
        r += scale * (a[k] * std::cos((k + 1) * t) + b[k] * std::sin((k + 1) * t));
        dr += scale * (k + 1) * (-a[k] * std::sin((k + 1) * t) + b[k] * std::cos((k + 1) * t));
      }
      length += std::hypot(r, dr);
    }
    length *= 2 * M_PI / M;
    const auto J = area_jacobian(v);
    double integral = 0.0;
    for (std::size_t j = 0; j < J.size(); ++j) integral += model->weights()[j] * J[j];
    CHECK(std::abs(integral - length) <= 1e-6);
  }
}

TEST_CASE("graph overflow carries the node") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 64);
  NormalSection v = NormalSection::zero(model);
  v.values[17] = model->graph_bound();
  try {
    embed_graph(v);
    FAIL("expected GraphOverflow");
  } catch (const GraphOverflow& e) {
    CHECK(e.node() == 17);
  }
  CHECK_THROWS_AS(area_jacobian(v), GraphOverflow);
}

TEST_CASE("degenerate parameterizations are rejected") {
  auto pts = circle_points(32, 1.0);
  pts[5] = pts[3];
  CHECK_THROWS_AS(DiscreteSurface::curve(pts), DegenerateSurface);
}

TEST_CASE("gaussian weight") {
  const double zero[] = {0.0, 0.0};
  CHECK(gaussian_weight(zero, 1, zero, 0.0, -1.0) == doctest::Approx(1 / std::sqrt(4 * M_PI)));
  CHECK(gaussian_weight(zero, 1, zero, 0.0, -1.0) == doctest::Approx(0.28209).epsilon(1e-5));
  const double x2[] = {2.0, 0.0};
  CHECK(gaussian_weight(x2, 1, zero, 0.0, -1.0) ==
        doctest::Approx(std::exp(-1.0) / std::sqrt(4 * M_PI)));
  CHECK(gaussian_weight(x2, 1, zero, 0.0, -1.0) == doctest::Approx(0.10378).epsilon(1e-4));
  CHECK_THROWS_AS(gaussian_weight(zero, 1, zero, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(gaussian_weight(zero, 1, zero, 0.0, 0.5), DomainError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 20; ++trial) {
      const double x[] = {u(rng), u(rng)};
      const double t = -0.1 - std::abs(u(rng));
      const double lambda = 2.0;
      const double lx[] = {lambda * x[0], lambda * x[1]};
      const double lhs = gaussian_weight(lx, n, zero, 0.0, lambda * lambda * t) * std::pow(lambda, n);
      const double rhs = gaussian_weight(x, n, zero, 0.0, t);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
    }
  }
}

TEST_CASE("shrinker residual converges at second order") {
  for (auto kind : {ShrinkerKind::circle, ShrinkerKind::round_sphere}) {
    const int n = kind == ShrinkerKind::circle ? 1 : 2;
    const double r256 = shrinker_residual(embed_graph(NormalSection::zero(make_shrinker(kind, n, 256))));
    const double r512 = shrinker_residual(embed_graph(NormalSection::zero(make_shrinker(kind, n, 512))));
    CHECK(r512 <= 1e-3);
    CHECK(r256 / r512 >= 3.5);
    CHECK(r256 / r512 <= 4.5);
  }
}

TEST_CASE("radial section inverts embed_graph") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 256);
  const auto v = section(model, [](double t) { return 0.05 * std::cos(2 * t) + 0.02 * std::sin(5 * t); });
  const auto back = radial_section(embed_graph(v), {0.0, 0.0}, 1.0, model);
  for (std::size_t j = 0; j < v.size(); ++j) CHECK(back.values[j] == doctest::Approx(v.values[j]).epsilon(1e-9));

  // A translated and scaled copy maps back to the same section.
  const auto surface = embed_graph(v);
  std::vector<Vec2> moved;
  for (auto p : surface.points()) moved.push_back(Vec2{0.3, -0.2} + 0.5 * p);
  const auto again = radial_section(DiscreteSurface::curve(moved), {0.3, -0.2}, 0.5, model);
  for (std::size_t j = 0; j < v.size(); ++j) CHECK(again.values[j] == doctest::Approx(v.values[j]).epsilon(1e-9));
}

TEST_CASE("radial section rejects curves that are not star-shaped") {
  // The origin lies outside this circle, so rays from it cross the curve twice.
  const auto away = DiscreteSurface::curve(circle_points(128, 1.0, {3.0, 0.0}));
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 64);
  CHECK_THROWS_AS(radial_section(away, {0.0, 0.0}, 1.0, model), DomainError);
}

TEST_CASE("section norms of a pure mode") {
  const auto model = make_shrinker(ShrinkerKind::circle, 1, 512);
  const auto v = section(model, [](double t) { return 0.01 * std::cos(3 * t); });
  const auto n = section_norms(v);
  CHECK(n.sup == doctest::Approx(0.01));
  CHECK(n.sup_first == doctest::Approx(0.03).epsilon(1e-3));
  CHECK(n.sup_second == doctest::Approx(0.09).epsilon(1e-3));
}
