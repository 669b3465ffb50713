#include <doctest.h>

#include <cmath>

#include "shrinker/error.hpp"
#include "shrinker/physical.hpp"

using namespace shrinker;

namespace {

std::vector<Vec2> ellipse_points(std::size_t n, double a, double b, Vec2 center = {}) {
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = 2 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    pts[j] = center + Vec2{a * std::cos(t), b * std::sin(t)};
  }
  return pts;
}

double isoperimetric_ratio(const DiscreteSurface& s) {
  return s.measure() * s.measure() / (4 * M_PI * s.enclosed_measure());
}

}  // namespace

TEST_CASE("round circle shrinks as sqrt(R0^2 - 2t)") {
  auto s = DiscreteSurface::curve(ellipse_points(256, std::sqrt(2.0), std::sqrt(2.0)));
  const double a0 = s.enclosed_measure();
  CHECK(a0 == doctest::Approx(2 * M_PI).epsilon(1e-3));
  const double dt = 1e-4;
  double t = 0.0;
  for (int i = 0; i < 5000; ++i) {
    s = physical_step(s, dt);
    t += dt;
    if (i % 1000 == 999) CHECK(std::abs(s.enclosed_measure() / a0 - (1 - t)) <= 1e-4);
  }
  double worst = 0.0;
  for (auto p : s.points()) worst = std::max(worst, std::abs(norm(p) - 1.0));
  CHECK(worst <= 1e-5);
}

TEST_CASE("enclosed area decreases at rate 2 pi") {
  PhysicalOptions o;
  o.dt = 1e-4;
  o.stop_area = 0.5;
  const auto traj = run_physical(DiscreteSurface::curve(ellipse_points(256, 1.6, 1.0)), o);
  CHECK(traj.status == PhysicalStatus::reached_stop_area);
  const auto& first = traj.steps.front();
  double worst = 0.0;
  for (const auto& r : traj.steps) {
    worst = std::max(worst, std::abs(r.enclosed - (first.enclosed - 2 * M_PI * r.t)));
  }
  CHECK(worst <= 1e-3 * first.enclosed);
  CHECK(traj.snapshots.size() == traj.snapshot_steps.size());
  CHECK(traj.dimension() == 1);
}

TEST_CASE("ellipses become rounder") {
  auto s = DiscreteSurface::curve(ellipse_points(256, 2.0, 1.0));
  double previous = isoperimetric_ratio(s);
  for (int k = 0; k < 10; ++k) {
    for (int i = 0; i < 50; ++i) s = physical_step(s, 1e-3);
    const double r = isoperimetric_ratio(s);
    CHECK(r < previous);
    CHECK(r >= 1.0 - 1e-3);
    previous = r;
  }
}

TEST_CASE("extinction point of round and translated circles") {
  for (Vec2 c : {Vec2{0.0, 0.0}, Vec2{0.3, -0.2}}) {
    const auto traj = run_physical(DiscreteSurface::curve(ellipse_points(256, std::sqrt(2.0), std::sqrt(2.0), c)),
                                   PhysicalOptions{});
    const auto e = estimate_extinction(traj);
    CHECK(e.T == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(e.x0.x - c.x) <= 1e-6);
    CHECK(std::abs(e.x0.y - c.y) <= 1e-6);
    CHECK(e.slope == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(e.residual <= 1e-3);
    CHECK(e.T > traj.steps.back().t);
    CHECK(e.window_begin < e.window_end);
  }
}

TEST_CASE("extinction of a perturbed circle") {
  std::vector<Vec2> pts(512);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double t = 2 * M_PI * j / 512.0;
    const double r = std::sqrt(2.0) * (1 + 0.05 * std::cos(2 * t) + 0.03 * std::sin(3 * t));
    pts[j] = {r * std::cos(t), r * std::sin(t)};
  }
  const auto s = DiscreteSurface::curve(pts);
  const auto traj = run_physical(s, PhysicalOptions{});
  const auto e = estimate_extinction(traj);
  // Area decreases at rate 2 pi exactly, so T = A0 / 2 pi.
  CHECK(e.T == doctest::Approx(s.enclosed_measure() / (2 * M_PI)).epsilon(1e-3));
  CHECK(e.residual <= 1e-3);
  CHECK(norm(e.x0) < 0.1);
}

TEST_CASE("extinction fit needs data") {
  PhysicalTrajectory t;
  for (int i = 0; i < 5; ++i) t.steps.push_back({.t = 0.1 * i, .enclosed = 1.0 - 0.1 * i});
  CHECK_THROWS_AS(estimate_extinction(t), DomainError);
}

TEST_CASE("parabolic rescaling") {
  const auto s = DiscreteSurface::curve(ellipse_points(64, 1.0, 1.0, {1.0, 2.0}));
  const auto [r, t] = parabolic_rescale(s, 0.75, 2.0, {1.0, 2.0}, 1.0);
  CHECK(t == doctest::Approx(-1.0));
  for (auto p : r.points()) CHECK(norm(p) == doctest::Approx(2.0));
  CHECK(r.enclosed_measure() == doctest::Approx(4 * s.enclosed_measure()));
}

TEST_CASE("self-intersection detection") {
  std::vector<Vec2> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK_FALSE(self_intersects(square));
  std::vector<Vec2> bowtie = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK(self_intersects(bowtie));

  std::vector<Vec2> eight(128);
  for (std::size_t j = 0; j < eight.size(); ++j) {
    const double t = 2 * M_PI * j / 128.0 + 0.01;
    eight[j] = {std::sin(2 * t), std::sin(t)};
  }
  CHECK(self_intersects(eight));
  CHECK_THROWS_AS(run_physical(DiscreteSurface::curve(eight), PhysicalOptions{}), SelfIntersection);
}

TEST_CASE("snapshot brackets") {
  const auto traj = run_physical(DiscreteSurface::curve(ellipse_points(128, 1.0, 1.0)), PhysicalOptions{});
  const double t_last = traj.steps[traj.snapshot_steps.back()].t;
  const auto b = bracket_snapshots(traj, 0.5 * t_last);
  CHECK(b.after == b.before + 1);
  CHECK(b.weight >= 0.0);
  CHECK(b.weight <= 1.0);
  CHECK_THROWS_AS(bracket_snapshots(traj, t_last + 1.0), DomainError);
}

TEST_CASE("physical options are validated") {
  const auto s = DiscreteSurface::curve(ellipse_points(64, 1.0, 1.0));
  PhysicalOptions o;
  o.dt = 0.0;
  CHECK_THROWS_AS(run_physical(s, o), DomainError);
}
