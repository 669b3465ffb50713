#include "shrinker/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shrinker/error.hpp"

namespace shrinker {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

std::vector<double> component(std::span<const Vec2> pts, bool first) {
  std::vector<double> out(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) out[j] = first ? pts[j].x : pts[j].y;
  return out;
}

double signed_polygon_area(std::span<const Vec2> pts) {
  double a = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    a += cross(pts[j], pts[(j + 1) % pts.size()]);
  }
  return 0.5 * a;
}

// Mirror curve of a profile: the profile from north to south followed by its
// reflection across the axis from south back to north (clockwise).
std::vector<Vec2> mirror_closed(std::span<const Vec2> profile) {
  const std::size_t n = profile.size();
  std::vector<Vec2> out(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = profile[j];
    out[n + j] = {-profile[n - 1 - j].x, profile[n - 1 - j].y};
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- models --

Vec2 ShrinkerModel::position(double angle) const {
  if (kind_ == ShrinkerKind::circle) return {radius_ * std::cos(angle), radius_ * std::sin(angle)};
  return {radius_ * std::sin(angle), radius_ * std::cos(angle)};
}

Vec2 ShrinkerModel::normal(double angle) const {
  if (kind_ == ShrinkerKind::circle) return {std::cos(angle), std::sin(angle)};
  return {std::sin(angle), std::cos(angle)};
}

double ShrinkerModel::area() const {
  return std::accumulate(weight_.begin(), weight_.end(), 0.0);
}

ModelPtr make_shrinker(ShrinkerKind kind, int dimension, std::size_t nodes,
                       std::optional<double> graph_bound) {
  if (nodes < kMinGridNodes) {
    throw DomainError("grid size " + std::to_string(nodes) + " below minimum " +
                      std::to_string(kMinGridNodes));
  }
  if (kind == ShrinkerKind::circle && dimension != 1) {
    throw DomainError("the circle model requires dimension n = 1");
  }
  if (kind == ShrinkerKind::round_sphere && dimension < 2) {
    throw DomainError("the round-sphere model requires dimension n >= 2");
  }

  std::shared_ptr<ShrinkerModel> model(new ShrinkerModel());
  model->kind_ = kind;
  model->dimension_ = dimension;
  model->radius_ = std::sqrt(2.0 * dimension);
  model->graph_bound_ = graph_bound.value_or(0.3 * model->radius_);
  if (!(model->graph_bound_ > 0.0 && model->graph_bound_ < model->radius_)) {
    throw DomainError("graph bound must lie in (0, radius)");
  }

  const double n_nodes = static_cast<double>(nodes);
  model->angle_.resize(nodes);
  model->weight_.resize(nodes);
  if (kind == ShrinkerKind::circle) {
    model->spacing_ = kTwoPi / n_nodes;
    for (std::size_t j = 0; j < nodes; ++j) {
      model->angle_[j] = model->spacing_ * static_cast<double>(j);
      model->weight_[j] = model->radius_ * model->spacing_;
    }
  } else {
    model->spacing_ = kPi / n_nodes;
    const auto q = sine_power_weights(dimension - 1, nodes);
    const double scale = unit_sphere_area(dimension - 1) * std::pow(model->radius_, dimension);
    for (std::size_t j = 0; j < nodes; ++j) {
      model->angle_[j] = model->spacing_ * (static_cast<double>(j) + 0.5);
      model->weight_[j] = scale * q[j];
    }
  }

  const double rho = static_gaussian_weight(model->radius_ * model->radius_, dimension);
  model->density_ = rho * model->area();
  return model;
}

// -------------------------------------------------------------- sections --

NormalSection NormalSection::zero(ModelPtr model, double tau) {
  NormalSection v;
  v.values.assign(model->nodes(), 0.0);
  v.model = std::move(model);
  v.tau = tau;
  return v;
}

double NormalSection::max_abs() const {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  return m;
}

void require_in_tube(const NormalSection& v) {
  if (!v.model) throw DomainError("normal section without a model");
  if (v.values.size() != v.model->nodes()) throw DomainError("section size does not match grid");
  const double bound = v.model->graph_bound();
  for (std::size_t j = 0; j < v.values.size(); ++j) {
    if (!(std::abs(v.values[j]) < bound)) throw GraphOverflow(j, std::abs(v.values[j]), bound);
  }
}

double inner_product(const ShrinkerModel& model, std::span<const double> a,
                     std::span<const double> b) {
  const auto w = model.weights();
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * a[j] * b[j];
  return s;
}

double l2_norm(const ShrinkerModel& model, std::span<const double> a) {
  return std::sqrt(inner_product(model, a, a));
}

std::vector<double> angular_derivative(const NormalSection& v) {
  std::vector<double> d(v.size());
  first_derivative(v.values, v.model->spacing(), v.model->boundary(), d);
  return d;
}

SectionNorms section_norms(const NormalSection& v) {
  SectionNorms s;
  std::vector<double> d1(v.size()), d2(v.size());
  centered_derivatives_2(v.values, v.model->spacing(), v.model->boundary(), d1, d2);
  const auto d4 = angular_derivative(v);
  for (std::size_t j = 0; j < v.size(); ++j) {
    s.sup = std::max(s.sup, std::abs(v.values[j]));
    s.sup_first = std::max(s.sup_first, std::abs(d4[j]));
    s.sup_second = std::max(s.sup_second, std::abs(d2[j]));
  }
  return s;
}

// -------------------------------------------------------------- surfaces --

DiscreteSurface::DiscreteSurface(Topology topology, int dimension, std::vector<Vec2> points)
    : topology_(topology), dimension_(dimension), points_(std::move(points)) {
  compute_cache();
}

DiscreteSurface DiscreteSurface::curve(std::vector<Vec2> points) {
  if (points.size() < 8) throw DomainError("a closed curve needs at least 8 nodes");
  if (signed_polygon_area(points) < 0.0) std::reverse(points.begin() + 1, points.end());
  return DiscreteSurface(Topology::closed_curve, 1, std::move(points));
}

DiscreteSurface DiscreteSurface::profile(int dimension, std::vector<Vec2> points) {
  if (dimension < 2) throw DomainError("profiles describe hypersurfaces with n >= 2");
  if (points.size() < 8) throw DomainError("a profile needs at least 8 nodes");
  return DiscreteSurface(Topology::axisymmetric_profile, dimension, std::move(points));
}

void DiscreteSurface::compute_cache() {
  const std::size_t n = points_.size();
  tangent_.assign(n, {});
  normal_.assign(n, {});
  curvature_.assign(n, {});
  area_.assign(n, 0.0);

  const bool is_profile = topology_ == Topology::axisymmetric_profile;
  if (is_profile) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(points_[j].x > 0.0)) throw DegenerateSurface(j, "profile node on or across the axis");
    }
  }
  // A profile is differentiated as the closed mirror curve; its parameter
  // spacing is pi / N so that the mirror curve spans a 2 pi period.
  const std::vector<Vec2> closed = is_profile ? mirror_closed(points_) : points_;
  const std::size_t m = closed.size();
  const double du = kTwoPi / static_cast<double>(m);
  const double orientation = is_profile ? -1.0 : 1.0;

  const auto xs = component(closed, true);
  const auto ys = component(closed, false);
  std::vector<double> dx(m), dy(m), dx2(m), dy2(m), ddx(m), ddy(m);
  first_derivative(xs, du, Boundary::periodic, dx);
  first_derivative(ys, du, Boundary::periodic, dy);
  centered_derivatives_2(xs, du, Boundary::periodic, dx2, ddx);
  centered_derivatives_2(ys, du, Boundary::periodic, dy2, ddy);

  double scale = 0.0;
  for (const auto& p : points_) scale = std::max(scale, norm(p));
  const double tiny = 1e-13 * std::max(scale, 1e-300);

  std::vector<double> profile_weights;
  if (is_profile) profile_weights = sine_power_weights(dimension_ - 1, n);
  const double sphere_area = is_profile ? unit_sphere_area(dimension_ - 1) : 0.0;

  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 d1{dx[j], dy[j]};
    const double speed = norm(d1);
    if (!(speed > tiny)) throw DegenerateSurface(j, "vanishing tangent");
    tangent_[j] = (1.0 / speed) * d1;
    normal_[j] = orientation * Vec2{d1.y, -d1.x} * (1.0 / speed);

    const Vec2 e1{dx2[j], dy2[j]};
    const Vec2 e2{ddx[j], ddy[j]};
    const double s2 = norm(e1);
    if (!(s2 > tiny)) throw DegenerateSurface(j, "vanishing tangent");
    double scalar = orientation * cross(e1, e2) / (s2 * s2 * s2);

    if (is_profile) {
      const double rho = points_[j].x;
      scalar += (dimension_ - 1) * normal_[j].x / rho;
      const double u = (static_cast<double>(j) + 0.5) * du;
      area_[j] = sphere_area * profile_weights[j] * std::pow(rho / std::sin(u), dimension_ - 1) *
                 speed;
    } else {
      area_[j] = speed * du;
    }
    if (!(area_[j] > 0.0)) throw DegenerateSurface(j, "non-positive area element");
    curvature_[j] = -scalar * normal_[j];
  }
}

double DiscreteSurface::measure() const {
  return std::accumulate(area_.begin(), area_.end(), 0.0);
}

double DiscreteSurface::enclosed_measure() const {
  const std::size_t n = points_.size();
  if (topology_ == Topology::closed_curve) {
    double a = 0.0;
    for (std::size_t j = 0; j < n; ++j) a += cross(points_[j], tangent_[j]) * area_[j];
    return 0.5 * a;
  }
  // V = omega_n int rho^n (-dz); the integrand is sin^{n+1}(u) times an even
  // function of the cell-centred parameter u.
  const double du = kPi / static_cast<double>(n);
  const auto mirror = mirror_closed(points_);
  const auto zs = component(mirror, false);
  std::vector<double> dz(mirror.size());
  first_derivative(zs, du, Boundary::periodic, dz);
  const auto q = sine_power_weights(dimension_ + 1, n);
  double v = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) + 0.5) * du;
    const double s = std::sin(u);
    v += q[j] * std::pow(points_[j].x / s, dimension_) * (-dz[j] / s);
  }
  return unit_ball_volume(dimension_) * v;
}

Vec2 DiscreteSurface::enclosed_centroid() const {
  const std::size_t n = points_.size();
  if (topology_ == Topology::closed_curve) {
    double cx = 0.0, cy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 p = points_[j];
      cx += p.x * p.x * tangent_[j].y * area_[j];
      cy -= p.y * p.y * tangent_[j].x * area_[j];
    }
    const double a = enclosed_measure();
    return {cx / (2.0 * a), cy / (2.0 * a)};
  }
  const double du = kPi / static_cast<double>(n);
  const auto mirror = mirror_closed(points_);
  const auto zs = component(mirror, false);
  std::vector<double> dz(mirror.size());
  first_derivative(zs, du, Boundary::periodic, dz);
  const auto q = sine_power_weights(dimension_ + 1, n);
  double v = 0.0, m = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) + 0.5) * du;
    const double s = std::sin(u);
    const double f = q[j] * std::pow(points_[j].x / s, dimension_) * (-dz[j] / s);
    v += f;
    m += f * points_[j].y;
  }
  return {0.0, m / v};
}

DiscreteSurface DiscreteSurface::rescaled(double lambda, Vec2 center) const {
  if (!(lambda > 0.0)) throw DomainError("rescaling factor must be positive");
  if (topology_ == Topology::axisymmetric_profile && center.x != 0.0) {
    throw DomainError("profiles can only be rescaled about a point on the axis");
  }
  DiscreteSurface out = *this;
  for (auto& p : out.points_) p = lambda * (p - center);
  for (auto& h : out.curvature_) h = (1.0 / lambda) * h;
  const double area_scale = std::pow(lambda, dimension_);
  for (auto& a : out.area_) a *= area_scale;
  return out;
}

std::vector<Vec2> DiscreteSurface::closed_polygon() const {
  if (topology_ == Topology::axisymmetric_profile) return mirror_closed(points_);
  return points_;
}

DiscreteSurface embed_graph(const NormalSection& v) {
  require_in_tube(v);
  const auto& model = *v.model;
  const auto angles = model.angles();
  std::vector<Vec2> pts(model.nodes());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    pts[j] = model.position(angles[j]) + v.values[j] * model.normal(angles[j]);
  }
  DiscreteSurface s(model.topology(), model.dimension(), std::move(pts));
  const auto jac = area_jacobian(v);
  const auto w = model.weights();
  for (std::size_t j = 0; j < jac.size(); ++j) s.area_[j] = w[j] * jac[j];
  return s;
}

std::vector<Vec2> mean_curvature(const DiscreteSurface& surface) {
  const auto h = surface.mean_curvature();
  return {h.begin(), h.end()};
}

std::vector<double> area_jacobian(const NormalSection& v) {
  require_in_tube(v);
  const auto& model = *v.model;
  const double radius = model.radius();
  const int n = model.dimension();
  const auto dv = angular_derivative(v);
  std::vector<double> jac(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double r = radius + v.values[j];
    const double line = std::hypot(r, dv[j]) / radius;
    jac[j] = line * std::pow(r / radius, n - 1);
  }
  return jac;
}

double static_gaussian_weight(double distance_sq, int dimension) {
  return std::pow(4.0 * kPi, -0.5 * dimension) * std::exp(-0.25 * distance_sq);
}

double gaussian_weight_sq(double distance_sq, int dimension, double t0, double t) {
  if (!(t < t0)) throw DomainError("backward heat kernel requires t < t0");
  const double s = t0 - t;
  return std::pow(4.0 * kPi * s, -0.5 * dimension) * std::exp(-distance_sq / (4.0 * s));
}

double gaussian_weight(std::span<const double> x, int dimension,
                       std::span<const double> center, double t0, double t) {
  if (x.size() != center.size()) throw DomainError("point and center dimensions differ");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - center[i]) * (x[i] - center[i]);
  return gaussian_weight_sq(d2, dimension, t0, t);
}

double shrinker_residual(const DiscreteSurface& surface) {
  double worst = 0.0;
  const auto pts = surface.points();
  const auto nu = surface.normals();
  const auto h = surface.mean_curvature();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Vec2 perp = dot(pts[j], nu[j]) * nu[j];
    worst = std::max(worst, norm(h[j] + 0.5 * perp));
  }
  return worst;
}

NormalSection radial_section(const DiscreteSurface& surface, Vec2 center, double scale,
                             ModelPtr model, double tau) {
  if (!(scale > 0.0)) throw DomainError("radial section scale must be positive");
  const bool is_profile = surface.topology() == Topology::axisymmetric_profile;
  if (is_profile != (model->topology() == Topology::axisymmetric_profile)) {
    throw DomainError("surface topology does not match the model");
  }
  if (is_profile && center.x != 0.0) throw DomainError("profile center must lie on the axis");

  const auto poly = surface.closed_polygon();
  const std::size_t m = poly.size();
  std::vector<double> angle(m), radius(m);
  for (std::size_t j = 0; j < m; ++j) {
    const Vec2 d = poly[j] - center;
    // Curves measure angles from the x-axis, profiles from the symmetry axis.
    angle[j] = is_profile ? std::atan2(d.x, d.y) : std::atan2(d.y, d.x);
    radius[j] = norm(d) / scale;
    if (!(radius[j] > 0.0)) throw DomainError("surface passes through the center");
  }
  for (std::size_t j = 1; j < m; ++j) {
    double step = angle[j] - angle[j - 1];
    step -= kTwoPi * std::round(step / kTwoPi);
    if (!(step > 0.0)) throw DomainError("surface is not star-shaped about the center");
    angle[j] = angle[j - 1] + step;
  }
  double closing = angle[0] + kTwoPi - angle[m - 1];
  if (!(closing > 0.0) || std::abs(angle[m - 1] - angle[0]) >= kTwoPi) {
    throw DomainError("surface is not star-shaped about the center");
  }

  PeriodicSpline r_of_angle(angle, radius, kTwoPi);
  NormalSection v = NormalSection::zero(model, tau);
  const auto grid = model->angles();
  for (std::size_t j = 0; j < grid.size(); ++j) v.values[j] = r_of_angle(grid[j]) - model->radius();
  return v;
}

}  // namespace shrinker
