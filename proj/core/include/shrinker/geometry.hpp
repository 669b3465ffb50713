#pragma once

// Model shrinkers, normal graphs over them, and discrete curvature and area
// of sampled hypersurfaces.
//
// Two grid topologies are supported. A closed curve in the plane (n = 1) is
// sampled on a periodic parameter grid. A rotationally symmetric hypersurface
// in R^{n+1} (n >= 2) is represented by its meridian profile: the node
// (rho, z) stands for the point (rho, 0, ..., 0, z), rho > 0, with the
// x_{n+1}-axis as symmetry axis. Profile nodes run from the north pole to the
// south pole on a cell-centred grid, so the poles themselves are never
// sampled and derivatives use mirror ghosts across the axis.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "shrinker/numerics.hpp"

namespace shrinker {

enum class ShrinkerKind { circle, round_sphere };
enum class Topology { closed_curve, axisymmetric_profile };

/// A compact round shrinker of radius sqrt(2n) with its sampling grid.
///
/// For the circle the grid is theta_j = 2 pi j / N; for the sphere it is the
/// cell-centred polar-angle grid phi_j = (j + 1/2) pi / N.
class ShrinkerModel {
 public:
  ShrinkerKind kind() const { return kind_; }
  Topology topology() const {
    return kind_ == ShrinkerKind::circle ? Topology::closed_curve
                                         : Topology::axisymmetric_profile;
  }
  int dimension() const { return dimension_; }
  int ambient_dimension() const { return dimension_ + 1; }
  std::size_t nodes() const { return angle_.size(); }
  double radius() const { return radius_; }
  /// Gaussian density of the model, computed by the same quadrature as the energy.
  double density() const { return density_; }
  double graph_bound() const { return graph_bound_; }
  /// Angular grid spacing.
  double spacing() const { return spacing_; }
  Boundary boundary() const {
    return kind_ == ShrinkerKind::circle ? Boundary::periodic : Boundary::even_reflection;
  }

  std::span<const double> angles() const { return angle_; }
  /// Quadrature weights for d H^n on the model.
  std::span<const double> weights() const { return weight_; }

  /// Closed-form embedding of the grid angle (meridian coordinates for spheres).
  Vec2 position(double angle) const;
  /// Outward unit normal at the grid angle.
  Vec2 normal(double angle) const;
  /// Scalar mean curvature n / R with respect to the outward normal.
  double scalar_mean_curvature() const { return dimension_ / radius_; }
  /// Measure of the model surface.
  double area() const;

 private:
  friend std::shared_ptr<const ShrinkerModel> make_shrinker(ShrinkerKind, int, std::size_t,
                                                            std::optional<double>);
  ShrinkerModel() = default;

  ShrinkerKind kind_ = ShrinkerKind::circle;
  int dimension_ = 1;
  double radius_ = 0.0;
  double density_ = 0.0;
  double graph_bound_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> angle_;
  std::vector<double> weight_;
};

using ModelPtr = std::shared_ptr<const ShrinkerModel>;

inline constexpr std::size_t kMinGridNodes = 16;

/// Builds a round model shrinker. graph_bound defaults to 0.3 sqrt(2n).
ModelPtr make_shrinker(ShrinkerKind kind, int dimension, std::size_t nodes,
                       std::optional<double> graph_bound = std::nullopt);

/// Scalar normal height over a model at rescaled time tau.
struct NormalSection {
  ModelPtr model;
  std::vector<double> values;
  double tau = 0.0;

  static NormalSection zero(ModelPtr model, double tau = 0.0);
  std::size_t size() const { return values.size(); }
  double max_abs() const;
};

/// Throws GraphOverflow if any |v_j| >= sigma.
void require_in_tube(const NormalSection& v);

/// Weighted L^2(Sigma) inner product and norm on a model grid.
double inner_product(const ShrinkerModel& model, std::span<const double> a,
                     std::span<const double> b);
double l2_norm(const ShrinkerModel& model, std::span<const double> a);

/// A sampled hypersurface with its derived geometric cache.
class DiscreteSurface {
 public:
  /// Closed curve; nodes uniform in some parameter. Clockwise input is reversed.
  static DiscreteSurface curve(std::vector<Vec2> points);
  /// Meridian profile of a rotationally symmetric n-surface; nodes uniform in
  /// a parameter that is cell-centred between the poles.
  static DiscreteSurface profile(int dimension, std::vector<Vec2> points);

  Topology topology() const { return topology_; }
  int dimension() const { return dimension_; }
  std::size_t size() const { return points_.size(); }

  std::span<const Vec2> points() const { return points_; }
  std::span<const Vec2> tangents() const { return tangent_; }
  std::span<const Vec2> normals() const { return normal_; }
  std::span<const Vec2> mean_curvature() const { return curvature_; }
  std::span<const double> area_elements() const { return area_; }

  /// Total n-dimensional measure.
  double measure() const;
  /// Enclosed area (curves) or enclosed (n+1)-volume (profiles).
  double enclosed_measure() const;
  /// Centroid of the enclosed region; on the axis for profiles.
  Vec2 enclosed_centroid() const;

  /// Image under x -> lambda (x - center); center must lie on the axis for profiles.
  DiscreteSurface rescaled(double lambda, Vec2 center) const;

  /// Closed mirror curve for profiles (profile plus its reflection); the curve
  /// itself for closed curves.
  std::vector<Vec2> closed_polygon() const;

 private:
  friend DiscreteSurface embed_graph(const NormalSection& v);
  DiscreteSurface(Topology topology, int dimension, std::vector<Vec2> points);
  void compute_cache();

  Topology topology_ = Topology::closed_curve;
  int dimension_ = 1;
  std::vector<Vec2> points_;
  std::vector<Vec2> tangent_;    // unit tangents
  std::vector<Vec2> normal_;     // outward unit normals
  std::vector<Vec2> curvature_;  // mean curvature vector, shrinking convention
  std::vector<double> area_;     // quadrature weights d H^n
};

/// x_j = y_j + v_j nu(y_j). Area elements are w_j J_j so that integrals over
/// the graph agree with the pulled-back integrals over the model.
DiscreteSurface embed_graph(const NormalSection& v);

/// Mean curvature vector field of a sampled surface (second-order differences).
std::vector<Vec2> mean_curvature(const DiscreteSurface& surface);

/// Area Jacobian J_j of graph(v) over the model.
std::vector<double> area_jacobian(const NormalSection& v);

/// Height-gradient dv/d(angle) with fourth-order differences.
std::vector<double> angular_derivative(const NormalSection& v);

/// Backward heat kernel rho_{x0,t0}(x, t) for an n-dimensional surface.
/// Throws DomainError when t >= t0 or the point dimensions differ.
double gaussian_weight(std::span<const double> x, int dimension,
                       std::span<const double> center, double t0, double t);

/// Planar specialisation: |x - x0|^2 given directly.
double gaussian_weight_sq(double distance_sq, int dimension, double t0, double t);

/// Static weight rho(x) = (4 pi)^{-n/2} exp(-|x|^2 / 4).
double static_gaussian_weight(double distance_sq, int dimension);

/// max_j |H_j + x_j^perp / 2|.
double shrinker_residual(const DiscreteSurface& surface);

/// Radial graph of a star-shaped surface over the model, after the map
/// x -> (x - center) / scale. Throws DomainError if the surface is not
/// star-shaped about center.
NormalSection radial_section(const DiscreteSurface& surface, Vec2 center, double scale,
                             ModelPtr model, double tau = 0.0);

/// Sup-norms of the first two angular differences; a discrete stand-in for
/// the C^2 smallness of the section.
struct SectionNorms {
  double sup = 0.0;
  double sup_first = 0.0;
  double sup_second = 0.0;
};
SectionNorms section_norms(const NormalSection& v);

}  // namespace shrinker
