#pragma once

// Small numerical kernels shared by the geometry and flow code: a 2-vector,
// centered difference stencils on uniform grids, product quadrature on the
// polar-angle grid, periodic spline interpolation and tridiagonal solves.

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <gsl/gsl_spline.h>

namespace shrinker {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

inline constexpr double kPi = 3.14159265358979323846;

/// How a grid function continues past the ends of its index range.
enum class Boundary {
  periodic,        ///< v[-1] = v[N-1]
  even_reflection  ///< cell-centred mirror: v[-1] = v[0], v[N] = v[N-1]
};

/// Maps a possibly out-of-range index onto the grid.
std::size_t wrap_index(long index, std::size_t size, Boundary boundary);

/// Fourth-order centred first derivative with uniform spacing h.
void first_derivative(std::span<const double> f, double h, Boundary boundary,
                      std::span<double> out);

/// out += D^T g for the operator of first_derivative (ghosts folded back).
void first_derivative_transpose_add(std::span<const double> g, double h,
                                    Boundary boundary, std::span<double> out);

/// Undivided fourth difference f[j-2] - 4 f[j-1] + 6 f[j] - 4 f[j+1] + f[j+2].
void fourth_difference(std::span<const double> f, Boundary boundary, std::span<double> out);

/// out += D4^T g for the operator of fourth_difference (ghosts folded back).
void fourth_difference_transpose_add(std::span<const double> g, Boundary boundary,
                                     std::span<double> out);

/// Second-order centred first and second derivatives.
void centered_derivatives_2(std::span<const double> f, double h, Boundary boundary,
                            std::span<double> d1, std::span<double> d2);

/// Weights q_j with sum_j q_j g(u_j) ~ int_0^pi g(u) sin^m(u) du on the
/// cell-centred grid u_j = (j + 1/2) pi / N, for g smooth and even about both
/// poles. Odd m uses Fejer's first rule in cos u, even m the midpoint rule;
/// both converge spectrally.
std::vector<double> sine_power_weights(int m, std::size_t nodes);

/// Fejer's first rule on [-1, 1] at x_j = cos((j + 1/2) pi / N).
std::vector<double> fejer_weights(std::size_t nodes);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);
/// Area of the unit sphere S^d in R^{d+1}.
double unit_sphere_area(int d);

/// Periodic cubic spline y(x) over one period; x strictly increasing.
class PeriodicSpline {
 public:
  PeriodicSpline(std::span<const double> x, std::span<const double> y, double period);
  ~PeriodicSpline();
  PeriodicSpline(PeriodicSpline&&) noexcept;
  PeriodicSpline& operator=(PeriodicSpline&&) noexcept;
  PeriodicSpline(const PeriodicSpline&) = delete;
  PeriodicSpline& operator=(const PeriodicSpline&) = delete;

  double operator()(double x) const;
  double period() const { return period_; }

 private:
  double x0_ = 0.0;
  double period_ = 0.0;
  gsl_spline* spline_ = nullptr;
  gsl_interp_accel* accel_ = nullptr;
};

/// Solves a tridiagonal system; sub[i] couples row i+1 to column i.
void solve_tridiagonal(std::span<const double> diag, std::span<const double> super,
                       std::span<const double> sub, std::span<const double> rhs,
                       std::span<double> x);

/// Solves a symmetric cyclic tridiagonal system; off[N-1] is the corner entry.
void solve_cyclic_tridiagonal(std::span<const double> diag, std::span<const double> off,
                              std::span<const double> rhs, std::span<double> x);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace shrinker
