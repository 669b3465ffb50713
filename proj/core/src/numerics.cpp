#include "shrinker/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>
#include <gsl/gsl_linalg.h>
#include <gsl/gsl_spline.h>

#include "shrinker/error.hpp"

namespace shrinker {

namespace {

// GSL's default handler aborts; errors are reported through return codes.
const bool kGslHandlerOff = [] {
  gsl_set_error_handler_off();
  return true;
}();

constexpr long kOffsets[4] = {-2, -1, 1, 2};
constexpr double kWeights[4] = {1.0, -8.0, 8.0, -1.0};  // divided by 12 h

gsl_vector_const_view as_vector(std::span<const double> s) {
  return gsl_vector_const_view_array(s.data(), s.size());
}

}  // namespace

std::size_t wrap_index(long index, std::size_t size, Boundary boundary) {
  const long n = static_cast<long>(size);
  if (index >= 0 && index < n) return static_cast<std::size_t>(index);
  if (boundary == Boundary::periodic) {
    long r = index % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
  }
  // Cell-centred even reflection: -1 -> 0, -2 -> 1, N -> N-1, N+1 -> N-2.
  while (index < 0 || index >= n) {
    if (index < 0) index = -index - 1;
    if (index >= n) index = 2 * n - 1 - index;
  }
  return static_cast<std::size_t>(index);
}

namespace {

constexpr long kFourthOffsets[5] = {-2, -1, 0, 1, 2};
constexpr double kFourthWeights[5] = {1.0, -4.0, 6.0, -4.0, 1.0};

// Both stencils reach two nodes out; only the ends need wrap_index.
constexpr std::size_t kReach = 2;

template <std::size_t K>
void apply_stencil(const long (&offsets)[K], const double (&weights)[K], double scale,
                   std::span<const double> f, Boundary boundary, std::span<double> out) {
  const std::size_t n = f.size();
  assert(out.size() == n);
  auto edge = [&](std::size_t j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      acc += weights[k] * f[wrap_index(static_cast<long>(j) + offsets[k], n, boundary)];
    }
    out[j] = acc * scale;
  };
  if (n <= 2 * kReach) {
    for (std::size_t j = 0; j < n; ++j) edge(j);
    return;
  }
  for (std::size_t j = 0; j < kReach; ++j) edge(j);
  const double* data = f.data();
  for (std::size_t j = kReach; j < n - kReach; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += weights[k] * data[static_cast<long>(j) + offsets[k]];
    out[j] = acc * scale;
  }
  for (std::size_t j = n - kReach; j < n; ++j) edge(j);
}

template <std::size_t K>
void apply_stencil_transpose_add(const long (&offsets)[K], const double (&weights)[K],
                                 double scale, std::span<const double> g, Boundary boundary,
                                 std::span<double> out) {
  const std::size_t n = g.size();
  assert(out.size() == n);
  auto edge = [&](std::size_t j) {
    const double gj = g[j] * scale;
    for (std::size_t k = 0; k < K; ++k) {
      out[wrap_index(static_cast<long>(j) + offsets[k], n, boundary)] += weights[k] * gj;
    }
  };
  if (n <= 2 * kReach) {
    for (std::size_t j = 0; j < n; ++j) edge(j);
    return;
  }
  for (std::size_t j = 0; j < kReach; ++j) edge(j);
  double* data = out.data();
  for (std::size_t j = kReach; j < n - kReach; ++j) {
    const double gj = g[j] * scale;
    for (std::size_t k = 0; k < K; ++k) data[static_cast<long>(j) + offsets[k]] += weights[k] * gj;
  }
  for (std::size_t j = n - kReach; j < n; ++j) edge(j);
}

}  // namespace

void first_derivative(std::span<const double> f, double h, Boundary boundary,
                      std::span<double> out) {
  apply_stencil(kOffsets, kWeights, 1.0 / (12.0 * h), f, boundary, out);
}

void first_derivative_transpose_add(std::span<const double> g, double h,
                                    Boundary boundary, std::span<double> out) {
  apply_stencil_transpose_add(kOffsets, kWeights, 1.0 / (12.0 * h), g, boundary, out);
}

void fourth_difference(std::span<const double> f, Boundary boundary, std::span<double> out) {
  apply_stencil(kFourthOffsets, kFourthWeights, 1.0, f, boundary, out);
}

void fourth_difference_transpose_add(std::span<const double> g, Boundary boundary,
                                     std::span<double> out) {
  apply_stencil_transpose_add(kFourthOffsets, kFourthWeights, 1.0, g, boundary, out);
}

void centered_derivatives_2(std::span<const double> f, double h, Boundary boundary,
                            std::span<double> d1, std::span<double> d2) {
  const std::size_t n = f.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double fm = f[wrap_index(static_cast<long>(j) - 1, n, boundary)];
    const double fp = f[wrap_index(static_cast<long>(j) + 1, n, boundary)];
    d1[j] = (fp - fm) / (2.0 * h);
    d2[j] = (fp - 2.0 * f[j] + fm) / (h * h);
  }
}

std::vector<double> fejer_weights(std::size_t nodes) {
  static std::mutex mutex;
  static std::map<std::size_t, std::vector<double>> cache;
  {
    const std::lock_guard lock(mutex);
    if (auto it = cache.find(nodes); it != cache.end()) return it->second;
  }
  std::vector<double> w(nodes);
  const double n = static_cast<double>(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double u = (static_cast<double>(j) + 0.5) * kPi / n;
    double s = 0.0;
    for (std::size_t k = 1; k <= nodes / 2; ++k) {
      const double kk = static_cast<double>(k);
      s += std::cos(2.0 * kk * u) / (4.0 * kk * kk - 1.0);
    }
    w[j] = 2.0 / n * (1.0 - 2.0 * s);
  }
  const std::lock_guard lock(mutex);
  cache.emplace(nodes, w);
  return w;
}

std::vector<double> sine_power_weights(int m, std::size_t nodes) {
  if (m < 0) throw DomainError("sine power must be non-negative");
  std::vector<double> q(nodes);
  const double h = kPi / static_cast<double>(nodes);
  if (m % 2 == 0) {
    for (std::size_t j = 0; j < nodes; ++j) {
      const double u = (static_cast<double>(j) + 0.5) * h;
      q[j] = h * std::pow(std::sin(u), m);
    }
  } else {
    q = fejer_weights(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
      const double u = (static_cast<double>(j) + 0.5) * h;
      q[j] *= std::pow(std::sin(u), m - 1);
    }
  }
  return q;
}

double unit_ball_volume(int d) {
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double unit_sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

PeriodicSpline::PeriodicSpline(std::span<const double> x, std::span<const double> y,
                               double period)
    : x0_(x.empty() ? 0.0 : x.front()), period_(period) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) throw DomainError("periodic spline needs >= 3 matching samples");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  xs.push_back(x.front() + period);
  ys.push_back(y.front());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw DomainError("periodic spline abscissae not increasing");
  }
  spline_ = gsl_spline_alloc(gsl_interp_cspline_periodic, xs.size());
  accel_ = gsl_interp_accel_alloc();
  if (gsl_spline_init(spline_, xs.data(), ys.data(), xs.size()) != GSL_SUCCESS) {
    gsl_spline_free(spline_);
    gsl_interp_accel_free(accel_);
    throw DomainError("periodic spline initialisation failed");
  }
}

PeriodicSpline::~PeriodicSpline() {
  if (spline_ != nullptr) gsl_spline_free(spline_);
  if (accel_ != nullptr) gsl_interp_accel_free(accel_);
}

PeriodicSpline::PeriodicSpline(PeriodicSpline&& o) noexcept
    : x0_(o.x0_), period_(o.period_), spline_(o.spline_), accel_(o.accel_) {
  o.spline_ = nullptr;
  o.accel_ = nullptr;
}

PeriodicSpline& PeriodicSpline::operator=(PeriodicSpline&& o) noexcept {
  std::swap(x0_, o.x0_);
  std::swap(period_, o.period_);
  std::swap(spline_, o.spline_);
  std::swap(accel_, o.accel_);
  return *this;
}

double PeriodicSpline::operator()(double x) const {
  double r = std::fmod(x - x0_, period_);
  if (r < 0.0) r += period_;
  return gsl_spline_eval(spline_, x0_ + r, accel_);
}

void solve_tridiagonal(std::span<const double> diag, std::span<const double> super,
                       std::span<const double> sub, std::span<const double> rhs,
                       std::span<double> x) {
  auto d = as_vector(diag);
  auto e = as_vector(super);
  auto f = as_vector(sub);
  auto b = as_vector(rhs);
  gsl_vector_view xv = gsl_vector_view_array(x.data(), x.size());
  if (gsl_linalg_solve_tridiag(&d.vector, &e.vector, &f.vector, &b.vector, &xv.vector) !=
      GSL_SUCCESS) {
    throw Error("tridiagonal solve failed");
  }
}

void solve_cyclic_tridiagonal(std::span<const double> diag, std::span<const double> off,
                              std::span<const double> rhs, std::span<double> x) {
  auto d = as_vector(diag);
  auto e = as_vector(off);
  auto b = as_vector(rhs);
  gsl_vector_view xv = gsl_vector_view_array(x.data(), x.size());
  if (gsl_linalg_solve_symm_cyc_tridiag(&d.vector, &e.vector, &b.vector, &xv.vector) !=
      GSL_SUCCESS) {
    throw Error("cyclic tridiagonal solve failed");
  }
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw FitError("linear fit needs at least two points");
  LinearFit fit;
  double c00 = 0.0, c01 = 0.0, c11 = 0.0, sumsq = 0.0;
  if (gsl_fit_linear(x.data(), 1, y.data(), 1, n, &fit.intercept, &fit.slope, &c00, &c01,
                     &c11, &sumsq) != GSL_SUCCESS) {
    throw FitError("linear fit failed");
  }
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double total = 0.0;
  for (double v : y) total += (v - mean) * (v - mean);
  fit.r_squared = total > 0.0 ? 1.0 - sumsq / total : 1.0;
  fit.rms_residual = std::sqrt(sumsq / static_cast<double>(n));
  return fit;
}

}  // namespace shrinker
