#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "diamond/types.hpp"

namespace diamond {

/// Linearized problem for dispersion analysis: either the matrix triple
/// (K, L skew; S symmetric) defining p(xi, omega) = det(-i omega K + i xi L - S),
/// or a scalar relation given directly as custom_p.
struct DispersionProblem {
  std::optional<Mat> K, L, S;
  std::function<Complex(double, double)> custom_p;

  bool has_matrices() const { return K.has_value(); }
  static DispersionProblem matrices(Mat K, Mat L, Mat S);
  static DispersionProblem custom(std::function<Complex(double, double)> p);
};

struct DiscreteGeometry {
  double dx = 1.0, dt = 1.0;
  double lambda() const { return dt / dx; }
};

/// p(xi, omega); real-valued (up to rounding) for the matrix form since
/// the matrix is Hermitian.
Complex p_continuous(const DispersionProblem& prob, double xi, double omega);

/// The frequency remapping
///   h1 = 4 sin(x/2) / (dx (cos(x/2) + cos(y/2))),
///   h2 = 4 sin(y/2) / (dt (cos(x/2) + cos(y/2))).
/// Throws std::domain_error within 1e-14 of the denominator's zero set.
std::pair<double, double> h_map(double x, double y,
                                const DiscreteGeometry& geom);

/// Discrete dispersion function of the simple scheme, p after the h
/// remapping; arguments are X dx and Omega dt in [-pi, pi].
Complex P_simple(const DispersionProblem& prob, double X_dx, double O_dt,
                 const DiscreteGeometry& geom);

/// Discrete dispersion function of the r=1 scheme in square coordinates:
/// det(-2i tan(Ot/2) K_tilde + 2i tan(Xt/2) L_tilde - S). Requires the
/// matrix form.
Complex P_r1(const DispersionProblem& prob, double X_t, double O_t,
             const DiscreteGeometry& geom);

struct JacobianH {
  Mat J;  // 2x2
  double det = 0.0;
};

/// Jacobian of h with the prefactor 2 / (dt (cos(x/2)+cos(y/2))^2).
JacobianH jacobian_h(double x, double y, const DiscreteGeometry& geom);

/// The wave-equation branch Omega dt = 2 asin(lambda sin(X dx / 2));
/// nullopt when |lambda sin(X dx/2)| > 1 (no real discrete frequency).
std::optional<double> wave_stability_curve(double X_dx, double lambda);

/// Image of the square's top/bottom boundary under h:
/// |omega| = (4/dt) sqrt(1 + (dx xi / 4)^2). The wave dispersion line
/// stays inside this boundary for every xi iff lambda <= 1.
double boundary_curve(double xi, const DiscreteGeometry& geom);

/// All roots of y -> Re P_simple(x, y) on (-pi, pi), located by sign-change
/// bisection on a uniform scan grid.
std::vector<double> find_P_roots(const DispersionProblem& prob, double x,
                                 const DiscreteGeometry& geom,
                                 int resolution = 512);

/// Writes CSV rows curve_id,xi,omega,x,y: the continuous zero set of p
/// sampled over a (xi, omega) window, and one discrete curve per Courant
/// number (the zero set of P_simple over (-pi,pi)^2 together with its h
/// image). Curves break across poles rather than interpolating.
void emit_dispersion_curves(const DispersionProblem& prob, double dx,
                            const std::vector<double>& lambdas, int resolution,
                            std::ostream& out);

}  // namespace diamond
