#include "diamond/dispersion.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "diamond/nonlinear.hpp"

namespace diamond {

DispersionProblem DispersionProblem::matrices(Mat K, Mat L, Mat S) {
  DispersionProblem p;
  p.K = std::move(K);
  p.L = std::move(L);
  p.S = std::move(S);
  return p;
}

DispersionProblem DispersionProblem::custom(
    std::function<Complex(double, double)> p_fn) {
  DispersionProblem p;
  p.custom_p = std::move(p_fn);
  return p;
}

Complex p_continuous(const DispersionProblem& prob, double xi, double omega) {
  if (!prob.has_matrices()) {
    if (!prob.custom_p)
      throw std::invalid_argument("p_continuous: problem has neither matrices nor custom_p");
    return prob.custom_p(xi, omega);
  }
  const Complex i_unit(0.0, 1.0);
  CMat M = -i_unit * omega * prob.K->cast<Complex>() +
           i_unit * xi * prob.L->cast<Complex>() - prob.S->cast<Complex>();
  return det_complex(M);
}

std::pair<double, double> h_map(double x, double y,
                                const DiscreteGeometry& geom) {
  double denom = std::cos(0.5 * x) + std::cos(0.5 * y);
  if (std::abs(denom) < 1e-14)
    throw std::domain_error("h_map: pole of the frequency remapping");
  return {4.0 * std::sin(0.5 * x) / (geom.dx * denom),
          4.0 * std::sin(0.5 * y) / (geom.dt * denom)};
}

Complex P_simple(const DispersionProblem& prob, double X_dx, double O_dt,
                 const DiscreteGeometry& geom) {
  auto [xi, omega] = h_map(X_dx, O_dt, geom);
  return p_continuous(prob, xi, omega);
}

Complex P_r1(const DispersionProblem& prob, double X_t, double O_t,
             const DiscreteGeometry& geom) {
  if (!prob.has_matrices())
    throw std::invalid_argument("P_r1: matrix form required");
  if (std::abs(std::cos(0.5 * X_t)) < 1e-14 ||
      std::abs(std::cos(0.5 * O_t)) < 1e-14)
    throw std::domain_error("P_r1: tan pole");
  Mat K_tilde = *prob.K / geom.dt - *prob.L / geom.dx;
  Mat L_tilde = *prob.K / geom.dt + *prob.L / geom.dx;
  const Complex i_unit(0.0, 1.0);
  CMat M = -i_unit * 2.0 * std::tan(0.5 * O_t) * K_tilde.cast<Complex>() +
           i_unit * 2.0 * std::tan(0.5 * X_t) * L_tilde.cast<Complex>() -
           prob.S->cast<Complex>();
  return det_complex(M);
}

JacobianH jacobian_h(double x, double y, const DiscreteGeometry& geom) {
  double cx = std::cos(0.5 * x), cy = std::cos(0.5 * y);
  double sx = std::sin(0.5 * x), sy = std::sin(0.5 * y);
  double denom = cx + cy;
  if (std::abs(denom) < 1e-14)
    throw std::domain_error("jacobian_h: pole of the frequency remapping");
  double lambda = geom.lambda();
  double pref = 2.0 / (geom.dt * denom * denom);
  JacobianH out;
  out.J.resize(2, 2);
  out.J << lambda * (1.0 + cx * cy), lambda * sx * sy, sx * sy, 1.0 + cx * cy;
  out.J *= pref;
  out.det = out.J(0, 0) * out.J(1, 1) - out.J(0, 1) * out.J(1, 0);
  return out;
}

std::optional<double> wave_stability_curve(double X_dx, double lambda) {
  double arg = lambda * std::sin(0.5 * X_dx);
  if (std::abs(arg) > 1.0) return std::nullopt;
  return 2.0 * std::asin(arg);
}

double boundary_curve(double xi, const DiscreteGeometry& geom) {
  double q = geom.dx * xi / 4.0;
  return 4.0 / geom.dt * std::sqrt(1.0 + q * q);
}

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double f_lo) {
  for (int iter = 0; iter < 80; ++iter) {
    double mid = 0.5 * (lo + hi);
    double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_lo < 0.0) != (f_mid < 0.0))
      hi = mid;
    else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

// sign-change scan of f over (lo, hi) on a uniform grid; NaN/pole samples
// break the scan instead of bridging it
std::vector<double> scan_roots(const std::function<double(double)>& f,
                               double lo, double hi, int resolution) {
  std::vector<double> roots;
  double prev_y = 0.0;
  bool prev_ok = false;
  double prev_s = lo;
  for (int k = 0; k <= resolution; ++k) {
    double s = lo + (hi - lo) * k / resolution;
    double y;
    bool ok = true;
    try {
      y = f(s);
      ok = std::isfinite(y);
    } catch (const std::domain_error&) {
      ok = false;
      y = 0.0;
    }
    if (ok && prev_ok && (prev_y < 0.0) != (y < 0.0))
      roots.push_back(bisect(f, prev_s, s, prev_y));
    else if (ok && y == 0.0)
      roots.push_back(s);
    prev_y = y;
    prev_ok = ok;
    prev_s = s;
  }
  return roots;
}

}  // namespace

std::vector<double> find_P_roots(const DispersionProblem& prob, double x,
                                 const DiscreteGeometry& geom, int resolution) {
  const double pi = M_PI;
  const double margin = pi * 1e-9;  // stay off the boundary poles
  auto f = [&](double y) { return P_simple(prob, x, y, geom).real(); };
  return scan_roots(f, -pi + margin, pi - margin, resolution);
}

void emit_dispersion_curves(const DispersionProblem& prob, double dx,
                            const std::vector<double>& lambdas, int resolution,
                            std::ostream& out) {
  const double pi = M_PI;
  out << "curve_id,xi,omega,x,y\n";

  // continuous zero set of p on a window wide enough for every lambda
  const double xi_max = 4.0;
  double omega_max = 0.0;
  for (double lambda : lambdas)
    omega_max = std::max(
        omega_max, 2.0 * boundary_curve(xi_max, DiscreteGeometry{dx, lambda * dx}));
  for (int k = 0; k <= resolution; ++k) {
    double xi = -xi_max + 2.0 * xi_max * k / resolution;
    auto f = [&](double omega) { return p_continuous(prob, xi, omega).real(); };
    for (double omega : scan_roots(f, -omega_max, omega_max, resolution))
      out << "continuous," << xi << ',' << omega << ",,\n";
  }

  // one discrete curve per Courant number: the zero set of P_simple over
  // the (-pi,pi)^2 square and its image under h
  const double margin = pi * 1e-9;
  for (double lambda : lambdas) {
    DiscreteGeometry geom{dx, lambda * dx};
    for (int k = 0; k <= resolution; ++k) {
      double x = -pi + margin + (2.0 * pi - 2.0 * margin) * k / resolution;
      for (double y : find_P_roots(prob, x, geom, resolution)) {
        auto [xi, omega] = h_map(x, y, geom);
        out << "discrete_lambda=" << lambda << ',' << xi << ',' << omega << ','
            << x << ',' << y << '\n';
      }
    }
  }
}

}  // namespace diamond
