#include "diamond/tableau.hpp"

#include <algorithm>
#include <cmath>

#include "diamond/nonlinear.hpp"

namespace diamond {

namespace {

// Legendre P_r and its derivative at y, by the three-term recurrence.
std::pair<double, double> legendre(int r, double y) {
  double p_prev = 1.0, p = y;
  for (int k = 1; k < r; ++k)
    std::tie(p_prev, p) =
        std::pair(p, ((2 * k + 1) * y * p - k * p_prev) / (k + 1));
  double dp = r * (y * p - p_prev) / (y * y - 1.0);
  return {p, dp};
}

Vec legendre_roots_shifted(int r) {
  Vec c(r);
  for (int k = 1; k <= r; ++k) {
    double y = std::cos(M_PI * (k - 0.25) / (r + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, dp] = legendre(r, y);
      double dy = p / dp;
      y -= dy;
      if (std::abs(dy) < 1e-15) break;
    }
    c[k - 1] = 0.5 * (1.0 + y);  // map (-1,1) -> (0,1)
  }
  std::sort(c.data(), c.data() + r);
  return c;
}

}  // namespace

GaussTableau gauss_tableau(int r) {
  if (r < 1 || r > 8)
    throw std::invalid_argument("gauss_tableau: stage count must be in 1..8");

  GaussTableau tab;
  tab.r = r;
  tab.c = legendre_roots_shifted(r);

  // W(q-1, k) = c_k^{q-1}, q = 1..r
  Mat W(r, r);
  for (int q = 1; q <= r; ++q)
    for (int k = 0; k < r; ++k) W(q - 1, k) = std::pow(tab.c[k], q - 1);

  // collocation: sum_k a_ik c_k^{q-1} = c_i^q / q
  tab.A.resize(r, r);
  for (int i = 0; i < r; ++i) {
    Vec rhs(r);
    for (int q = 1; q <= r; ++q) rhs[q - 1] = std::pow(tab.c[i], q) / q;
    tab.A.row(i) = lu_solve(W, rhs).transpose();
  }

  // quadrature: sum_k b_k c_k^{q-1} = 1/q
  Vec rhs(r);
  for (int q = 1; q <= r; ++q) rhs[q - 1] = 1.0 / q;
  tab.b = lu_solve(W, rhs);

  tab.A_inv = lu_inverse(tab.A);
  return tab;
}

Mat kron(const Mat& X, const Mat& Y) {
  Mat out(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index p = 0; p < X.cols(); ++p)
      out.block(i * Y.rows(), p * Y.cols(), Y.rows(), Y.cols()) = X(i, p) * Y;
  return out;
}

SolvabilityMatrix build_B(const GaussTableau& tab, double lambda) {
  const int r = tab.r;
  Mat ainv2 = tab.A_inv * tab.A_inv;
  Mat eye = Mat::Identity(r, r);
  double l2 = lambda * lambda;
  SolvabilityMatrix out;
  out.r = r;
  out.lambda = lambda;
  out.B = (1.0 - l2) * kron(eye, ainv2) + 2.0 * (1.0 + l2) * kron(tab.A_inv, tab.A_inv) +
          (1.0 - l2) * kron(ainv2, eye);
  return out;
}

double max_stable_dt(const SolvabilityMatrix& B, double lipschitz_const) {
  if (lipschitz_const <= 0.0)
    throw std::invalid_argument("max_stable_dt: lipschitz_const must be positive");
  if (min_singular_value(B.B) < 1e-12 * inf_norm(B.B))
    throw SingularMatrixError("max_stable_dt: B is numerically singular");
  return std::sqrt(1.0 / (lipschitz_const * inf_norm_inverse(B.B)));
}

}  // namespace diamond
