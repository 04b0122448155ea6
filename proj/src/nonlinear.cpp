#include "diamond/nonlinear.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace diamond {

namespace {

template <typename Scalar>
void check_pivots(const Eigen::PartialPivLU<Eigen::Matrix<Scalar, -1, -1>>& lu) {
  const auto& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (std::abs(packed(i, i)) < 1e-300)
      throw SingularMatrixError("singular matrix in LU factorization");
  }
}

}  // namespace

Vec lu_solve(const Mat& M, const Vec& rhs) {
  Eigen::PartialPivLU<Mat> lu(M);
  check_pivots(lu);
  return lu.solve(rhs);
}

Mat lu_inverse(const Mat& M) {
  Eigen::PartialPivLU<Mat> lu(M);
  check_pivots(lu);
  return lu.inverse();
}

Complex det_complex(const CMat& M) {
  if (M.rows() == 0) return Complex(1.0, 0.0);
  return Eigen::PartialPivLU<CMat>(M).determinant();
}

double inf_norm(const Mat& M) {
  if (M.rows() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm_inverse(const Mat& M) { return inf_norm(lu_inverse(M)); }

double min_singular_value(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().minCoeff();
}

std::pair<Vec, SolveReport> newton(const VecFn& F, const MatFn& J, Vec x,
                                   const SolverConfig& cfg) {
  SolveReport report;
  Vec fx = F(x);
  double res = fx.size() ? fx.cwiseAbs().maxCoeff() : 0.0;
  while (res > cfg.tol && report.iterations < cfg.max_iter) {
    Vec step = lu_solve(J(x), fx);
    double frac = cfg.damping;
    Vec x_next = x - frac * step;
    Vec f_next = F(x_next);
    double res_next = f_next.cwiseAbs().maxCoeff();
    for (int halvings = 0; halvings < 8 && res_next >= res && res_next > cfg.tol;
         ++halvings) {
      frac *= 0.5;
      x_next = x - frac * step;
      f_next = F(x_next);
      res_next = f_next.cwiseAbs().maxCoeff();
    }
    x = std::move(x_next);
    fx = std::move(f_next);
    res = res_next;
    ++report.iterations;
    if (!std::isfinite(res)) break;
  }
  report.final_residual = res;
  report.converged = std::isfinite(res) && res <= cfg.tol;
  return {std::move(x), report};
}

std::pair<Vec, SolveReport> fixed_point(const VecFn& G, Vec x,
                                        const SolverConfig& cfg) {
  SolveReport report;
  double prev_diff = -1.0;
  int growing = 0;
  double diff = 0.0;
  while (report.iterations < cfg.max_iter) {
    Vec gx = G(x);
    diff = (x - gx).cwiseAbs().maxCoeff();
    ++report.iterations;
    x = (1.0 - cfg.damping) * x + cfg.damping * gx;
    if (!std::isfinite(diff)) break;
    if (diff <= cfg.tol) break;
    if (prev_diff >= 0.0) {
      growing = diff > prev_diff ? growing + 1 : 0;
      if (growing >= 5) break;  // diverging
    }
    prev_diff = diff;
  }
  report.final_residual = diff;
  report.converged = std::isfinite(diff) && diff <= cfg.tol;
  return {std::move(x), report};
}

}  // namespace diamond
