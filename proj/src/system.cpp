#include "diamond/system.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "diamond/nonlinear.hpp"

namespace diamond {

WaveSystem make_wave_system(std::function<double(double)> f,
                            std::function<double(double)> f_prime) {
  WaveSystem wave;
  wave.f = std::move(f);
  wave.f_prime = std::move(f_prime);

  MultiHamiltonianSystem& sys = wave.base;
  sys.n = 3;
  sys.K = Mat::Zero(3, 3);
  sys.K(0, 1) = -1.0;
  sys.K(1, 0) = 1.0;
  sys.L = Mat::Zero(3, 3);
  sys.L(0, 2) = 1.0;
  sys.L(2, 0) = -1.0;

  auto f_fn = wave.f;
  sys.grad_S = [f_fn](const Vec& z) {
    Vec g(3);
    g << -f_fn(z[0]), z[1], -z[2];
    return g;
  };
  if (wave.f_prime) {
    auto fp = wave.f_prime;
    sys.hess_S = [fp](const Vec& z) {
      Mat h = Mat::Zero(3, 3);
      h(0, 0) = -fp(z[0]);
      h(1, 1) = 1.0;
      h(2, 2) = -1.0;
      return h;
    };
  }
  return wave;
}

MultiHamiltonianSystem make_linear_system(const Mat& K, const Mat& L,
                                          const Mat& S_matrix) {
  const auto n = K.rows();
  if (K.cols() != n || L.rows() != n || L.cols() != n ||
      S_matrix.rows() != n || S_matrix.cols() != n)
    throw std::invalid_argument("make_linear_system: dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (K(i, j) != -K(j, i))
        throw std::invalid_argument("make_linear_system: K is not skew-symmetric");
      if (L(i, j) != -L(j, i))
        throw std::invalid_argument("make_linear_system: L is not skew-symmetric");
      if (S_matrix(i, j) != S_matrix(j, i))
        throw std::invalid_argument("make_linear_system: S_matrix is not symmetric");
    }

  MultiHamiltonianSystem sys;
  sys.n = static_cast<int>(n);
  sys.K = K;
  sys.L = L;
  Mat S = S_matrix;
  sys.grad_S = [S](const Vec& z) { return Vec(S * z); };
  sys.hess_S = [S](const Vec&) { return S; };
  sys.S_value = [S](const Vec& z) { return 0.5 * z.dot(S * z); };
  sys.lipschitz_const = inf_norm(S_matrix);
  return sys;
}

Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& z,
               double step) {
  const auto n = z.size();
  Mat H(n, n);
  Vec zp = z, zm = z;
  for (Eigen::Index j = 0; j < n; ++j) {
    double h = step * std::max(1.0, std::abs(z[j]));
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    H.col(j) = (grad(zp) - grad(zm)) / (2.0 * h);
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return H;
}

std::vector<std::string> validate_system(const MultiHamiltonianSystem& sys) {
  std::vector<std::string> diagnostics;
  auto note = [&](const std::string& msg) { diagnostics.push_back(msg); };

  if (sys.n <= 0) note("n must be positive");
  if (sys.K.rows() != sys.n || sys.K.cols() != sys.n)
    note("K is not n x n");
  if (sys.L.rows() != sys.n || sys.L.cols() != sys.n)
    note("L is not n x n");
  if (!sys.grad_S) note("grad_S is missing");
  if (!diagnostics.empty()) return diagnostics;

  auto exactly_skew = [](const Mat& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j)
        if (M(i, j) != -M(j, i)) return false;
    return true;
  };
  if (!exactly_skew(sys.K)) note("K not skew");
  if (!exactly_skew(sys.L)) note("L not skew");

  if (sys.has_hess()) {
    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int sample = 0; sample < 10; ++sample) {
      Vec z(sys.n);
      for (int i = 0; i < sys.n; ++i) z[i] = uni(rng);
      Mat H = sys.hess_S(z);
      if (H.rows() != sys.n || H.cols() != sys.n) {
        note("hess_S has wrong dimensions");
        break;
      }
      double scale = std::max(1.0, inf_norm(H));
      if (inf_norm(H - H.transpose()) > 1e-12 * scale) {
        note("hess_S not symmetric at sampled point");
        break;
      }
      Mat H_fd = fd_hessian(sys.grad_S, z);
      if (inf_norm(H - H_fd) > 1e-5 * scale) {
        note("hess_S disagrees with finite differences of grad_S");
        break;
      }
    }
  }
  return diagnostics;
}

}  // namespace diamond
