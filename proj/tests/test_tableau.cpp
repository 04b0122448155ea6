#include <doctest.h>

#include <cmath>

#include "diamond/nonlinear.hpp"
#include "diamond/tableau.hpp"

using namespace diamond;

TEST_CASE("gauss_tableau closed forms for r = 1, 2, 3") {
  GaussTableau g1 = gauss_tableau(1);
  CHECK(g1.c[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g1.b[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g1.A(0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  GaussTableau g2 = gauss_tableau(2);
  const double s3 = std::sqrt(3.0);
  CHECK(g2.c[0] == doctest::Approx((3.0 - s3) / 6.0).epsilon(1e-14));
  CHECK(g2.c[1] == doctest::Approx((3.0 + s3) / 6.0).epsilon(1e-14));
  CHECK(g2.b[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g2.b[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g2.A(0, 0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(g2.A(0, 1) == doctest::Approx(0.25 - s3 / 6.0).epsilon(1e-12));
  CHECK(g2.A(1, 0) == doctest::Approx(0.25 + s3 / 6.0).epsilon(1e-13));
  CHECK(g2.A(1, 1) == doctest::Approx(0.25).epsilon(1e-13));

  GaussTableau g3 = gauss_tableau(3);
  const double s15 = std::sqrt(15.0);
  CHECK(g3.c[0] == doctest::Approx(0.5 - s15 / 10.0).epsilon(1e-14));
  CHECK(g3.c[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g3.c[2] == doctest::Approx(0.5 + s15 / 10.0).epsilon(1e-14));
  CHECK(g3.b[0] == doctest::Approx(5.0 / 18.0).epsilon(1e-13));
  CHECK(g3.b[1] == doctest::Approx(4.0 / 9.0).epsilon(1e-13));
  CHECK(g3.b[2] == doctest::Approx(5.0 / 18.0).epsilon(1e-13));
  CHECK(g3.A(0, 0) == doctest::Approx(5.0 / 36.0).epsilon(1e-12));
  CHECK(g3.A(0, 1) == doctest::Approx(2.0 / 9.0 - s15 / 15.0).epsilon(1e-11));
  CHECK(g3.A(0, 2) == doctest::Approx(5.0 / 36.0 - s15 / 30.0).epsilon(1e-11));

  CHECK_THROWS_AS(gauss_tableau(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_tableau(9), std::invalid_argument);
}

TEST_CASE("tableau invariants for r = 1..8") {
  for (int r = 1; r <= 8; ++r) {
    GaussTableau tab = gauss_tableau(r);
    CHECK(std::abs(tab.b.sum() - 1.0) < 1e-13);
    CHECK(inf_norm(Mat(tab.A_inv * tab.A - Mat::Identity(r, r))) < 1e-13);
    for (int i = 1; i < r; ++i) CHECK(tab.c[i] > tab.c[i - 1]);
    // row sums of A equal c (collocation with q = 1)
    for (int i = 0; i < r; ++i)
      CHECK(std::abs(tab.A.row(i).sum() - tab.c[i]) < 1e-13);
    // simplifying condition B(2r)
    for (int q = 1; q <= 2 * r; ++q) {
      double sum = 0.0;
      for (int k = 0; k < r; ++k) sum += tab.b[k] * std::pow(tab.c[k], q - 1);
      CHECK(std::abs(sum - 1.0 / q) < 1e-12);
    }
  }
}

TEST_CASE("build_B examples") {
  GaussTableau g1 = gauss_tableau(1);
  for (double lambda : {0.0, 0.3, 1.0, 2.0}) {
    SolvabilityMatrix B = build_B(g1, lambda);
    REQUIRE(B.B.rows() == 1);
    // Ainv = [2]: 4(1-l^2) + 8(1+l^2) + 4(1-l^2) = 16 for every lambda
    CHECK(B.B(0, 0) == doctest::Approx(16.0).epsilon(1e-13));
  }

  GaussTableau g2 = gauss_tableau(2);
  SolvabilityMatrix B21 = build_B(g2, 1.0);
  Mat expected = 4.0 * kron(g2.A_inv, g2.A_inv);  // (1-l^2) terms vanish
  CHECK(inf_norm(Mat(B21.B - expected)) < 1e-12);
}

TEST_CASE("build_B matches the directly assembled four-index tensor") {
  // B[(i,j),(p,q)] = (1-l^2) d_ip (Ainv^2)_jq + 2(1+l^2) m_ip m_jq
  //               + (1-l^2) (Ainv^2)_ip d_jq, flat index i*r + j
  for (int r = 1; r <= 3; ++r) {
    GaussTableau tab = gauss_tableau(r);
    Mat ainv2 = tab.A_inv * tab.A_inv;
    for (double lambda : {0.0, 0.5, 1.0}) {
      double l2 = lambda * lambda;
      Mat direct = Mat::Zero(r * r, r * r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          for (int p = 0; p < r; ++p)
            for (int q = 0; q < r; ++q) {
              double value = 2.0 * (1.0 + l2) * tab.A_inv(i, p) * tab.A_inv(j, q);
              if (i == p) value += (1.0 - l2) * ainv2(j, q);
              if (j == q) value += (1.0 - l2) * ainv2(i, p);
              direct(i * r + j, p * r + q) = value;
            }
      CHECK(inf_norm(Mat(build_B(tab, lambda).B - direct)) < 1e-12);
    }
  }
}

TEST_CASE("build_B is permutation-similar under the exchanged ordering") {
  // swapping the index roles (t-stage major instead of x-stage major)
  // conjugates B by the perfect shuffle and leaves it invariant
  for (int r = 2; r <= 3; ++r) {
    GaussTableau tab = gauss_tableau(r);
    Mat P = Mat::Zero(r * r, r * r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) P(j * r + i, i * r + j) = 1.0;
    Mat B = build_B(tab, 0.7).B;
    CHECK(inf_norm(Mat(P * B * P.transpose() - B)) < 1e-12);
  }
}

TEST_CASE("min singular value of B is positive on the lambda grid") {
  for (int r = 1; r <= 5; ++r) {
    GaussTableau tab = gauss_tableau(r);
    for (int k = 0; k <= 20; ++k) {
      double lambda = 0.05 * k;
      CHECK(min_singular_value(build_B(tab, lambda).B) > 0.0);
    }
  }
}

TEST_CASE("max_stable_dt") {
  GaussTableau g1 = gauss_tableau(1);
  SolvabilityMatrix B = build_B(g1, 0.5);
  CHECK(max_stable_dt(B, 1.0) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(max_stable_dt(B, 16.0) == doctest::Approx(1.0).epsilon(1e-13));
  // bound grows monotonically as the Lipschitz constant shrinks
  double prev = 0.0;
  for (double lip : {100.0, 10.0, 1.0, 0.1, 1e-6}) {
    double bound = max_stable_dt(B, lip);
    CHECK(bound > prev);
    prev = bound;
  }
}
