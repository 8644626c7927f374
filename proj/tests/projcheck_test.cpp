#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jflow/projcheck.hpp"

#include <cmath>

using namespace jflow;

TEST_CASE("Fubini-Study curvature tensor") {
  const CurvatureTensor f1 = fsCurvature(1);
  CHECK(f1.at(0, 0, 0, 0) == Rational(2));  // T'CP^1 = O(2)

  const CurvatureTensor f2 = fsCurvature(2);
  CHECK(f2.at(0, 1, 0, 1) == Rational(1));
  CHECK(f2.at(0, 1, 1, 0) == Rational(0));
  CHECK(f2.at(0, 0, 0, 0) == Rational(2));
  CHECK(f2.at(1, 1, 0, 0) == Rational(1));

  // Hermitian symmetry and the endomorphism trace sum delta sums.
  for (int n = 1; n <= 4; ++n) {
    const CurvatureTensor f = fsCurvature(n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) CHECK(f.at(a, b, i, j) == f.at(b, a, j, i));
    for (int i = 0; i < n; ++i) {
      Rational trace(0);
      for (int a = 0; a < n; ++a) trace += f.at(a, a, i, i);
      CHECK(trace == Rational(n + 1));
    }
  }
  CHECK_THROWS_AS(fsCurvature(5), std::domain_error);
}

TEST_CASE("wedge algebra") {
  SUBCASE("identity acts trivially") {
    const MatrixFormPoly f = curvatureForm(fsCurvature(2));
    const MatrixFormPoly id = MatrixFormPoly::identity(2, 2);
    const MatrixFormPoly prod = wedge(id, f);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(prod.entry(a, b) == f.entry(a, b));
  }

  SUBCASE("omega^2 is twice the volume form on n = 2") {
    const MatrixFormPoly omega = omegaForm(2, 1);
    const MatrixFormPoly omega2 = wedgePower(omega, 2);
    // One top-form coefficient; its magnitude is 2! (the basis ordering
    // carries the sign).
    REQUIRE(omega2.entry(0, 0).size() == 1);
    const auto& [key, coeff] = *omega2.entry(0, 0).begin();
    CHECK(key.first == 3u);
    CHECK(key.second == 3u);
    CHECK(abs(coeff) == Rational(2));
  }

  SUBCASE("degree overflow is rejected") {
    const MatrixFormPoly omega = omegaForm(2, 1);
    CHECK_THROWS_AS(wedge(wedgePower(omega, 2), omega), std::domain_error);
  }

  SUBCASE("F^2 diagonal carries the (1 + 1/n) factor against omega^2") {
    const MatrixFormPoly f = curvatureForm(fsCurvature(2));
    const MatrixFormPoly f2 = wedgePower(f, 2);
    const MatrixFormPoly omega2 = wedgePower(omegaForm(2, 1), 2);
    const Rational omega_top = omega2.entry(0, 0).begin()->second;
    for (int a = 0; a < 2; ++a) {
      const auto it = f2.entry(a, a).find({3u, 3u});
      REQUIRE(it != f2.entry(a, a).end());
      CHECK(it->second == Rational(3, 2) * omega_top);
    }
  }
}

TEST_CASE("J-equation residual is exactly zero for n = 1..4") {
  for (int n = 1; n <= 4; ++n) {
    const JResidualReport rep = jResidual(n);
    CHECK(rep.residual_zero);
    CHECK(rep.both_sides_factor);
    CHECK(rep.factor == Rational(n + 1, n));
  }
  // n = 1 works with the cohomological constant 1/2 (F = 2 omega).
  CHECK(jResidual(1).constant == Rational(1, 2));
  CHECK(jResidual(2).constant == Rational(1));
}

TEST_CASE("Chern invariants of T'CP^n") {
  const Rational expected[] = {Rational(0), Rational(2), Rational(3), Rational(2),
                               Rational(5, 6)};
  for (int n = 1; n <= 4; ++n) {
    const ChernInvariants inv = chernInvariants(n);
    CHECK(inv.n_ch_n == expected[n]);
    // (n+1)/(n-1)! both ways for n >= 2; at n = 1 the pairing [omega].ch_0
    // equals the rank.
    if (n >= 2)
      CHECK(inv.omega_ch_nm1 == expected[n]);
    else
      CHECK(inv.omega_ch_nm1 == Rational(1));
  }
  CHECK(chernInvariants(2).ch[2] == Rational(3, 2));
  CHECK(chernInvariants(3).ch[3] == Rational(2, 3));
}

TEST_CASE("curvature-trace route for the n = 2 invariants") {
  // tr(F) = 3 omega and tr(F^2) = 2 (3/2) omega^2 at the symmetric point;
  // with integral omega^2 = 1 these integrate to [omega].ch1 = 3 and
  // 2 ch2 = 3.
  const MatrixFormPoly f = curvatureForm(fsCurvature(2));
  const MatrixFormPoly omega = omegaForm(2, 1);
  const Rational omega_top = wedgePower(omega, 2).entry(0, 0).begin()->second;

  const MatrixFormPoly f2 = wedgePower(f, 2);
  Rational tr_f2(0);
  for (int a = 0; a < 2; ++a) {
    const auto it = f2.entry(a, a).find({3u, 3u});
    if (it != f2.entry(a, a).end()) tr_f2 += it->second;
  }
  CHECK(tr_f2 / omega_top == Rational(3));  // = 2 ch2

  // tr(F) wedged with omega.
  MatrixFormPoly tr_f(2, 1, 1);
  for (int a = 0; a < 2; ++a)
    for (const auto& [k, v] : f.entry(a, a)) tr_f.addTerm(0, 0, k.first, k.second, v);
  const MatrixFormPoly omega_trf = wedge(omega, tr_f);
  CHECK(omega_trf.entry(0, 0).at({3u, 3u}) / omega_top == Rational(3));

  const ChernInvariants inv = chernInvariants(2);
  CHECK(Rational(2) * inv.ch[2] == tr_f2 / omega_top);
  CHECK(inv.omega_ch_nm1 == omega_trf.entry(0, 0).at({3u, 3u}) / omega_top);
}

TEST_CASE("J-positivity Gram matrix at n = 2") {
  const GramReport rep = jPositivityGram();
  CHECK(rep.min_eigenvalue > 1e-6);
  CHECK(rep.eig_residual < 1e-12);
  // Regression constant: the minimum eigenvalue is 2 - sqrt(3).
  CHECK(rep.min_eigenvalue == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));

  SUBCASE("single nonzero coefficient keeps the form positive") {
    Eigen::Matrix<std::complex<double>, 8, 1> a;
    a.setZero();
    a[0] = std::complex<double>(1.0, 0.0);  // a_{11,1}
    CHECK(jPositivityFormValue(a) >= 1.0);
  }

  SUBCASE("the paper's equality configuration vanishes only at zero") {
    // a_{11,2} = a_{12,2} = a_{21,1} = a_{22,1} = 0 and the two
    // Cauchy-Schwarz pairs aligned with equal norms.
    auto idx = [](int a, int b, int mu) { return 4 * (a - 1) + 2 * (b - 1) + (mu - 1); };
    Eigen::Matrix<std::complex<double>, 8, 1> a;
    a.setZero();
    const std::complex<double> z(0.6, -0.2);
    a[idx(1, 1, 1)] = z;
    a[idx(2, 1, 2)] = z;  // pairs (a_{2a,2}, a_{1a,1}) aligned, equal norm
    a[idx(1, 2, 1)] = z;
    a[idx(2, 2, 2)] = z;
    CHECK(jPositivityFormValue(a) > 0.0);
    a.setZero();
    CHECK(jPositivityFormValue(a) == 0.0);
  }
}

TEST_CASE("J-Griffith positivity in tangent directions") {
  const GriffithDirectionReport rep = griffithFromPositivity();
  CHECK(rep.positive);
  // Standard direction: 2A - Id = diag(3, 1).
  CHECK(rep.min_eig_standard == doctest::Approx(1.0).epsilon(1e-12));
  // The isotropy action preserves the spectrum.
  CHECK(rep.min_eig_rotated == doctest::Approx(1.0).epsilon(1e-9));
  // Trace consequence: c c1(E,h) - omega > 0 in the tested direction.
  CHECK(rep.trace_margin == doctest::Approx(2.0).epsilon(1e-12));
}
