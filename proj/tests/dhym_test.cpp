#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jflow/dhym.hpp"

#include <cmath>

using namespace jflow;

namespace {

struct Solved {
  Problem pb;
  ContinuationResult res;
  MetricFactor mf;
  ReducedCurvature rc;

  explicit Solved(int n)
      : pb(VortexParams(7, 3, Rational(11, 5)), 0.4, n),
        res(continuationSolve(pb)),
        mf(recoverF(pb, res.psi)),
        rc(reducedCurvature(pb, res.psi, mf)) {
    REQUIRE(res.status == SolveStatus::Converged);
  }
};

const Solved& solved256() {
  static const Solved s(256);
  return s;
}

}  // namespace

TEST_CASE("topological charge polynomials") {
  const VortexParams p(7, 3, Rational(11, 5));
  const PhaseData pd = zEpsilon(vortexChern(p).sheaf(), vortexOmega(p));

  // Coefficients: Re Z = -2 ch2 + eps^2 [omega]^2 rank, Im Z = 2 eps [omega].ch1.
  CHECK(pd.re_poly[0] == Rational(-208));
  CHECK(pd.re_poly[1] == Rational(0));
  CHECK(pd.re_poly[2] == Rational(44, 5));  // 2 s rank = (22/5) * 2
  CHECK(pd.im_poly[1] == Rational(458, 5)); // 2 * 229/5

  const auto [re, im] = pd.zAtExact(Rational(1, 10));
  CHECK(re == Rational(-208) + Rational(44, 500));
  CHECK(im == Rational(229, 25));

  // eps = 0: Z is real and negative, Theta = pi.
  CHECK(pd.thetaAt(0.0) == doctest::Approx(M_PI));
}

TEST_CASE("tan Theta leading term") {
  const VortexParams p(7, 3, Rational(11, 5));
  const PhaseData pd = zEpsilon(vortexChern(p).sheaf(), vortexOmega(p));
  const double k1 = (229.0 / 5.0) / 104.0;  // [omega].ch1 / ch2
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double t = std::tan(pd.thetaAt(eps));
    CHECK(std::abs(t + k1 * eps) <= 0.1 * eps * eps * eps + 1e-15);
  }
}

TEST_CASE("phase branch is continuous and tends to pi") {
  const VortexParams p(7, 3, Rational(11, 5));
  const PhaseData pd = zEpsilon(vortexChern(p).sheaf(), vortexOmega(p));
  double prev = pd.thetaAt(1e-1);
  CHECK(prev > M_PI / 2.0);
  for (double eps = 1e-1; eps >= 1e-5; eps /= 1.3) {
    const double th = pd.thetaAt(eps);
    CHECK(std::abs(th - prev) < 0.5);
    CHECK(th >= prev - 1e-15);  // decreasing eps pushes Theta up to pi
    prev = th;
  }
  CHECK(prev == doctest::Approx(M_PI).epsilon(1e-4));
}

TEST_CASE("vanishing charge is rejected") {
  const SurfaceLattice& lat = productLattice();
  RationalVector w(2), y(2);
  w << Rational(2), Rational(1);  // omega = 2A + B, omega^2 = 4
  y << Rational(2), Rational(-1);
  const LatticeClass omega(lat, std::move(w));
  const LatticeClass ch1(lat, std::move(y));  // omega . ch1 = 0
  REQUIRE(pair(omega, ch1) == Rational(0));
  // Re Z = -2 ch2 + eps^2 [omega]^2 vanishes at eps = 1/2 with ch2 = 1/2.
  const SheafChern e(Rational(1), ch1, Rational(1, 2));
  CHECK_THROWS_AS(zEpsilon(e, omega, 0.5), PhaseUndefinedError);
}

TEST_CASE("pairing sign calibration reproduces the J-residual fields") {
  const Solved& s = solved256();
  // mu mubar = +W sigma tau: the off-diagonal i, -i coefficients of M
  // multiply to +1, so this is the sign that reproduces the reduced system.
  CHECK(calibratePairingSign(s.pb, s.rc) == 1);

  const DhymContext ctx(s.pb, s.rc, s.res.psi);
  CHECK(ctx.pairing_sign == 1);

  // Standing algebra-soundness test: the substituted eps -> 0 limit equals
  // the verifier's residual assembly to machine precision.
  const VerifyReport ref = verifySolution(s.pb, s.rc);
  const DhymResidual lim =
      detail::limitResidual(s.pb, detail::dhymFields(s.pb, s.rc), 1);
  CHECK((lim.res1 - ref.res_hfs).abs().maxCoeff() < 1e-13);
  CHECK((lim.res2 - ref.res_fs).abs().maxCoeff() < 1e-13);

  // The opposite sign misses by the 2 c W pairing term.
  const DhymResidual wrong =
      detail::limitResidual(s.pb, detail::dhymFields(s.pb, s.rc), -1);
  CHECK((wrong.res1 - ref.res_hfs).abs().maxCoeff() > 1e-3);
}

TEST_CASE("off-diagonal entries of the squared algebra element vanish") {
  const Solved& s = solved256();
  const DhymContext ctx(s.pb, s.rc, s.res.psi);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const DhymResidual r = reducedDhymResidual(ctx, eps);
    CHECK(r.offdiag_zero);
    CHECK(r.sup() < 10.0);
  }
}

TEST_CASE("residual scaling in eps above the floor") {
  // At n = 2 every odd power of eps cancels: Im(M^2) is exactly linear in
  // eps, Re(M^2) exactly even, and the phase branch is an odd series, so the
  // residual of the converged solution is an even series and the measured
  // slope is 2, not the generic O(eps) bound.
  const Solved s(512);
  const DhymContext ctx(s.pb, s.rc, s.res.psi);
  REQUIRE(ctx.j_floor < 1e-6);
  const ScalingFit fit = scalingFit(
      ctx, {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3});
  CHECK(fit.slope > 1.8);
  CHECK(fit.slope < 2.2);
  CHECK(fit.points_used >= 3);
}

TEST_CASE("scaling fit preconditions") {
  const Solved& s = solved256();
  const DhymContext ctx(s.pb, s.rc, s.res.psi);
  CHECK_THROWS_AS(scalingFit(ctx, {1e-1, 1e-2, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(scalingFit(ctx, {1e-1, 1e-1 / 3.0}), std::invalid_argument);
}

TEST_CASE("one Newton correction contracts the residual") {
  const Solved& s = solved256();
  const DhymContext ctx(s.pb, s.rc, s.res.psi);
  const NewtonCorrection nc = newtonCorrection(ctx, 1e-2);
  CHECK(nc.ratio <= 0.2);
  CHECK(nc.post_sup < nc.pre_sup);
  // The correction is a small deformation for small eps.
  CHECK((nc.psi - s.res.psi).abs().maxCoeff() < 0.05);
}

TEST_CASE("small-volume positivity signs follow the J-positivity data") {
  const Solved& s = solved256();
  const DhymContext ctx(s.pb, s.rc, s.res.psi);
  const PositivitySignReport rep =
      dhymPositivitySigns(ctx, {1e-3, 1e-2, std::pow(10.0, -1.5), 1e-1});
  CHECK(rep.threshold >= 1e-2);
}
