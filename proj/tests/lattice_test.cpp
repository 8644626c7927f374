#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jflow/lattice.hpp"
#include "jflow/vortexcfg.hpp"

#include <random>

using namespace jflow;

namespace {

LatticeClass cls(const SurfaceLattice& lat, std::initializer_list<Rational> coeffs) {
  RationalVector v(static_cast<Eigen::Index>(coeffs.size()));
  Eigen::Index i = 0;
  for (const auto& c : coeffs) v(i++) = c;
  return LatticeClass(lat, std::move(v));
}

SheafChern randomSheaf(std::mt19937& rng, const SurfaceLattice& lat, int max_rank = 3) {
  std::uniform_int_distribution<int> rank(1, max_rank);
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 4);
  RationalVector v(lat.size());
  for (Eigen::Index i = 0; i < lat.size(); ++i) v(i) = Rational(num(rng), den(rng));
  return SheafChern(Rational(rank(rng)), LatticeClass(lat, std::move(v)),
                    Rational(num(rng), den(rng)));
}

}  // namespace

TEST_CASE("pairing on the product lattice") {
  const SurfaceLattice& lat = productLattice();
  const LatticeClass a = cls(lat, {Rational(1), Rational(0)});
  const LatticeClass b = cls(lat, {Rational(0), Rational(1)});
  CHECK(pair(a, b) == Rational(1));
  CHECK(pair(a, a) == Rational(0));
  CHECK(pair(b, b) == Rational(0));

  const LatticeClass omega = cls(lat, {Rational(11, 5), Rational(1)});
  const LatticeClass ch1 = cls(lat, {Rational(15), Rational(14)});
  CHECK(pair(omega, ch1) == Rational(229, 5));
}

TEST_CASE("pairing rejects mismatched lattices") {
  const SurfaceLattice prod = SurfaceLattice::product();
  const SurfaceLattice cp2 = SurfaceLattice::cp2();
  const LatticeClass a = cls(prod, {Rational(1), Rational(0)});
  const LatticeClass h = cls(cp2, {Rational(1)});
  CHECK_THROWS_AS(pair(a, h), std::invalid_argument);
}

TEST_CASE("positivity check") {
  const SurfaceLattice& cp2 = cp2Lattice();
  const LatticeClass h = cls(cp2, {Rational(1)});

  // Oracle: ch of T'CP^2 from c_k = binom(3,k) H^k and Newton's identities:
  // p1 = e1 = 3, p2 = e1 p1 - 2 e2 = 9 - 6 = 3, ch2 = p2/2 = 3/2.
  const Rational e1(3), e2(3);
  const Rational p1 = e1;
  const Rational p2 = e1 * p1 - Rational(2) * e2;
  CHECK(p2 / Rational(2) == Rational(3, 2));
  const SheafChern tangent(Rational(2), Rational(3) * h, p2 / Rational(2));
  CHECK(positivityCheck(tangent, h) == std::pair<bool, bool>{true, true});

  const SheafChern flat(Rational(1), Rational(3) * h, Rational(0));
  CHECK_FALSE(positivityCheck(flat, h).first);

  const VortexChern vc = vortexChern(VortexParams(7, 3, Rational(11, 5)));
  CHECK(vc.ch2 == Rational(104));
  CHECK(vc.omega_ch1 == Rational(229, 5));
  CHECK(positivityCheck(vc.sheaf(), vortexOmega(VortexParams(7, 3, Rational(11, 5)))) ==
        std::pair<bool, bool>{true, true});
}

TEST_CASE("J-equation constant") {
  const VortexParams p(7, 3, Rational(11, 5));
  CHECK(jConstant(vortexChern(p).sheaf(), vortexOmega(p)) == Rational(229, 1040));

  const SurfaceLattice& cp2 = cp2Lattice();
  const LatticeClass h = cls(cp2, {Rational(1)});
  CHECK(jConstant(SheafChern::lineBundle(h), h) == Rational(1));
  CHECK(jConstant(SheafChern(Rational(2), Rational(3) * h, Rational(3, 2)), h) ==
        Rational(1));

  CHECK_THROWS_AS(jConstant(SheafChern(Rational(1), h, Rational(0)), h),
                  std::domain_error);
}

TEST_CASE("J-stability of the vortex sub-line-bundle") {
  const VortexParams p(7, 3, Rational(11, 5));
  const SheafChern e = vortexChern(p).sheaf();
  const LatticeClass omega = vortexOmega(p);

  CHECK(jStabilityTest(e, e, omega) == Stability::Equality);

  const SheafChern s1 = vortexSubLineBundle(p);
  CHECK(jStabilityMargin(s1, e, omega) == Rational(32, 5));
  CHECK(jStabilityTest(s1, e, omega) == Stability::Strict);

  // Exactly at s = r1(r1+1)/(2 r2 (r2+1)) the margin vanishes.
  const VortexParams pb(7, 3, Rational(7, 3));
  CHECK(jStabilityTest(vortexSubLineBundle(pb), vortexChern(pb).sheaf(), vortexOmega(pb)) ==
        Stability::Equality);

  CHECK_THROWS_AS(jStabilityTest(SheafChern::zero(productLattice()), e, omega),
                  std::domain_error);
}

TEST_CASE("sub and quotient margins balance") {
  std::mt19937 rng(11);
  const SurfaceLattice& lat = productLattice();
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  for (int trial = 0; trial < 30; ++trial) {
    SheafChern e = randomSheaf(rng, lat);
    SheafChern s = randomSheaf(rng, lat, 2);
    if (s.rank >= e.rank) e.rank = s.rank + Rational(1);
    const SheafChern q = e - s;
    CHECK(jStabilityMargin(q, e, omega) == -jStabilityMargin(s, e, omega));
  }
}

TEST_CASE("twist polynomial") {
  const SurfaceLattice& lat = productLattice();
  const LatticeClass a = cls(lat, {Rational(1), Rational(0)});
  const LatticeClass ab = cls(lat, {Rational(1), Rational(1)});

  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const SheafChern s = randomSheaf(rng, lat);
    const SheafChern back = twist(s, ab).at(Rational(0));
    CHECK(back.rank == s.rank);
    CHECK(back.ch1 == s.ch1);
    CHECK(back.ch2 == s.ch2);
  }

  // rank 1, ch1 = 0, ch2 = 0, c1(L)^2 = 2: ch2(k) = k^2.
  const SheafChern trivial(Rational(1), LatticeClass::zero(lat), Rational(0));
  const TwistPolynomial tw = twist(trivial, ab);
  CHECK(tw.ch2_coeffs[0] == Rational(0));
  CHECK(tw.ch2_coeffs[1] == Rational(0));
  CHECK(tw.ch2_coeffs[2] == Rational(1));
  CHECK(tw.at(Rational(5)).ch2 == Rational(25));

  // Vortex bundle twisted along A: ch2(k) = 104 + 14 k.
  const VortexParams p(7, 3, Rational(11, 5));
  const TwistPolynomial tv = twist(vortexChern(p).sheaf(), a);
  CHECK(tv.ch2_coeffs[0] == Rational(104));
  CHECK(tv.ch2_coeffs[1] == Rational(14));
  CHECK(tv.ch2_coeffs[2] == Rational(0));
}

TEST_CASE("asymptotic slope expansion") {
  const SurfaceLattice& lat = productLattice();
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  const LatticeClass l = cls(lat, {Rational(1), Rational(1)});

  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const SheafChern s = randomSheaf(rng, lat);
    const AsymptoticSlope slope = asymptoticJSlope(s, omega, l);
    // Leading coefficient c1(L)^2 / (2 [omega].c1(L)) never depends on S.
    CHECK(slope.leading == Rational(1, 3));
    // Constant term mu_eta(S) / (2 ([omega].c1(L))^2).
    const LatticeClass eta = etaClass(omega, l);
    CHECK(slope.constant == mumfordSlope(s, eta) / Rational(18));
  }

  const SheafChern trivial(Rational(1), LatticeClass::zero(lat), Rational(0));
  CHECK(asymptoticJSlope(trivial, omega, l).constant == Rational(0));
}

TEST_CASE("c_k expansion matches the slope expansion") {
  // c_k = 1 / (2 phi_k(E)); its Laurent series in w = 1/k must start
  //   ([omega].L / L^2) w - (mu_eta(E) / (L^2)^2) w^2.
  const SurfaceLattice& lat = productLattice();
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  const LatticeClass l = cls(lat, {Rational(1), Rational(1)});

  std::mt19937 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const SheafChern e = randomSheaf(rng, lat);
    const AsymptoticSlope phi = asymptoticJSlope(e, omega, l);
    // c_k = d(k) / (2 n(k)) with n = sum n_i k^i, d = d0 + d1 k. In w = 1/k:
    // c = w (d1 + d0 w) / (2 (n2 + n1 w + n0 w^2)); series-divide exactly.
    const Rational n2 = phi.numerator[2], n1 = phi.numerator[1], n0 = phi.numerator[0];
    const Rational d1 = phi.denominator[1], d0 = phi.denominator[0];
    REQUIRE(n2 != Rational(0));
    // (d1 + d0 w) / (n2 + n1 w + ...) = q0 + q1 w + O(w^2)
    const Rational q0 = d1 / n2;
    const Rational q1 = (d0 - q0 * n1) / n2;
    const Rational a1 = q0 / Rational(2);       // coefficient of w
    const Rational a2 = q1 / Rational(2);       // coefficient of w^2

    CHECK(a1 == pair(omega, l) / selfPair(l));
    const LatticeClass eta = etaClass(omega, l);
    CHECK(a2 == -mumfordSlope(e, eta) / (selfPair(l) * selfPair(l)));
  }
}

TEST_CASE("asymptotic comparison verdicts and discrepancy orders") {
  const SurfaceLattice& lat = productLattice();
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  const LatticeClass l = cls(lat, {Rational(1), Rational(1)});
  const LatticeClass eta = etaClass(omega, l);

  const SheafChern e(Rational(2), cls(lat, {Rational(1), Rational(1)}), Rational(1));

  SUBCASE("identical data compare equal") {
    const AsymptoticComparison cmp = asymptoticCompare(e, e, omega, l);
    CHECK(cmp.verdict == AsymptoticVerdict::Equal);
    CHECK(cmp.discrepancy_order == AsymptoticComparison::infinitySentinel());
  }

  SUBCASE("strict Mumford inequality gives order zero") {
    const SheafChern s(Rational(1), LatticeClass::zero(lat), Rational(0));
    REQUIRE(mumfordSlope(s, eta) < mumfordSlope(e, eta));
    const AsymptoticComparison cmp = asymptoticCompare(s, e, omega, l);
    CHECK(cmp.verdict == AsymptoticVerdict::LeqLargeK);
    CHECK(cmp.discrepancy_order == 0);
  }

  SUBCASE("equal Mumford slopes push the discrepancy to higher order") {
    // mu_eta(S) = mu_eta(E) = 3 with eta = 2A + 4B.
    const SheafChern s(Rational(1), cls(lat, {Rational(0), Rational(3, 2)}), Rational(0));
    REQUIRE(mumfordSlope(s, eta) == mumfordSlope(e, eta));
    const AsymptoticComparison cmp = asymptoticCompare(s, e, omega, l);
    CHECK(cmp.discrepancy_order >= 2);
    CHECK(cmp.discrepancy_order % 2 == 0);
  }

  SUBCASE("randomized: verdict matches exact evaluation at large k, order even") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      const SheafChern s = randomSheaf(rng, lat);
      const SheafChern e2 = randomSheaf(rng, lat);
      const AsymptoticComparison cmp = asymptoticCompare(s, e2, omega, l);
      if (cmp.verdict == AsymptoticVerdict::Equal) continue;
      CHECK(cmp.discrepancy_order % 2 == 0);
      CHECK(cmp.discrepancy_order >= 0);
      const Rational k(1000000);
      const Rational diff = asymptoticJSlope(e2, omega, l).at(k) -
                            asymptoticJSlope(s, omega, l).at(k);
      if (cmp.verdict == AsymptoticVerdict::LeqLargeK)
        CHECK(diff > Rational(0));
      else
        CHECK(diff < Rational(0));
    }
  }
}

TEST_CASE("see-saw identity") {
  const SurfaceLattice& lat = productLattice();
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  const LatticeClass l = cls(lat, {Rational(1), Rational(1)});

  SUBCASE("zero subsheaf edge") {
    const SheafChern e(Rational(2), cls(lat, {Rational(1), Rational(2)}), Rational(3));
    CHECK(seeSawCheck(SheafChern::zero(lat), e, omega, l, {1000}));
  }

  SUBCASE("random pairs at k in {100, 1000}") {
    std::mt19937 rng(97);
    for (int trial = 0; trial < 20; ++trial) {
      SheafChern e = randomSheaf(rng, lat);
      SheafChern s = randomSheaf(rng, lat, 2);
      if (s.rank >= e.rank) e.rank = s.rank + Rational(1);
      CHECK(seeSawCheck(s, e, omega, l, {100, 1000}));
    }
  }
}

TEST_CASE("eta class and curve tests") {
  const SurfaceLattice& lat = productLattice();
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  const LatticeClass l = cls(lat, {Rational(1), Rational(1)});
  const LatticeClass a = cls(lat, {Rational(1), Rational(0)});
  const LatticeClass b = cls(lat, {Rational(0), Rational(1)});

  const LatticeClass eta = etaClass(omega, l);
  CHECK(eta.coeff(0) == Rational(2));
  CHECK(eta.coeff(1) == Rational(4));
  CHECK(pair(eta, a) == Rational(4));
  CHECK(pair(eta, b) == Rational(2));

  // omega proportional to c1(L): eta collapses to ([omega].c1(L)) c1(L).
  const LatticeClass omega3 = Rational(3) * l;
  const LatticeClass eta3 = etaClass(omega3, l);
  CHECK(eta3 == pair(omega3, l) * l);

  CHECK(curvePositivity(eta, {}).status == CurveTestStatus::Unverified);
  CHECK(curvePositivity(eta, {a, b}).status == CurveTestStatus::Verified);
  // A class pairing to zero fails the strict test.
  const LatticeClass null_curve = cls(lat, {Rational(1), Rational(-2)});
  REQUIRE(pair(eta, null_curve) == Rational(0));
  CHECK(curvePositivity(eta, {a, null_curve}).status == CurveTestStatus::Failed);
}

TEST_CASE("homogeneity in omega") {
  const SurfaceLattice& lat = productLattice();
  std::mt19937 rng(3);
  const LatticeClass omega = cls(lat, {Rational(2), Rational(1)});
  for (int trial = 0; trial < 20; ++trial) {
    const SheafChern e = randomSheaf(rng, lat);
    const SheafChern s = randomSheaf(rng, lat);
    const Rational lambda(1 + trial, 3);
    const LatticeClass omega_scaled = lambda * omega;
    if (e.ch2.sign() > 0)
      CHECK(jConstant(e, omega_scaled) == lambda * jConstant(e, omega));
    CHECK(jStabilityTest(s, e, omega_scaled) == jStabilityTest(s, e, omega));
  }
}

TEST_CASE("exactness under non-reduced input") {
  // The same value written with scaled numerator/denominator reduces to the
  // identical canonical form, so every downstream result coincides.
  const Rational a(229, 5);
  const Rational b(229 * 840, 5 * 840);
  CHECK(a == b);
  CHECK(b.str() == "229/5");
  CHECK(Rational::fromString("-14/-7").str() == "2");
  CHECK_THROWS_AS(Rational::fromString("7/0"), std::domain_error);
}
