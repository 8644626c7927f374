#pragma once

#include "jflow/lattice.hpp"
#include "jflow/rational.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

namespace jflow {

/// Shared intersection lattice of Sigma x CP^1: A = fiber class of L-side,
/// B = fiber class of the CP^1 factor, A.B = 1.
inline const SurfaceLattice& productLattice() {
  static const SurfaceLattice lattice = SurfaceLattice::product();
  return lattice;
}

inline const SurfaceLattice& cp2Lattice() {
  static const SurfaceLattice lattice = SurfaceLattice::cp2();
  return lattice;
}

/// kappa^3 - 2 kappa^2 - 28 kappa - 72, exactly.
inline Rational kappaCubic(const Rational& k) {
  return ((k - Rational(2)) * k - Rational(28)) * k - Rational(72);
}

inline double kappaCubic(double k) { return ((k - 2.0) * k - 28.0) * k - 72.0; }

/// Certified rational enclosure [lo, hi] of the unique positive root of the
/// cubic, from exact bisection on [7, 8]; width 2^-bits.
struct KappaEnclosure {
  Rational lo;
  Rational hi;
};

inline KappaEnclosure kappaEnclosure(int bits = 64) {
  Rational lo(7), hi(8);
  for (int i = 0; i < bits; ++i) {
    const Rational mid = (lo + hi) / Rational(2);
    if (kappaCubic(mid).sign() < 0)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

/// Positive root of the cubic via bracketed bisection plus Newton polish.
inline double kappaRoot() {
  double lo = 7.0, hi = 8.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kappaCubic(mid) < 0.0 ? lo : hi) = mid;
  }
  double k = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    const double dp = (3.0 * k - 4.0) * k - 28.0;
    k -= kappaCubic(k) / dp;
  }
  return k;
}

/// Closed radical form of the same root; used as a cross-check.
inline double kappaRadical() {
  const double s3 = std::sqrt(3.0);
  return (2.0 + std::cbrt(1232.0 - 528.0 * s3) + 2.0 * std::cbrt(22.0 * (7.0 + 3.0 * s3))) / 3.0;
}

struct VortexParams {
  long long r1;
  long long r2;
  Rational s;

  VortexParams(long long r1_in, long long r2_in, Rational s_in)
      : r1(r1_in), r2(r2_in), s(std::move(s_in)) {
    if (r1 < 1 || r2 < 1) throw std::domain_error("VortexParams: r1, r2 must be >= 1");
    if (s.sign() <= 0) throw std::domain_error("VortexParams: s must be positive");
  }
};

/// Exact Chern data of the rank-2 vortex bundle for given (r1, r2, s).
struct VortexChern {
  LatticeClass ch1;      // (2 r1 + 1) A + 2 (2 r2 + 1) B
  Rational omega_ch1;    // 2 r1 + 1 + 2 s (2 r2 + 1)
  Rational ch2;          // 2 (r1 + 1) r2 + 2 r1 (r2 + 1)
  Rational c;            // omega_ch1 / (2 ch2)

  SheafChern sheaf() const { return SheafChern(Rational(2), ch1, ch2); }
};

inline LatticeClass vortexOmega(const VortexParams& p) {
  RationalVector w(2);
  w << p.s, Rational(1);
  return LatticeClass(productLattice(), std::move(w));
}

inline VortexChern vortexChern(const VortexParams& p) {
  const Rational r1(p.r1), r2(p.r2);
  RationalVector c1(2);
  c1 << Rational(2) * r1 + Rational(1), Rational(2) * (Rational(2) * r2 + Rational(1));
  VortexChern out{LatticeClass(productLattice(), std::move(c1)),
                  Rational(2) * r1 + Rational(1) + Rational(2) * p.s * (Rational(2) * r2 + Rational(1)),
                  Rational(2) * (r1 + Rational(1)) * r2 + Rational(2) * r1 * (r2 + Rational(1)),
                  Rational(0)};
  out.c = out.omega_ch1 / (Rational(2) * out.ch2);
  if (out.omega_ch1.sign() <= 0 || out.ch2.sign() <= 0 || out.c.sign() <= 0)
    throw std::logic_error("vortexChern: positivity of Chern data failed");
  if (pair(vortexOmega(p), out.ch1) != out.omega_ch1)
    throw std::logic_error("vortexChern: lattice pairing inconsistency");
  return out;
}

/// Chern data of the distinguished sub-line-bundle of the vortex extension.
inline SheafChern vortexSubLineBundle(const VortexParams& p) {
  RationalVector c1(2);
  c1 << Rational(p.r1 + 1), Rational(2 * p.r2);
  return SheafChern::lineBundle(LatticeClass(productLattice(), std::move(c1)));
}

/// The s-interval of admissible vortex parameters. The upper endpoint is
/// rational; the lower endpoint depends on the irrational kappa root and is
/// carried as a certified rational enclosure.
struct AdmissibleWindow {
  bool empty = false;
  Rational lower_lo;
  Rational lower_hi;
  Rational upper;

  double lower() const { return ((lower_lo + lower_hi) / Rational(2)).toDouble(); }
  double enclosureWidth() const { return (lower_hi - lower_lo).toDouble(); }
};

inline Rational windowLowerAt(long long r1, long long r2, const Rational& kappa) {
  const Rational num = (Rational(2 * r1) + Rational(1)) * kappa + Rational(4 * r1);
  const Rational den =
      Rational(2) * (Rational(4 * r2) - kappa) * (Rational(2 * r2) + Rational(1));
  return num / den;
}

inline Rational windowUpper(long long r1, long long r2) {
  return Rational(r1) * Rational(r1 + 1) / (Rational(2) * Rational(r2) * Rational(r2 + 1));
}

inline AdmissibleWindow admissibleWindow(long long r1, long long r2, int bits = 64) {
  if (r2 < 2)
    throw std::domain_error(
        "admissibleWindow: the admissibility criterion requires r2 >= 2");
  KappaEnclosure k = kappaEnclosure(bits);
  AdmissibleWindow w;
  w.upper = windowUpper(r1, r2);
  // The lower endpoint is increasing in kappa (numerator grows, denominator
  // shrinks), so the enclosure maps monotonically.
  w.lower_lo = windowLowerAt(r1, r2, k.lo);
  w.lower_hi = windowLowerAt(r1, r2, k.hi);
  // Refine until emptiness is decided; the endpoints can never coincide
  // exactly because the lower one is irrational.
  int extra = bits;
  while (w.lower_lo < w.upper && w.upper <= w.lower_hi && extra < 1024) {
    extra *= 2;
    k = kappaEnclosure(extra);
    w.lower_lo = windowLowerAt(r1, r2, k.lo);
    w.lower_hi = windowLowerAt(r1, r2, k.hi);
  }
  w.empty = (w.upper <= w.lower_lo);
  return w;
}

enum class TriState { Yes, No, Undecided };

inline std::string nameOf(TriState t) {
  switch (t) {
    case TriState::Yes: return "YES";
    case TriState::No: return "NO";
    case TriState::Undecided: return "UNDECIDED";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, TriState v) { return os << nameOf(v); }

/// Is s strictly inside the admissible window? Three-valued so that points
/// indistinguishable from the irrational boundary at the working enclosure
/// width are never silently classified.
inline TriState insideWindow(const VortexParams& p, int bits = 64) {
  const AdmissibleWindow w = admissibleWindow(p.r1, p.r2, bits);
  if (w.empty) return TriState::No;
  if (p.s >= w.upper) return TriState::No;
  if (p.s > w.lower_hi) return TriState::Yes;
  if (p.s <= w.lower_lo) return TriState::No;
  // s sits inside the current enclosure of the lower endpoint; refine.
  for (int b = bits * 2; b <= 1024; b *= 2) {
    const KappaEnclosure k = kappaEnclosure(b);
    if (p.s > windowLowerAt(p.r1, p.r2, k.hi)) return TriState::Yes;
    if (p.s <= windowLowerAt(p.r1, p.r2, k.lo)) return TriState::No;
  }
  return TriState::Undecided;
}

struct AlphaReport {
  Rational alpha;       // 2 s / ((4 c r2 - 1 + 4 c)(4 c r2 - 1)), exact
  bool alpha_defined;   // false exactly at the pole (4 c r2 - 1)(...) = 0
  bool alpha_gt_1;
  Rational root_low;    // -1 / (2 (2 r2 + 1)^2)
  Rational root_high;   // r1 (r1 + 1) / (2 r2 (r2 + 1))
  bool routes_agree;
};

/// Direct evaluation of alpha against the root interval of the quadratic
/// G(s). The root criterion characterizes alpha > 1 on the branch where the
/// denominator (4 c r2 - 1 + 4 c)(4 c r2 - 1) is positive (automatic in the
/// admissible window); the branch sign is carried alongside the interval
/// test so the two routes are comparable for every parameter choice.
inline AlphaReport alphaCheck(const VortexParams& p) {
  const VortexChern vc = vortexChern(p);
  const Rational& c = vc.c;
  const Rational i0 = Rational(4) * c * Rational(p.r2) - Rational(1);
  const Rational k0 = i0 + Rational(4) * c;
  const Rational denom = k0 * i0;

  AlphaReport rep{Rational(0), !denom.isZero(), false, Rational(0), Rational(0), false};
  if (rep.alpha_defined) {
    rep.alpha = Rational(2) * p.s / denom;
    rep.alpha_gt_1 = rep.alpha > Rational(1);
  }
  const Rational tp1 = Rational(2 * p.r2) + Rational(1);
  rep.root_low = Rational(-1) / (Rational(2) * tp1 * tp1);
  rep.root_high = windowUpper(p.r1, p.r2);
  const bool by_roots =
      denom.sign() > 0 && (rep.root_low < p.s) && (p.s < rep.root_high);
  rep.routes_agree = (rep.alpha_gt_1 == by_roots);
  return rep;
}

struct KappaConditionReport {
  bool holds;          // 4 c r2 - 1 > kappa0 c
  bool routes_agree;   // agrees with s > (window lower bound)
};

inline KappaConditionReport kappaCondition(const VortexParams& p, int bits = 64) {
  const VortexChern vc = vortexChern(p);
  const Rational& c = vc.c;
  const Rational base = Rational(4) * c * Rational(p.r2) - Rational(1);

  auto decide = [&](const KappaEnclosure& k) -> std::optional<bool> {
    // f(kappa) = 4 c r2 - 1 - kappa c is decreasing in kappa.
    if ((base - k.hi * c).sign() > 0) return true;
    if ((base - k.lo * c).sign() <= 0) return false;
    return std::nullopt;
  };

  std::optional<bool> holds = decide(kappaEnclosure(bits));
  for (int b = bits * 2; !holds && b <= 1024; b *= 2) holds = decide(kappaEnclosure(b));
  if (!holds)
    throw std::logic_error("kappaCondition: could not separate s from the boundary");

  // Independent route: compare s with the lower window endpoint directly.
  std::optional<bool> by_window;
  for (int b = bits; !by_window && b <= 1024; b *= 2) {
    const KappaEnclosure k = kappaEnclosure(b);
    if (p.s > windowLowerAt(p.r1, p.r2, k.hi))
      by_window = true;
    else if (p.s <= windowLowerAt(p.r1, p.r2, k.lo))
      by_window = false;
  }
  return {*holds, by_window && *by_window == *holds};
}

struct GriffithClassReport {
  Rational coeff_sigma;  // 4 r1^2 + 4 r1 + 2 s + 1
  Rational coeff_fiber;  // 2 (8 r2^2 s + 8 r2 s + 2 s + 1)
  bool positive;
};

/// Coefficients of (2 ch2)(c c1(E) - [omega]) on the product basis; both are
/// positive for every choice of parameters.
inline GriffithClassReport griffithClassPositivity(const VortexParams& p) {
  const Rational r1(p.r1), r2(p.r2), s = p.s;
  GriffithClassReport rep{
      Rational(4) * r1 * r1 + Rational(4) * r1 + Rational(2) * s + Rational(1),
      Rational(2) * (Rational(8) * r2 * r2 * s + Rational(8) * r2 * s + Rational(2) * s +
                     Rational(1)),
      false};
  rep.positive = rep.coeff_sigma.sign() > 0 && rep.coeff_fiber.sign() > 0;

  // Independent route through the lattice calculus.
  const VortexChern vc = vortexChern(p);
  const LatticeClass lhs =
      Rational(2) * vc.ch2 * (vc.c * vc.ch1 - vortexOmega(p));
  if (lhs.coeff(0) != rep.coeff_sigma || lhs.coeff(1) != rep.coeff_fiber)
    throw std::logic_error("griffithClassPositivity: coefficient routes disagree");
  return rep;
}

/// Smallest r1 with a nonempty window at this r2, scanning r1 = 1..limit.
inline std::optional<long long> smallestNonemptyR1(long long r2, long long limit) {
  for (long long r1 = 1; r1 <= limit; ++r1)
    if (!admissibleWindow(r1, r2).empty) return r1;
  return std::nullopt;
}

/// Independent emptiness oracle: the window is nonempty iff the kappa
/// condition 4 c r2 - 1 > kappa0 c holds at s = upper endpoint.
inline std::optional<long long> smallestNonemptyR1ByKappa(long long r2, long long limit) {
  if (r2 < 2) throw std::domain_error("smallestNonemptyR1ByKappa: r2 >= 2 required");
  for (long long r1 = 1; r1 <= limit; ++r1) {
    const VortexParams p(r1, r2, windowUpper(r1, r2));
    if (kappaCondition(p).holds) return r1;
  }
  return std::nullopt;
}

}  // namespace jflow
