#pragma once

#include "jflow/rational.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jflow {

using RationalMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;
using RationalVector = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;

/// The Neron-Severi-type pairing data of a compact surface: a named basis of
/// (1,1)-classes and its symmetric intersection matrix.
class SurfaceLattice {
 public:
  SurfaceLattice(std::vector<std::string> basis_names, RationalMatrix gram)
      : basis_names_(std::move(basis_names)), gram_(std::move(gram)) {
    const auto n = static_cast<Eigen::Index>(basis_names_.size());
    if (gram_.rows() != n || gram_.cols() != n)
      throw std::invalid_argument("SurfaceLattice: gram size does not match basis");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (gram_(i, j) != gram_(j, i))
          throw std::invalid_argument("SurfaceLattice: gram matrix must be symmetric");
  }

  /// Basis {A, B} with A.A = B.B = 0, A.B = 1 (a product of two curves).
  static SurfaceLattice product() {
    RationalMatrix g(2, 2);
    g << Rational(0), Rational(1), Rational(1), Rational(0);
    return SurfaceLattice({"A", "B"}, std::move(g));
  }

  /// Basis {H} with H.H = 1.
  static SurfaceLattice cp2() {
    RationalMatrix g(1, 1);
    g << Rational(1);
    return SurfaceLattice({"H"}, std::move(g));
  }

  Eigen::Index size() const { return gram_.rows(); }
  const std::vector<std::string>& basisNames() const { return basis_names_; }
  const RationalMatrix& gram() const { return gram_; }

  friend bool operator==(const SurfaceLattice& a, const SurfaceLattice& b) {
    return a.basis_names_ == b.basis_names_ && a.gram_ == b.gram_;
  }

 private:
  std::vector<std::string> basis_names_;
  RationalMatrix gram_;
};

/// An element of H^{1,1} expressed in the basis of a SurfaceLattice.
class LatticeClass {
 public:
  LatticeClass(const SurfaceLattice& lattice, RationalVector coeffs)
      : lattice_(&lattice), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != lattice.size())
      throw std::invalid_argument("LatticeClass: coefficient count does not match basis");
  }

  static LatticeClass zero(const SurfaceLattice& lattice) {
    return LatticeClass(lattice, RationalVector::Constant(lattice.size(), Rational(0)));
  }

  const SurfaceLattice& lattice() const { return *lattice_; }
  const RationalVector& coeffs() const { return coeffs_; }
  Rational coeff(Eigen::Index i) const { return coeffs_(i); }

  LatticeClass& operator+=(const LatticeClass& o) {
    requireSameLattice(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  LatticeClass& operator-=(const LatticeClass& o) {
    requireSameLattice(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  LatticeClass& operator*=(const Rational& s) {
    coeffs_ *= s;
    return *this;
  }
  friend LatticeClass operator+(LatticeClass a, const LatticeClass& b) { return a += b; }
  friend LatticeClass operator-(LatticeClass a, const LatticeClass& b) { return a -= b; }
  friend LatticeClass operator*(const Rational& s, LatticeClass a) { return a *= s; }
  LatticeClass operator-() const { return Rational(-1) * (*this); }

  friend bool operator==(const LatticeClass& a, const LatticeClass& b) {
    return a.lattice_ == b.lattice_ && a.coeffs_ == b.coeffs_;
  }

  void requireSameLattice(const LatticeClass& o) const {
    if (lattice_ != o.lattice_ && !(*lattice_ == *o.lattice_))
      throw std::invalid_argument("LatticeClass: classes live on different lattices");
  }

 private:
  const SurfaceLattice* lattice_;
  RationalVector coeffs_;
};

/// Exact cup product a.b through the intersection form.
inline Rational pair(const LatticeClass& a, const LatticeClass& b) {
  a.requireSameLattice(b);
  return (a.coeffs().transpose() * a.lattice().gram() * b.coeffs())(0, 0);
}

/// Self-intersection a.a.
inline Rational selfPair(const LatticeClass& a) { return pair(a, a); }

/// Discrete invariants (ch0, ch1, ch2) of a coherent sheaf on a surface.
struct SheafChern {
  Rational rank;
  LatticeClass ch1;
  Rational ch2;

  SheafChern(Rational rank_in, LatticeClass ch1_in, Rational ch2_in)
      : rank(std::move(rank_in)), ch1(std::move(ch1_in)), ch2(std::move(ch2_in)) {
    if (rank.sign() < 0) throw std::invalid_argument("SheafChern: negative rank");
  }

  static SheafChern zero(const SurfaceLattice& lattice) {
    return SheafChern(Rational(0), LatticeClass::zero(lattice), Rational(0));
  }

  /// Line bundle with first Chern class c1: ch = (1, c1, c1^2/2).
  static SheafChern lineBundle(const LatticeClass& c1) {
    return SheafChern(Rational(1), c1, selfPair(c1) / Rational(2));
  }

  bool isZero() const { return rank.isZero() && ch2.isZero() && ch1.coeffs().isZero(); }

  friend SheafChern operator+(const SheafChern& a, const SheafChern& b) {
    return SheafChern(a.rank + b.rank, a.ch1 + b.ch1, a.ch2 + b.ch2);
  }
  /// Chern data of the quotient in 0 -> S -> E -> Q -> 0, computed purely at
  /// the level of Chern characters.
  friend SheafChern operator-(const SheafChern& a, const SheafChern& b) {
    return SheafChern(a.rank - b.rank, a.ch1 - b.ch1, a.ch2 - b.ch2);
  }
};

/// (ch2 > 0, [omega].ch1 > 0), evaluated exactly.
inline std::pair<bool, bool> positivityCheck(const SheafChern& e, const LatticeClass& omega) {
  return {e.ch2.sign() > 0, pair(omega, e.ch1).sign() > 0};
}

/// The constant of the surface J-equation, ([omega].ch1) / (2 ch2).
inline Rational jConstant(const SheafChern& e, const LatticeClass& omega) {
  if (e.ch2.sign() <= 0) throw std::domain_error("jConstant: ch2 must be positive");
  return pair(omega, e.ch1) / (Rational(2) * e.ch2);
}

enum class Stability { Strict, Equality, Violated };

inline std::string nameOf(Stability s) {
  switch (s) {
    case Stability::Strict: return "STRICT";
    case Stability::Equality: return "EQUALITY";
    case Stability::Violated: return "VIOLATED";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, Stability v) { return os << nameOf(v); }

/// Signed margin ([omega].ch1(S)) ch2(E) - ch2(S) ([omega].ch1(E)); the
/// subsheaf inequality holds strictly iff this is positive.
inline Rational jStabilityMargin(const SheafChern& sub, const SheafChern& amb,
                                 const LatticeClass& omega) {
  return pair(omega, sub.ch1) * amb.ch2 - sub.ch2 * pair(omega, amb.ch1);
}

inline Stability jStabilityTest(const SheafChern& sub, const SheafChern& amb,
                                const LatticeClass& omega) {
  if (sub.rank.sign() <= 0) throw std::domain_error("jStabilityTest: rank S must be positive");
  const int s = jStabilityMargin(sub, amb, omega).sign();
  if (s > 0) return Stability::Strict;
  if (s == 0) return Stability::Equality;
  return Stability::Violated;
}

/// Chern data of S (x) L^k as polynomials in the twist degree k.
struct TwistPolynomial {
  Rational rank;
  // ch1(k) = ch1_coeffs[0] + k * ch1_coeffs[1]
  std::array<LatticeClass, 2> ch1_coeffs;
  // ch2(k) = ch2_coeffs[0] + k * ch2_coeffs[1] + k^2 * ch2_coeffs[2]
  std::array<Rational, 3> ch2_coeffs;

  SheafChern at(const Rational& k) const {
    return SheafChern(rank, ch1_coeffs[0] + k * ch1_coeffs[1],
                      ch2_coeffs[0] + k * ch2_coeffs[1] + k * k * ch2_coeffs[2]);
  }
};

inline TwistPolynomial twist(const SheafChern& s, const LatticeClass& l) {
  return TwistPolynomial{
      s.rank,
      {s.ch1, s.rank * l},
      {s.ch2, pair(s.ch1, l), s.rank * selfPair(l) / Rational(2)}};
}

/// The slope ch2(S (x) L^k) / ([omega].ch1(S (x) L^k)) as an exact ratio of
/// polynomials in k, with the two leading coefficients of its expansion at
/// k -> infinity.
struct AsymptoticSlope {
  // numerator[i] multiplies k^i, denominator[i] multiplies k^i.
  std::array<Rational, 3> numerator;
  std::array<Rational, 2> denominator;
  Rational leading;   // coefficient of k
  Rational constant;  // k^0 term

  Rational at(const Rational& k) const {
    const Rational den = denominator[0] + k * denominator[1];
    if (den.isZero()) throw std::domain_error("AsymptoticSlope: zero denominator");
    return (numerator[0] + k * numerator[1] + k * k * numerator[2]) / den;
  }
};

inline AsymptoticSlope asymptoticJSlope(const SheafChern& s, const LatticeClass& omega,
                                        const LatticeClass& l) {
  if (pair(omega, l).sign() <= 0)
    throw std::domain_error("asymptoticJSlope: [omega].c1(L) must be positive");
  if (selfPair(l).sign() <= 0)
    throw std::domain_error("asymptoticJSlope: c1(L)^2 must be positive");
  if (s.rank.sign() <= 0) throw std::domain_error("asymptoticJSlope: rank must be positive");

  const TwistPolynomial tw = twist(s, l);
  AsymptoticSlope out{
      {tw.ch2_coeffs[0], tw.ch2_coeffs[1], tw.ch2_coeffs[2]},
      {pair(omega, tw.ch1_coeffs[0]), pair(omega, tw.ch1_coeffs[1])},
      Rational(0),
      Rational(0)};
  if (out.denominator[0].isZero() && out.denominator[1].isZero())
    throw std::domain_error("asymptoticJSlope: denominator identically zero");
  const Rational& d1 = out.denominator[1];
  out.leading = out.numerator[2] / d1;
  out.constant = (out.numerator[1] * d1 - out.numerator[2] * out.denominator[0]) / (d1 * d1);
  return out;
}

/// The auxiliary Kaehler class 2([omega].c1(L)) c1(L) - c1(L)^2 [omega].
inline LatticeClass etaClass(const LatticeClass& omega, const LatticeClass& l) {
  if (pair(omega, l).sign() <= 0)
    throw std::domain_error("etaClass: [omega].c1(L) must be positive");
  return Rational(2) * pair(omega, l) * l - selfPair(l) * omega;
}

enum class CurveTestStatus { Verified, Unverified, Failed };

struct CurveTestReport {
  CurveTestStatus status = CurveTestStatus::Unverified;
  std::vector<Rational> pairings;  // eta.Y per supplied curve class
};

/// Strict positivity of eta against each user-supplied curve class. An empty
/// list cannot certify anything and is reported as Unverified.
inline CurveTestReport curvePositivity(const LatticeClass& eta,
                                       const std::vector<LatticeClass>& curves) {
  CurveTestReport report;
  if (curves.empty()) return report;
  report.status = CurveTestStatus::Verified;
  for (const auto& y : curves) {
    report.pairings.push_back(pair(eta, y));
    if (report.pairings.back().sign() <= 0) report.status = CurveTestStatus::Failed;
  }
  return report;
}

/// Mumford slope c1(S).[eta] / rank S.
inline Rational mumfordSlope(const SheafChern& s, const LatticeClass& eta) {
  if (s.rank.sign() <= 0) throw std::domain_error("mumfordSlope: rank must be positive");
  return pair(s.ch1, eta) / s.rank;
}

enum class AsymptoticVerdict { LeqLargeK, GtLargeK, Equal };

inline std::string nameOf(AsymptoticVerdict v) {
  switch (v) {
    case AsymptoticVerdict::LeqLargeK: return "LEQ_LARGE_K";
    case AsymptoticVerdict::GtLargeK: return "GT_LARGE_K";
    case AsymptoticVerdict::Equal: return "EQUAL";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, AsymptoticVerdict v) { return os << nameOf(v); }

struct AsymptoticComparison {
  AsymptoticVerdict verdict = AsymptoticVerdict::Equal;
  // Leading power of eps (eps^2 = 1/k) in phi_k(E) - phi_k(S); even and >= 0
  // when finite, infinitySentinel() when the difference vanishes identically.
  int discrepancy_order = infinitySentinel();
  static constexpr int infinitySentinel() { return std::numeric_limits<int>::max(); }
};

/// Decides the sign of phi_k(E) - phi_k(S) for all large k by comparing the
/// coefficients of the cross-multiplied difference from the top down.
inline AsymptoticComparison asymptoticCompare(const SheafChern& s, const SheafChern& e,
                                              const LatticeClass& omega,
                                              const LatticeClass& l) {
  if (s.rank.sign() <= 0 || e.rank.sign() <= 0)
    throw std::domain_error("asymptoticCompare: ranks must be positive");
  const AsymptoticSlope ps = asymptoticJSlope(s, omega, l);
  const AsymptoticSlope pe = asymptoticJSlope(e, omega, l);

  // delta[d] = coefficient of k^d in numer(E) denom(S) - numer(S) denom(E).
  std::array<Rational, 4> delta{Rational(0), Rational(0), Rational(0), Rational(0)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      delta[i + j] += pe.numerator[i] * ps.denominator[j];
      delta[i + j] -= ps.numerator[i] * pe.denominator[j];
    }
  // The k^3 coefficient cancels for every S: the leading slope term is
  // c1(L)^2 / (2 [omega].c1(L)) independently of the sheaf.
  if (!delta[3].isZero())
    throw std::logic_error("asymptoticCompare: cubic coefficient must vanish");

  AsymptoticComparison out;
  for (int d = 2; d >= 0; --d) {
    if (!delta[d].isZero()) {
      out.verdict = delta[d].sign() > 0 ? AsymptoticVerdict::LeqLargeK
                                        : AsymptoticVerdict::GtLargeK;
      out.discrepancy_order = 2 * (2 - d);
      return out;
    }
  }
  return out;  // identically equal
}

/// Exact see-saw identity at one twist degree k:
///   ([w].ch1(S_k)) (phi_k(E) - phi_k(S)) + ([w].ch1(Q_k)) (phi_k(E) - phi_k(Q)) = 0
/// with Q = E - S. Each term is evaluated without forming phi of a possibly
/// zero sheaf. Throws if a needed denominator is nonpositive, naming k.
inline bool seeSawCheckAt(const SheafChern& s, const SheafChern& e, const LatticeClass& omega,
                          const LatticeClass& l, long long k) {
  const SheafChern q = e - s;
  const Rational kk(k);
  const SheafChern ek = twist(e, l).at(kk);
  const Rational de = pair(omega, ek.ch1);
  if (de.sign() <= 0)
    throw std::domain_error("seeSawCheck: nonpositive denominator for E at k = " +
                            std::to_string(k));
  const Rational phi_e = ek.ch2 / de;

  auto term = [&](const SheafChern& x) -> Rational {
    if (x.isZero()) return Rational(0);
    const SheafChern xk = twist(x, l).at(kk);
    const Rational dx = pair(omega, xk.ch1);
    if (!x.rank.isZero() && dx.sign() <= 0)
      throw std::domain_error("seeSawCheck: nonpositive denominator at k = " +
                              std::to_string(k));
    return dx * phi_e - xk.ch2;
  };
  return (term(s) + term(q)).isZero();
}

inline bool seeSawCheck(const SheafChern& s, const SheafChern& e, const LatticeClass& omega,
                        const LatticeClass& l, const std::vector<long long>& k_samples) {
  for (long long k : k_samples)
    if (!seeSawCheckAt(s, e, omega, l, k)) return false;
  return true;
}

}  // namespace jflow
