#pragma once

#include "jflow/rational.hpp"

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace jflow {

/// Curvature of the Fubini-Study metric on T'CP^n at the center of the
/// standard chart: F[a][b][i][j] is the coefficient of (i/2pi) dz^i dz~^j in
/// the (a,b) endomorphism block. Closed form: delta_ij delta_ab + delta_ia delta_jb.
struct CurvatureTensor {
  int n;
  // indexed [a][b][i][j], all 0-based
  std::vector<Rational> data;

  explicit CurvatureTensor(int n_in) : n(n_in), data(n * n * n * n, Rational(0)) {}

  Rational& at(int a, int b, int i, int j) { return data[((a * n + b) * n + i) * n + j]; }
  const Rational& at(int a, int b, int i, int j) const {
    return data[((a * n + b) * n + i) * n + j];
  }
};

inline CurvatureTensor fsCurvature(int n) {
  if (n < 1 || n > 4) throw std::domain_error("fsCurvature: n must be in 1..4");
  CurvatureTensor f(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Rational v(0);
          if (i == j && a == b) v += Rational(1);
          if (i == a && j == b) v += Rational(1);
          f.at(a, b, i, j) = v;
        }
  return f;
}

namespace detail {

/// Sign of merging two disjoint ascending index sets (concatenation vs sorted).
inline int shuffleSign(unsigned m1, unsigned m2) {
  int inversions = 0;
  for (unsigned b = 0; b < 8; ++b)
    if (m2 & (1u << b)) inversions += std::popcount(m1 >> (b + 1));
  return (inversions % 2 == 0) ? 1 : -1;
}

}  // namespace detail

/// Matrix-valued (p,p)-form at a point with exact coefficients. The basis
/// element for index subsets (I, J) is (i/2pi)^p dz^I wedge dz~^J with both
/// subsets ascending; products carry the shuffle signs.
struct MatrixFormPoly {
  int n = 0;       // ambient dimension
  int degree = 0;  // p
  int rank = 0;    // matrix size
  // entries[a*rank+b] maps (maskI, maskJ) -> coefficient
  std::vector<std::map<std::pair<unsigned, unsigned>, Rational>> entries;

  MatrixFormPoly(int n_in, int degree_in, int rank_in)
      : n(n_in), degree(degree_in), rank(rank_in), entries(rank_in * rank_in) {}

  static MatrixFormPoly identity(int n, int rank) {
    MatrixFormPoly out(n, 0, rank);
    for (int a = 0; a < rank; ++a) out.entry(a, a)[{0u, 0u}] = Rational(1);
    return out;
  }

  std::map<std::pair<unsigned, unsigned>, Rational>& entry(int a, int b) {
    return entries[a * rank + b];
  }
  const std::map<std::pair<unsigned, unsigned>, Rational>& entry(int a, int b) const {
    return entries[a * rank + b];
  }

  void addTerm(int a, int b, unsigned mi, unsigned mj, const Rational& v) {
    if (v.isZero()) return;
    auto& slot = entry(a, b)[{mi, mj}];
    slot += v;
    if (slot.isZero()) entry(a, b).erase({mi, mj});
  }

  bool isZero() const {
    for (const auto& e : entries)
      for (const auto& [k, v] : e)
        if (!v.isZero()) return false;
    return true;
  }
};

/// omega_FS Id as a matrix-valued (1,1)-form.
inline MatrixFormPoly omegaForm(int n, int rank) {
  MatrixFormPoly out(n, 1, rank);
  for (int a = 0; a < rank; ++a)
    for (int i = 0; i < n; ++i) out.addTerm(a, a, 1u << i, 1u << i, Rational(1));
  return out;
}

inline MatrixFormPoly curvatureForm(const CurvatureTensor& f) {
  MatrixFormPoly out(f.n, 1, f.n);
  for (int a = 0; a < f.n; ++a)
    for (int b = 0; b < f.n; ++b)
      for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
          out.addTerm(a, b, 1u << i, 1u << j, f.at(a, b, i, j));
  return out;
}

/// Exterior product combined with the matrix product, exact signs from
/// subset shuffles and the (-1)^{p q} crossing of dz~ past dz blocks.
inline MatrixFormPoly wedge(const MatrixFormPoly& lhs, const MatrixFormPoly& rhs) {
  if (lhs.n != rhs.n || lhs.rank != rhs.rank)
    throw std::invalid_argument("wedge: incompatible operands");
  if (lhs.degree + rhs.degree > lhs.n) throw std::domain_error("wedge: degree overflow");
  MatrixFormPoly out(lhs.n, lhs.degree + rhs.degree, lhs.rank);
  const int cross = (lhs.degree * rhs.degree) % 2 == 0 ? 1 : -1;
  for (int a = 0; a < lhs.rank; ++a)
    for (int b = 0; b < lhs.rank; ++b)
      for (int g = 0; g < lhs.rank; ++g) {
        const auto& left = lhs.entry(a, b);
        const auto& right = rhs.entry(b, g);
        for (const auto& [km1, v1] : left)
          for (const auto& [km2, v2] : right) {
            if ((km1.first & km2.first) || (km1.second & km2.second)) continue;
            const int sign = cross * detail::shuffleSign(km1.first, km2.first) *
                             detail::shuffleSign(km1.second, km2.second);
            out.addTerm(a, g, km1.first | km2.first, km1.second | km2.second,
                        Rational(sign) * v1 * v2);
          }
      }
  return out;
}

inline MatrixFormPoly wedgePower(const MatrixFormPoly& f, int k) {
  if (k < 1) throw std::invalid_argument("wedgePower: k must be >= 1");
  MatrixFormPoly out = f;
  for (int i = 1; i < k; ++i) out = wedge(out, f);
  return out;
}

inline MatrixFormPoly scale(MatrixFormPoly f, const Rational& s) {
  for (auto& e : f.entries)
    for (auto& [k, v] : e) v *= s;
  return f;
}

inline MatrixFormPoly subtract(const MatrixFormPoly& a, const MatrixFormPoly& b) {
  if (a.n != b.n || a.rank != b.rank || a.degree != b.degree)
    throw std::invalid_argument("subtract: incompatible forms");
  MatrixFormPoly out = a;
  for (int i = 0; i < b.rank * b.rank; ++i)
    for (const auto& [k, v] : b.entries[i]) {
      auto& slot = out.entries[i][k];
      slot -= v;
      if (slot.isZero()) out.entries[i].erase(k);
    }
  return out;
}

/// ch_k data of T'CP^n from c_k = binom(n+1, k) H^k via Newton's identities
/// in Q[H]/(H^{n+1}).
struct ChernInvariants {
  Rational n_ch_n;          // n ch_n
  Rational omega_ch_nm1;    // [omega_FS] . ch_{n-1}
  std::vector<Rational> ch; // ch_0 .. ch_n as coefficients of H^k
};

inline ChernInvariants chernInvariants(int n) {
  if (n < 1) throw std::domain_error("chernInvariants: n must be >= 1");
  // Elementary symmetric functions e_k = binom(n+1, k), power sums via Newton.
  std::vector<Rational> e(n + 1, Rational(0)), p(n + 1, Rational(0));
  for (int k = 0; k <= n; ++k) {
    Rational binom(1);
    for (int i = 0; i < k; ++i) binom = binom * Rational(n + 1 - i) / Rational(i + 1);
    e[k] = binom;
  }
  for (int k = 1; k <= n; ++k) {
    Rational acc = Rational(k % 2 == 0 ? -k : k) * e[k];
    for (int i = 1; i < k; ++i) {
      const Rational term = e[i] * p[k - i];
      acc += (i % 2 == 1) ? term : -term;
    }
    p[k] = acc;
  }
  ChernInvariants out{Rational(0), Rational(0), {}};
  out.ch.resize(n + 1);
  out.ch[0] = Rational(n);  // rank
  Rational fact(1);
  for (int k = 1; k <= n; ++k) {
    fact *= Rational(k);
    out.ch[k] = p[k] / fact;
  }
  out.n_ch_n = Rational(n) * out.ch[n];
  out.omega_ch_nm1 = out.ch[n - 1];  // times integral of H^n = 1
  return out;
}

struct JResidualReport {
  bool residual_zero = false;
  Rational constant;      // the cohomological constant used
  Rational factor;        // F^n top coefficient over omega^n, per diagonal entry
  bool both_sides_factor; // F^n and omega Id F^{n-1} both equal factor * omega^n * delta
  MatrixFormPoly residual;
};

/// Exact check that the Fubini-Study metric solves the J-equation on T'CP^n:
/// c F^n - omega Id F^{n-1} = 0 with the cohomological constant c.
inline JResidualReport jResidual(int n) {
  const MatrixFormPoly f = curvatureForm(fsCurvature(n));
  const MatrixFormPoly omega = omegaForm(n, n);
  const MatrixFormPoly fn = wedgePower(f, n);
  const MatrixFormPoly rhs = n == 1 ? omega : wedge(omega, wedgePower(f, n - 1));

  const ChernInvariants inv = chernInvariants(n);
  JResidualReport rep{false, inv.omega_ch_nm1 / inv.n_ch_n, Rational(0), true,
                      subtract(scale(fn, inv.omega_ch_nm1 / inv.n_ch_n), rhs)};
  rep.residual_zero = rep.residual.isZero();

  // Both sides against (1 + 1/n) omega^n delta_ab (the omega-side only
  // carries the factor for n >= 2; at n = 1 it is omega itself).
  const MatrixFormPoly omega_n = n == 1 ? omega : wedgePower(omega, n);
  const unsigned full = (1u << n) - 1u;
  const auto top_it = omega_n.entry(0, 0).find({full, full});
  if (top_it == omega_n.entry(0, 0).end())
    throw std::logic_error("jResidual: omega^n has no top coefficient");
  const Rational omega_top = top_it->second;
  const Rational expected = Rational(n + 1) / Rational(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Rational fn_c(0), rhs_c(0);
      if (auto it = fn.entry(a, b).find({full, full}); it != fn.entry(a, b).end())
        fn_c = it->second;
      if (auto it = rhs.entry(a, b).find({full, full}); it != rhs.entry(a, b).end())
        rhs_c = it->second;
      const Rational want = a == b ? expected * omega_top : Rational(0);
      if (fn_c != want) rep.both_sides_factor = false;
      if (n >= 2 && rhs_c != want) rep.both_sides_factor = false;
      if (a == 0 && b == 0) rep.factor = fn_c / omega_top;
    }
  return rep;
}

struct GramReport {
  Eigen::Matrix<double, 16, 16> gram_real;
  Eigen::Matrix<double, 8, 8> gram_complex;
  double min_eigenvalue = 0.0;
  double eig_residual = 0.0;
};

inline Eigen::Matrix<Rational, 8, 8> jPositivityGramExact() {
  Eigen::Matrix<Rational, 8, 8> h;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) h(i, j) = Rational(0);
  auto idx = [](int a, int b, int mu) { return 4 * (a - 1) + 2 * (b - 1) + (mu - 1); };
  // |a_{ab,mu}|^2 over everything.
  for (int i = 0; i < 8; ++i) h(i, i) += Rational(1);
  for (int a = 1; a <= 2; ++a) {
    h(idx(1, a, 2), idx(1, a, 2)) += Rational(1);  // |a_{1a,2}|^2
    h(idx(2, a, 1), idx(2, a, 1)) += Rational(1);  // |a_{2a,1}|^2
    h(idx(a, 1, 2), idx(a, 1, 2)) += Rational(1);  // |a_{a1,2}|^2
    h(idx(a, 2, 1), idx(a, 2, 1)) += Rational(1);  // |a_{a2,1}|^2
    // -2 Re( a_{2a,2} conj(a_{1a,1}) )
    h(idx(2, a, 2), idx(1, a, 1)) -= Rational(1);
    h(idx(1, a, 1), idx(2, a, 2)) -= Rational(1);
    // -2 Re( a_{a1,2} conj(a_{a2,1}) )
    h(idx(a, 1, 2), idx(a, 2, 1)) -= Rational(1);
    h(idx(a, 2, 1), idx(a, 1, 2)) -= Rational(1);
  }
  return h;
}

/// Value of the positivity form on an arbitrary complex coefficient vector.
inline double jPositivityFormValue(const Eigen::Matrix<std::complex<double>, 8, 1>& a) {
  const Eigen::Matrix<Rational, 8, 8> h = jPositivityGramExact();
  std::complex<double> acc(0.0, 0.0);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) acc += std::conj(a[i]) * h(i, j).toDouble() * a[j];
  return acc.real();
}

inline GramReport jPositivityGram() {
  const Eigen::Matrix<Rational, 8, 8> h = jPositivityGramExact();
  GramReport rep;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) rep.gram_complex(i, j) = h(i, j).toDouble();
  // The complex Hermitian form as a real quadratic form on (Re a, Im a).
  rep.gram_real.setZero();
  rep.gram_real.block<8, 8>(0, 0) = rep.gram_complex;
  rep.gram_real.block<8, 8>(8, 8) = rep.gram_complex;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 16, 16>> es(rep.gram_real);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  double worst = 0.0;
  for (int k = 0; k < 16; ++k) {
    const Eigen::Matrix<double, 16, 1> v = es.eigenvectors().col(k);
    worst = std::max(worst,
                     (rep.gram_real * v - es.eigenvalues()[k] * v).cwiseAbs().maxCoeff());
  }
  rep.eig_residual = worst;
  return rep;
}

struct GriffithDirectionReport {
  bool positive = false;          // 2 c A - D Id > 0 in the tested directions
  double min_eig_standard = 0.0;  // spectrum of 2 A - Id at xi = e_1
  double min_eig_rotated = 0.0;
  double trace_margin = 0.0;      // c c1(E,h)(xi, xi~) - omega(xi, xi~)
};

/// J-Griffith positivity of the Fubini-Study metric on T'CP^2 extracted from
/// the curvature block in a tangent direction; the center isotropy makes any
/// unit direction equivalent to the standard one.
inline GriffithDirectionReport griffithFromPositivity(unsigned seed = 7u) {
  using C2 = Eigen::Vector2cd;
  using M2 = Eigen::Matrix2cd;
  const double c = 1.0;  // jConstant of T'CP^2 with omega_FS

  // Curvature block in direction xi: A(xi) = |xi|^2 Id + xi xi^*.
  auto block = [](const C2& xi) {
    M2 a = xi.squaredNorm() * M2::Identity();
    for (int al = 0; al < 2; ++al)
      for (int be = 0; be < 2; ++be) a(al, be) += xi[al] * std::conj(xi[be]);
    return a;
  };
  auto minEig = [&](const C2& xi) {
    const double d = xi.squaredNorm();
    const M2 m = 2.0 * c * block(xi) - d * M2::Identity();
    Eigen::SelfAdjointEigenSolver<M2> es(m);
    return es.eigenvalues().minCoeff();
  };

  GriffithDirectionReport rep;
  const C2 standard(1.0, 0.0);
  rep.min_eig_standard = minEig(standard);

  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  C2 xi(std::complex<double>(gauss(rng), gauss(rng)),
        std::complex<double>(gauss(rng), gauss(rng)));
  xi.normalize();
  rep.min_eig_rotated = minEig(xi);

  rep.trace_margin = c * block(standard).real().trace() - standard.squaredNorm();
  rep.positive = rep.min_eig_standard > 0.0 && rep.min_eig_rotated > 0.0;
  return rep;
}

}  // namespace jflow
