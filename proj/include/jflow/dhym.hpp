#pragma once

#include "jflow/lattice.hpp"
#include "jflow/vortexsolve.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace jflow {

struct PhaseUndefinedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UncalibratedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InconclusiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SimplenessFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The topological charge Z of a surface sheaf under omega -> eps omega,
///   Z(eps) = sum_k (2!/k!) i^{2-k} eps^k [omega]^k . ch_{2-k}(E),
/// kept as exact polynomials in eps, and its phase branch.
struct PhaseData {
  std::array<Rational, 3> re_poly;  // -2 ch2, 0, [omega]^2 rank
  std::array<Rational, 3> im_poly;  // 0, 2 [omega].ch1, 0

  std::complex<double> zAt(double eps) const {
    auto horner = [&](const std::array<Rational, 3>& p) {
      return (p[2].toDouble() * eps + p[1].toDouble()) * eps + p[0].toDouble();
    };
    return {horner(re_poly), horner(im_poly)};
  }

  std::pair<Rational, Rational> zAtExact(const Rational& eps) const {
    return {(re_poly[2] * eps + re_poly[1]) * eps + re_poly[0],
            (im_poly[2] * eps + im_poly[1]) * eps + im_poly[0]};
  }

  /// Theta as the two-argument arctangent branch in (-pi, pi].
  double thetaAt(double eps) const {
    const std::complex<double> z = zAt(eps);
    if (z == std::complex<double>(0.0, 0.0))
      throw PhaseUndefinedError("PhaseData: Z vanishes");
    return std::atan2(z.imag(), z.real());
  }
};

inline PhaseData zEpsilon(const SheafChern& e, const LatticeClass& omega) {
  PhaseData pd{{Rational(-2) * e.ch2, Rational(0), selfPair(omega) * e.rank},
               {Rational(0), Rational(2) * pair(omega, e.ch1), Rational(0)}};
  return pd;
}

inline PhaseData zEpsilon(const SheafChern& e, const LatticeClass& omega, double eps) {
  const PhaseData pd = zEpsilon(e, omega);
  if (pd.zAt(eps) == std::complex<double>(0.0, 0.0))
    throw PhaseUndefinedError("zEpsilon: Z vanishes at the requested eps");
  return pd;
}

/// One value of the SU(2)xU(1)-invariant form algebra at a point of the
/// radial grid. Basis: 1, sigma (omega_Sigma part), tau (omega_FS part),
/// mu = (i/2pi) D'phi ^ zeta, mubar, and the top form sigma tau. The only
/// nontrivial products are sigma tau = tau sigma = top and the mu mubar
/// pairing, whose sign is calibrated, never hand-chosen.
struct InvariantAlgebraElement {
  enum Basis { kOne = 0, kSigma, kTau, kMu, kMuBar, kTop, kBasisSize };
  std::array<std::array<std::array<std::complex<double>, kBasisSize>, 2>, 2> c{};

  std::complex<double>& at(int a, int b, int basis) { return c[a][b][basis]; }
  const std::complex<double>& at(int a, int b, int basis) const { return c[a][b][basis]; }
};

/// Product of two basis (co)forms given the local value of W and the
/// calibrated pairing sign: mu mubar = mubar mu = sign W top.
inline std::complex<double> basisProduct(int x, int y, double w_value, int pairing_sign,
                                         int& out_basis) {
  using E = InvariantAlgebraElement;
  out_basis = -1;
  if (x == E::kOne) { out_basis = y; return 1.0; }
  if (y == E::kOne) { out_basis = x; return 1.0; }
  if ((x == E::kSigma && y == E::kTau) || (x == E::kTau && y == E::kSigma)) {
    out_basis = E::kTop;
    return 1.0;
  }
  if ((x == E::kMu && y == E::kMuBar) || (x == E::kMuBar && y == E::kMu)) {
    out_basis = E::kTop;
    return static_cast<double>(pairing_sign) * w_value;
  }
  return 0.0;  // everything else annihilates (bidegree or square of an odd part)
}

inline InvariantAlgebraElement multiply(const InvariantAlgebraElement& lhs,
                                        const InvariantAlgebraElement& rhs, double w_value,
                                        int pairing_sign) {
  using E = InvariantAlgebraElement;
  InvariantAlgebraElement out;
  for (int a = 0; a < 2; ++a)
    for (int g = 0; g < 2; ++g)
      for (int b = 0; b < 2; ++b)
        for (int x = 0; x < E::kBasisSize; ++x) {
          const std::complex<double> vx = lhs.at(a, b, x);
          if (vx == std::complex<double>(0.0, 0.0)) continue;
          for (int y = 0; y < E::kBasisSize; ++y) {
            const std::complex<double> vy = rhs.at(b, g, y);
            if (vy == std::complex<double>(0.0, 0.0)) continue;
            int target = -1;
            const std::complex<double> factor =
                basisProduct(x, y, w_value, pairing_sign, target);
            if (target >= 0 && factor != std::complex<double>(0.0, 0.0))
              out.at(a, g, target) += factor * vx * vy;
          }
        }
  return out;
}

struct DhymResidual {
  RadialField res1;
  RadialField res2;
  bool offdiag_zero = true;

  double sup() const { return std::max(res1.abs().maxCoeff(), res2.abs().maxCoeff()); }
};

namespace detail {

struct DhymFields {
  RadialField d1, d2, q, w;
};

inline DhymFields dhymFields(const Problem& pb, const RadialField& psi,
                             const RadialField& rho) {
  DhymFields f;
  const RadialField fh = curvatureDensity(pb, psi);
  const RadialField ff = radialLaplacian(pb.grid, rho);
  f.d1 = fh + ff + pb.r1();
  f.d2 = ff + pb.r1();
  f.q = pb.q(psi);
  f.w = computeW(pb, psi);
  return f;
}

inline DhymFields dhymFields(const Problem& pb, const ReducedCurvature& rc) {
  return {rc.fh_hat + rc.ff_hat + pb.r1(), rc.ff_hat + pb.r1(), rc.q, rc.w};
}

/// The squared algebra element M^2 with M = eps omega Id + i F_H at one cell.
inline InvariantAlgebraElement squaredAt(const Problem& pb, const DhymFields& f, int i,
                                         double eps, int pairing_sign) {
  using E = InvariantAlgebraElement;
  InvariantAlgebraElement m;
  const std::complex<double> iu(0.0, 1.0);
  m.at(0, 0, E::kSigma) = eps * pb.s + iu * f.d1[i];
  m.at(0, 0, E::kTau) = eps + iu * (2.0 * pb.r2() + f.q[i]);
  m.at(1, 1, E::kSigma) = eps * pb.s + iu * f.d2[i];
  m.at(1, 1, E::kTau) = eps + iu * (2.0 * pb.r2() + 2.0 - f.q[i]);
  m.at(0, 1, E::kMu) = iu;
  m.at(1, 0, E::kMuBar) = -iu;
  return multiply(m, m, f.w[i], pairing_sign);
}

inline bool offDiagonalVanishes(const InvariantAlgebraElement& m2) {
  using E = InvariantAlgebraElement;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < E::kBasisSize; ++x)
        if (!(x == E::kTop && a == b) && m2.at(a, b, x) != std::complex<double>(0.0, 0.0))
          return false;
  return true;
}

/// Diagonal residual components
///   res_i = cos T Im(M^2)_ii / (2 eps) - (sin T / (2 eps)) Re(M^2)_ii,
/// the 1/(n eps) normalization of the small-volume operator at n = 2.
inline DhymResidual residualFromFields(const Problem& pb, const DhymFields& f, double eps,
                                       double cos_t, double sin_over_2eps,
                                       int pairing_sign) {
  using E = InvariantAlgebraElement;
  const int n = pb.grid.n;
  DhymResidual out;
  out.res1.resize(n);
  out.res2.resize(n);
  for (int i = 0; i < n; ++i) {
    const InvariantAlgebraElement m2 = squaredAt(pb, f, i, eps, pairing_sign);
    if (!offDiagonalVanishes(m2)) out.offdiag_zero = false;
    const std::complex<double> t1 = m2.at(0, 0, E::kTop);
    const std::complex<double> t2 = m2.at(1, 1, E::kTop);
    out.res1[i] = cos_t * t1.imag() / (2.0 * eps) - sin_over_2eps * t1.real();
    out.res2[i] = cos_t * t2.imag() / (2.0 * eps) - sin_over_2eps * t2.real();
  }
  return out;
}

/// Exact eps -> 0 limit under cos T -> -1, sin T/(2 eps) -> c. Im(M^2) is
/// exactly linear in eps, so its slope is read off at eps = 1; Re(M^2) is
/// taken at eps = 0.
inline DhymResidual limitResidual(const Problem& pb, const DhymFields& f, int pairing_sign) {
  using E = InvariantAlgebraElement;
  const int n = pb.grid.n;
  DhymResidual out;
  out.res1.resize(n);
  out.res2.resize(n);
  for (int i = 0; i < n; ++i) {
    const InvariantAlgebraElement at0 = squaredAt(pb, f, i, 0.0, pairing_sign);
    const InvariantAlgebraElement at1 = squaredAt(pb, f, i, 1.0, pairing_sign);
    if (!offDiagonalVanishes(at0) || !offDiagonalVanishes(at1)) out.offdiag_zero = false;
    out.res1[i] = -at1.at(0, 0, E::kTop).imag() / 2.0 - pb.c * at0.at(0, 0, E::kTop).real();
    out.res2[i] = -at1.at(1, 1, E::kTop).imag() / 2.0 - pb.c * at0.at(1, 1, E::kTop).real();
  }
  return out;
}

}  // namespace detail

/// Calibrates the mu mubar pairing sign: substituting the exact eps -> 0
/// limits cos T -> -1 and sin T/(2 eps) -> c must reproduce the J-equation
/// residual fields of the verifier. Exactly one sign survives.
inline int calibratePairingSign(const Problem& pb, const ReducedCurvature& rc) {
  const detail::DhymFields f = detail::dhymFields(pb, rc);
  const VerifyReport ref = verifySolution(pb, rc);
  const double scale = std::max({1.0, ref.res_hfs.abs().maxCoeff(), ref.res_fs.abs().maxCoeff()});
  int found = 0;
  for (int sign : {1, -1}) {
    const DhymResidual lim = detail::limitResidual(pb, f, sign);
    const double err = std::max((lim.res1 - ref.res_hfs).abs().maxCoeff(),
                                (lim.res2 - ref.res_fs).abs().maxCoeff());
    if (err <= 1e-12 * scale) {
      if (found != 0)
        throw UncalibratedError("calibratePairingSign: both signs match, table invalid");
      found = sign;
    }
  }
  if (found == 0)
    throw UncalibratedError("calibratePairingSign: no sign reproduces the J-residual");
  return found;
}

/// Everything the small-volume analysis needs about one converged solve.
struct DhymContext {
  const Problem* pb = nullptr;
  ReducedCurvature rc;
  RadialField psi;
  PhaseData phase;
  double j_floor = 0.0;     // sup of the J-identity residuals of the input
  int pairing_sign = 0;     // 0 until calibrated

  DhymContext(const Problem& problem, ReducedCurvature curvature, RadialField psi_in)
      : pb(&problem), rc(std::move(curvature)), psi(std::move(psi_in)),
        phase(zEpsilon(vortexChern(problem.params).sheaf(), vortexOmega(problem.params))) {
    const VerifyReport rep = verifySolution(problem, rc);
    j_floor = std::max(rep.sup_res_hfs, rep.sup_res_fs);
    pairing_sign = calibratePairingSign(problem, rc);
  }
};

inline DhymResidual reducedDhymResidual(const DhymContext& ctx, double eps) {
  if (ctx.pairing_sign == 0)
    throw UncalibratedError("reducedDhymResidual: pairing sign not calibrated");
  const double theta = ctx.phase.thetaAt(eps);
  return detail::residualFromFields(*ctx.pb, detail::dhymFields(*ctx.pb, ctx.rc), eps,
                                    std::cos(theta), std::sin(theta) / (2.0 * eps),
                                    ctx.pairing_sign);
}

/// Least-squares slope of log ||residual|| against log eps over the samples
/// above 10x the J-residual floor.
struct ScalingFit {
  double slope = 0.0;
  int points_used = 0;
  double floor = 0.0;
  std::vector<double> eps;
  std::vector<double> res_sup;
};

inline double fitLogSlope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  if (n < 2) throw InconclusiveError("fitLogSlope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log10(xs[i]), ly = std::log10(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InconclusiveError("fitLogSlope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

inline ScalingFit scalingFit(const DhymContext& ctx, const std::vector<double>& eps_list) {
  if (eps_list.size() < 2)
    throw std::invalid_argument("scalingFit: need at least two eps values");
  double lo = eps_list.front(), hi = eps_list.front();
  for (double e : eps_list) {
    if (e >= 1.0) throw std::invalid_argument("scalingFit: eps must be below 1");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (std::log10(hi / lo) < 1.5)
    throw std::invalid_argument("scalingFit: eps list must span at least 1.5 decades");
  if (ctx.j_floor >= 1e-6)
    throw InconclusiveError("scalingFit: J-residual floor of the input is too high");

  ScalingFit fit;
  fit.floor = ctx.j_floor;
  std::vector<double> xs, ys;
  for (double e : eps_list) {
    const double r = reducedDhymResidual(ctx, e).sup();
    fit.eps.push_back(e);
    fit.res_sup.push_back(r);
    if (r >= 10.0 * ctx.j_floor) {
      xs.push_back(e);
      ys.push_back(r);
    }
  }
  if (xs.size() < 2) throw InconclusiveError("scalingFit: too few samples above the floor");
  fit.points_used = static_cast<int>(xs.size());
  fit.slope = fitLogSlope(xs, ys);
  return fit;
}

/// One Newton step of the coupled diagonal system in the invariant metric
/// degrees of freedom (delta psi, delta rho), with the Jacobian assembled by
/// central finite differences of the reduced residual. The constant-rho
/// direction is the expected one-dimensional kernel (scalar gauge); a larger
/// defect reports SIMPLENESS_FAILURE.
struct NewtonCorrection {
  double pre_sup = 0.0;
  double post_sup = 0.0;
  double ratio = 0.0;
  RadialField psi;
  RadialField rho;
};

inline NewtonCorrection newtonCorrection(const DhymContext& ctx, double eps) {
  if (ctx.pairing_sign == 0) throw UncalibratedError("newtonCorrection: not calibrated");
  const Problem& pb = *ctx.pb;
  const int n = pb.grid.n;
  const double theta = ctx.phase.thetaAt(eps);
  const double ct = std::cos(theta);
  const double st_norm = std::sin(theta) / (2.0 * eps);

  auto residual = [&](const RadialField& psi, const RadialField& rho) {
    const DhymResidual r = detail::residualFromFields(
        pb, detail::dhymFields(pb, psi, rho), eps, ct, st_norm, ctx.pairing_sign);
    Eigen::VectorXd v(2 * n);
    v.head(n) = r.res1.matrix();
    v.tail(n) = r.res2.matrix();
    return v;
  };

  RadialField psi = ctx.psi, rho = ctx.rc.rho;
  const Eigen::VectorXd r0 = residual(psi, rho);

  Eigen::MatrixXd jac(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    RadialField pp = psi, pm = psi, rp = rho, rm = rho;
    double base = j < n ? psi[j] : rho[j - n];
    const double step = 1e-6 * std::max(1.0, std::abs(base));
    if (j < n) {
      pp[j] += step;
      pm[j] -= step;
    } else {
      rp[j - n] += step;
      rm[j - n] -= step;
    }
    jac.col(j) = (residual(pp, rp) - residual(pm, rm)) / (2.0 * step);
  }

  // Minimum-norm least squares: the scalar gauge direction (constant rho)
  // must receive no component, otherwise the step leaves the linearization's
  // validity region.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  if (svd.rank() < 2 * n - 1)
    throw SimplenessFailureError("newtonCorrection: linearized system rank-deficient "
                                 "beyond the scalar gauge direction");
  const Eigen::VectorXd delta = svd.solve(-r0);

  NewtonCorrection out;
  out.pre_sup = r0.cwiseAbs().maxCoeff();
  out.psi = psi + delta.head(n).array();
  out.rho = rho + delta.tail(n).array();
  out.post_sup = residual(out.psi, out.rho).cwiseAbs().maxCoeff();
  out.ratio = out.post_sup / out.pre_sup;
  return out;
}

/// The four invariant diagonal test directions and their small-volume
/// positivity quantities. The sign of each must match
/// -cos(Theta_eps) x (the corresponding J-positivity quantity).
struct PositivitySignReport {
  double threshold = 0.0;  // largest tested eps below which all signs match
  std::vector<double> eps_tested;
  std::vector<bool> ok;
};

inline PositivitySignReport dhymPositivitySigns(const DhymContext& ctx,
                                                const std::vector<double>& eps_list) {
  const Problem& pb = *ctx.pb;
  const detail::DhymFields f = detail::dhymFields(pb, ctx.rc);
  // J-positivity quantities: along Sigma directions (p I), (p II); along the
  // fiber directions I and K.
  const RadialField jq_p1 = 2.0 * pb.c * f.d1 - pb.s;
  const RadialField jq_p2 = 2.0 * pb.c * f.d2 - pb.s;
  const RadialField tau1 = 2.0 * pb.r2() + f.q;
  const RadialField tau2 = 2.0 * pb.r2() + 2.0 - f.q;
  const RadialField jq_i = 2.0 * pb.c * tau1 - 1.0;
  const RadialField jq_k = 2.0 * pb.c * tau2 - 1.0;

  PositivitySignReport rep;
  std::vector<double> sorted = eps_list;
  std::sort(sorted.begin(), sorted.end());
  for (double e : sorted) {
    const double theta = ctx.phase.thetaAt(e);
    const double ct = std::cos(theta), st = std::sin(theta);
    auto matches = [&](const RadialField& pos_q, const RadialField& jq) {
      for (int i = 0; i < pb.grid.n; ++i) {
        const double want = -ct * jq[i];
        if (pos_q[i] * want <= 0.0) return false;
      }
      return true;
    };
    const bool ok = matches(2.0 * e * pb.s * ct + 2.0 * st * f.d1, jq_p1) &&
                    matches(2.0 * e * pb.s * ct + 2.0 * st * f.d2, jq_p2) &&
                    matches(2.0 * e * ct + 2.0 * st * tau1, jq_i) &&
                    matches(2.0 * e * ct + 2.0 * st * tau2, jq_k);
    rep.eps_tested.push_back(e);
    rep.ok.push_back(ok);
  }
  for (size_t i = 0; i < rep.eps_tested.size(); ++i) {
    if (!rep.ok[i]) break;
    rep.threshold = rep.eps_tested[i];
  }
  return rep;
}

}  // namespace jflow
