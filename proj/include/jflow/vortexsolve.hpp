#pragma once

#include "jflow/radial.hpp"
#include "jflow/vortexcfg.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jflow {

struct PositivityLossError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Immutable setup of one reduced solve on Sigma = CP^1 with deg L = 1 and
/// the section phi = lambda z, so |phi|^2 relative to the background metric
/// is lambda^2 x.
struct Problem {
  VortexParams params;
  RadialGrid grid;
  Rational c_exact;
  double c;
  double s;
  double lambda2;
  double alpha;
  RadialField x;  // cell centers
  RadialField u;  // 1 / (alpha (1 - lambda^2 x))

  Problem(const VortexParams& p, double lambda2_in, int n_cells)
      : params(p), grid(n_cells), c_exact(0), c(0), s(p.s.toDouble()), lambda2(lambda2_in),
        alpha(0), x(grid.centers()), u(n_cells) {
    if (!(lambda2 > 0.0 && lambda2 < 0.5))
      throw std::domain_error("Problem: lambda^2 must lie in (0, 1/2)");
    const VortexChern vc = vortexChern(p);
    c_exact = vc.c;
    c = vc.c.toDouble();
    const AlphaReport ar = alphaCheck(p);
    if (!ar.alpha_defined || !ar.alpha_gt_1)
      throw std::domain_error("Problem: alpha <= 1, outside the solvable regime");
    alpha = ar.alpha.toDouble();
    u = 1.0 / (alpha * (1.0 - lambda2 * x));
  }

  double r1() const { return static_cast<double>(params.r1); }
  double r2() const { return static_cast<double>(params.r2); }

  /// |phi|^2 in the metric h = h_Sigma e^{-psi}.
  RadialField q(const RadialField& psi) const { return lambda2 * x * (-psi).exp(); }
};

/// Curvature density of h = h_Sigma e^{-psi} relative to omega_Sigma.
inline RadialField curvatureDensity(const Problem& pb, const RadialField& psi) {
  return 1.0 + radialLaplacian(pb.grid, psi);
}

/// (i/2pi) D'phi D''phi* / omega_Sigma in closed form,
///   W = lambda^2 (1-x) (1 - x psi')^2 e^{-psi};
/// all second derivatives of psi cancel analytically.
inline RadialField computeW(const Problem& pb, const RadialField& psi) {
  const RadialField dpsi = radialGradient(pb.grid, psi);
  return pb.lambda2 * (1.0 - pb.x) * (1.0 - pb.x * dpsi).square() * (-psi).exp();
}

/// Same quantity through the Weitzenboeck identity with discrete Laplacians:
///   W = d/dx[x(1-x) q'] + Fh q.
/// Agreement with the closed form is a standing O(h^2) consistency check.
inline RadialField computeWWeitzenboeck(const Problem& pb, const RadialField& psi) {
  const RadialField q = pb.q(psi);
  return radialLaplacian(pb.grid, q) + curvatureDensity(pb, psi) * q;
}

namespace detail {

struct PathTerms {
  RadialField q, w, i_fac, k_fac, u_pow, j_tot;
};

inline PathTerms pathTerms(const Problem& pb, const RadialField& psi, double t) {
  PathTerms pt;
  pt.q = pb.q(psi);
  pt.w = computeW(pb, psi);
  const double c = pb.c;
  const double r2 = pb.r2();
  pt.i_fac = 4.0 * c * r2 + 2.0 * c * t * pt.q - 1.0;
  pt.k_fac = 4.0 * c * r2 - 2.0 * c * t * pt.q - 1.0 + 4.0 * c;
  if (pt.k_fac.minCoeff() <= 0.0)
    throw PositivityLossError("path: K factor lost positivity");
  if (pt.i_fac.minCoeff() <= 0.0)
    throw PositivityLossError("path: I factor lost positivity");
  pt.u_pow = pb.u.pow(1.0 - t);
  pt.j_tot = (2.0 * c * c * t * pt.w + pb.s * pt.u_pow) / (pt.i_fac * pt.k_fac);
  return pt;
}

}  // namespace detail

/// Residual of the continuity path at (psi, t):
///   R = 1 + d/dx[x(1-x) psi'] - 2 (1-q) (2 c^2 t W + s u^{1-t}) / (I K).
/// Throws PositivityLossError when I or K is nonpositive somewhere.
inline RadialField pathResidual(const Problem& pb, const RadialField& psi, double t) {
  const detail::PathTerms pt = detail::pathTerms(pb, psi, t);
  return curvatureDensity(pb, psi) - 2.0 * (1.0 - pt.q) * pt.j_tot;
}

/// Exact derivative of the discrete path residual; tridiagonal thanks to the
/// two-point boundary stencils of radialGradient.
inline Tridiagonal pathJacobian(const Problem& pb, const RadialField& psi, double t) {
  const detail::PathTerms pt = detail::pathTerms(pb, psi, t);
  const double c = pb.c;
  const RadialField ik = pt.i_fac * pt.k_fac;

  Tridiagonal jac = radialLaplacianMatrix(pb.grid);

  // Zeroth order: -2 q J - 16 c^2 t (1-q)(1-tq) q J / (IK) + 4 c^2 t (1-q) W / (IK).
  const RadialField zeroth = -2.0 * pt.q * pt.j_tot -
                             16.0 * c * c * t * (1.0 - pt.q) * (1.0 - t * pt.q) * pt.q *
                                 pt.j_tot / ik +
                             4.0 * c * c * t * (1.0 - pt.q) * pt.w / ik;
  jac.diag += zeroth;

  // First order: 8 c^2 t (1-q) x(1-x) q' / (IK) acting through the gradient,
  // with q' = lambda^2 e^{-psi} (1 - x psi') evaluated pointwise.
  const RadialField dpsi = radialGradient(pb.grid, psi);
  const RadialField qprime = pb.lambda2 * (-psi).exp() * (1.0 - pb.x * dpsi);
  const RadialField coef =
      8.0 * c * c * t * (1.0 - pt.q) * pb.x * (1.0 - pb.x) * qprime / ik;
  addGradientTerm(pb.grid, coef, jac);
  return jac;
}

/// Radial reduction of the displayed formal adjoint of the path linearization.
inline Tridiagonal pathAdjoint(const Problem& pb, const RadialField& psi, double t) {
  const detail::PathTerms pt = detail::pathTerms(pb, psi, t);
  const double c = pb.c;
  const RadialField ik = pt.i_fac * pt.k_fac;

  Tridiagonal adj = radialLaplacianMatrix(pb.grid);

  const RadialField zeroth =
      -2.0 * pt.q * pt.j_tot -
      16.0 * c * c * t * (1.0 - t) * (1.0 - pt.q) * pt.q.square() * pt.j_tot / ik +
      4.0 * c * c * t * (3.0 * pt.q - 1.0) * pt.w / ik +
      64.0 * std::pow(c, 4) * t * t * (1.0 - pt.q) * (1.0 - t * pt.q) * pt.q * pt.w /
          ik.square();
  adj.diag += zeroth;

  const RadialField dpsi = radialGradient(pb.grid, psi);
  const RadialField qprime = pb.lambda2 * (-psi).exp() * (1.0 - pb.x * dpsi);
  const RadialField coef =
      -8.0 * c * c * t * (1.0 - pt.q) * pb.x * (1.0 - pb.x) * qprime / ik;
  addGradientTerm(pb.grid, coef, adj);
  return adj;
}

/// Probed operator-norm discrepancy between the assembled adjoint and the
/// transpose of the Jacobian (the adjoint in the cell-measure-weighted
/// discrete L^2 pairing). The probe family sin(k pi x) vanishes at the
/// poles, where the gradient stencils are one-sided; the sup-norm of the
/// mismatch over unit-sup probes decays O(h) at states on the path, the
/// boundary rows dominating.
inline double adjointCheck(const Problem& pb, const RadialField& psi, double t,
                           int probe_count = 8) {
  const Tridiagonal adj = pathAdjoint(pb, psi, t);
  const Tridiagonal jt = pathJacobian(pb, psi, t).transpose();
  const int n = pb.grid.n;
  double worst = 0.0;
  for (int k = 1; k <= probe_count; ++k) {
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = std::sin(k * M_PI * pb.grid.center(i));
    const Eigen::VectorXd diff = adj.apply(w) - jt.apply(w);
    worst = std::max(worst, diff.cwiseAbs().maxCoeff() / w.cwiseAbs().maxCoeff());
  }
  return worst;
}

enum class SolveStatus { Converged, PositivityLoss, ContinuationStuck };

inline std::string nameOf(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "CONVERGED";
    case SolveStatus::PositivityLoss: return "POSITIVITY_LOSS";
    case SolveStatus::ContinuationStuck: return "CONTINUATION_STUCK";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, SolveStatus v) { return os << nameOf(v); }

struct PathState {
  double t = 0.0;
  RadialField psi;
  int newton_iters = 0;
  double residual_sup = 0.0;
};

struct ContinuationSchedule {
  double dt_initial = 0.05;
  double dt_min = 1e-6;
  double dt_growth = 1.5;
  double tol = 1e-9;
  int max_newton = 40;
  int fd_check_stride = 10;  // Jacobian/finite-difference spot check cadence
  double t_end = 1.0;        // park the path early for mid-path diagnostics
};

struct ContinuationResult {
  SolveStatus status = SolveStatus::Converged;
  RadialField psi;
  std::vector<PathState> trace;
  double last_good_t = 0.0;
  // Monitors of the a-priori quantities along the run.
  double max_psi = 0.0;
  double min_one_minus_q = 1.0;
  bool q_bound_ok = true;
  double fd_max_rel_err = 0.0;
  std::string error_message;
};

namespace detail {

inline double supNorm(const RadialField& f) { return f.abs().maxCoeff(); }

/// Damped Newton at fixed t. Returns (converged, iterations).
inline std::pair<bool, int> newtonAt(const Problem& pb, RadialField& psi, double t,
                                     const ContinuationSchedule& sched, long long& fd_counter,
                                     double& fd_max_rel_err, std::mt19937& rng) {
  RadialField res = pathResidual(pb, psi, t);
  double res_sup = supNorm(res);
  for (int it = 0; it < sched.max_newton; ++it) {
    if (res_sup <= sched.tol) return {true, it};
    const Tridiagonal jac = pathJacobian(pb, psi, t);

    if (++fd_counter % sched.fd_check_stride == 0) {
      // Spot check one Jacobian column against central differences.
      std::uniform_int_distribution<int> pick(0, pb.grid.n - 1);
      const int j = pick(rng);
      const double step = 1e-6 * std::max(1.0, std::abs(psi[j]));
      RadialField pp = psi, pm = psi;
      pp[j] += step;
      pm[j] -= step;
      const RadialField fd = (pathResidual(pb, pp, t) - pathResidual(pb, pm, t)) / (2.0 * step);
      double col_scale = 1e-8, err = 0.0;
      for (int i = 0; i < pb.grid.n; ++i) {
        double entry = 0.0;
        if (i == j) entry = jac.diag[i];
        else if (i == j + 1) entry = jac.lower[i];
        else if (i == j - 1) entry = jac.upper[i];
        col_scale = std::max(col_scale, std::abs(entry));
        err = std::max(err, std::abs(fd[i] - entry));
      }
      fd_max_rel_err = std::max(fd_max_rel_err, err / col_scale);
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac.toSparse());
    if (lu.info() != Eigen::Success) return {false, it};
    const Eigen::VectorXd delta = lu.solve(-res.matrix());

    // Step halving until the sup-residual decreases.
    double damping = 1.0;
    bool accepted = false;
    for (int half = 0; half < 10; ++half) {
      const RadialField trial = psi + damping * delta.array();
      try {
        const RadialField trial_res = pathResidual(pb, trial, t);
        const double trial_sup = supNorm(trial_res);
        if (trial_sup < res_sup) {
          psi = trial;
          res = trial_res;
          res_sup = trial_sup;
          accepted = true;
          break;
        }
      } catch (const PositivityLossError&) {
        // Shrink the step; positivity loss at full t is reported by the caller.
      }
      damping *= 0.5;
    }
    if (!accepted) return {false, it + 1};
  }
  return {supNorm(res) <= sched.tol, sched.max_newton};
}

}  // namespace detail

/// Continuity method from the exact solution psi = 0 at t = 0 up to t = 1,
/// with adaptive step halving/growth and the paper's a-priori monitors
/// (q <= 1, bounded max psi) recorded at every accepted state.
inline ContinuationResult continuationSolve(const Problem& pb,
                                            const ContinuationSchedule& sched = {}) {
  ContinuationResult out;
  out.psi = RadialField::Zero(pb.grid.n);
  std::mt19937 rng(0x5eed);
  long long fd_counter = 0;

  auto accept = [&](double t, int iters) {
    PathState st;
    st.t = t;
    st.psi = out.psi;
    st.newton_iters = iters;
    st.residual_sup = detail::supNorm(pathResidual(pb, out.psi, t));
    out.trace.push_back(std::move(st));
    out.last_good_t = t;
    const RadialField q = pb.q(out.psi);
    out.max_psi = std::max(out.max_psi, out.psi.maxCoeff());
    out.min_one_minus_q = std::min(out.min_one_minus_q, (1.0 - q).minCoeff());
    if (q.maxCoeff() > 1.0 + 1e-12) out.q_bound_ok = false;
  };

  try {
    // t = 0 has the exact solution psi = 0; accept it as-is.
    accept(0.0, 0);

    double t = 0.0;
    double dt = sched.dt_initial;
    while (t < sched.t_end) {
      if (dt < sched.dt_min) {
        out.status = SolveStatus::ContinuationStuck;
        out.error_message = "step size underflow at t = " + std::to_string(t);
        return out;
      }
      const double t_next = std::min(sched.t_end, t + dt);
      RadialField trial = out.psi;
      const auto [ok, iters] =
          detail::newtonAt(pb, trial, t_next, sched, fd_counter, out.fd_max_rel_err, rng);
      if (!ok) {
        dt *= 0.5;
        continue;
      }
      out.psi = trial;
      t = t_next;
      accept(t, iters);
      if (iters <= 4) dt *= sched.dt_growth;
    }
  } catch (const PositivityLossError& e) {
    out.status = SolveStatus::PositivityLoss;
    out.error_message = e.what();
  }
  return out;
}

/// Result of integrating the metric factor equation
///   d/dx[x(1-x) rho'] = R_f - mean(R_f),  R_f = (I/(4c(1-q))) Fh + s/(2c).
struct MetricFactor {
  RadialField rho;      // -log f, normalized to rho(x_0) = 0
  RadialField ff_hat;   // curvature density of f; equals R_f - mean(R_f)
  RadialField rf;       // raw right-hand side R_f
  double defect = 0.0;  // |integral of R_f - r1|, the compatibility defect
  double end_flux = 0.0;
};

/// Solves d/dx[x(1-x) rho'] = g by double quadrature in flux form, with
/// rho(x_0) = 0. The discrete Laplacian of the result reproduces
/// g - mean(g) exactly (the flux telescopes back).
inline std::pair<RadialField, double> integrateFluxPoisson(const RadialGrid& grid,
                                                           const RadialField& g) {
  const int n = grid.n;
  const double h = grid.h();
  const double mean = g.sum() / n;
  RadialField rho = RadialField::Zero(n);
  double flux = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    flux += h * (g[i] - mean);
    const double xf = grid.face(i + 1);
    rho[i + 1] = rho[i] + h * flux / (xf * (1.0 - xf));
  }
  const double end_flux = std::abs(flux + h * (g[n - 1] - mean));
  return {std::move(rho), end_flux};
}

inline MetricFactor recoverF(const Problem& pb, const RadialField& psi) {
  const RadialField q = pb.q(psi);
  if ((1.0 - q).minCoeff() <= 0.0)
    throw DegenerateError("recoverF: |phi|^2 reaches 1, equation degenerates");
  const RadialField fh = curvatureDensity(pb, psi);
  const double c = pb.c;

  MetricFactor mf;
  mf.rf = (4.0 * c * pb.r2() + 2.0 * c * q - 1.0) / (4.0 * c * (1.0 - q)) * fh +
          pb.s / (2.0 * c);
  mf.defect = std::abs(cellIntegral(pb.grid, mf.rf) - pb.r1());
  mf.ff_hat = mf.rf - mf.rf.sum() / pb.grid.n;
  auto [rho, end_flux] = integrateFluxPoisson(pb.grid, mf.rf);
  mf.rho = std::move(rho);
  mf.end_flux = end_flux;
  return mf;
}

/// The SU(2)xU(1)-invariant curvature data of a completed solve.
struct ReducedCurvature {
  RadialField fh_hat;
  RadialField ff_hat;
  RadialField q;
  RadialField w;
  RadialField rho;
};

inline ReducedCurvature reducedCurvature(const Problem& pb, const RadialField& psi,
                                         const MetricFactor& mf) {
  ReducedCurvature rc{curvatureDensity(pb, psi), mf.ff_hat, pb.q(psi), computeW(pb, psi),
                      mf.rho};
  if (rc.q.minCoeff() < 0.0 || rc.w.minCoeff() < 0.0)
    throw std::logic_error("reducedCurvature: q or W negative");
  if (std::abs(cellIntegral(pb.grid, rc.fh_hat) - 1.0) > 1e-12)
    throw std::logic_error("reducedCurvature: degree of L drifted from 1");
  return rc;
}

/// Pointwise verification report for the reduced system and the J-Griffith
/// positivity data of the solved metric.
struct VerifyReport {
  RadialField res_hfs;
  RadialField res_fs;
  double sup_res_hfs = 0.0;
  double sup_res_fs = 0.0;

  double integral_identity_lhs = 0.0;  // (4 c r2 + 2c - 1)^2 integral Fh/(1-q)
  double integral_identity_rhs = 0.0;  // 2 s + 4 c^2
  double integral_identity_rel_err = 0.0;

  // Minima over the grid of the five positivity quantities.
  double p1_min = 0.0, p2_min = 0.0, p3_min = 0.0, p4_min = 0.0, p5_min = 0.0;
  bool griffith_positive = false;

  // Sup errors of the closed-form identities (p I) = (2c^2 W + s)/I and
  // (p II) = (2c^2 W + s)/K.
  double p1_identity_err = 0.0;
  double p2_identity_err = 0.0;
};

inline VerifyReport verifySolution(const Problem& pb, const ReducedCurvature& rc) {
  const double c = pb.c, s = pb.s, r1 = pb.r1(), r2 = pb.r2();
  const RadialField d1 = rc.fh_hat + rc.ff_hat + r1;
  const RadialField d2 = rc.ff_hat + r1;
  const RadialField tau1 = 2.0 * r2 + rc.q;
  const RadialField tau2 = 2.0 * r2 + 2.0 - rc.q;

  VerifyReport rep;
  rep.res_hfs = 2.0 * c * d1 * tau1 - c * rc.w - 2.0 * r2 * s - d1 - s * rc.q;
  rep.res_fs = 2.0 * c * d2 * tau2 - c * rc.w - (2.0 * r2 + 2.0) * s - d2 + s * rc.q;
  rep.sup_res_hfs = rep.res_hfs.abs().maxCoeff();
  rep.sup_res_fs = rep.res_fs.abs().maxCoeff();

  rep.integral_identity_lhs = std::pow(4.0 * c * r2 + 2.0 * c - 1.0, 2) *
                              cellIntegral(pb.grid, rc.fh_hat / (1.0 - rc.q));
  rep.integral_identity_rhs = 2.0 * s + 4.0 * c * c;
  rep.integral_identity_rel_err =
      std::abs(rep.integral_identity_lhs - rep.integral_identity_rhs) /
      std::abs(rep.integral_identity_rhs);

  const RadialField p1 = 2.0 * c * rc.fh_hat + 2.0 * c * rc.ff_hat + 2.0 * c * r1 - s;
  const RadialField p2 = 2.0 * c * rc.ff_hat + 2.0 * c * r1 - s;
  const RadialField p3 = 4.0 * c * r2 + 2.0 * c * rc.q - 1.0;
  const RadialField p4 = 4.0 * c * r2 - 2.0 * c * rc.q - 1.0 + 4.0 * c;
  const RadialField p5 = 2.0 * c * p4 * rc.fh_hat +
                         2.0 * (4.0 * c * r2 + 2.0 * c - 1.0) * p2 - 4.0 * c * c * rc.w;
  rep.p1_min = p1.minCoeff();
  rep.p2_min = p2.minCoeff();
  rep.p3_min = p3.minCoeff();
  rep.p4_min = p4.minCoeff();
  rep.p5_min = p5.minCoeff();
  rep.griffith_positive = rep.p1_min > 0.0 && rep.p2_min > 0.0 && rep.p3_min > 0.0 &&
                          rep.p4_min > 0.0 && rep.p5_min >= 0.0;

  const RadialField core = 2.0 * c * c * rc.w + s;
  rep.p1_identity_err = (p1 - core / p3).abs().maxCoeff();
  rep.p2_identity_err = (p2 - core / p4).abs().maxCoeff();
  return rep;
}

}  // namespace jflow
