#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>

namespace jflow {

using RadialField = Eigen::ArrayXd;

/// Cell-centered uniform grid on [0, 1] in the coordinate x = |z|^2/(1+|z|^2).
/// Cell centers stay away from the degenerate endpoints of d/dx[x(1-x)d/dx].
struct RadialGrid {
  int n;

  explicit RadialGrid(int n_in) : n(n_in) {
    if (n < 8) throw std::invalid_argument("RadialGrid: need at least 8 cells");
  }

  double h() const { return 1.0 / n; }
  double center(int i) const { return (i + 0.5) / n; }
  double face(int i) const { return static_cast<double>(i) / n; }

  RadialField centers() const {
    RadialField x(n);
    for (int i = 0; i < n; ++i) x[i] = center(i);
    return x;
  }
};

/// Flux-form reduction of (i/2pi) del delbar on CP^1 for U(1)-invariant
/// functions: f -> d/dx [x(1-x) f'(x)], with zero boundary fluxes from
/// regularity at the poles. Telescopes, so cellIntegral of the result is
/// exactly zero.
inline RadialField radialLaplacian(const RadialGrid& g, const RadialField& f) {
  const int n = g.n;
  const double h = g.h();
  RadialField out(n);
  double flux_w = 0.0;
  for (int i = 0; i < n; ++i) {
    double flux_e = 0.0;
    if (i + 1 < n) {
      const double xf = g.face(i + 1);
      flux_e = xf * (1.0 - xf) * (f[i + 1] - f[i]) / h;
    }
    out[i] = (flux_e - flux_w) / h;
    flux_w = flux_e;
  }
  return out;
}

/// Cell-centered derivative: central in the interior, one-sided two-point at
/// the boundary cells. The boundary truncation is O(h) in f' itself but every
/// consumer multiplies it by x (left) or 1-x (right), restoring O(h^2); the
/// two-point stencils keep the exact Jacobian of dependent quantities
/// tridiagonal.
inline RadialField radialGradient(const RadialGrid& g, const RadialField& f) {
  const int n = g.n;
  const double h = g.h();
  RadialField out(n);
  out[0] = (f[1] - f[0]) / h;
  for (int i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  out[n - 1] = (f[n - 1] - f[n - 2]) / h;
  return out;
}

/// Midpoint-rule integral over [0, 1].
inline double cellIntegral(const RadialGrid& g, const RadialField& f) {
  return f.sum() * g.h();
}

/// Tridiagonal operator on cell values; row i acts as
///   lower[i] v[i-1] + diag[i] v[i] + upper[i] v[i+1].
struct Tridiagonal {
  Eigen::ArrayXd lower;  // lower[0] unused
  Eigen::ArrayXd diag;
  Eigen::ArrayXd upper;  // upper[n-1] unused

  explicit Tridiagonal(int n)
      : lower(Eigen::ArrayXd::Zero(n)),
        diag(Eigen::ArrayXd::Zero(n)),
        upper(Eigen::ArrayXd::Zero(n)) {}

  int size() const { return static_cast<int>(diag.size()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    const int n = size();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
      double acc = diag[i] * v[i];
      if (i > 0) acc += lower[i] * v[i - 1];
      if (i + 1 < n) acc += upper[i] * v[i + 1];
      out[i] = acc;
    }
    return out;
  }

  Tridiagonal transpose() const {
    const int n = size();
    Tridiagonal t(n);
    t.diag = diag;
    for (int i = 0; i + 1 < n; ++i) t.lower[i + 1] = upper[i];
    for (int i = 1; i < n; ++i) t.upper[i - 1] = lower[i];
    return t;
  }

  Eigen::SparseMatrix<double> toSparse() const {
    const int n = size();
    Eigen::SparseMatrix<double> m(n, n);
    m.reserve(Eigen::VectorXi::Constant(n, 3));
    for (int i = 0; i < n; ++i) {
      if (i > 0) m.insert(i, i - 1) = lower[i];
      m.insert(i, i) = diag[i];
      if (i + 1 < n) m.insert(i, i + 1) = upper[i];
    }
    m.makeCompressed();
    return m;
  }
};

/// The flux-form second-order part of the reduced Laplacian as a matrix.
inline Tridiagonal radialLaplacianMatrix(const RadialGrid& g) {
  const int n = g.n;
  const double h = g.h();
  Tridiagonal m(n);
  for (int i = 0; i < n; ++i) {
    double aw = 0.0, ae = 0.0;
    if (i > 0) {
      const double xf = g.face(i);
      aw = xf * (1.0 - xf) / (h * h);
    }
    if (i + 1 < n) {
      const double xf = g.face(i + 1);
      ae = xf * (1.0 - xf) / (h * h);
    }
    m.diag[i] = -(aw + ae);
    if (i > 0) m.lower[i] = aw;
    if (i + 1 < n) m.upper[i] = ae;
  }
  return m;
}

/// Adds coef[i] * (gradient stencil) to the operator, matching
/// radialGradient's stencils row by row.
inline void addGradientTerm(const RadialGrid& g, const Eigen::ArrayXd& coef, Tridiagonal& m) {
  const int n = g.n;
  const double h = g.h();
  m.diag[0] += -coef[0] / h;
  m.upper[0] += coef[0] / h;
  for (int i = 1; i + 1 < n; ++i) {
    m.lower[i] += -coef[i] / (2.0 * h);
    m.upper[i] += coef[i] / (2.0 * h);
  }
  m.diag[n - 1] += coef[n - 1] / h;
  m.lower[n - 1] += -coef[n - 1] / h;
}

}  // namespace jflow
