#pragma once

// Damped Newton solver for the quaternionic Calabi-Yau equation on the flat
// torus:  mooreDet(background + Hess phi) = A * f * mooreDet(background).
//
// The iteration runs on the log form (concave over positive matrices); the
// normalization constant A is recomputed from the integral compatibility
// ratio at every iterate, and the Newton step is solved by BiCGStab
// preconditioned with the constant-coefficient inverse in Fourier space.

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hktlab/common.hpp"
#include "hktlab/grid.hpp"
#include "hktlab/hessian.hpp"

namespace hktlab {

enum class Gauge { MeanZero, MaxZero };
enum class RhsConvention { Plain, Exponential };

struct MAProblem {
  TorusGrid grid;
  DiffScheme scheme = DiffScheme::Spectral;
  HessianField background;  // pointwise strictly positive
  GridFunction f;           // strictly positive (Plain) or arbitrary (Exponential)
  Gauge gauge = Gauge::MaxZero;
  RhsConvention rhs = RhsConvention::Plain;

  MAProblem() = default;
  MAProblem(const TorusGrid& g, GridFunction f_,
            Gauge gauge_ = Gauge::MaxZero)
      : grid(g), background(g, HHMatrix::identity(g.n)), f(std::move(f_)),
        gauge(gauge_) {}

  GridFunction effectiveRhs() const {
    GridFunction out = f;
    if (rhs == RhsConvention::Exponential)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!(out[i] > 0.0))
        throw InputError("right-hand side must be strictly positive");
    return out;
  }
};

struct IterRecord {
  int iter;
  double residual;
  double A;
  double minEigenvalue;
};

enum class SolveStatus { Converged, MaxIterations, LineSearchBreakdown };

struct MASolution {
  GridFunction phi;
  double A = 1.0;
  double residualNorm = 0.0;
  SolveStatus status = SolveStatus::Converged;
  std::vector<IterRecord> history;
  int newtonSteps() const { return static_cast<int>(history.size()); }
};

struct SolveOptions {
  double tolFactor = 1e-9;  // residual tolerance = tolFactor * max|f|
  int maxNewton = 40;
  int maxKrylov = 500;
  double krylovTol = 1e-12;
  const GridFunction* initial = nullptr;
  // called with each accepted iterate (phi, background + Hess phi)
  std::function<void(const GridFunction&, const HessianField&)> onIterate;
};

/// Plain-form residual mooreDet(bg + Hess phi) - A f det(bg), with an
/// admissibility check (witness point raised on positivity loss).
inline GridFunction residual(const DerivKit& kit, const MAProblem& p,
                             const GridFunction& phi, double A,
                             bool requirePositive = true) {
  HessianField m = quatHessian(kit, phi);
  m += p.background;
  if (requirePositive) {
    const PshReport rep = isPshField(m, true);
    if (!rep.holds)
      throw NumericalError("admissibility lost at point " +
                           std::to_string(rep.witness) + " (min eigenvalue " +
                           std::to_string(rep.minEigenvalue) + ")");
  }
  const GridFunction ft = p.effectiveRhs();
  GridFunction out(p.grid);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = m.mooreDetAt(i) - A * ft[i] * p.background.mooreDetAt(i);
  return out;
}

/// Derivative of the log density: psi -> Re tr((bg + Hess phi)^{-1} Hess psi).
class MALinearization {
 public:
  MALinearization(const DerivKit& kit, HessianField minv)
      : kit_(&kit), minv_(std::move(minv)) {}

  GridFunction apply(const GridFunction& psi) const {
    const HessianField h = quatHessian(*kit_, psi);
    GridFunction out(psi.grid());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = HessianField::realTraceProductAt(minv_, h, i);
    return out;
  }

  const HessianField& inverseField() const { return minv_; }

 private:
  const DerivKit* kit_;
  HessianField minv_;
};

inline MALinearization linearize(const DerivKit& kit, const MAProblem& p,
                                 const GridFunction& phi) {
  HessianField m = quatHessian(kit, phi);
  m += p.background;
  const PshReport rep = isPshField(m, true);
  if (!rep.holds)
    throw NumericalError("linearization at an inadmissible state");
  return MALinearization(kit, m.inverseField());
}

namespace solver_detail {

/// Inverse of cbar * (1/4) * Laplacian on the mean-zero subspace, applied in
/// Fourier space with the scheme's second-derivative symbols.
class SpectralPreconditioner {
 public:
  SpectralPreconditioner(const DerivKit& kit, double cbar)
      : ft_(kit.grid()), symbol_(kit.grid()) {
    const TorusGrid& g = kit.grid();
    for (std::size_t i = 0; i < g.npts(); ++i) {
      const auto modes = g.unflatten(i);
      double s = 0;
      for (int a = 0; a < g.axes(); ++a) s += kit.symbolD2(a, modes[a]);
      symbol_[i] = 0.25 * cbar * s;
    }
  }

  GridFunction apply(const GridFunction& r) const {
    CGridFunction rc = toComplex(r);
    CGridFunction rhat = ft_.forward(rc);
    for (std::size_t i = 0; i < rhat.size(); ++i) {
      if (symbol_[i] == 0.0)
        rhat[i] = 0.0;  // mean mode (and aliased zeros) removed
      else
        rhat[i] /= symbol_[i];
    }
    return realPart(ft_.inverse(rhat));
  }

 private:
  FourierTransform ft_;
  GridFunction symbol_;
};

inline void projectMeanZero(GridFunction& f) {
  const double m = mean(f);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= m;
}

/// Preconditioned BiCGStab on the mean-zero subspace.
inline GridFunction bicgstab(
    const std::function<GridFunction(const GridFunction&)>& op,
    const SpectralPreconditioner& prec, const GridFunction& rhs, int maxIter,
    double tol, bool* converged) {
  const TorusGrid& g = rhs.grid();
  auto dot = [](const GridFunction& a, const GridFunction& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  GridFunction x(g);
  GridFunction r = rhs;
  projectMeanZero(r);
  GridFunction r0 = r;
  const double rhsNorm = std::sqrt(dot(rhs, rhs));
  if (rhsNorm == 0.0) {
    if (converged) *converged = true;
    return x;
  }
  double rho = 1, alpha = 1, omega = 1;
  GridFunction v(g), pvec(g);
  for (int it = 0; it < maxIter; ++it) {
    const double rhoNew = dot(r0, r);
    if (std::abs(rhoNew) < 1e-300) break;
    if (it == 0) {
      pvec = r;
    } else {
      const double beta = (rhoNew / rho) * (alpha / omega);
      for (std::size_t i = 0; i < pvec.size(); ++i)
        pvec[i] = r[i] + beta * (pvec[i] - omega * v[i]);
    }
    rho = rhoNew;
    GridFunction phat = prec.apply(pvec);
    projectMeanZero(phat);
    v = op(phat);
    projectMeanZero(v);
    alpha = rho / dot(r0, v);
    GridFunction s = r;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= alpha * v[i];
    if (std::sqrt(dot(s, s)) < tol * rhsNorm) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * phat[i];
      if (converged) *converged = true;
      return x;
    }
    GridFunction shat = prec.apply(s);
    projectMeanZero(shat);
    GridFunction t = op(shat);
    projectMeanZero(t);
    const double tt = dot(t, t);
    omega = (tt == 0.0) ? 0.0 : dot(t, s) / tt;
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += alpha * phat[i] + omega * shat[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = s[i] - omega * t[i];
    if (std::sqrt(dot(r, r)) < tol * rhsNorm) {
      if (converged) *converged = true;
      return x;
    }
    if (omega == 0.0) break;
  }
  if (converged) *converged = false;
  return x;
}

}  // namespace solver_detail

inline MASolution solve(const MAProblem& p, const SolveOptions& opt = {}) {
  const DerivKit kit(p.grid, p.scheme);
  const GridFunction ft = p.effectiveRhs();
  {
    const PshReport rep = isPshField(p.background, true);
    if (!rep.holds) throw InputError("background is not strictly positive");
  }
  GridFunction detBg(p.grid);
  for (std::size_t i = 0; i < detBg.size(); ++i)
    detBg[i] = p.background.mooreDetAt(i);

  GridFunction phi = opt.initial ? *opt.initial : GridFunction(p.grid);
  solver_detail::projectMeanZero(phi);

  const double tolerance = opt.tolFactor * maxAbs(ft);
  MASolution sol;
  sol.status = SolveStatus::MaxIterations;

  double denom = 0;
  for (std::size_t i = 0; i < ft.size(); ++i) denom += ft[i] * detBg[i];

  for (int iter = 0; iter < opt.maxNewton; ++iter) {
    HessianField m = quatHessian(kit, phi);
    m += p.background;
    const PshReport rep = isPshField(m, true);
    if (!rep.holds)
      throw NumericalError("iterate lost admissibility at point " +
                           std::to_string(rep.witness));

    GridFunction detM(p.grid);
    double num = 0;
    for (std::size_t i = 0; i < detM.size(); ++i) {
      detM[i] = m.mooreDetAt(i);
      num += detM[i];
    }
    const double A = num / denom;

    double rnorm = 0;
    GridFunction logRes(p.grid);
    for (std::size_t i = 0; i < detM.size(); ++i) {
      const double target = A * ft[i] * detBg[i];
      rnorm = std::max(rnorm, std::abs(detM[i] - target));
      logRes[i] = std::log(detM[i]) - std::log(target);
    }
    sol.history.push_back({iter, rnorm, A, rep.minEigenvalue});
    sol.A = A;
    sol.residualNorm = rnorm;
    if (opt.onIterate) opt.onIterate(phi, m);
    if (rnorm < tolerance) {
      sol.status = SolveStatus::Converged;
      break;
    }

    const HessianField minv = m.inverseField();
    double cbar = 0;
    for (std::size_t i = 0; i < detM.size(); ++i) {
      double tr = 0;
      for (int k = 0; k < p.grid.n; ++k) tr += minv.channel(k, k, 0)[i];
      cbar += tr / p.grid.n;
    }
    cbar /= static_cast<double>(p.grid.npts());
    const MALinearization lin(kit, minv);
    const solver_detail::SpectralPreconditioner prec(kit, cbar);

    GridFunction rhs = logRes;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -rhs[i];
    bool krylovOk = false;
    GridFunction step = solver_detail::bicgstab(
        [&](const GridFunction& v) { return lin.apply(v); }, prec, rhs,
        opt.maxKrylov, opt.krylovTol, &krylovOk);

    // backtracking line search with a positivity guard
    auto logResNorm = [&](const GridFunction& cand, bool& admissible) {
      HessianField mc = quatHessian(kit, cand);
      mc += p.background;
      const PshReport r2 = isPshField(mc, true);
      if (!r2.holds) {
        admissible = false;
        return 0.0;
      }
      admissible = true;
      double s2 = 0;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        const double v = std::log(mc.mooreDetAt(i)) -
                         std::log(A * ft[i] * detBg[i]);
        s2 += v * v;
      }
      return std::sqrt(s2);
    };
    double f0 = 0;
    for (std::size_t i = 0; i < logRes.size(); ++i) f0 += logRes[i] * logRes[i];
    f0 = std::sqrt(f0);

    double s = 1.0;
    bool accepted = false;
    while (s >= 1e-14) {
      GridFunction cand = phi;
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += s * step[i];
      solver_detail::projectMeanZero(cand);
      bool admissible = false;
      const double f1 = logResNorm(cand, admissible);
      if (admissible && (f1 <= f0 * (1.0 - 1e-4 * s) || f1 < 1e-14)) {
        phi = std::move(cand);
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      sol.status = SolveStatus::LineSearchBreakdown;
      break;
    }
  }

  // final gauge
  if (p.gauge == Gauge::MaxZero) {
    const double m = maxValue(phi);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= m;
  } else {
    solver_detail::projectMeanZero(phi);
  }
  sol.phi = std::move(phi);
  return sol;
}

inline void writeIterationLog(const std::string& path,
                              const std::vector<IterRecord>& history) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << "iter,residual,A,min_eigenvalue\n";
  os.precision(17);
  for (const auto& r : history)
    os << r.iter << "," << r.residual << "," << r.A << "," << r.minEigenvalue
       << "\n";
}

}  // namespace hktlab
