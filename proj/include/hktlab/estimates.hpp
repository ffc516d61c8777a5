#pragma once

// Numerical checks for the ABP chain: the pointwise determinant inequality
// det D^2 u <= det(Hess_H u)^4 (constant 1 under this library's
// normalization), the sup-norm bound for psh functions vanishing on a ball
// boundary, the sublevel-set lemma derived from it, and the C^0 sweep over
// solved Monge-Ampere problems.

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hktlab/common.hpp"
#include "hktlab/grid.hpp"
#include "hktlab/hessian.hpp"
#include "hktlab/solver.hpp"

namespace hktlab {

// ---------------------------------------------------------------------------
// Pointwise determinant inequality.

struct DetInequalityPoint {
  bool applicable = false;  // D^2 u >= 0 within the relaxed tolerance
  double margin = 0.0;      // det(<S>_u) - det(S) >= 0 when applicable
  double scale = 1.0;
};

/// det S <= det(su2Average(S)) for PSD symmetric S.  The right side equals
/// mooreDet(Hess)^4 under the invariant correspondence.
inline DetInequalityPoint detInequalityMatrix(const Eigen::MatrixXd& s) {
  DetInequalityPoint out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const double lamMin = es.eigenvalues().minCoeff();
  const double lamMax = std::abs(es.eigenvalues().maxCoeff());
  out.scale = std::max(1.0, std::pow(std::max(1.0, lamMax),
                                     static_cast<double>(s.rows())));
  if (lamMin < -tol::kPositivity * (1.0 + lamMax)) return out;  // excluded
  out.applicable = true;
  const Eigen::MatrixXd avg = su2Average(QuadForm(s)).matrix();
  out.margin = avg.determinant() - s.determinant();
  return out;
}

struct DetInequalityReport {
  GridFunction margins;         // only meaningful where applicable
  std::vector<bool> applicable;
  double minMargin = 0.0;       // over applicable points
  std::size_t checkedPoints = 0;
};

/// Margins of the inequality for D^2 u + realEmbed(background) over the grid.
inline DetInequalityReport detInequalityCheck(
    const DerivKit& kit, const GridFunction& u,
    const HHMatrix* background = nullptr) {
  const TorusGrid& g = u.grid();
  const int axes = g.axes();
  std::vector<GridFunction> d2;
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < axes; ++a)
    for (int b = a; b < axes; ++b) {
      d2.push_back(kit.d2mixed(u, a, b));
      pairs.emplace_back(a, b);
    }
  Eigen::MatrixXd bg = Eigen::MatrixXd::Zero(axes, axes);
  if (background) bg = realEmbed(background->toQuatMatrix());
  DetInequalityReport rep{GridFunction(g), std::vector<bool>(g.npts(), false)};
  rep.minMargin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.npts(); ++i) {
    Eigen::MatrixXd S = bg;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      S(pairs[t].first, pairs[t].second) += d2[t][i];
      if (pairs[t].first != pairs[t].second)
        S(pairs[t].second, pairs[t].first) += d2[t][i];
    }
    const DetInequalityPoint pt = detInequalityMatrix(S);
    rep.applicable[i] = pt.applicable;
    rep.margins[i] = pt.margin;
    if (pt.applicable) {
      ++rep.checkedPoints;
      rep.minMargin = std::min(rep.minMargin, pt.margin / pt.scale);
    }
  }
  if (rep.checkedPoints == 0) rep.minMargin = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Radial psh test functions on a ball in H^1 (n = 1).
//
// u(h) = psi(s), s = |h - center|^2, with psi(R^2) = 0.  Then
//   Hess_H u = 2 psi'(s) + s psi''(s)  (scalar for n = 1),
// and the Moore determinant f equals that scalar.  Ball integrals reduce to
// 1D radial quadrature against the S^3 area 2 pi^2.

struct RadialPshCase {
  Eigen::Vector4d center = Eigen::Vector4d::Zero();
  double radius = 0.25;
  std::vector<double> g;  // psi(s) = (s - R^2) * sum_m g[m] s^m, g(s) >= 0

  double psi(double s) const {
    double gs = 0, p = 1;
    for (double c : g) {
      gs += c * p;
      p *= s;
    }
    return (s - radius * radius) * gs;
  }
  double psiP(double s) const {
    double gs = 0, gp = 0, p = 1;
    for (std::size_t m = 0; m < g.size(); ++m) {
      gs += g[m] * p;
      if (m + 1 < g.size()) gp += g[m + 1] * (m + 1) * p;
      p *= s;
    }
    return gs + (s - radius * radius) * gp;
  }
  double psiPP(double s) const {
    double gp = 0, gpp = 0, p = 1;
    for (std::size_t m = 0; m + 1 < g.size(); ++m) {
      gp += g[m + 1] * (m + 1) * p;
      if (m + 2 < g.size()) gpp += g[m + 2] * (m + 2) * (m + 1) * p;
      p *= s;
    }
    return 2 * gp + (s - radius * radius) * gpp;
  }
  /// Scalar quaternionic Hessian along the radius (n = 1 Moore density).
  double hess(double s) const { return 2 * psiP(s) + s * psiPP(s); }
};

struct RadialNorms {
  double uInf = 0, uL1 = 0, fInf = 0, fL4 = 0;
  bool psh = true, nonpositive = true;
};

/// Radial quadrature of the case's norms over the ball (Simpson rule).
inline RadialNorms radialNorms(const RadialPshCase& c, int samples = 2048) {
  RadialNorms out;
  const double R = c.radius;
  const double area3 = 2.0 * M_PI * M_PI;  // area of unit S^3
  double l1 = 0, l4 = 0;
  for (int i = 0; i <= samples; ++i) {
    const double r = R * i / samples;
    const double s = r * r;
    const double u = c.psi(s);
    const double f = c.hess(s);
    out.uInf = std::max(out.uInf, std::abs(u));
    out.fInf = std::max(out.fInf, std::abs(f));
    if (u > 1e-12) out.nonpositive = false;
    if (f < -1e-12) out.psh = false;
    const double w = (i == 0 || i == samples) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    l1 += w * std::abs(u) * r * r * r;
    l4 += w * std::pow(std::abs(f), 4.0) * r * r * r;
  }
  const double hstep = R / samples / 3.0;
  out.uL1 = area3 * l1 * hstep;
  out.fL4 = std::pow(area3 * l4 * hstep, 0.25);
  return out;
}

struct PropositionRow {
  double uInf = 0, fL4 = 0, diam = 0, ratio = 0;
  bool admissible = false;
  std::string note;
};

struct PropositionReport {
  std::vector<PropositionRow> rows;
  double minRatio = 0, maxRatio = 0;
  int admissibleCount = 0;
  bool pass = false;
};

/// ||u||_inf <= C diam(D) ||f||_{L4}^{1/n} across a family (n = 1 here):
/// reports the fitted constant range and asserts it against `cap`.
inline PropositionReport keyPropositionCheck(
    const std::vector<RadialPshCase>& cases, double cap) {
  PropositionReport rep;
  rep.minRatio = std::numeric_limits<double>::infinity();
  for (const auto& c : cases) {
    PropositionRow row;
    const RadialNorms n = radialNorms(c);
    row.uInf = n.uInf;
    row.fL4 = n.fL4;
    row.diam = 2 * c.radius;
    if (!n.psh) {
      row.note = "skipped: not plurisubharmonic";
    } else if (!n.nonpositive) {
      row.note = "skipped: not nonpositive";
    } else if (n.fL4 <= 0 || n.uInf <= 0) {
      row.note = "skipped: degenerate";
    } else {
      row.admissible = true;
      row.ratio = n.uInf / (row.diam * n.fL4);
      rep.minRatio = std::min(rep.minRatio, row.ratio);
      rep.maxRatio = std::max(rep.maxRatio, row.ratio);
      ++rep.admissibleCount;
    }
    rep.rows.push_back(row);
  }
  rep.pass = rep.admissibleCount > 0 && rep.maxRatio <= cap;
  return rep;
}

/// Closed-form anchor ratio: the quadratic case u = c (s - R^2) gives
/// f = 2c, ||u||_inf = c R^2, ||f||_{L4} = 2c (pi^2/2)^{1/4} R, so the ratio
/// is independent of c and R.
inline double quadraticAnchorRatio() {
  return 1.0 / (4.0 * std::pow(M_PI * M_PI / 2.0, 0.25));
}

struct LemmaRow {
  double lhs = 0, rhs = 0, a = 0;
  bool sublevelCompact = false;
  bool pass = false;
  std::string note;
};

/// ||u||_inf <= a + C^{4n} diam^{4n} / a^{4n} * ||u||_1 * ||f||_inf^4, with
/// the constant inherited from the proposition fit.
inline LemmaRow keyLemmaCheck(const RadialPshCase& c, double a,
                              double propConstant) {
  LemmaRow row;
  row.a = a;
  const RadialNorms n = radialNorms(c);
  if (!n.psh || !n.nonpositive) {
    row.note = "skipped: inadmissible case";
    return row;
  }
  // sublevel set {u < inf u + a}: by monotonicity it is {s < s_a}; require
  // s_a strictly inside the ball.
  const double R2 = c.radius * c.radius;
  const double depth = -c.psi(0.0);
  if (!(a > 0) || a >= depth) {
    row.note = "skipped: sublevel set not compactly contained";
    return row;
  }
  double sa = R2;
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    const double s = R2 * i / samples;
    if (c.psi(s) >= c.psi(0.0) + a) {
      sa = s;
      break;
    }
  }
  row.sublevelCompact = sa < R2 * (1.0 - 1e-6);
  if (!row.sublevelCompact) {
    row.note = "skipped: sublevel set reaches the boundary";
    return row;
  }
  const double diam = 2 * c.radius;
  row.lhs = n.uInf;
  row.rhs = a + std::pow(propConstant, 4.0) * std::pow(diam / a, 4.0) * n.uL1 *
                    std::pow(n.fInf, 4.0);
  row.pass = row.lhs <= row.rhs * (1.0 + 1e-12);
  return row;
}

// ---------------------------------------------------------------------------
// C^0 sweep.

struct SweepRow {
  double k = 0;
  double fInf = 0;
  double phiInf = 0;
  int newtonSteps = 0;
  bool solved = false;
  std::string note;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double c1 = 0, c2 = 0;  // envelope phiInf <= c1 + c2 * fInf^4
  bool envelopeHolds = false;
  bool monotone = false;
};

/// Solves (Omega + dd_J phi)^n = A f_k Omega^n for f_k = normalized exp(k s)
/// and fits the quartic upper envelope.
inline SweepReport c0Sweep(const TorusGrid& grid, const GridFunction& seed,
                           const std::vector<double>& ks,
                           const SolveOptions& baseOpt = {}) {
  SweepReport rep;
  const HessianField bg(grid, HHMatrix::identity(grid.n));
  GridFunction detBg(grid);
  for (std::size_t i = 0; i < detBg.size(); ++i) detBg[i] = bg.mooreDetAt(i);
  const double detBgSum = sum(detBg);

  for (double k : ks) {
    SweepRow row;
    row.k = k;
    GridFunction f(grid);
    double wsum = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = std::exp(k * seed[i]);
      wsum += f[i] * detBg[i];
    }
    const double norm = detBgSum / wsum;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= norm;
    row.fInf = maxAbs(f);
    try {
      MAProblem p(grid, f, Gauge::MaxZero);
      const MASolution sol = solve(p, baseOpt);
      row.solved = sol.status == SolveStatus::Converged;
      row.newtonSteps = sol.newtonSteps();
      row.phiInf = maxAbs(sol.phi);
      if (!row.solved) row.note = "solver did not converge";
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    rep.rows.push_back(row);
  }

  // envelope fit: c1 from the flattest case, c2 as the max residual slope
  std::vector<const SweepRow*> ok;
  for (const auto& r : rep.rows)
    if (r.solved) ok.push_back(&r);
  if (ok.size() >= 2) {
    double c1 = std::numeric_limits<double>::infinity();
    for (const auto* r : ok) c1 = std::min(c1, r->phiInf);
    double c2 = 0;
    for (const auto* r : ok) {
      const double x4 = std::pow(r->fInf, 4.0);
      if (x4 > 0) c2 = std::max(c2, (r->phiInf - c1) / x4);
    }
    rep.c1 = c1;
    rep.c2 = c2;
    rep.envelopeHolds = true;
    for (const auto* r : ok)
      if (r->phiInf > rep.c1 + rep.c2 * std::pow(r->fInf, 4.0) + 1e-12)
        rep.envelopeHolds = false;
    rep.monotone = true;
    for (std::size_t i = 1; i < ok.size(); ++i)
      if (ok[i]->phiInf < ok[i - 1]->phiInf - 1e-12) rep.monotone = false;
  }
  return rep;
}

inline void writeSweepCsv(const std::string& path, const SweepReport& rep) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << "k,f_inf,phi_inf,newton_steps,solved,note\n";
  os.precision(17);
  for (const auto& r : rep.rows)
    os << r.k << "," << r.fInf << "," << r.phiInf << "," << r.newtonSteps << ","
       << (r.solved ? 1 : 0) << "," << r.note << "\n";
  os << "# envelope: c1=" << rep.c1 << " c2=" << rep.c2
     << " holds=" << (rep.envelopeHolds ? 1 : 0) << "\n";
}

}  // namespace hktlab
