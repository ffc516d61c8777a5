// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Grid sizes, tolerances and sample counts are pinned here.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hktlab/estimates.hpp"
#include "hktlab/forms.hpp"
#include "hktlab/gauduchon.hpp"
#include "hktlab/grid.hpp"
#include "hktlab/hessian.hpp"
#include "hktlab/hherm.hpp"
#include "hktlab/quat.hpp"
#include "hktlab/solver.hpp"

using namespace hktlab;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail, double secs) {
  if (!pass) ++failures;
  std::ostringstream os;
  os << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": "
     << detail << " (" << static_cast<int>(secs) << " s)";
  std::cout << os.str() << std::endl;
}

template <typename Fn>
void criterion(int number, const Fn& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = fn();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(number, pass, detail, secs);
}

Quaternion randq(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng), g(rng)};
}

HHMatrix randomHH(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HHMatrix m(n);
  for (int k = 0; k < n; ++k) {
    m.set(k, k, {g(rng), 0, 0, 0});
    for (int l = k + 1; l < n; ++l) m.set(k, l, randq(rng));
  }
  return m;
}

// shared across criteria 5/6: accepted solver iterates of the criterion-6 runs
std::vector<GridFunction> solverIterates;

}  // namespace

int main() {
  const std::uint64_t seed = 424242;

  // 1. Moore determinant conformance.
  criterion(1, [&] {
    std::mt19937_64 rng(seed + 1);
    double worstReal = 0;
    for (int t = 0; t < 1000; ++t) {
      const int n = 1 + (t % 4);
      const HHMatrix a = randomHH(n, rng);
      const double md = mooreDet(a);
      const double dr = realEmbed(a.toQuatMatrix()).determinant();
      worstReal = std::max(worstReal, std::abs(md * md * md * md - dr) /
                                          (1.0 + std::abs(dr)));
    }
    std::normal_distribution<double> g;
    double worstCplx = 0;
    for (int t = 0; t < 1000; ++t) {
      const int n = 1 + (t % 4);
      HHMatrix a(n);
      Eigen::MatrixXcd c(n, n);
      for (int r = 0; r < n; ++r) {
        c(r, r) = g(rng);
        a.set(r, r, {c(r, r).real(), 0, 0, 0});
        for (int s2 = r + 1; s2 < n; ++s2) {
          c(r, s2) = {g(rng), g(rng)};
          c(s2, r) = std::conj(c(r, s2));
          a.set(r, s2, {c(r, s2).real(), c(r, s2).imag(), 0, 0});
        }
      }
      const double dc = c.determinant().real();
      worstCplx = std::max(worstCplx,
                           std::abs(mooreDet(a) - dc) / (1.0 + std::abs(dc)));
    }
    std::ostringstream os;
    os << "mooreDet^4 vs realEmbed rel err " << worstReal
       << " (tol 1e-8), complex Hermitian rel err " << worstCplx
       << " (tol 1e-9)";
    return std::make_pair(worstReal <= 1e-8 && worstCplx <= 1e-9, os.str());
  });

  // 2. SU(2) averaging formula vs Monte-Carlo Haar integration.
  criterion(2, [&] {
    std::mt19937_64 rng(seed + 2);
    std::normal_distribution<double> g;
    double worstSes = 0;
    for (int form = 0; form < 50; ++form) {
      const int n = 1 + (form % 2);
      Eigen::MatrixXd q(4 * n, 4 * n);
      for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c) q(r, c) = g(rng);
      const QuadForm Q(q);
      const QuadForm avg = su2Average(Q);
      Eigen::VectorXd x(4 * n);
      for (int c = 0; c < 4 * n; ++c) x[c] = g(rng);
      const int m = 100000;
      double acc = 0, acc2 = 0;
      for (int t = 0; t < m; ++t) {
        const Quaternion u = sampleUnitQuaternion(rng);
        const Eigen::VectorXd xu = rightMultMatrixBig(n, u) * x;
        const double v = xu.dot(Q.matrix() * xu);
        acc += v;
        acc2 += v * v;
      }
      const double mc = acc / m;
      const double se = std::sqrt(std::max(1e-300, (acc2 / m - mc * mc) / m));
      const double formula = x.dot(avg.matrix() * x);
      worstSes = std::max(worstSes, std::abs(mc - formula) / se);
    }
    std::ostringstream os;
    os << "worst |MC - formula| = " << worstSes << " standard errors (cap 5)";
    return std::make_pair(worstSes <= 5.0, os.str());
  });

  // 3. Operator identities at n = 1, 12^4, spectral scheme.
  criterion(3, [&] {
    std::mt19937_64 rng(seed + 3);
    const TorusGrid g = TorusGrid::cube(1, 12);
    const DerivKit kit(g, DiffScheme::Spectral);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
      const GridFunction u = randomTrigField(g, rng);
      const double scale = 1.0 + dOp(kit, dJOp(kit, asForm(u))).maxAbsCoeff();
      // d d_J = -d_J d
      const FormField anti =
          dOp(kit, dJOp(kit, asForm(u))) + dJOp(kit, dOp(kit, asForm(u)));
      worst = std::max(worst, anti.maxAbsCoeff() / scale);
      // J : (p,q) -> (q,p)
      const FormField df = dOp(kit, asForm(u));
      const FormField jdf = jAct(df);
      if (jdf.p() != 0 || jdf.q() != 1) worst = 1.0;
      // realness of dd_J u
      const FormField ddj = ddJScalar(kit, u);
      worst = std::max(worst, realnessResidual(ddj) / scale);
      // quatHessian equals the SU(2)-average of D^2 u
      const HessianField a = quatHessian(kit, u);
      const HessianField b = quatHessianAvgRoute(kit, u);
      const double hscale = 1.0 + maxAbs(u);
      for (std::size_t i = 0; i < g.npts(); ++i)
        worst = std::max(worst, (a.at(i) - b.at(i)).maxAbs() / hscale);
    }
    std::ostringstream os;
    os << "worst identity residual " << worst << " (tol 1e-8)";
    return std::make_pair(worst <= 1e-8, os.str());
  });

  // 4. Hess of the SU(2)-complement quadratic vanishes.
  criterion(4, [&] {
    std::mt19937_64 rng(seed + 4);
    const TorusGrid g = TorusGrid::cube(1, 8);
    const DerivKit kit(g, DiffScheme::Spectral);
    std::uniform_int_distribution<std::size_t> pick(0, g.npts() - 1);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const GridFunction f = randomTrigField(g, rng);
      worst = std::max(worst, hessSplitIdentity(kit, f, pick(rng)));
    }
    std::ostringstream os;
    os << "worst residual " << worst << " over 100 (field, point) pairs "
       << "(tol 1e-9)";
    return std::make_pair(worst <= 1e-9, os.str());
  });

  // 6 runs before 5 so that criterion 5 can check the solver iterates; both
  // are reported in order below.
  std::ostringstream c6detail;
  bool c6pass = true;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::mt19937_64 rng(seed + 6);
      // (a) f = 1: exact solution
      const TorusGrid g16 = TorusGrid::cube(1, 16);
      {
        GridFunction f(g16);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0;
        const MASolution sol = solve(MAProblem(g16, f));
        const double err = std::max(maxAbs(sol.phi), std::abs(sol.A - 1.0));
        c6pass = c6pass && err <= 1e-12;
        c6detail << "f=1 err " << err << " (tol 1e-12)";
      }
      // (b) cosine rhs on 16^4 with iterate capture
      GridFunction f(g16);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = g16.point(i);
        f[i] = 1.0 + 0.1 * std::cos(2 * M_PI * x[0]);
      }
      SolveOptions opt;
      opt.onIterate = [&](const GridFunction& phi, const HessianField&) {
        solverIterates.push_back(phi);
      };
      const MASolution sol = solve(MAProblem(g16, f), opt);
      const bool conv = sol.status == SolveStatus::Converged &&
                        sol.residualNorm < 1e-9 * maxAbs(f) &&
                        sol.newtonSteps() < 30;
      c6pass = c6pass && conv;
      c6detail << "; cosine residual " << sol.residualNorm << " in "
               << sol.newtonSteps() << " steps";
      // (c) translation equivariance
      GridFunction fs(g16);
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto c = g16.unflatten(i);
        c[0] = (c[0] + 5) % g16.sides[0];
        fs[g16.flatten(c)] = f[i];
      }
      const MASolution sol2 = solve(MAProblem(g16, fs));
      double shiftErr = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto c = g16.unflatten(i);
        c[0] = (c[0] + 5) % g16.sides[0];
        shiftErr = std::max(shiftErr,
                            std::abs(sol2.phi[g16.flatten(c)] - sol.phi[i]));
      }
      c6pass = c6pass && shiftErr <= 1e-10;
      c6detail << "; translation err " << shiftErr << " (tol 1e-10)";
      // (d) two initializations
      GridFunction init = randomTrigField(g16, rng, 1, 3, 1.0);
      const double isc = maxAbs(init);
      for (std::size_t i = 0; i < init.size(); ++i) init[i] *= 1e-3 / isc;
      SolveOptions opt2;
      opt2.initial = &init;
      const MASolution sol3 = solve(MAProblem(g16, f), opt2);
      double initErr = 0;
      for (std::size_t i = 0; i < f.size(); ++i)
        initErr = std::max(initErr, std::abs(sol3.phi[i] - sol.phi[i]));
      c6pass = c6pass && initErr <= 1e-7;
      c6detail << "; initialization err " << initErr << " (tol 1e-7)";
    } catch (const std::exception& e) {
      c6pass = false;
      c6detail << " exception: " << e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    // 5. Determinant inequality (includes the iterates captured above).
    criterion(5, [&] {
      std::mt19937_64 rng(seed + 5);
      std::normal_distribution<double> gauss;
      double worst = std::numeric_limits<double>::infinity();
      for (int t = 0; t < 1000; ++t) {
        const int n = 1 + (t % 2);
        Eigen::MatrixXd b(4 * n, 4 * n);
        for (int r = 0; r < 4 * n; ++r)
          for (int c = 0; c < 4 * n; ++c) b(r, c) = gauss(rng);
        const DetInequalityPoint pt = detInequalityMatrix(b * b.transpose());
        if (!pt.applicable) return std::make_pair(false, std::string("psd case excluded"));
        worst = std::min(worst, pt.margin / pt.scale);
      }
      double worstInv = 0;
      for (int t = 0; t < 200; ++t) {
        const int n = 1 + (t % 2);
        Eigen::MatrixXd b(4 * n, 4 * n);
        for (int r = 0; r < 4 * n; ++r)
          for (int c = 0; c < 4 * n; ++c) b(r, c) = gauss(rng);
        const DetInequalityPoint pt =
            detInequalityMatrix(su2Average(QuadForm(b * b.transpose())).matrix());
        worstInv = std::max(worstInv, std::abs(pt.margin) / pt.scale);
      }
      // every accepted iterate of the criterion-6 cosine solve
      const TorusGrid g16 = TorusGrid::cube(1, 16);
      const DerivKit kit16(g16, DiffScheme::Spectral);
      const HHMatrix id = HHMatrix::identity(1);
      double worstIter = std::numeric_limits<double>::infinity();
      for (const GridFunction& phi : solverIterates) {
        const DetInequalityReport rep = detInequalityCheck(kit16, phi, &id);
        worstIter = std::min(worstIter, rep.minMargin);
      }
      if (solverIterates.empty()) worstIter = 0;
      std::ostringstream os;
      os << "min margin " << worst << " (>= -1e-9), invariant equality "
         << worstInv << " (<= 1e-10), solver iterates (" << solverIterates.size()
         << ") min margin " << worstIter << " (>= -1e-9)";
      return std::make_pair(
          worst >= -1e-9 && worstInv <= 1e-10 && worstIter >= -1e-9, os.str());
    });
    report(6, c6pass, c6detail.str(), secs);
  }

  // 7. C^0 sweep with refinement stability.
  criterion(7, [&] {
    std::mt19937_64 rng(seed + 7);
    const TorusGrid g12 = TorusGrid::cube(1, 12);
    GridFunction seed12 = randomTrigField(g12, rng, 1, 4);
    const double sc = maxAbs(seed12);
    for (std::size_t i = 0; i < seed12.size(); ++i) seed12[i] /= sc;
    const std::vector<double> ks = {0, 1, 2, 3, 4, 5};
    const SweepReport rep12 = c0Sweep(g12, seed12, ks);

    // the same smooth seed transferred to the finer grid
    const TorusGrid g16 = TorusGrid::cube(1, 16);
    std::mt19937_64 rng2(seed + 7);
    GridFunction seed16 = randomTrigField(g16, rng2, 1, 4);
    for (std::size_t i = 0; i < seed16.size(); ++i) seed16[i] /= sc;
    const SweepReport rep16 = c0Sweep(g16, seed16, ks);

    bool pass = rep12.envelopeHolds && rep16.envelopeHolds && rep12.monotone;
    for (const auto& r : rep12.rows) pass = pass && r.solved;
    for (const auto& r : rep16.rows) pass = pass && r.solved;
    // refinement stability of the fitted constants (the c1 offsets are ~0
    // here; compare the quartic coefficients and the top-case sup norms)
    const double c2rel =
        std::abs(rep16.c2 - rep12.c2) / std::max(1e-12, rep12.c2);
    pass = pass && c2rel <= 0.2;
    const double topRel =
        std::abs(rep16.rows.back().phiInf - rep12.rows.back().phiInf) /
        std::max(1e-12, rep12.rows.back().phiInf);
    pass = pass && topRel <= 0.02;
    std::ostringstream os;
    os << "envelope holds on both grids, monotone; c2 drift " << c2rel
       << " (cap 0.2), top-case drift " << topRel << " (cap 0.02)";
    writeSweepCsv("acceptance_sweep_12.csv", rep12);
    writeSweepCsv("acceptance_sweep_16.csv", rep16);
    return std::make_pair(pass, os.str());
  });

  // 8/9/10 share the 8^4 Gauduchon geometry.
  const TorusGrid g8 = TorusGrid::cube(1, 8);
  const DerivKit kit8(g8, DiffScheme::Spectral);
  FormField omega = flatOmega(g8);
  {
    std::mt19937_64 rng(seed + 8);
    const GridFunction pg = randomTrigField(g8, rng, 1, 4);
    FormField dd = ddJScalar(kit8, pg);
    dd *= std::complex<double>(0.1 / std::max(1e-12, dd.maxAbsCoeff()), 0);
    omega += dd;
  }
  const FormField theta0 = flatTheta0(g8);
  GauduchonResult gaud;
  EllipticOperator aGauduchon;
  bool gaudReady = false;

  criterion(8, [&] {
    const EllipticOperator A = assembleA(kit8, omega, theta0);
    const EllipticOperator Astar = assembleAstar(kit8, omega, theta0, A);
    gaud = gauduchonGenerator(kit8, omega, theta0, Astar);
    aGauduchon = assembleA(kit8, omega, gaud.theta);
    gaudReady = true;
    const double minG = minValue(gaud.generator);
    const double maxG = maxValue(gaud.generator);
    const double sratio = gaud.sigma2 / std::max(gaud.sigma1, 1e-300);
    const bool pass = sratio > 1e3 && minG > 0 && minG / maxG > 0 &&
                      gaud.pairing > 0 && gaud.residual <= 1e-8;
    std::ostringstream os;
    os << "sigma2/sigma1 " << sratio << " (> 1e3), min|G|/max|G| "
       << minG / maxG << " (> 0), <G,1>_w " << gaud.pairing
       << ", Gauduchon residual " << gaud.residual << " (tol 1e-8)";
    return std::make_pair(pass, os.str());
  });

  criterion(9, [&] {
    if (!gaudReady) return std::make_pair(false, std::string("criterion 8 did not complete"));
    // perturbed-geometry Green function: reproduction + nonnegativity + D2
    const GreenKernel green = greenFunction(aGauduchon);
    std::mt19937_64 rng(seed + 9);
    double worstRep = 0;
    for (int t = 0; t < 100; ++t) {
      const GridFunction phi = randomTrigField(g8, rng, 2, 6);
      Eigen::VectorXd v(phi.size());
      for (std::size_t i = 0; i < phi.size(); ++i) v[i] = phi[i];
      worstRep = std::max(worstRep,
                          greenReproductionError(green, aGauduchon, v));
    }
    const bool nonneg = green.G.minCoeff() >= 0.0;
    // flat-case kernel against the circulant closed form
    const EllipticOperator aFlat = assembleA(kit8, flatOmega(g8), theta0);
    const GreenKernel greenFlat = greenFunction(aFlat);
    const FourierTransform ft(g8);
    CGridFunction ghat(g8);
    const double w0 = aFlat.weights[0];
    for (std::size_t i = 0; i < g8.npts(); ++i) {
      const auto modes = g8.unflatten(i);
      double sym = 0;
      for (int a = 0; a < 4; ++a) sym += kit8.symbolD2(a, modes[a]);
      sym *= 0.25;
      ghat[i] = (sym == 0.0) ? 0.0 : -1.0 / (sym * w0);
    }
    const CGridFunction kernel = ft.inverse(ghat);
    double worstCirc = 0;
    for (std::size_t y = 0; y < g8.npts(); ++y)
      worstCirc = std::max(worstCirc,
                           std::abs(greenFlat.G(0, y) -
                                    (kernel[y].real() + greenFlat.d1)));
    const bool pass = worstRep <= 1e-8 && nonneg && worstCirc <= 1e-9 &&
                      std::isfinite(green.d2);
    std::ostringstream os;
    os << "reproduction err " << worstRep << " (tol 1e-8), kernel min "
       << green.G.minCoeff() << ", circulant err " << worstCirc
       << " (tol 1e-9), D2 = " << green.d2;
    return std::make_pair(pass, os.str());
  });

  criterion(10, [&] {
    if (!gaudReady) return std::make_pair(false, std::string("criterion 8 did not complete"));
    const GreenKernel green = greenFunction(aGauduchon);
    std::mt19937_64 rng(seed + 10);
    int passes = 0;
    double worstSlack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 50; ++t) {
      GridFunction psi = randomTrigField(g8, rng, 1, 4);
      FormField dd = ddJScalar(kit8, psi);
      const double s = 0.25 / std::max(1e-12, dd.maxAbsCoeff());
      GridFunction phi(g8);
      for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = s * psi[i];
      const double mx = maxValue(phi);
      for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= mx;
      const L1BoundResult res = l1Bound(kit8, phi, omega, theta0, green);
      if (res.pass) ++passes;
      worstSlack = std::min(worstSlack, res.rhs - res.lhs);
    }
    std::ostringstream os;
    os << passes << "/50 admissible fields satisfy the bound, min slack "
       << worstSlack;
    return std::make_pair(passes == 50, os.str());
  });

  std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED")
            << " (" << failures << " failing criteria)" << std::endl;
  return failures == 0 ? 0 : 1;
}
