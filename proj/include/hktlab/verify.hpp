#pragma once

// Library-wide invariant suite at desk scale.  Shared by the CLI `verify`
// subcommand and the test harness; every check is deterministic in the seed.

#include <cmath>
#include <functional>
#include <optional>
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

namespace hktlab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace verify_detail {

class Runner {
 public:
  void check(const std::string& name, const std::function<double()>& worstFn,
             double tolerance) {
    CheckResult r;
    r.name = name;
    try {
      const double worst = worstFn();
      r.pass = worst <= tolerance;
      std::ostringstream os;
      os << "worst " << worst << " (tol " << tolerance << ")";
      r.detail = os.str();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
};

inline Quaternion randomQuat(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng), g(rng), g(rng)};
}

inline HHMatrix randomHH(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HHMatrix m(n);
  for (int k = 0; k < n; ++k) {
    m.set(k, k, {g(rng), 0, 0, 0});
    for (int l = k + 1; l < n; ++l) m.set(k, l, randomQuat(rng));
  }
  return m;
}

inline HHMatrix randomPositiveHH(int n, std::mt19937_64& rng) {
  HHMatrix m = randomHH(n, rng);
  // shift by a multiple of the identity beyond the spectral radius
  double rowSum = 0;
  for (int k = 0; k < n; ++k) {
    double s = 0;
    for (int l = 0; l < n; ++l) s += m(k, l).norm();
    rowSum = std::max(rowSum, s);
  }
  return m + (rowSum + 0.5) * HHMatrix::identity(n);
}

inline QuatMatrix randomQuatMatrix(int n, std::mt19937_64& rng) {
  QuatMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = randomQuat(rng);
  return m;
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------

inline std::vector<CheckResult> verifyQuatCore(std::uint64_t seed) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed);

  run.check("quat: structure maps I J = -J I = K, squares = -Id", [&] {
    double worst = 0;
    const Eigen::Matrix4d I = structureI(), J = structureJ(), K = structureK();
    worst = std::max(worst, (I * J - K).cwiseAbs().maxCoeff());
    worst = std::max(worst, (J * I + K).cwiseAbs().maxCoeff());
    for (const auto& M : {I, J, K})
      worst = std::max(worst,
                       (M * M + Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff());
    return worst;
  }, 0.0);

  run.check("quat: right multiplication by unit imaginary squares to -Id", [&] {
    std::normal_distribution<double> g;
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
      Quaternion L{0, g(rng), g(rng), g(rng)};
      const double n = L.norm();
      if (n < 1e-9) continue;
      L = (1.0 / n) * L;
      const Eigen::Matrix4d R = rightMultMatrix(L);
      worst = std::max(worst,
                       (R * R + Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff());
    }
    return worst;
  }, 1e-12);

  run.check("quat: conj(q) q = |q|^2 (1e4 samples)", [&] {
    double worst = 0;
    for (int t = 0; t < 10000; ++t) {
      const Quaternion q = randomQuat(rng);
      const Quaternion p = q.conj() * q - Quaternion{q.normSq(), 0, 0, 0};
      const Quaternion p2 = q * q.conj() - Quaternion{q.normSq(), 0, 0, 0};
      worst = std::max({worst, p.maxAbs(), p2.maxAbs()});
    }
    return worst;
  }, 1e-12);

  run.check("quat: embeddings are ring homomorphisms (1e3 pairs)", [&] {
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
      const QuatMatrix a = randomQuatMatrix(3, rng), b = randomQuatMatrix(3, rng);
      const QuatMatrix ab = a * b;
      worst = std::max(worst, (realEmbed(ab) - realEmbed(a) * realEmbed(b))
                                  .cwiseAbs().maxCoeff());
      worst = std::max(worst, (complexEmbed(ab) - complexEmbed(a) * complexEmbed(b))
                                  .cwiseAbs().maxCoeff());
    }
    return worst;
  }, 1e-10);

  run.check("quat: Haar sampler moments (1e6 samples)", [&] {
    double st = 0, st2 = 0, normErr = 0;
    const int m = 1000000;
    for (int t = 0; t < m; ++t) {
      const Quaternion q = sampleUnitQuaternion(rng);
      normErr = std::max(normErr, std::abs(q.norm() - 1.0));
      st += q.t;
      st2 += q.t * q.t;
    }
    const double seMean = 0.5 / std::sqrt(double(m));       // sd(t) = 1/2
    const double seVar = std::sqrt(1.0 / 16.0) / std::sqrt(double(m));
    double worst = normErr / 1e-12;
    worst = std::max(worst, std::abs(st / m) / (5 * seMean));
    worst = std::max(worst, std::abs(st2 / m - 0.25) / (5 * seVar));
    return worst;  // normalized: must be <= 1
  }, 1.0);

  return run.take();
}

inline std::vector<CheckResult> verifyHLinalg(std::uint64_t seed) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed + 1);

  run.check("hherm: mooreDet^4 = det(realEmbed) (1e3, n<=4)", [&] {
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
      const int n = 1 + (t % 4);
      const HHMatrix a = randomHH(n, rng);
      const double md = mooreDet(a);
      const double dr = realEmbed(a.toQuatMatrix()).determinant();
      worst = std::max(worst, std::abs(md * md * md * md - dr) /
                                  (1.0 + std::abs(dr)));
    }
    return worst;
  }, 1e-8);

  run.check("hherm: mooreDet = complex det on Hermitian embeds (1e3)", [&] {
    std::normal_distribution<double> g;
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
      const int n = 1 + (t % 4);
      // random complex Hermitian viewed as hyper-Hermitian (y = z = 0)
      HHMatrix a(n);
      Eigen::MatrixXcd c(n, n);
      for (int r = 0; r < n; ++r) {
        c(r, r) = g(rng);
        a.set(r, r, {c(r, r).real(), 0, 0, 0});
        for (int s = r + 1; s < n; ++s) {
          c(r, s) = {g(rng), g(rng)};
          c(s, r) = std::conj(c(r, s));
          a.set(r, s, {c(r, s).real(), c(r, s).imag(), 0, 0});
        }
      }
      const double dc = c.determinant().real();
      worst = std::max(worst, std::abs(mooreDet(a) - dc) / (1.0 + std::abs(dc)));
    }
    return worst;
  }, 1e-9);

  run.check("hherm: mooreDet(PD) = eigenvalue product (200)", [&] {
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + (t % 4);
      const HHMatrix a = randomPositiveHH(n, rng);
      const HHEigen e = spectralDecompose(a);
      double prod = 1;
      for (double lam : e.eigenvalues) prod *= lam;
      const double md = mooreDet(a);
      worst = std::max(worst, std::abs(md - prod) / (1.0 + std::abs(md)));
      if (md <= 0) worst = 1.0;
    }
    return worst;
  }, 1e-8);

  run.check("hherm: oracle routes agree (500)", [&] {
    double worst = 0;
    for (int t = 0; t < 500; ++t) {
      const int n = 1 + (t % 4);
      const HHMatrix a = randomHH(n, rng);
      const double md = mooreDet(a);
      worst = std::max(worst, std::abs(md - mooreDetOracleReal(a)) /
                                  (1.0 + std::abs(md)));
      worst = std::max(worst, std::abs(md - mooreDetOracleComplex(a)) /
                                  (1.0 + std::abs(md)));
    }
    return worst;
  }, 1e-8);

  run.check("hherm: su2Average idempotent, image invariant", [&] {
    std::normal_distribution<double> g;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const int n = 1 + (t % 3);
      Eigen::MatrixXd q(4 * n, 4 * n);
      for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c) q(r, c) = g(rng);
      const QuadForm Q(q);
      const QuadForm avg = su2Average(Q);
      worst = std::max(worst, (su2Average(avg).matrix() - avg.matrix())
                                  .cwiseAbs().maxCoeff());
      for (const Quaternion& u :
           {Quaternion::i(), Quaternion::j(), Quaternion::k()}) {
        const Eigen::MatrixXd R = rightMultMatrixBig(n, u);
        worst = std::max(worst,
                         (avg.matrix() * R - R * avg.matrix()).cwiseAbs().maxCoeff());
      }
      worst = std::max(worst,
                       su2Average(qPlus(Q)).matrix().cwiseAbs().maxCoeff());
      // roundtrip through the matrix correspondence
      const HHMatrix h = invariantToHH(avg, 1e-6);
      worst = std::max(worst, (hhToInvariant(h).matrix() - avg.matrix())
                                  .cwiseAbs().maxCoeff());
    }
    return worst;
  }, 1e-12);

  run.check("hherm: eigenbasis {w, wI, wJ, wK} orthonormal + reconstruction", [&] {
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const int n = 1 + (t % 3);
      const HHMatrix a = randomHH(n, rng);
      const HHEigen e = spectralDecompose(a);
      // orthonormality of the 4n real vectors
      Eigen::MatrixXd basis(4 * n, 4 * n);
      int col = 0;
      for (const auto& w : e.eigenvectors)
        for (const Quaternion& u : {Quaternion::one(), Quaternion::i(),
                                    Quaternion::j(), Quaternion::k()})
          basis.col(col++) = w.scaledRight(u).toReal();
      worst = std::max(worst, (basis.transpose() * basis -
                               Eigen::MatrixXd::Identity(4 * n, 4 * n))
                                  .cwiseAbs().maxCoeff());
      // A w = w lambda and reconstruction through the real embedding
      Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(4 * n, 4 * n);
      for (int l = 0; l < n; ++l) {
        Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(4 * n, 4 * n);
        for (const Quaternion& u : {Quaternion::one(), Quaternion::i(),
                                    Quaternion::j(), Quaternion::k()}) {
          const Eigen::VectorXd v = e.eigenvectors[l].scaledRight(u).toReal();
          proj += v * v.transpose();
        }
        rec += e.eigenvalues[l] * proj;
      }
      worst = std::max(worst, (rec - realEmbed(a.toQuatMatrix()))
                                  .cwiseAbs().maxCoeff());
    }
    return worst;
  }, 1e-9);

  return run.take();
}

inline std::vector<CheckResult> verifyForms(std::uint64_t seed, int side = 6) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed + 2);
  const TorusGrid g = TorusGrid::cube(1, side);
  const DerivKit kit(g, DiffScheme::Spectral);

  run.check("forms: d^2 = dbar^2 = 0 and d dbar = -dbar d", [&] {
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
      const FormField f = asForm(randomTrigField(g, rng));
      const FormField df = dOp(kit, f);
      worst = std::max(worst, dOp(kit, df).maxAbsCoeff());
      const FormField dbf = dBarOp(kit, f);
      worst = std::max(worst, dBarOp(kit, dbf).maxAbsCoeff());
      worst = std::max(worst,
                       (dBarOp(kit, df) + dOp(kit, dbf)).maxAbsCoeff());
    }
    return worst;
  }, 1e-10);

  run.check("forms: J maps (p,q) to (q,p) with J^2 = (-1)^{p+q}", [&] {
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
      FormField eta(g, 1, 1);
      for (int ai = 0; ai < eta.countA(); ++ai)
        for (int bi = 0; bi < eta.countB(); ++bi) {
          const GridFunction re = randomTrigField(g, rng);
          const GridFunction im = randomTrigField(g, rng);
          auto& c = eta.coeff(ai, bi);
          for (std::size_t i = 0; i < c.size(); ++i) c[i] = {re[i], im[i]};
        }
      const FormField j1 = jAct(eta);
      if (j1.p() != 1 || j1.q() != 1) return 1.0;
      worst = std::max(worst, (jAct(j1) - eta).maxAbsCoeff());
      const FormField f10 = dOp(kit, asForm(randomTrigField(g, rng)));
      const FormField jf = jAct(f10);
      if (jf.p() != 0 || jf.q() != 1) return 1.0;
      worst = std::max(worst, (jAct(jf) + f10).maxAbsCoeff());
    }
    return worst;
  }, 1e-12);

  run.check("forms: d d_J = -d_J d on random fields", [&] {
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
      const FormField f = asForm(randomTrigField(g, rng));
      const FormField a = dOp(kit, dJOp(kit, f));
      const FormField b = dJOp(kit, dOp(kit, f));
      worst = std::max(worst, (a + b).maxAbsCoeff());
    }
    return worst;
  }, 1e-10);

  run.check("forms: fused dd_J equals first-order composition (band-limited)", [&] {
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
      const GridFunction u = randomTrigField(g, rng);
      const FormField a = ddJScalar(kit, u);
      const FormField b = dOp(kit, dJOp(kit, asForm(u)));
      worst = std::max(worst, (a - b).maxAbsCoeff());
    }
    return worst;
  }, 1e-9);

  run.check("forms: dd_J f is a real (2,0)-form for real f", [&] {
    double worst = 0;
    for (int t = 0; t < 5; ++t)
      worst = std::max(worst,
                       realnessResidual(ddJScalar(kit, randomTrigField(g, rng))));
    return worst;
  }, 1e-10);

  run.check("forms: flat form is d-closed and calibrates tIso to Id", [&] {
    const FormField om = flatOmega(g);
    double worst = dOp(kit, om).maxAbsCoeff();
    const HHField id = tIso(om);
    for (std::size_t i = 0; i < g.npts(); ++i) {
      const HHMatrix d = id[i] - HHMatrix::identity(g.n);
      worst = std::max(worst, d.maxAbs());
    }
    return worst;
  }, 1e-12);

  run.check("forms: tIso intertwines positivity (n=2 pointwise)", [&] {
    const TIso t(2);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const HHMatrix b = (trial % 2 == 0) ? randomPositiveHH(2, rng)
                                          : randomHH(2, rng);
      const Eigen::VectorXcd co = t.hhToFormCoeffs(b);
      double res = 0;
      const HHMatrix back = t.pointwise(co, &res);
      worst = std::max(worst, res);
      worst = std::max(worst, (back - b).maxAbs());
      double mb = 0, mk = 0;
      isPositive(b, true, &mb);
      isPositive(back, true, &mk);
      worst = std::max(worst, std::abs(mb - mk));
    }
    return worst;
  }, 1e-9);

  return run.take();
}

inline std::vector<CheckResult> verifyHessian(std::uint64_t seed, int side = 6) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed + 3);

  run.check("hessian: production route == SU(2)-averaging route", [&] {
    double worst = 0;
    for (int n = 1; n <= 2; ++n) {
      const TorusGrid g = TorusGrid::cube(n, (n == 1) ? side : 4);
      const DerivKit kit(g, DiffScheme::Spectral);
      for (int t = 0; t < (n == 1 ? 5 : 2); ++t) {
        const GridFunction u = randomTrigField(g, rng, 1);
        const HessianField a = quatHessian(kit, u);
        const HessianField b = quatHessianAvgRoute(kit, u);
        const double scale = std::max(1.0, maxAbs(u));
        for (std::size_t i = 0; i < g.npts(); ++i)
          worst = std::max(worst, (a.at(i) - b.at(i)).maxAbs() / scale);
      }
    }
    return worst;
  }, 1e-8);

  run.check("hessian: dirac(diracBar u) = Laplacian, mixed orders commute", [&] {
    const TorusGrid g = TorusGrid::cube(2, 4);
    const DerivKit kit(g, DiffScheme::Spectral);
    double worst = 0;
    for (int t = 0; t < 2; ++t) {
      const GridFunction u = randomTrigField(g, rng, 1);
      const QGridFunction qu = toQuaternionField(u);
      // diagonal: dirac_0 diracBar_0 u = sum of plain second derivatives
      const QGridFunction lap = dirac(kit, diracBar(kit, qu, 0), 0);
      GridFunction ref(g);
      for (int a = 0; a < 4; ++a) {
        const GridFunction dd = kit.d1(kit.d1(u, a), a);
        for (std::size_t i = 0; i < ref.size(); ++i) ref[i] += dd[i];
      }
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const Quaternion v = lap.at(i) - Quaternion{ref[i], 0, 0, 0};
        worst = std::max(worst, v.maxAbs());
      }
      // commutation across coordinates
      const QGridFunction ab = dirac(kit, diracBar(kit, qu, 0), 1);
      const QGridFunction ba = diracBar(kit, dirac(kit, qu, 1), 0);
      for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, (ab.at(i) - ba.at(i)).maxAbs());
    }
    return worst;
  }, 1e-10);

  run.check("hessian: split identity Hess((D^2 g)_+) = 0", [&] {
    const TorusGrid g = TorusGrid::cube(1, side);
    const DerivKit kit(g, DiffScheme::Spectral);
    std::uniform_int_distribution<std::size_t> pick(0, g.npts() - 1);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
      const GridFunction f = randomTrigField(g, rng);
      worst = std::max(worst, hessSplitIdentity(kit, f, pick(rng)));
    }
    return worst;
  }, 1e-9);

  run.check("hessian: Moore-route density == wedge-route density", [&] {
    double worst = 0;
    for (int n = 1; n <= 2; ++n) {
      const TorusGrid g = TorusGrid::cube(n, 4);
      const DerivKit kit(g, DiffScheme::Spectral);
      const GridFunction u = randomTrigField(g, rng, 1, 6, 0.02);
      const HessianField bg(g, HHMatrix::identity(n));
      const GridFunction moore = maDensity(kit, u, bg);
      const GridFunction wedge =
          wedgeRouteDensity(kit, u, flatOmega(g), flatTheta0(g));
      for (std::size_t i = 0; i < moore.size(); ++i)
        worst = std::max(worst, std::abs(moore[i] - wedge[i]));
    }
    return worst;
  }, 1e-8);

  run.check("hessian: psh classification with witnesses", [&] {
    const TorusGrid g = TorusGrid::cube(1, side);
    const DerivKit kit(g, DiffScheme::Spectral);
    const HessianField bg(g, HHMatrix::identity(1));
    const GridFunction s = randomTrigField(g, rng, 1, 3);
    const double scale = maxAbs(s);
    GridFunction small(g), large(g);
    for (std::size_t i = 0; i < s.size(); ++i) {
      small[i] = 0.001 / scale * s[i];
      large[i] = 100.0 / scale * s[i];
    }
    const PshReport a = isPsh(kit, small, true, &bg);
    const PshReport b = isPsh(kit, large, true, &bg);
    return (a.holds && !b.holds) ? 0.0 : 1.0;
  }, 0.5);

  return run.take();
}

inline std::vector<CheckResult> verifySolver(std::uint64_t seed, int side = 8) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed + 4);
  const TorusGrid g = TorusGrid::cube(1, side);
  const DerivKit kit(g, DiffScheme::Spectral);

  run.check("solver: f = 1 gives phi = 0, A = 1", [&] {
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0;
    const MASolution sol = solve(MAProblem(g, f));
    return std::max(maxAbs(sol.phi), std::abs(sol.A - 1.0));
  }, 1e-12);

  run.check("solver: gradient consistency of the linearization", [&] {
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0;
    const MAProblem p(g, f);
    GridFunction phi = randomTrigField(g, rng, 1, 4, 0.002);
    const GridFunction psi = randomTrigField(g, rng, 1, 4, 1.0);
    const MALinearization lin = linearize(kit, p, phi);
    const GridFunction lpsi = lin.apply(psi);
    // log-residual directional derivative vs linearization; first order in h
    auto logRes = [&](const GridFunction& q) {
      HessianField m = quatHessian(kit, q);
      m += p.background;
      GridFunction out(g);
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::log(m.mooreDetAt(i));
      return out;
    };
    double prevErr = 0, worstRatio = 0;
    for (int step = 0; step < 3; ++step) {
      const double h = std::pow(10.0, -3 - step);
      GridFunction pert = phi;
      for (std::size_t i = 0; i < pert.size(); ++i) pert[i] += h * psi[i];
      const GridFunction l0 = logRes(phi), l1 = logRes(pert);
      double err = 0;
      for (std::size_t i = 0; i < l0.size(); ++i)
        err = std::max(err, std::abs((l1[i] - l0[i]) / h - lpsi[i]));
      if (step > 0 && prevErr > 1e-12)
        worstRatio = std::max(worstRatio, err / prevErr);  // expect ~ 0.1
      prevErr = err;
    }
    return worstRatio;
  }, 0.3);

  run.check("solver: constants are in the linearization kernel", [&] {
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0;
    const MAProblem p(g, f);
    const GridFunction phi = randomTrigField(g, rng, 1, 4, 0.002);
    const MALinearization lin = linearize(kit, p, phi);
    GridFunction ones(g);
    for (std::size_t i = 0; i < ones.size(); ++i) ones[i] = 1.0;
    return maxAbs(lin.apply(ones));
  }, 1e-12);

  run.check("solver: translation equivariance", [&] {
    const GridFunction s = randomTrigField(g, rng, 1, 3);
    const double scale = maxAbs(s);
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = 1.0 + 0.1 * s[i] / scale;
    const MASolution a = solve(MAProblem(g, f));
    // shift by one cell along axis 0
    GridFunction fs(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto c = g.unflatten(i);
      c[0] = (c[0] + 1) % g.sides[0];
      fs[g.flatten(c)] = f[i];
    }
    const MASolution b = solve(MAProblem(g, fs));
    double worst = std::abs(a.A - b.A);
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto c = g.unflatten(i);
      c[0] = (c[0] + 1) % g.sides[0];
      worst = std::max(worst, std::abs(b.phi[g.flatten(c)] - a.phi[i]));
    }
    return worst;
  }, 1e-10);

  run.check("solver: two initializations agree after gauge", [&] {
    const GridFunction s = randomTrigField(g, rng, 1, 3);
    const double scale = maxAbs(s);
    GridFunction f(g);
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = 1.0 + 0.15 * s[i] / scale;
    const MAProblem p(g, f);
    const MASolution a = solve(p);
    SolveOptions opt;
    const GridFunction init = randomTrigField(g, rng, 1, 3, 0.002);
    opt.initial = &init;
    const MASolution b = solve(p, opt);
    double worst = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      worst = std::max(worst, std::abs(a.phi[i] - b.phi[i]));
    return worst;
  }, 1e-7);

  return run.take();
}

inline std::vector<CheckResult> verifyEstimates(std::uint64_t seed) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed + 5);

  run.check("estimates: det D^2 u <= det(Hess)^4 on convex quadratics (1e3)", [&] {
    std::normal_distribution<double> g;
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 1000; ++t) {
      const int n = 1 + (t % 2);
      Eigen::MatrixXd b(4 * n, 4 * n);
      for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c) b(r, c) = g(rng);
      const Eigen::MatrixXd s = b * b.transpose();
      const DetInequalityPoint pt = detInequalityMatrix(s);
      if (!pt.applicable) return 1.0;
      worst = std::max(worst, -pt.margin / pt.scale);
    }
    return worst;
  }, 1e-9);

  run.check("estimates: equality at SU(2)-invariant Hessians", [&] {
    std::normal_distribution<double> g;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const int n = 1 + (t % 2);
      Eigen::MatrixXd b(4 * n, 4 * n);
      for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c) b(r, c) = g(rng);
      const Eigen::MatrixXd s =
          su2Average(QuadForm(b * b.transpose())).matrix();
      const DetInequalityPoint pt = detInequalityMatrix(s);
      worst = std::max(worst, std::abs(pt.margin) / pt.scale);
    }
    return worst;
  }, 1e-10);

  run.check("estimates: proposition ratio scale invariance + anchor", [&] {
    RadialPshCase base;
    base.radius = 0.3;
    base.g = {0.7};
    double worst = 0;
    const RadialNorms n1 = radialNorms(base);
    const double r1 = n1.uInf / (2 * base.radius * n1.fL4);
    RadialPshCase scaled = base;
    scaled.g = {0.7 * 3.7};
    const RadialNorms n2 = radialNorms(scaled);
    const double r2 = n2.uInf / (2 * scaled.radius * n2.fL4);
    worst = std::max(worst, std::abs(r1 - r2));
    worst = std::max(worst, std::abs(r1 - quadraticAnchorRatio()) /
                                quadraticAnchorRatio() / 1e3);
    return worst;
  }, 1e-6);

  return run.take();
}

inline std::vector<CheckResult> verifyGauduchon(std::uint64_t seed, int side = 6) {
  using namespace verify_detail;
  Runner run;
  std::mt19937_64 rng(seed + 6);
  const TorusGrid g = TorusGrid::cube(1, side);
  const DerivKit kit(g, DiffScheme::Spectral);
  const FormField omegaFlat = flatOmega(g);
  const FormField theta0 = flatTheta0(g);

  // perturbed positive Omega = flat + eps dd_J g
  const GridFunction pg = randomTrigField(g, rng, 1, 4);
  FormField ddg = ddJScalar(kit, pg);
  const double eps = 0.3 / std::max(1e-12, ddg.maxAbsCoeff());
  FormField omega = omegaFlat;
  {
    FormField scaled = ddg;
    scaled *= std::complex<double>(eps, 0.0);
    omega += scaled;
  }

  run.check("gauduchon: A 1 = 0 and adjoint route agreement (flat+perturbed)", [&] {
    double worst = 0;
    for (const FormField* om :
         std::initializer_list<const FormField*>{&omegaFlat, &omega}) {
      const EllipticOperator A = assembleA(kit, *om, theta0);
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.mat.cols());
      worst = std::max(worst, (A.mat * ones).cwiseAbs().maxCoeff() /
                                  std::max(1.0, A.mat.cwiseAbs().maxCoeff()));
      const EllipticOperator Astar = assembleAstar(kit, *om, theta0, A);
      (void)Astar;  // assembleAstar throws on route disagreement
    }
    return worst;
  }, 1e-12);

  run.check("gauduchon: flat case is self-adjoint with constant generator", [&] {
    const EllipticOperator A = assembleA(kit, omegaFlat, theta0);
    const EllipticOperator Astar = assembleAstar(kit, omegaFlat, theta0, A);
    double worst = (A.mat - Astar.mat).cwiseAbs().maxCoeff() /
                   std::max(1.0, A.mat.cwiseAbs().maxCoeff());
    const GauduchonResult res = gauduchonGenerator(kit, omegaFlat, theta0, Astar);
    const double m = mean(res.generator);
    for (std::size_t i = 0; i < g.npts(); ++i)
      worst = std::max(worst, std::abs(res.generator[i] - m) / std::abs(m));
    return worst;
  }, 1e-8);

  run.check("gauduchon: perturbed kernel one-dimensional with strict sign", [&] {
    const EllipticOperator A = assembleA(kit, omega, theta0);
    const EllipticOperator Astar = assembleAstar(kit, omega, theta0, A);
    const GauduchonResult res = gauduchonGenerator(kit, omega, theta0, Astar);
    double worst = res.residual / 1e-8;  // normalized against its tolerance
    if (minValue(res.generator) <= 0) worst = std::max(worst, 2.0);
    if (res.sigma1 > 0 && res.sigma2 / res.sigma1 < 1e3) worst = 2.0;
    return worst;
  }, 1.0);

  run.check("gauduchon: Green reproduction, nonnegativity, L1 chain", [&] {
    const EllipticOperator A0 = assembleA(kit, omega, theta0);
    const EllipticOperator Astar = assembleAstar(kit, omega, theta0, A0);
    const GauduchonResult gres = gauduchonGenerator(kit, omega, theta0, Astar);
    const EllipticOperator A = assembleA(kit, omega, gres.theta);
    const GreenKernel green = greenFunction(A);
    double worst = 0;
    if (green.G.minCoeff() < 0) worst = 1.0;
    for (int t = 0; t < 20; ++t) {
      const GridFunction phi = randomTrigField(g, rng, 2, 6);
      worst = std::max(worst, greenReproductionError(
                                  green, A, gauduchon_detail::fieldToVec(phi)));
    }
    // L1 chain on scaled admissible fields with max = 0
    for (int t = 0; t < 5; ++t) {
      GridFunction psi = randomTrigField(g, rng, 1, 4);
      FormField dd = ddJScalar(kit, psi);
      const double s = 0.2 / std::max(1e-12, dd.maxAbsCoeff());
      GridFunction phi(g);
      for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = s * psi[i];
      const double mx = maxValue(phi);
      for (std::size_t i = 0; i < phi.size(); ++i) phi[i] -= mx;
      const L1BoundResult res = l1Bound(kit, phi, omega, theta0, green);
      if (!res.pass) worst = std::max(worst, 1.0);
    }
    return worst;
  }, 1e-8);

  run.check("gauduchon: flat Green matches the circulant closed form", [&] {
    const EllipticOperator A = assembleA(kit, omegaFlat, theta0);
    // flat Theta0 is already Gauduchon; the operator is symmetric
    const GreenKernel green = greenFunction(A);
    const FourierTransform ft(g);
    CGridFunction ghat(g);
    const double w0 = A.weights[0];
    for (std::size_t i = 0; i < g.npts(); ++i) {
      const auto modes = g.unflatten(i);
      double sym = 0;
      for (int a = 0; a < g.axes(); ++a) sym += kit.symbolD2(a, modes[a]);
      sym *= 0.25;
      ghat[i] = (sym == 0.0) ? 0.0 : -1.0 / (sym * w0);
    }
    const CGridFunction kfield = ft.inverse(ghat);
    // kernel row through the origin, shifted like the computed kernel
    double worst = 0;
    const double shift = green.d1;  // computed kernel was shifted by d1
    for (std::size_t ypt = 0; ypt < g.npts(); ++ypt) {
      const double closed = kfield[ypt].real() + shift;
      worst = std::max(worst, std::abs(green.G(0, ypt) - closed));
    }
    return worst;
  }, 1e-9);

  return run.take();
}

struct VerifySummary {
  std::vector<CheckResult> results;
  int failures = 0;
};

inline VerifySummary runVerifySuite(std::uint64_t seed) {
  VerifySummary s;
  auto absorb = [&](std::vector<CheckResult> v) {
    for (auto& r : v) {
      if (!r.pass) ++s.failures;
      s.results.push_back(std::move(r));
    }
  };
  absorb(verifyQuatCore(seed));
  absorb(verifyHLinalg(seed));
  absorb(verifyForms(seed));
  absorb(verifyHessian(seed));
  absorb(verifySolver(seed));
  absorb(verifyEstimates(seed));
  absorb(verifyGauduchon(seed));
  return s;
}

}  // namespace hktlab
