#pragma once

// Discrete Gauduchon theory on the torus: the elliptic operator
//   A f = (dd_J f ^ Omega^{n-1} ^ conj Theta0) / (Omega^n ^ conj Theta0),
// its adjoint in the weighted inner product <f,g>_w = sum f g w with
// w = density(Omega^n ^ conj Theta0) * cell volume, the sign-definite
// generator of ker A*, the Green function of A built by direct inversion on
// the complement of constants, and the L^1 bound chain.
//
// Dense linear algebra throughout; grids are desk scale (<= 8^4 points).

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hktlab/common.hpp"
#include "hktlab/forms.hpp"
#include "hktlab/grid.hpp"

namespace hktlab {

struct EllipticOperator {
  TorusGrid grid;
  Eigen::MatrixXd mat;      // dense operator matrix
  Eigen::VectorXd weights;  // w(x) = top-density(x) * cell volume
  double vol = 0;           // sum of weights

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return mat * f; }
};

namespace gauduchon_detail {

inline Eigen::VectorXd fieldToVec(const GridFunction& f) {
  Eigen::VectorXd v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i];
  return v;
}
inline GridFunction vecToField(const TorusGrid& g, const Eigen::VectorXd& v) {
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = v[i];
  return f;
}

/// Real positive top coefficient of Omega^n ^ conj(Theta0); throws with a
/// witness on sign loss.
inline GridFunction topDensity(const FormField& omega, const FormField& theta0) {
  const TorusGrid& g = omega.grid();
  const CGridFunction den =
      topCoefficient(wedge(wedgePower(omega, g.n), conjForm(theta0)));
  GridFunction out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(den[i].imag()) > 1e-9 * (1.0 + std::abs(den[i].real())))
      throw InputError("volume density is not real at point " +
                       std::to_string(i));
    if (!(den[i].real() > 0.0))
      throw InputError("volume density loses positivity at point " +
                       std::to_string(i));
    out[i] = den[i].real();
  }
  return out;
}

}  // namespace gauduchon_detail

/// Assembles A column by column through the form pipeline.
inline EllipticOperator assembleA(const DerivKit& kit, const FormField& omega,
                                  const FormField& theta0) {
  const TorusGrid& g = omega.grid();
  const std::size_t np = g.npts();
  const GridFunction den = gauduchon_detail::topDensity(omega, theta0);
  const FormField thetaBar = conjForm(theta0);
  const FormField omPow = wedgePower(omega, g.n - 1);

  EllipticOperator op;
  op.grid = g;
  op.mat.resize(np, np);
  op.weights.resize(np);
  const double cv = g.cellVolume();
  for (std::size_t i = 0; i < np; ++i) op.weights[i] = den[i] * cv;
  op.vol = op.weights.sum();

  CGridFunction basis(g);
  for (std::size_t col = 0; col < np; ++col) {
    if (col > 0) basis[col - 1] = 0.0;
    basis[col] = 1.0;
    const FormField dd = ddJScalar(kit, basis);
    const CGridFunction num =
        topCoefficient(wedge(wedge(dd, omPow), thetaBar));
    for (std::size_t r = 0; r < np; ++r)
      op.mat(r, col) = num[r].real() / den[r];
  }
  return op;
}

/// Assembles A* = g -> dd_J(g Omega^{n-1} ^ conj Theta0) / density through
/// the form route, then verifies it against the weighted transpose of A.
inline EllipticOperator assembleAstar(const DerivKit& kit,
                                      const FormField& omega,
                                      const FormField& theta0,
                                      const EllipticOperator& aOp,
                                      double routeTol = tol::kRouteMatch) {
  const TorusGrid& g = omega.grid();
  const std::size_t np = g.npts();
  const GridFunction den = gauduchon_detail::topDensity(omega, theta0);
  const FormField mu = wedge(wedgePower(omega, g.n - 1), conjForm(theta0));

  EllipticOperator op;
  op.grid = g;
  op.mat.resize(np, np);
  op.weights = aOp.weights;
  op.vol = aOp.vol;

  CGridFunction basis(g);
  for (std::size_t col = 0; col < np; ++col) {
    if (col > 0) basis[col - 1] = 0.0;
    basis[col] = 1.0;
    FormField gm = mu;
    for (int ai = 0; ai < gm.countA(); ++ai)
      for (int bi = 0; bi < gm.countB(); ++bi) {
        auto& c = gm.coeff(ai, bi);
        for (std::size_t i = 0; i < np; ++i) c[i] *= basis[i];
      }
    const CGridFunction num = topCoefficient(ddJForm(kit, gm));
    for (std::size_t r = 0; r < np; ++r)
      op.mat(r, col) = num[r].real() / den[r];
  }

  // independent-route verification: A* must equal W^{-1} A^T W
  const Eigen::VectorXd& w = aOp.weights;
  const Eigen::MatrixXd adj =
      w.cwiseInverse().asDiagonal() * aOp.mat.transpose() * w.asDiagonal();
  const double scale = std::max(1.0, aOp.mat.cwiseAbs().maxCoeff());
  const double diff = (adj - op.mat).cwiseAbs().maxCoeff();
  if (diff > routeTol * scale)
    throw NumericalError("adjoint route disagreement: " + std::to_string(diff));
  return op;
}

struct GauduchonResult {
  GridFunction generator;  // G, sign-normalized so <G,1>_w > 0, min G > 0
  FormField theta;         // G * Theta0
  double sigma1 = 0, sigma2 = 0;  // smallest singular values of A*
  double pairing = 0;             // <G,1>_w
  double residual = 0;            // || dd_J(Omega^{n-1} ^ conj Theta) ||_inf
};

namespace gauduchon_detail {

/// Two smallest eigenpairs of the PSD matrix N by shifted inverse iteration
/// with deflation.  Deterministic (fixed seed).
inline void smallestTwo(const Eigen::MatrixXd& N, double& lam1,
                        Eigen::VectorXd& v1, double& lam2) {
  const int n = static_cast<int>(N.rows());
  const double scale = N.diagonal().cwiseAbs().maxCoeff();
  const double delta = 1e-12 * std::max(1.0, scale);
  const Eigen::MatrixXd M = N + delta * Eigen::MatrixXd::Identity(n, n);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("factorization failed in kernel solve");

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  auto randomVec = [&] {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };
  v1 = randomVec().normalized();
  for (int it = 0; it < 30; ++it) {
    v1 = ldlt.solve(v1);
    v1.normalize();
  }
  lam1 = v1.dot(N * v1);

  Eigen::VectorXd v2 = randomVec();
  v2 -= v1 * v1.dot(v2);
  v2.normalize();
  for (int it = 0; it < 30; ++it) {
    v2 = ldlt.solve(v2);
    v2 -= v1 * v1.dot(v2);
    v2.normalize();
  }
  lam2 = v2.dot(N * v2);
}

}  // namespace gauduchon_detail

/// Kernel generator of A*: asserts numerical one-dimensionality, strict sign,
/// and a nonzero pairing with constants; returns Theta = G * Theta0 and the
/// verified Gauduchon residual.
inline GauduchonResult gauduchonGenerator(const DerivKit& kit,
                                          const FormField& omega,
                                          const FormField& theta0,
                                          const EllipticOperator& astar,
                                          double sigmaRatioMin = 1e3) {
  const TorusGrid& g = omega.grid();
  const std::size_t np = g.npts();

  const Eigen::MatrixXd N = astar.mat.transpose() * astar.mat;
  double lam1 = 0, lam2 = 0;
  Eigen::VectorXd v1;
  gauduchon_detail::smallestTwo(N, lam1, v1, lam2);
  GauduchonResult out;
  out.sigma1 = std::sqrt(std::max(0.0, lam1));
  out.sigma2 = std::sqrt(std::max(0.0, lam2));
  if (out.sigma1 > 0 && out.sigma2 / out.sigma1 < sigmaRatioMin)
    throw NumericalError("kernel of A* is not numerically one-dimensional "
                         "(sigma2/sigma1 = " +
                         std::to_string(out.sigma2 / out.sigma1) + ")");

  Eigen::VectorXd G = v1;
  const double pairing = (G.array() * astar.weights.array()).sum();
  if (pairing < 0) G = -G;
  out.pairing = std::abs(pairing);
  const double gw = std::sqrt((G.array().square() * astar.weights.array()).sum());
  if (out.pairing <= 1e-3 * gw * std::sqrt(astar.vol))
    throw NumericalError("pairing <G,1>_w vanishes within margin");
  if (G.minCoeff() <= 0.0)
    throw NumericalError("kernel generator changes sign (min " +
                         std::to_string(G.minCoeff()) + ", max " +
                         std::to_string(G.maxCoeff()) + ")");

  out.generator = gauduchon_detail::vecToField(g, G);
  out.theta = theta0;
  for (int ai = 0; ai < out.theta.countA(); ++ai)
    for (int bi = 0; bi < out.theta.countB(); ++bi) {
      auto& c = out.theta.coeff(ai, bi);
      for (std::size_t i = 0; i < np; ++i) c[i] *= G[i];
    }

  const FormField res =
      ddJForm(kit, wedge(wedgePower(omega, g.n - 1), conjForm(out.theta)));
  out.residual = res.maxAbsCoeff() / std::max(1e-300, maxAbs(out.generator));
  return out;
}

struct GreenKernel {
  TorusGrid grid;
  Eigen::MatrixXd G;        // shifted so min G = 0
  Eigen::VectorXd weights;  // of the Gauduchon-weighted operator
  double vol = 0;
  double d1 = 0;  // lower bound of the unshifted kernel (G0 >= -d1)
  double d2 = 0;  // max_x ||G(x,.)||_{L1(w)}
};

/// Green function of A (assembled with the Gauduchon form, so that weighted
/// column sums of A vanish):  -sum_y G(x,y) A phi(y) w(y) = phi(x) - mean_w.
inline GreenKernel greenFunction(const EllipticOperator& aOp,
                                 double columnTol = 1e-8) {
  const std::size_t np = aOp.grid.npts();
  const Eigen::VectorXd& w = aOp.weights;
  const double scale = std::max(1.0, aOp.mat.cwiseAbs().maxCoeff());
  const double colResidual = (w.transpose() * aOp.mat).cwiseAbs().maxCoeff();
  if (colResidual > columnTol * scale * w.maxCoeff())
    throw InputError("operator is not Gauduchon-weighted: integral of A phi "
                     "does not vanish");

  // solve A^T W g_x = -e_x + w/vol with the mean-zero row gauge
  Eigen::MatrixXd M = aOp.mat.transpose() * w.asDiagonal();
  M += Eigen::MatrixXd::Constant(np, np, 1.0 / static_cast<double>(np));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::MatrixXd Minv = lu.inverse();

  GreenKernel out;
  out.grid = aOp.grid;
  out.weights = w;
  out.vol = aOp.vol;
  const Eigen::VectorXd u = Minv * (w / aOp.vol);
  out.G = (-Minv + u * Eigen::VectorXd::Ones(np).transpose()).transpose();
  const double gmin = out.G.minCoeff();
  out.d1 = -gmin;  // also the shift applied below
  out.G.array() -= gmin;
  out.d2 = (out.G * w).cwiseAbs().maxCoeff();
  return out;
}

/// Reproduction residual of property (0) for a given test function.
inline double greenReproductionError(const GreenKernel& k,
                                     const EllipticOperator& aOp,
                                     const Eigen::VectorXd& phi) {
  const Eigen::VectorXd aphi = aOp.mat * phi;
  const Eigen::VectorXd lhs = -(k.G * (k.weights.asDiagonal() * aphi));
  const double meanw = phi.dot(k.weights) / k.vol;
  const Eigen::VectorXd rhs = phi.array() - meanw;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

struct L1BoundResult {
  double lhs = 0;       // mean-normalized ||phi||_{L1(w)}
  double rhs = 0;       // ||G(x*,.)||_{L1(w)} at the max point
  double rhsMax = 0;    // max_x ||G(x,.)||_{L1(w)}
  bool pass = false;
};

/// The L^1 chain for admissible phi with max phi = 0:
///   (1/vol) sum |phi| w = -sum_y G(x*,y) A phi(y) w(y) <= sum_y G(x*,y) w(y).
inline L1BoundResult l1Bound(const DerivKit& kit, const GridFunction& phi,
                             const FormField& omega, const FormField& theta0,
                             const GreenKernel& green) {
  const TorusGrid& g = phi.grid();
  if (std::abs(maxValue(phi)) > 1e-10)
    throw InputError("l1Bound expects max phi = 0");
  // admissibility: Omega + dd_J phi stays positive (t-positive)
  FormField pert = omega + ddJScalar(kit, phi);
  const GridFunction dens = gauduchon_detail::topDensity(pert, theta0);
  (void)dens;  // topDensity throws with a witness if positivity fails

  const Eigen::VectorXd pv = gauduchon_detail::fieldToVec(phi);
  L1BoundResult out;
  out.lhs = pv.cwiseAbs().dot(green.weights) / green.vol;
  std::size_t xstar = 0;
  for (std::size_t i = 1; i < g.npts(); ++i)
    if (pv[i] > pv[xstar]) xstar = i;
  out.rhs = green.G.row(xstar).dot(green.weights);
  out.rhsMax = (green.G * green.weights).maxCoeff();
  out.pass = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-12;
  return out;
}

}  // namespace hktlab
