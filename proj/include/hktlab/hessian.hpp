#pragma once

// Dirac-type first-order operators, the quaternionic Hessian of grid
// functions, plurisubharmonicity, the split identity for the SU(2)-complement
// of a quadratic form, and the two routes to the Monge-Ampere density.
//
// Normative definition: quatHessian(u) = invariantToHH(su2Average(D^2 u)).
// The production route assembles the same matrix from mixed second
// derivatives as H_kl = (1/4) sum_{a,b} e_a * d^2u/(da_k db_l) * conj(e_b);
// the two agree exactly (the 1/4 absorbs the Dirac-route scale).

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hktlab/common.hpp"
#include "hktlab/forms.hpp"
#include "hktlab/grid.hpp"
#include "hktlab/hherm.hpp"

namespace hktlab {

/// Quaternion-valued grid function (component fields t,x,y,z).
struct QGridFunction {
  std::array<GridFunction, 4> c;
  explicit QGridFunction(const TorusGrid& g)
      : c{GridFunction(g), GridFunction(g), GridFunction(g), GridFunction(g)} {}
  const TorusGrid& grid() const { return c[0].grid(); }
  Quaternion at(std::size_t i) const {
    return {c[0][i], c[1][i], c[2][i], c[3][i]};
  }
  void set(std::size_t i, const Quaternion& q) {
    for (int k = 0; k < 4; ++k) c[k][i] = q[k];
  }
};

inline QGridFunction toQuaternionField(const GridFunction& f) {
  QGridFunction out(f.grid());
  out.c[0] = f;
  return out;
}

/// dbar-type Dirac operator in quaternionic coordinate `coord`:
/// F -> dF/dt + i dF/dx + j dF/dy + k dF/dz (factors on the left).
inline QGridFunction diracBar(const DerivKit& kit, const QGridFunction& f,
                              int coord) {
  const TorusGrid& g = f.grid();
  QGridFunction out(g);
  for (int a = 0; a < 4; ++a) {
    QGridFunction da(g);
    for (int comp = 0; comp < 4; ++comp)
      da.c[comp] = kit.d1(f.c[comp], 4 * coord + a);
    const Quaternion e = quatUnit(a);
    for (std::size_t i = 0; i < g.npts(); ++i) {
      const Quaternion v = e * da.at(i);
      for (int comp = 0; comp < 4; ++comp) out.c[comp][i] += v[comp];
    }
  }
  return out;
}

/// Conjugate operator: F -> dF/dt - (dF/dx) i - (dF/dy) j - (dF/dz) k
/// (factors on the right).
inline QGridFunction dirac(const DerivKit& kit, const QGridFunction& f,
                           int coord) {
  const TorusGrid& g = f.grid();
  QGridFunction out(g);
  for (int a = 0; a < 4; ++a) {
    QGridFunction da(g);
    for (int comp = 0; comp < 4; ++comp)
      da.c[comp] = kit.d1(f.c[comp], 4 * coord + a);
    const Quaternion e = quatUnit(a).conj();
    for (std::size_t i = 0; i < g.npts(); ++i) {
      const Quaternion v = da.at(i) * e;
      for (int comp = 0; comp < 4; ++comp) out.c[comp][i] += v[comp];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Pointwise hyper-Hermitian field, stored by channels (diagonal entries one
/// real channel, upper off-diagonal entries four).
class HessianField {
 public:
  HessianField() = default;
  explicit HessianField(const TorusGrid& g) : grid_(g), n_(g.n) {
    const std::size_t np = g.npts();
    for (int k = 0; k < n_; ++k)
      for (int l = k; l < n_; ++l) {
        const int nch = (k == l) ? 1 : 4;
        for (int c = 0; c < nch; ++c) ch_.emplace_back(np, 0.0);
      }
  }
  HessianField(const TorusGrid& g, const HHMatrix& constant) : HessianField(g) {
    for (int k = 0; k < n_; ++k)
      for (int l = k; l < n_; ++l) {
        const int nch = (k == l) ? 1 : 4;
        for (int c = 0; c < nch; ++c) {
          auto& v = channel(k, l, c);
          const double val = constant(k, l)[c];
          std::fill(v.begin(), v.end(), val);
        }
      }
  }

  const TorusGrid& grid() const { return grid_; }
  int n() const { return n_; }

  std::vector<double>& channel(int k, int l, int c) {
    return ch_[chIndex(k, l, c)];
  }
  const std::vector<double>& channel(int k, int l, int c) const {
    return ch_[chIndex(k, l, c)];
  }

  HHMatrix at(std::size_t i) const {
    HHMatrix m(n_);
    for (int k = 0; k < n_; ++k) {
      m.set(k, k, {channel(k, k, 0)[i], 0, 0, 0});
      for (int l = k + 1; l < n_; ++l) {
        Quaternion q;
        for (int c = 0; c < 4; ++c) q[c] = channel(k, l, c)[i];
        m.set(k, l, q);
      }
    }
    return m;
  }

  HessianField& operator+=(const HessianField& o) {
    for (std::size_t i = 0; i < ch_.size(); ++i)
      for (std::size_t j = 0; j < ch_[i].size(); ++j) ch_[i][j] += o.ch_[i][j];
    return *this;
  }
  friend HessianField operator+(HessianField a, const HessianField& b) {
    return a += b;
  }

  /// Re tr(A(i) * B(i)) without materializing the matrices.
  static double realTraceProductAt(const HessianField& a, const HessianField& b,
                                   std::size_t i) {
    double s = 0;
    for (int k = 0; k < a.n_; ++k) {
      s += a.channel(k, k, 0)[i] * b.channel(k, k, 0)[i];
      for (int l = k + 1; l < a.n_; ++l)
        for (int c = 0; c < 4; ++c)
          s += 2.0 * a.channel(k, l, c)[i] * b.channel(k, l, c)[i];
    }
    return s;
  }

  /// Pointwise Moore determinant (closed forms for n <= 2).
  double mooreDetAt(std::size_t i) const {
    if (n_ == 1) return channel(0, 0, 0)[i];
    if (n_ == 2) {
      double off = 0;
      for (int c = 0; c < 4; ++c) {
        const double v = channel(0, 1, c)[i];
        off += v * v;
      }
      return channel(0, 0, 0)[i] * channel(1, 1, 0)[i] - off;
    }
    return mooreDet(at(i));
  }

  /// Pointwise inverse field (positive definite input expected).
  HessianField inverseField() const {
    HessianField out(grid_);
    const std::size_t np = grid_.npts();
    if (n_ == 1) {
      const auto& m = channel(0, 0, 0);
      auto& o = out.channel(0, 0, 0);
      for (std::size_t i = 0; i < np; ++i) {
        if (m[i] == 0.0) throw NumericalError("singular pointwise matrix");
        o[i] = 1.0 / m[i];
      }
      return out;
    }
    for (std::size_t i = 0; i < np; ++i) {
      const HHMatrix inv = hhInverse(at(i));
      for (int k = 0; k < n_; ++k) {
        out.channel(k, k, 0)[i] = inv(k, k).t;
        for (int l = k + 1; l < n_; ++l)
          for (int c = 0; c < 4; ++c) out.channel(k, l, c)[i] = inv(k, l)[c];
      }
    }
    return out;
  }

 private:
  int chIndex(int k, int l, int c) const {
    int idx = 0;
    for (int kk = 0; kk < n_; ++kk)
      for (int ll = kk; ll < n_; ++ll) {
        if (kk == k && ll == l) return idx + c;
        idx += (kk == ll) ? 1 : 4;
      }
    throw InputError("bad channel index");
  }

  TorusGrid grid_;
  int n_ = 0;
  std::vector<std::vector<double>> ch_;
};

namespace hess_detail {

/// e_a * conj(e_b) multiplication table.
inline const Quaternion& basisPairProduct(int a, int b) {
  static const std::array<std::array<Quaternion, 4>, 4> table = [] {
    std::array<std::array<Quaternion, 4>, 4> t{};
    for (int a_ = 0; a_ < 4; ++a_)
      for (int b_ = 0; b_ < 4; ++b_)
        t[a_][b_] = quatUnit(a_) * quatUnit(b_).conj();
    return t;
  }();
  return table[a][b];
}

/// Test hook: scales the production Hessian route (verification fixture).
inline double& hessianRouteScale() {
  static double s = 1.0;
  return s;
}

}  // namespace hess_detail

/// Quaternionic Hessian, production route (fused mixed second derivatives).
inline HessianField quatHessian(const DerivKit& kit, const GridFunction& u) {
  const TorusGrid& g = u.grid();
  HessianField out(g);
  const std::size_t np = g.npts();
  const double scale = 0.25 * hess_detail::hessianRouteScale();
  for (int k = 0; k < g.n; ++k) {
    // diagonal entry: (1/4) * Laplacian in the k-th quaternionic coordinate
    auto& diag = out.channel(k, k, 0);
    for (int a = 0; a < 4; ++a) {
      const GridFunction d = kit.d2mixed(u, 4 * k + a, 4 * k + a);
      for (std::size_t i = 0; i < np; ++i) diag[i] += scale * d[i];
    }
    for (int l = k + 1; l < g.n; ++l)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const Quaternion w = scale * hess_detail::basisPairProduct(a, b);
          const GridFunction d = kit.d2mixed(u, 4 * k + a, 4 * l + b);
          for (int c = 0; c < 4; ++c) {
            if (w[c] == 0.0) continue;
            auto& dst = out.channel(k, l, c);
            for (std::size_t i = 0; i < np; ++i) dst[i] += w[c] * d[i];
          }
        }
  }
  return out;
}

/// Oracle route: the full real Hessian D^2 u per point, SU(2)-averaged and
/// read off through invariantToHH.
inline HessianField quatHessianAvgRoute(const DerivKit& kit,
                                        const GridFunction& u) {
  const TorusGrid& g = u.grid();
  const int axes = g.axes();
  std::vector<GridFunction> d2;
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < axes; ++a)
    for (int b = a; b < axes; ++b) {
      d2.push_back(kit.d2mixed(u, a, b));
      pairs.emplace_back(a, b);
    }
  HessianField out(g);
  for (std::size_t i = 0; i < g.npts(); ++i) {
    Eigen::MatrixXd S(axes, axes);
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      S(pairs[t].first, pairs[t].second) = d2[t][i];
      S(pairs[t].second, pairs[t].first) = d2[t][i];
    }
    const HHMatrix h = invariantToHH(su2Average(QuadForm(S)), 1e-6);
    for (int k = 0; k < g.n; ++k) {
      out.channel(k, k, 0)[i] = h(k, k).t;
      for (int l = k + 1; l < g.n; ++l)
        for (int c = 0; c < 4; ++c) out.channel(k, l, c)[i] = h(k, l)[c];
    }
  }
  return out;
}

struct PshReport {
  bool holds = true;
  std::size_t witness = 0;     // violating point when !holds
  double minEigenvalue = 0.0;  // smallest eigenvalue seen
};

/// Pointwise (strict) positivity of background + Hess u.
inline PshReport isPshField(const HessianField& h, bool strict,
                            const HessianField* background = nullptr) {
  PshReport rep;
  rep.minEigenvalue = std::numeric_limits<double>::infinity();
  const std::size_t np = h.grid().npts();
  for (std::size_t i = 0; i < np; ++i) {
    double minEig = 0;
    if (h.n() == 1) {
      minEig = h.channel(0, 0, 0)[i] +
               (background ? background->channel(0, 0, 0)[i] : 0.0);
    } else {
      HHMatrix m = h.at(i);
      if (background) m = m + background->at(i);
      isPositive(m, strict, &minEig);
    }
    if (minEig < rep.minEigenvalue) {
      rep.minEigenvalue = minEig;
      rep.witness = i;
    }
  }
  if (strict)
    rep.holds = rep.minEigenvalue > 0.0;
  else
    rep.holds = rep.minEigenvalue >= -tol::kPositivity *
                                         (1.0 + std::abs(rep.minEigenvalue));
  return rep;
}

inline PshReport isPsh(const DerivKit& kit, const GridFunction& u, bool strict,
                       const HessianField* background = nullptr) {
  const HessianField h = quatHessian(kit, u);
  return isPshField(h, strict, background);
}

/// Real Hessian matrix D^2 u at one grid point (local stencil evaluation).
inline Eigen::MatrixXd realHessianAt(const DerivKit& kit, const GridFunction& u,
                                     std::size_t point) {
  const TorusGrid& g = u.grid();
  const int axes = g.axes();
  const auto coords = g.unflatten(point);
  Eigen::MatrixXd S(axes, axes);
  auto valueAt = [&](std::vector<int> c) { return u[g.flatten(c)]; };
  for (int a = 0; a < axes; ++a)
    for (int b = a; b < axes; ++b) {
      double acc = 0;
      if (a == b) {
        const auto row = detail::secondDerivRow(g.sides[a], g.lengths[a],
                                                kit.scheme());
        auto c = coords;
        for (int r = 0; r < g.sides[a]; ++r) {
          c[a] = coords[a] + r;
          acc += row[r] * valueAt(c);
        }
      } else {
        const auto rowA = detail::firstDerivRow(g.sides[a], g.lengths[a],
                                                kit.scheme());
        const auto rowB = detail::firstDerivRow(g.sides[b], g.lengths[b],
                                                kit.scheme());
        auto c = coords;
        for (int ra = 0; ra < g.sides[a]; ++ra) {
          if (rowA[ra] == 0.0) continue;
          for (int rb = 0; rb < g.sides[b]; ++rb) {
            if (rowB[rb] == 0.0) continue;
            c[a] = coords[a] + ra;
            c[b] = coords[b] + rb;
            acc += rowA[ra] * rowB[rb] * valueAt(c);
          }
        }
      }
      S(a, b) = acc;
      S(b, a) = acc;
    }
  return S;
}

/// Quaternionic Hessian of the quadratic h -> (D^2_{z0} g)_+(h); identically
/// zero in exact arithmetic.  Returns the max-abs entry.
inline double hessSplitIdentity(const DerivKit& kit, const GridFunction& g,
                                std::size_t point) {
  const Eigen::MatrixXd S = realHessianAt(kit, g, point);
  const QuadForm plus = qPlus(QuadForm(S));
  // the quadratic p(h) = plus(h) has D^2 p = 2 * plus
  const QuadForm avg = su2Average(QuadForm(2.0 * plus.matrix()));
  const HHMatrix h = invariantToHH(avg, 1e-6);
  return h.maxAbs();
}

// ---------------------------------------------------------------------------

/// Moore-route density: pointwise mooreDet(background + Hess u).
inline GridFunction maDensity(const DerivKit& kit, const GridFunction& u,
                              const HessianField& background,
                              bool requireStrict = false) {
  HessianField h = quatHessian(kit, u);
  h += background;
  if (requireStrict) {
    const PshReport rep = isPshField(h, true);
    if (!rep.holds)
      throw NumericalError("density requested at a non-positive point " +
                           std::to_string(rep.witness));
  }
  GridFunction out(u.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h.mooreDetAt(i);
  return out;
}

/// Wedge-route density ((Omega + dd_J u)^n ^ conj Theta) / (Omega_flat^n ^
/// conj Theta); agrees with the Moore route against background tIso(Omega).
inline GridFunction wedgeRouteDensity(const DerivKit& kit, const GridFunction& u,
                                      const FormField& omega,
                                      const FormField& thetaRef) {
  const TorusGrid& g = u.grid();
  const FormField thetaBar = conjForm(thetaRef);
  FormField pert = omega + ddJScalar(kit, u);
  const CGridFunction num =
      topCoefficient(wedge(wedgePower(pert, g.n), thetaBar));
  const CGridFunction den =
      topCoefficient(wedge(wedgePower(flatOmega(g), g.n), thetaBar));
  GridFunction out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(den[i]) == 0.0)
      throw NumericalError("degenerate reference volume form");
    const std::complex<double> r = num[i] / den[i];
    out[i] = r.real();
  }
  return out;
}

}  // namespace hktlab
