#pragma once

// Flat (p,q)-form fields on the discrete torus in I-holomorphic coordinates,
// with d, dbar, the pointwise J action, d_J = J^{-1} dbar J, wedge products,
// and the t-isomorphism between real (2,0)-forms and hyper-Hermitian fields.
//
// Complex coordinates per quaternionic coordinate q_k = t + xi + yj + zk:
//     z_{2k}   = t + i x        (0-based even slot)
//     z_{2k+1} = y - i z        (0-based odd slot)
// These are holomorphic for I = R_i; the structure triple is (R_i, R_j, -R_k).
// The induced action on covectors:
//     J dz_{2k} = -conj(dz_{2k+1}),   J dz_{2k+1} = +conj(dz_{2k}),
// extended C-linearly and multiplicatively to monomials.
//
// The t-isomorphism is anchored so that t(dd_J u) is exactly the quaternionic
// Hessian of u: the map from hyper-Hermitian matrices B to the constant
// (2,0)-form dd_J(h -> 1/2 h^T realEmbed(B) h) is invertible, sends the
// identity to Omega_flat = sum_k dz_{2k} ^ dz_{2k+1}, and t is its inverse.

#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "hktlab/common.hpp"
#include "hktlab/grid.hpp"
#include "hktlab/hherm.hpp"

namespace hktlab {

using HHField = Field<HHMatrix>;

namespace forms_detail {

using Mask = std::uint32_t;

inline int popcount(Mask m) { return __builtin_popcount(m); }

/// Increasing multi-indices of size `deg` over {0,...,nc-1}, lexicographic.
inline std::vector<Mask> combinations(int nc, int deg) {
  std::vector<Mask> out;
  if (deg < 0 || deg > nc) return out;
  std::vector<int> idx(deg);
  for (int i = 0; i < deg; ++i) idx[i] = i;
  for (;;) {
    Mask m = 0;
    for (int i : idx) m |= (Mask{1} << i);
    out.push_back(m);
    int pos = deg - 1;
    while (pos >= 0 && idx[pos] == nc - deg + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < deg; ++i) idx[i] = idx[i - 1] + 1;
  }
  if (deg == 0) out = {Mask{0}};
  return out;
}

inline int rankOf(const std::vector<Mask>& combos, Mask m) {
  for (std::size_t i = 0; i < combos.size(); ++i)
    if (combos[i] == m) return static_cast<int>(i);
  throw NumericalError("multi-index not found");
}

/// Sign of inserting generator c into the increasing set `m`; 0 if present.
inline int insertSign(Mask m, int c, Mask& outMask) {
  const Mask bit = Mask{1} << c;
  if (m & bit) return 0;
  outMask = m | bit;
  const int below = popcount(m & (bit - 1));
  return (below % 2 == 0) ? 1 : -1;
}

/// Sign of merging two disjoint increasing sets (wedge of sorted groups).
inline int mergeSign(Mask a, Mask b, Mask& outMask) {
  if (a & b) return 0;
  outMask = a | b;
  int sign = 1;
  for (int c = 0; c < 32; ++c) {
    if (!(b & (Mask{1} << c))) continue;
    const Mask above = a & ~((Mask{1} << (c + 1)) - 1);
    if (popcount(above) % 2 == 1) sign = -sign;
  }
  return sign;
}

/// Bubble-sort sign of an arbitrary index list (used by the J action).
inline int sortSign(std::vector<int>& v) {
  int sign = 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j + 1 < v.size() - i; ++j)
      if (v[j] > v[j + 1]) {
        std::swap(v[j], v[j + 1]);
        sign = -sign;
      }
  return sign;
}

inline std::vector<int> maskToList(Mask m) {
  std::vector<int> out;
  for (int c = 0; c < 32; ++c)
    if (m & (Mask{1} << c)) out.push_back(c);
  return out;
}

inline int pairIndex(int a) { return a ^ 1; }
/// J dz_a = sign * conj(dz_{a^1});  J conj(dz_a) = sign * dz_{a^1}.
inline double jSign(int a) { return (a % 2 == 0) ? -1.0 : 1.0; }

/// Complex coordinate layout: real/imag axes and the imaginary-part sign.
struct CoordAxes {
  int re, im;
  double sgn;
};
inline CoordAxes coordAxes(int a) {
  const int k = a / 2, r = a % 2;
  return {4 * k + 2 * r, 4 * k + 2 * r + 1, (a % 2 == 0) ? 1.0 : -1.0};
}

}  // namespace forms_detail

class FormField {
 public:
  FormField() = default;
  FormField(const TorusGrid& g, int p, int q)
      : grid_(g), p_(p), q_(q),
        combA_(forms_detail::combinations(g.axes() / 2, p)),
        combB_(forms_detail::combinations(g.axes() / 2, q)) {
    coeff_.assign(combA_.size() * combB_.size(), CGridFunction(g));
  }

  const TorusGrid& grid() const { return grid_; }
  int p() const { return p_; }
  int q() const { return q_; }
  int nc() const { return grid_.axes() / 2; }
  int countA() const { return static_cast<int>(combA_.size()); }
  int countB() const { return static_cast<int>(combB_.size()); }
  const std::vector<forms_detail::Mask>& masksA() const { return combA_; }
  const std::vector<forms_detail::Mask>& masksB() const { return combB_; }

  const CGridFunction& coeff(int ai, int bi) const {
    return coeff_[static_cast<std::size_t>(ai) * combB_.size() + bi];
  }
  CGridFunction& coeff(int ai, int bi) {
    return coeff_[static_cast<std::size_t>(ai) * combB_.size() + bi];
  }

  bool empty() const { return coeff_.empty(); }

  FormField& operator+=(const FormField& o) {
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
    return *this;
  }
  FormField& operator-=(const FormField& o) {
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= o.coeff_[i];
    return *this;
  }
  FormField& operator*=(std::complex<double> s) {
    for (auto& c : coeff_) c *= s;
    return *this;
  }
  friend FormField operator+(FormField a, const FormField& b) { return a += b; }
  friend FormField operator-(FormField a, const FormField& b) { return a -= b; }
  friend FormField operator*(std::complex<double> s, FormField a) { return a *= s; }

  double maxAbsCoeff() const {
    double m = 0;
    for (const auto& c : coeff_) m = std::max(m, maxAbs(c));
    return m;
  }

 private:
  TorusGrid grid_;
  int p_ = 0, q_ = 0;
  std::vector<forms_detail::Mask> combA_, combB_;
  std::vector<CGridFunction> coeff_;
};

/// Scalar field viewed as a (0,0)-form.
inline FormField asForm(const CGridFunction& f) {
  FormField out(f.grid(), 0, 0);
  out.coeff(0, 0) = f;
  return out;
}
inline FormField asForm(const GridFunction& f) { return asForm(toComplex(f)); }

// ---------------------------------------------------------------------------
// Wirtinger derivatives of coefficients.

inline CGridFunction dzDeriv(const DerivKit& kit, const CGridFunction& f, int a) {
  const auto ax = forms_detail::coordAxes(a);
  CGridFunction dr = kit.d1(f, ax.re), di = kit.d1(f, ax.im);
  CGridFunction out(f.grid());
  const std::complex<double> half(0.5, 0.0), ihalf(0.0, 0.5 * ax.sgn);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = half * dr[i] - ihalf * di[i];
  return out;
}
inline CGridFunction dzBarDeriv(const DerivKit& kit, const CGridFunction& f, int a) {
  const auto ax = forms_detail::coordAxes(a);
  CGridFunction dr = kit.d1(f, ax.re), di = kit.d1(f, ax.im);
  CGridFunction out(f.grid());
  const std::complex<double> half(0.5, 0.0), ihalf(0.0, 0.5 * ax.sgn);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = half * dr[i] + ihalf * di[i];
  return out;
}

/// d^2 f / dz_a dzbar_b with the dedicated same-axis second derivative.
inline CGridFunction wirtinger2(const DerivKit& kit, const CGridFunction& f,
                                int a, int b) {
  const auto A = forms_detail::coordAxes(a);
  const auto B = forms_detail::coordAxes(b);
  const CGridFunction rr = kit.d2mixed(f, A.re, B.re);
  const CGridFunction ii = kit.d2mixed(f, A.im, B.im);
  const CGridFunction ri = kit.d2mixed(f, A.re, B.im);
  const CGridFunction ir = kit.d2mixed(f, A.im, B.re);
  CGridFunction out(f.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::complex<double> re = 0.25 * (rr[i] + A.sgn * B.sgn * ii[i]);
    const std::complex<double> im = 0.25 * (B.sgn * ri[i] - A.sgn * ir[i]);
    out[i] = re + std::complex<double>(0, 1) * im;
  }
  return out;
}

// ---------------------------------------------------------------------------
// First-order operators.

inline FormField dOp(const DerivKit& kit, const FormField& eta) {
  FormField out(eta.grid(), eta.p() + 1, eta.q());
  if (out.empty()) return out;
  for (int ai = 0; ai < eta.countA(); ++ai)
    for (int bi = 0; bi < eta.countB(); ++bi) {
      for (int a = 0; a < eta.nc(); ++a) {
        forms_detail::Mask m2;
        const int s = forms_detail::insertSign(eta.masksA()[ai], a, m2);
        if (s == 0) continue;
        const int ai2 = forms_detail::rankOf(out.masksA(), m2);
        CGridFunction d = dzDeriv(kit, eta.coeff(ai, bi), a);
        auto& dst = out.coeff(ai2, bi);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += double(s) * d[i];
      }
    }
  return out;
}

inline FormField dBarOp(const DerivKit& kit, const FormField& eta) {
  FormField out(eta.grid(), eta.p(), eta.q() + 1);
  if (out.empty()) return out;
  const double pSign = (eta.p() % 2 == 0) ? 1.0 : -1.0;
  for (int ai = 0; ai < eta.countA(); ++ai)
    for (int bi = 0; bi < eta.countB(); ++bi) {
      for (int b = 0; b < eta.nc(); ++b) {
        forms_detail::Mask m2;
        const int s = forms_detail::insertSign(eta.masksB()[bi], b, m2);
        if (s == 0) continue;
        const int bi2 = forms_detail::rankOf(out.masksB(), m2);
        CGridFunction d = dzBarDeriv(kit, eta.coeff(ai, bi), b);
        auto& dst = out.coeff(ai, bi2);
        for (std::size_t i = 0; i < dst.size(); ++i)
          dst[i] += pSign * double(s) * d[i];
      }
    }
  return out;
}

/// Pointwise J action: (p,q) -> (q,p), coefficients carried C-linearly.
inline FormField jAct(const FormField& eta) {
  FormField out(eta.grid(), eta.q(), eta.p());
  for (int ai = 0; ai < eta.countA(); ++ai) {
    const auto Alist = forms_detail::maskToList(eta.masksA()[ai]);
    for (int bi = 0; bi < eta.countB(); ++bi) {
      const auto Blist = forms_detail::maskToList(eta.masksB()[bi]);
      double s = ((Alist.size() * Blist.size()) % 2 == 0) ? 1.0 : -1.0;
      std::vector<int> newZ, newZbar;
      for (int a : Alist) {
        s *= forms_detail::jSign(a);
        newZbar.push_back(forms_detail::pairIndex(a));
      }
      for (int b : Blist) {
        s *= forms_detail::jSign(b);
        newZ.push_back(forms_detail::pairIndex(b));
      }
      s *= forms_detail::sortSign(newZ);
      s *= forms_detail::sortSign(newZbar);
      forms_detail::Mask mz = 0, mzb = 0;
      for (int c : newZ) mz |= forms_detail::Mask{1} << c;
      for (int c : newZbar) mzb |= forms_detail::Mask{1} << c;
      const int ai2 = forms_detail::rankOf(out.masksA(), mz);
      const int bi2 = forms_detail::rankOf(out.masksB(), mzb);
      auto& dst = out.coeff(ai2, bi2);
      const auto& src = eta.coeff(ai, bi);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
    }
  }
  return out;
}

/// J^{-1} = (-1)^{p+q} J on (p,q)-forms.
inline FormField jInv(const FormField& eta) {
  FormField out = jAct(eta);
  if ((eta.p() + eta.q()) % 2 != 0) out *= std::complex<double>(-1.0, 0.0);
  return out;
}

/// d_J = J^{-1} dbar J : (p,q) -> (p+1,q).
inline FormField dJOp(const DerivKit& kit, const FormField& eta) {
  return jInv(dBarOp(kit, jAct(eta)));
}

/// Complex conjugate form: (p,q) -> (q,p).
inline FormField conjForm(const FormField& eta) {
  FormField out(eta.grid(), eta.q(), eta.p());
  const double s = ((eta.p() * eta.q()) % 2 == 0) ? 1.0 : -1.0;
  for (int ai = 0; ai < eta.countA(); ++ai)
    for (int bi = 0; bi < eta.countB(); ++bi) {
      const int ai2 = forms_detail::rankOf(out.masksA(), eta.masksB()[bi]);
      const int bi2 = forms_detail::rankOf(out.masksB(), eta.masksA()[ai]);
      auto& dst = out.coeff(ai2, bi2);
      const auto& src = eta.coeff(ai, bi);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * std::conj(src[i]);
    }
  return out;
}

/// Graded product; degree overflow yields the zero (empty) form.
inline FormField wedge(const FormField& x, const FormField& y) {
  FormField out(x.grid(), x.p() + y.p(), x.q() + y.q());
  if (out.empty()) return out;
  for (int ai = 0; ai < x.countA(); ++ai)
    for (int bi = 0; bi < x.countB(); ++bi) {
      const auto& f = x.coeff(ai, bi);
      for (int aj = 0; aj < y.countA(); ++aj) {
        forms_detail::Mask ma;
        const int sa = forms_detail::mergeSign(x.masksA()[ai], y.masksA()[aj], ma);
        if (sa == 0) continue;
        for (int bj = 0; bj < y.countB(); ++bj) {
          forms_detail::Mask mb;
          const int sb = forms_detail::mergeSign(x.masksB()[bi], y.masksB()[bj], mb);
          if (sb == 0) continue;
          // move dzbar block of x past dz block of y
          const double cross =
              ((x.q() * y.p()) % 2 == 0) ? 1.0 : -1.0;
          const double s = cross * sa * sb;
          const int ai2 = forms_detail::rankOf(out.masksA(), ma);
          const int bi2 = forms_detail::rankOf(out.masksB(), mb);
          const auto& g = y.coeff(aj, bj);
          auto& dst = out.coeff(ai2, bi2);
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * f[i] * g[i];
        }
      }
    }
  return out;
}

inline FormField wedgePower(const FormField& eta, int m) {
  FormField out = asForm(CGridFunction(eta.grid(), std::complex<double>(1.0)));
  for (int i = 0; i < m; ++i) out = wedge(out, eta);
  return out;
}

/// || J eta - conj(eta) ||_inf : zero for real (2k,0)-forms.
inline double realnessResidual(const FormField& eta) {
  FormField d = jAct(eta) - conjForm(eta);
  return d.maxAbsCoeff();
}

// ---------------------------------------------------------------------------
// Flat reference forms.

/// Omega_flat = sum_k dz_{2k} ^ dz_{2k+1}; t(Omega_flat) = Id.
inline FormField flatOmega(const TorusGrid& g) {
  FormField out(g, 2, 0);
  for (int k = 0; k < g.n; ++k) {
    const forms_detail::Mask m =
        (forms_detail::Mask{1} << (2 * k)) | (forms_detail::Mask{1} << (2 * k + 1));
    const int ai = forms_detail::rankOf(out.masksA(), m);
    auto& c = out.coeff(ai, 0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += 1.0;
  }
  return out;
}

/// Reference positive (2n,0)-form Theta_0 = Omega_flat^n.
inline FormField flatTheta0(const TorusGrid& g) {
  return wedgePower(flatOmega(g), g.n);
}

/// Coefficient of a top (2n,2n)-form field.
inline CGridFunction topCoefficient(const FormField& eta) {
  if (eta.p() != eta.nc() || eta.q() != eta.nc())
    throw InputError("not a top-degree form");
  return eta.coeff(0, 0);
}

// ---------------------------------------------------------------------------
// Fused dd_J (second-order, same-axis spectral second derivative).

/// dd_J of a scalar field, assembled from mixed Wirtinger derivatives:
/// dd_J f = sum_{c,k} [ f_{zbar_{2k} z_c} dz_c ^ dz_{2k+1}
///                      - f_{zbar_{2k+1} z_c} dz_c ^ dz_{2k} ].
inline FormField ddJScalar(const DerivKit& kit, const CGridFunction& f) {
  const TorusGrid& g = f.grid();
  FormField out(g, 2, 0);
  const int nc = g.axes() / 2;
  auto add = [&](int a, int b, const CGridFunction& w, double sgn) {
    if (a == b) return;
    forms_detail::Mask m;
    int s = forms_detail::mergeSign(forms_detail::Mask{1} << a,
                                    forms_detail::Mask{1} << b, m);
    // mergeSign merges {a} and {b}: for a<b sign is +, else -
    const int ai = forms_detail::rankOf(out.masksA(), m);
    auto& dst = out.coeff(ai, 0);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += sgn * double(s) * w[i];
  };
  for (int k = 0; k < g.n; ++k)
    for (int c = 0; c < nc; ++c) {
      add(c, 2 * k + 1, wirtinger2(kit, f, c, 2 * k), 1.0);
      add(c, 2 * k, wirtinger2(kit, f, c, 2 * k + 1), -1.0);
    }
  return out;
}

inline FormField ddJScalar(const DerivKit& kit, const GridFunction& f) {
  return ddJScalar(kit, toComplex(f));
}

/// Fused dd_J on a (p,q)-form: dd_J(f M) = (dd_J f) ^ M for monomials M.
inline FormField ddJForm(const DerivKit& kit, const FormField& eta) {
  FormField out(eta.grid(), eta.p() + 2, eta.q());
  if (out.empty()) return out;
  for (int ai = 0; ai < eta.countA(); ++ai)
    for (int bi = 0; bi < eta.countB(); ++bi) {
      const FormField d = ddJScalar(kit, eta.coeff(ai, bi));
      for (int di = 0; di < d.countA(); ++di) {
        forms_detail::Mask m;
        const int s = forms_detail::mergeSign(d.masksA()[di], eta.masksA()[ai], m);
        if (s == 0) continue;
        const int ai2 = forms_detail::rankOf(out.masksA(), m);
        auto& dst = out.coeff(ai2, bi);
        const auto& src = d.coeff(di, 0);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += double(s) * src[i];
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// The t-isomorphism, anchored to dd_J of quadratics.

namespace forms_detail {

/// Constant-coefficient dd_J of u(h) = 1/2 h^T S h, as (2,0) coefficients
/// indexed by the (2,0) multi-index table.
inline Eigen::VectorXcd ddJQuadratic(int n, const Eigen::MatrixXd& S,
                                     const std::vector<Mask>& masks2) {
  const int nc = 2 * n;
  Eigen::MatrixXcd W(nc, nc);
  for (int a = 0; a < nc; ++a) {
    const auto A = coordAxes(a);
    for (int b = 0; b < nc; ++b) {
      const auto B = coordAxes(b);
      const double re = 0.25 * (S(A.re, B.re) + A.sgn * B.sgn * S(A.im, B.im));
      const double im = 0.25 * (B.sgn * S(A.re, B.im) - A.sgn * S(A.im, B.re));
      W(a, b) = {re, im};
    }
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(masks2.size());
  auto add = [&](int a, int b, std::complex<double> c) {
    if (a == b) return;
    Mask m;
    const int s = mergeSign(Mask{1} << a, Mask{1} << b, m);
    out[rankOf(masks2, m)] += double(s) * c;
  };
  for (int k = 0; k < n; ++k)
    for (int c = 0; c < nc; ++c) {
      add(c, 2 * k + 1, W(c, 2 * k));
      add(c, 2 * k, -W(c, 2 * k + 1));
    }
  return out;
}

inline std::vector<HHMatrix> hhBasis(int n) {
  std::vector<HHMatrix> basis;
  for (int k = 0; k < n; ++k) {
    HHMatrix d(n);
    d.set(k, k, Quaternion::one());
    basis.push_back(d);
    for (int l = k + 1; l < n; ++l)
      for (int c = 0; c < 4; ++c) {
        HHMatrix e(n);
        e.set(k, l, quatUnit(c));
        basis.push_back(e);
      }
  }
  return basis;
}

}  // namespace forms_detail

/// Pointwise inverse of B -> dd_J(quadratic with Hessian realEmbed(B)).
class TIso {
 public:
  explicit TIso(int n) : n_(n), masks2_(forms_detail::combinations(2 * n, 2)) {
    basis_ = forms_detail::hhBasis(n);
    const int rows = 2 * static_cast<int>(masks2_.size());
    Eigen::MatrixXd T(rows, basis_.size());
    for (std::size_t c = 0; c < basis_.size(); ++c) {
      const Eigen::VectorXcd col = forms_detail::ddJQuadratic(
          n_, realEmbed(basis_[c].toQuatMatrix()), masks2_);
      for (int r = 0; r < static_cast<int>(masks2_.size()); ++r) {
        T(2 * r, c) = col[r].real();
        T(2 * r + 1, c) = col[r].imag();
      }
    }
    anchor_ = T;
    cod_.compute(T);
    if (cod_.rank() != static_cast<int>(basis_.size()))
      throw NumericalError("t-isomorphism anchor is rank-deficient");
  }

  int n() const { return n_; }
  const std::vector<forms_detail::Mask>& masks2() const { return masks2_; }

  /// Inverse direction: hyper-Hermitian matrix -> constant (2,0) coefficients.
  Eigen::VectorXcd hhToFormCoeffs(const HHMatrix& b) const {
    return forms_detail::ddJQuadratic(n_, realEmbed(b.toQuatMatrix()), masks2_);
  }

  /// Pointwise t: (2,0) coefficients -> HH matrix; residual is the distance
  /// to the space of real (2,0)-forms (zero iff the input is real there).
  HHMatrix pointwise(const Eigen::VectorXcd& coeffs, double* residual) const {
    Eigen::VectorXd v(2 * coeffs.size());
    for (int r = 0; r < coeffs.size(); ++r) {
      v[2 * r] = coeffs[r].real();
      v[2 * r + 1] = coeffs[r].imag();
    }
    const Eigen::VectorXd x = cod_.solve(v);
    if (residual) *residual = (anchor_ * x - v).cwiseAbs().maxCoeff();
    HHMatrix out(n_);
    for (std::size_t c = 0; c < basis_.size(); ++c) {
      const HHMatrix& b = basis_[c];
      for (int r = 0; r < n_; ++r)
        for (int cc = r; cc < n_; ++cc) {
          Quaternion q = out(r, cc);
          q += x[c] * b(r, cc);
          out.set(r, cc, q);
        }
    }
    return out;
  }

 private:
  int n_;
  std::vector<forms_detail::Mask> masks2_;
  std::vector<HHMatrix> basis_;
  Eigen::MatrixXd anchor_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

/// Field-level t: rejects inputs that are not real (2,0) up to `realTol`.
inline HHField tIso(const FormField& omega, double realTol = tol::kRouteMatch) {
  if (omega.p() != 2 || omega.q() != 0)
    throw InputError("tIso expects a (2,0)-form");
  const TorusGrid& g = omega.grid();
  const TIso t(g.n);
  const double scale = std::max(1.0, omega.maxAbsCoeff());
  HHField out(g);
  double worst = 0;
  const int nm = omega.countA();
  for (std::size_t i = 0; i < g.npts(); ++i) {
    Eigen::VectorXcd v(nm);
    for (int m = 0; m < nm; ++m) v[m] = omega.coeff(m, 0)[i];
    double res = 0;
    out[i] = t.pointwise(v, &res);
    worst = std::max(worst, res);
  }
  if (worst > realTol * scale)
    throw InputError("tIso: input is not a real (2,0)-form within tolerance");
  return out;
}

}  // namespace hktlab
