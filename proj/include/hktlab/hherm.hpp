#pragma once

// Hyper-Hermitian matrices (a_ji = conj(a_ij), real diagonal), the Moore
// determinant with two independent oracle routes, the spectral decomposition
// over H, and SU(2) averaging of real quadratic forms on R^{4n}.
//
// Normalization: the SU(2)-invariant form |h|^2 on H^n corresponds to the
// identity matrix.  Under realEmbed the correspondence between invariant
// quadratic forms and hyper-Hermitian matrices is exactly Q = realEmbed(A),
// and eigenvalues of realEmbed(A) are those of A with multiplicity 4.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hktlab/common.hpp"
#include "hktlab/quat.hpp"

namespace hktlab {

class HHMatrix {
 public:
  HHMatrix() = default;
  explicit HHMatrix(int n) : n_(n), a_(n * n) {}

  static HHMatrix identity(int n) {
    HHMatrix m(n);
    for (int i = 0; i < n; ++i) m.a_[i * n + i] = Quaternion::one();
    return m;
  }
  static HHMatrix diag(const std::vector<double>& d) {
    HHMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m.a_[i * m.n_ + i] = {d[i], 0, 0, 0};
    return m;
  }

  /// Validates the symmetry a_ji = conj(a_ij) up to `symTol` and symmetrizes.
  static HHMatrix fromQuatMatrix(const QuatMatrix& q,
                                 double symTol = tol::kHermSymmetry) {
    if (q.rows() != q.cols()) throw InputError("hyper-Hermitian matrix must be square");
    const int n = q.rows();
    double scale = 1.0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) scale = std::max(scale, q(r, c).maxAbs());
    HHMatrix m(n);
    for (int r = 0; r < n; ++r) {
      if (std::abs(q(r, r).x) > symTol * scale || std::abs(q(r, r).y) > symTol * scale ||
          std::abs(q(r, r).z) > symTol * scale)
        throw InputError("hyper-Hermitian matrix needs a real diagonal");
      m.set(r, r, {q(r, r).t, 0, 0, 0});
      for (int c = r + 1; c < n; ++c) {
        const Quaternion d = q(r, c) - q(c, r).conj();
        if (d.maxAbs() > symTol * scale)
          throw InputError("matrix is not hyper-Hermitian (symmetry violation)");
        m.set(r, c, 0.5 * (q(r, c) + q(c, r).conj()));
      }
    }
    return m;
  }

  int n() const { return n_; }
  const Quaternion& operator()(int r, int c) const { return a_[r * n_ + c]; }

  /// Sets entry (r,c) and keeps (c,r) = conj by construction.
  void set(int r, int c, const Quaternion& q) {
    a_[r * n_ + c] = q;
    if (r != c) a_[c * n_ + r] = q.conj();
    else a_[r * n_ + c] = {q.t, 0, 0, 0};
  }

  QuatMatrix toQuatMatrix() const {
    QuatMatrix q(n_, n_);
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < n_; ++c) q(r, c) = a_[r * n_ + c];
    return q;
  }

  friend HHMatrix operator+(const HHMatrix& a, const HHMatrix& b) {
    HHMatrix out(a.n_);
    for (size_t i = 0; i < a.a_.size(); ++i) out.a_[i] = a.a_[i] + b.a_[i];
    return out;
  }
  friend HHMatrix operator-(const HHMatrix& a, const HHMatrix& b) {
    HHMatrix out(a.n_);
    for (size_t i = 0; i < a.a_.size(); ++i) out.a_[i] = a.a_[i] - b.a_[i];
    return out;
  }
  friend HHMatrix operator*(double s, const HHMatrix& a) {
    HHMatrix out(a.n_);
    for (size_t i = 0; i < a.a_.size(); ++i) out.a_[i] = s * a.a_[i];
    return out;
  }

  double maxAbs() const {
    double m = 0;
    for (const auto& q : a_) m = std::max(m, q.maxAbs());
    return m;
  }

  /// Real(trace) of the quaternionic matrix product A*B restricted to (this,B).
  friend double realTraceProduct(const HHMatrix& a, const HHMatrix& b) {
    double s = 0;
    for (int r = 0; r < a.n_; ++r)
      for (int c = 0; c < a.n_; ++c) {
        // Re(a_rc * b_cr)
        const Quaternion &p = a(r, c), &q = b(c, r);
        s += p.t * q.t - p.x * q.x - p.y * q.y - p.z * q.z;
      }
    return s;
  }

 private:
  int n_ = 0;
  std::vector<Quaternion> a_;
};

namespace detail {

inline Quaternion mooreDetRec(const HHMatrix& a, const std::vector<int>& idx);

/// Enumerates the cycle (i0, c_1, ..., c_k) through the smallest live index
/// and accumulates sign * det(complement) * cycle-product.
inline void mooreCycleDfs(const HHMatrix& a, int i0,
                          const std::vector<int>& rest, std::vector<bool>& used,
                          int last, const Quaternion& prefix, int k,
                          Quaternion& total) {
  {
    const Quaternion prod = (k == 0) ? a(i0, i0) : prefix * a(last, i0);
    std::vector<int> sub;
    sub.reserve(rest.size());
    for (size_t t = 0; t < rest.size(); ++t)
      if (!used[t]) sub.push_back(rest[t]);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    total += sign * (mooreDetRec(a, sub) * prod);
  }
  for (size_t t = 0; t < rest.size(); ++t) {
    if (used[t]) continue;
    used[t] = true;
    const Quaternion np =
        (k == 0) ? a(i0, rest[t]) : prefix * a(last, rest[t]);
    mooreCycleDfs(a, i0, rest, used, rest[t], np, k + 1, total);
    used[t] = false;
  }
}

/// Moore determinant over a live index set, expanding along cycles through
/// the smallest live index.  Valid (and real) on hyper-Hermitian input.
inline Quaternion mooreDetRec(const HHMatrix& a, const std::vector<int>& idx) {
  if (idx.empty()) return Quaternion::one();
  const int i0 = idx.front();
  std::vector<int> rest(idx.begin() + 1, idx.end());
  std::vector<bool> used(rest.size(), false);
  Quaternion total;
  mooreCycleDfs(a, i0, rest, used, i0, Quaternion::one(), 0, total);
  return total;
}

}  // namespace detail

/// Moore determinant (cycle expansion along the first row/column).
inline double mooreDet(const HHMatrix& a) {
  std::vector<int> idx(a.n());
  for (int i = 0; i < a.n(); ++i) idx[i] = i;
  const Quaternion d = detail::mooreDetRec(a, idx);
  return d.t;
}

/// Oracle: signed fourth root of det(realEmbed(A)); sign from the count of
/// negative eigenvalue quadruples.
inline double mooreDetOracleReal(const HHMatrix& a) {
  const Eigen::MatrixXd m = realEmbed(a.toQuatMatrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  double prod = 1.0;
  // eigenvalues come in quadruples; take one representative of each
  for (int g = 0; g < a.n(); ++g) {
    double lam = 0;
    for (int r = 0; r < 4; ++r) lam += es.eigenvalues()[4 * g + r];
    prod *= lam / 4.0;
  }
  return prod;
}

/// Oracle: signed square root of det(complexEmbed(A)); sign from the count of
/// negative eigenvalue pairs.
inline double mooreDetOracleComplex(const HHMatrix& a) {
  const Eigen::MatrixXcd m = complexEmbed(a.toQuatMatrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  double prod = 1.0;
  for (int g = 0; g < a.n(); ++g)
    prod *= 0.5 * (es.eigenvalues()[2 * g] + es.eigenvalues()[2 * g + 1]);
  return prod;
}

struct HHEigen {
  std::vector<double> eigenvalues;      // ascending, one per H-eigenvector
  std::vector<QuatVector> eigenvectors; // unit, A w = w * lambda
};

/// Spectral decomposition of a hyper-Hermitian matrix via the complex
/// embedding.  Eigenvalues of the embedding must pair up (and those of the
/// real embedding come in quadruples); failure signals non-Hermitian input.
inline HHEigen spectralDecompose(const HHMatrix& a, double pairTol = 1e-8) {
  const int n = a.n();
  const Eigen::MatrixXcd m = complexEmbed(a.toQuatMatrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev[0]) + std::abs(ev[2 * n - 1]));
  HHEigen out;
  for (int g = 0; g < n; ++g) {
    if (std::abs(ev[2 * g] - ev[2 * g + 1]) > pairTol * scale)
      throw NumericalError("eigenvalues do not pair up: input not hyper-Hermitian");
    out.eigenvalues.push_back(0.5 * (ev[2 * g] + ev[2 * g + 1]));
  }

  // Map complex eigenvectors u = (u1;u2) to quaternionic v = u1 - conj(u2) j,
  // then Gram-Schmidt over H within eigenvalue clusters.
  auto toQuat = [n](const Eigen::VectorXcd& u) {
    QuatVector v(n);
    for (int i = 0; i < n; ++i) {
      const std::complex<double> v1 = u[i], v2 = -std::conj(u[n + i]);
      v[i] = {v1.real(), v1.imag(), v2.real(), v2.imag()};
    }
    return v;
  };
  std::vector<QuatVector> basis;
  for (int c = 0; c < 2 * n && static_cast<int>(basis.size()) < n; ++c) {
    QuatVector v = toQuat(es.eigenvectors().col(c));
    for (const auto& w : basis) {
      const Quaternion p = hermitianPairing(w, v);
      for (int i = 0; i < n; ++i) v[i] -= w[i] * p;
    }
    const double nv = v.norm();
    if (nv < 1e-6) continue;  // H-dependent on previous vectors
    for (int i = 0; i < n; ++i) v[i] = (1.0 / nv) * v[i];
    basis.push_back(v);
  }
  if (static_cast<int>(basis.size()) != n)
    throw NumericalError("failed to extract a quaternionic eigenbasis");
  out.eigenvectors = std::move(basis);
  return out;
}

/// Pointwise positivity with the relaxed tolerance floor.
inline bool isPositive(const HHMatrix& a, bool strict,
                       double* minEigOut = nullptr) {
  const Eigen::MatrixXcd m = complexEmbed(a.toQuatMatrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  const double lamMin = es.eigenvalues()[0];
  const double lamMax = std::abs(es.eigenvalues()[2 * a.n() - 1]);
  if (minEigOut) *minEigOut = lamMin;
  if (strict) return lamMin > 0.0;
  return lamMin >= -tol::kPositivity * (1.0 + lamMax);
}

// ---------------------------------------------------------------------------
// Quadratic forms on R^{4n} and SU(2) averaging.

/// Real symmetric quadratic form, Q(h) = h^T M h.
class QuadForm {
 public:
  QuadForm() = default;
  explicit QuadForm(Eigen::MatrixXd m) : m_(std::move(m)) {
    m_ = 0.5 * (m_ + m_.transpose()).eval();
  }
  static QuadForm normSqForm(int n) {
    return QuadForm(Eigen::MatrixXd::Identity(4 * n, 4 * n));
  }

  int quatDim() const { return static_cast<int>(m_.rows()) / 4; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(const Eigen::VectorXd& h) const { return h.dot(m_ * h); }

  friend QuadForm operator+(const QuadForm& a, const QuadForm& b) {
    return QuadForm(a.m_ + b.m_);
  }
  friend QuadForm operator-(const QuadForm& a, const QuadForm& b) {
    return QuadForm(a.m_ - b.m_);
  }

 private:
  Eigen::MatrixXd m_;
};

/// Average over the right SU(2) action: (Q + I*QI + J*QJ + K*QK)/4.
inline QuadForm su2Average(const QuadForm& q) {
  const int n = q.quatDim();
  Eigen::MatrixXd out = q.matrix();
  for (const Quaternion& u : {Quaternion::i(), Quaternion::j(), Quaternion::k()}) {
    const Eigen::MatrixXd r = rightMultMatrixBig(n, u);
    out += r.transpose() * q.matrix() * r;
  }
  return QuadForm(0.25 * out);
}

/// SU(2)-complement part: Q - <Q>.
inline QuadForm qPlus(const QuadForm& q) { return q - su2Average(q); }

/// Size of the non-invariant part, relative to the form's scale.
inline double invarianceResidual(const QuadForm& q) {
  const double scale = std::max(1.0, q.matrix().cwiseAbs().maxCoeff());
  return qPlus(q).matrix().cwiseAbs().maxCoeff() / scale;
}

/// Hyper-Hermitian matrix of an SU(2)-invariant form: block (k,l) of the
/// matrix is L_{a_kl}, so a_kl is the first column of the block.
inline HHMatrix invariantToHH(const QuadForm& q,
                              double invTol = tol::kInvariance) {
  if (invarianceResidual(q) > invTol)
    throw InputError("quadratic form has a non-invariant part beyond tolerance");
  const int n = q.quatDim();
  HHMatrix a(n);
  for (int k = 0; k < n; ++k) {
    a.set(k, k, {q.matrix()(4 * k, 4 * k), 0, 0, 0});
    for (int l = k + 1; l < n; ++l) {
      Quaternion e;
      for (int c = 0; c < 4; ++c) e[c] = q.matrix()(4 * k + c, 4 * l);
      a.set(k, l, e);
    }
  }
  return a;
}

/// Inverse of invariantToHH.
inline QuadForm hhToInvariant(const HHMatrix& a) {
  return QuadForm(realEmbed(a.toQuatMatrix()));
}

/// Inverse of a hyper-Hermitian matrix (via the complex embedding; closed
/// forms for n = 1, 2).
inline HHMatrix hhInverse(const HHMatrix& a) {
  const int n = a.n();
  if (n == 1) {
    const double d = a(0, 0).t;
    if (d == 0.0) throw NumericalError("singular 1x1 matrix");
    HHMatrix out(1);
    out.set(0, 0, {1.0 / d, 0, 0, 0});
    return out;
  }
  if (n == 2) {
    const double det = a(0, 0).t * a(1, 1).t - a(0, 1).normSq();
    if (det == 0.0) throw NumericalError("singular 2x2 matrix");
    HHMatrix out(2);
    out.set(0, 0, {a(1, 1).t / det, 0, 0, 0});
    out.set(1, 1, {a(0, 0).t / det, 0, 0, 0});
    out.set(0, 1, (-1.0 / det) * a(0, 1));
    return out;
  }
  const Eigen::MatrixXcd inv = complexEmbed(a.toQuatMatrix()).inverse();
  HHMatrix out(n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      const std::complex<double> z1 = inv(r, c), z2 = inv(r, n + c);
      out.set(r, c, {z1.real(), z1.imag(), z2.real(), z2.imag()});
    }
  return out;
}

}  // namespace hktlab
