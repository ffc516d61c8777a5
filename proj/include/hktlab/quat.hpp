#pragma once

// Quaternion arithmetic, right H-module vectors, and the embeddings of
// quaternionic matrices into real and complex matrices.
//
// Conventions used throughout the library:
//   * q = t + x i + y j + z k, with ij = k, jk = i, ki = j.
//   * H^n is a right module: scalars act on the right, matrices on the left.
//   * The hypercomplex structure maps on R^{4n} are right multiplications:
//     I = R_i, J = R_j, K = -R_k (so that I J = -J I = K as endomorphisms).
//   * realEmbed(A) is the matrix of v -> A v on R^{4n}: blocks are left
//     multiplication matrices L_{a_kl}.
//   * complexEmbed uses q = z1 + z2 j with z1 = t + ix, z2 = y + iz and
//     j z = conj(z) j, giving the block form [[A1, A2], [-conj A2, conj A1]].

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace hktlab {

struct Quaternion {
  double t = 0.0, x = 0.0, y = 0.0, z = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double t_, double x_, double y_, double z_)
      : t(t_), x(x_), y(y_), z(z_) {}

  static constexpr Quaternion one() { return {1, 0, 0, 0}; }
  static constexpr Quaternion i() { return {0, 1, 0, 0}; }
  static constexpr Quaternion j() { return {0, 0, 1, 0}; }
  static constexpr Quaternion k() { return {0, 0, 0, 1}; }

  double operator[](int c) const {
    switch (c) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }
  double& operator[](int c) {
    switch (c) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }

  friend Quaternion operator+(const Quaternion& a, const Quaternion& b) {
    return {a.t + b.t, a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Quaternion operator-(const Quaternion& a, const Quaternion& b) {
    return {a.t - b.t, a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Quaternion operator-(const Quaternion& a) {
    return {-a.t, -a.x, -a.y, -a.z};
  }
  friend Quaternion operator*(double s, const Quaternion& a) {
    return {s * a.t, s * a.x, s * a.y, s * a.z};
  }
  friend Quaternion operator*(const Quaternion& a, double s) { return s * a; }
  Quaternion& operator+=(const Quaternion& b) { return *this = *this + b; }
  Quaternion& operator-=(const Quaternion& b) { return *this = *this - b; }

  friend Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z,
            a.t * b.x + a.x * b.t + a.y * b.z - a.z * b.y,
            a.t * b.y - a.x * b.z + a.y * b.t + a.z * b.x,
            a.t * b.z + a.x * b.y - a.y * b.x + a.z * b.t};
  }

  Quaternion conj() const { return {t, -x, -y, -z}; }
  double normSq() const { return t * t + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(normSq()); }
  double maxAbs() const {
    return std::max(std::max(std::abs(t), std::abs(x)),
                    std::max(std::abs(y), std::abs(z)));
  }
  bool isReal(double tol) const {
    return std::abs(x) <= tol && std::abs(y) <= tol && std::abs(z) <= tol;
  }
};

inline Quaternion conj(const Quaternion& q) { return q.conj(); }

/// Unit basis element for component c in {0,1,2,3} ~ {1,i,j,k}.
inline Quaternion quatUnit(int c) {
  Quaternion q;
  q[c] = 1.0;
  return q;
}

/// 4x4 matrix of v -> q v on R^4 (columns are q * e_c).
inline Eigen::Matrix4d leftMultMatrix(const Quaternion& q) {
  Eigen::Matrix4d m;
  for (int c = 0; c < 4; ++c) {
    const Quaternion col = q * quatUnit(c);
    for (int r = 0; r < 4; ++r) m(r, c) = col[r];
  }
  return m;
}

/// 4x4 matrix of v -> v q on R^4.
inline Eigen::Matrix4d rightMultMatrix(const Quaternion& q) {
  Eigen::Matrix4d m;
  for (int c = 0; c < 4; ++c) {
    const Quaternion col = quatUnit(c) * q;
    for (int r = 0; r < 4; ++r) m(r, c) = col[r];
  }
  return m;
}

/// Hypercomplex structure triple on R^{4n}: I = R_i, J = R_j, K = -R_k.
inline Eigen::Matrix4d structureI() { return rightMultMatrix(Quaternion::i()); }
inline Eigen::Matrix4d structureJ() { return rightMultMatrix(Quaternion::j()); }
inline Eigen::Matrix4d structureK() { return -rightMultMatrix(Quaternion::k()); }

/// Block-diagonal right multiplication by q on R^{4n}.
inline Eigen::MatrixXd rightMultMatrixBig(int n, const Quaternion& q) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  const Eigen::Matrix4d r = rightMultMatrix(q);
  for (int k = 0; k < n; ++k) m.block<4, 4>(4 * k, 4 * k) = r;
  return m;
}

// ---------------------------------------------------------------------------

/// Element of the right module H^n.
class QuatVector {
 public:
  QuatVector() = default;
  explicit QuatVector(int n) : v_(n) {}
  explicit QuatVector(std::vector<Quaternion> v) : v_(std::move(v)) {}

  int size() const { return static_cast<int>(v_.size()); }
  const Quaternion& operator[](int i) const { return v_[i]; }
  Quaternion& operator[](int i) { return v_[i]; }

  /// Right scalar action v -> v q.
  QuatVector scaledRight(const Quaternion& q) const {
    QuatVector out(size());
    for (int i = 0; i < size(); ++i) out.v_[i] = v_[i] * q;
    return out;
  }

  friend QuatVector operator+(const QuatVector& a, const QuatVector& b) {
    QuatVector out(a.size());
    for (int i = 0; i < a.size(); ++i) out.v_[i] = a[i] + b[i];
    return out;
  }
  friend QuatVector operator-(const QuatVector& a, const QuatVector& b) {
    QuatVector out(a.size());
    for (int i = 0; i < a.size(); ++i) out.v_[i] = a[i] - b[i];
    return out;
  }

  /// H-valued pairing <v,w> = sum conj(v_i) w_i; right-linear in w.
  friend Quaternion hermitianPairing(const QuatVector& a, const QuatVector& b) {
    Quaternion s;
    for (int i = 0; i < a.size(); ++i) s += a[i].conj() * b[i];
    return s;
  }

  double norm() const {
    double s = 0;
    for (const auto& q : v_) s += q.normSq();
    return std::sqrt(s);
  }

  /// Underlying real vector in R^{4n} (coordinate order t,x,y,z per entry).
  Eigen::VectorXd toReal() const {
    Eigen::VectorXd r(4 * size());
    for (int i = 0; i < size(); ++i)
      for (int c = 0; c < 4; ++c) r[4 * i + c] = v_[i][c];
    return r;
  }
  static QuatVector fromReal(const Eigen::VectorXd& r) {
    QuatVector out(static_cast<int>(r.size()) / 4);
    for (int i = 0; i < out.size(); ++i)
      for (int c = 0; c < 4; ++c) out.v_[i][c] = r[4 * i + c];
    return out;
  }

 private:
  std::vector<Quaternion> v_;
};

/// n x m quaternionic matrix acting on QuatVectors from the left.
class QuatMatrix {
 public:
  QuatMatrix() = default;
  QuatMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
  static QuatMatrix identity(int n) {
    QuatMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = Quaternion::one();
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Quaternion& operator()(int r, int c) const { return a_[r * cols_ + c]; }
  Quaternion& operator()(int r, int c) { return a_[r * cols_ + c]; }

  QuatVector apply(const QuatVector& v) const {
    QuatVector out(rows_);
    for (int r = 0; r < rows_; ++r) {
      Quaternion s;
      for (int c = 0; c < cols_; ++c) s += (*this)(r, c) * v[c];
      out[r] = s;
    }
    return out;
  }

  friend QuatMatrix operator*(const QuatMatrix& a, const QuatMatrix& b) {
    QuatMatrix out(a.rows_, b.cols_);
    for (int r = 0; r < a.rows_; ++r)
      for (int c = 0; c < b.cols_; ++c) {
        Quaternion s;
        for (int m = 0; m < a.cols_; ++m) s += a(r, m) * b(m, c);
        out(r, c) = s;
      }
    return out;
  }
  friend QuatMatrix operator+(const QuatMatrix& a, const QuatMatrix& b) {
    QuatMatrix out(a.rows_, a.cols_);
    for (size_t i = 0; i < a.a_.size(); ++i) out.a_[i] = a.a_[i] + b.a_[i];
    return out;
  }

  /// Conjugate transpose.
  QuatMatrix adjoint() const {
    QuatMatrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c).conj();
    return out;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Quaternion> a_;
};

/// Algebra embedding Mat(n,H) -> Mat(4n,R); blocks are L_{a_kl}.
inline Eigen::MatrixXd realEmbed(const QuatMatrix& a) {
  Eigen::MatrixXd m(4 * a.rows(), 4 * a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      m.block<4, 4>(4 * r, 4 * c) = leftMultMatrix(a(r, c));
  return m;
}

/// Algebra embedding Mat(n,H) -> Mat(2n,C) via q = z1 + z2 j.
inline Eigen::MatrixXcd complexEmbed(const QuatMatrix& a) {
  const int n = a.rows(), m = a.cols();
  Eigen::MatrixXcd out(2 * n, 2 * m);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) {
      const Quaternion& q = a(r, c);
      const std::complex<double> z1(q.t, q.x), z2(q.y, q.z);
      out(r, c) = z1;
      out(r, m + c) = z2;
      out(n + r, c) = -std::conj(z2);
      out(n + r, m + c) = std::conj(z1);
    }
  return out;
}

/// Haar-uniform unit quaternion (normalized 4D Gaussian).
inline Quaternion sampleUnitQuaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Quaternion q;
  double n = 0;
  do {
    q = {g(rng), g(rng), g(rng), g(rng)};
    n = q.norm();
  } while (n < 1e-12);
  return (1.0 / n) * q;
}

}  // namespace hktlab
