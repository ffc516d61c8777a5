#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hktlab/hherm.hpp"

using namespace hktlab;

namespace {
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
}  // namespace

TEST_CASE("Moore determinant: pinned values") {
  CHECK(mooreDet(HHMatrix::identity(3)) == 1.0);
  CHECK(mooreDet(HHMatrix::diag({2, 3})) == 6.0);

  // [[1, j], [-j, 1]] is singular (eigenvalues 0 and 2)
  HHMatrix a(2);
  a.set(0, 0, Quaternion::one());
  a.set(1, 1, Quaternion::one());
  a.set(0, 1, Quaternion::j());
  CHECK(std::abs(mooreDet(a)) < 1e-14);
  CHECK(std::abs(mooreDetOracleReal(a)) < 1e-7);
  const HHEigen e = spectralDecompose(a);
  CHECK(std::abs(e.eigenvalues[0] - 0.0) < 1e-12);
  CHECK(std::abs(e.eigenvalues[1] - 2.0) < 1e-12);

  // [[2, i], [-i, 2]] restricts to the complex Hermitian determinant 3
  HHMatrix b(2);
  b.set(0, 0, {2, 0, 0, 0});
  b.set(1, 1, {2, 0, 0, 0});
  b.set(0, 1, Quaternion::i());
  CHECK(std::abs(mooreDet(b) - 3.0) < 1e-14);
  CHECK(std::abs(mooreDetOracleComplex(b) - 3.0) < 1e-9);
}

TEST_CASE("Moore determinant: fourth power matches the real embedding") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + (t % 4);
    const HHMatrix a = randomHH(n, rng);
    const double md = mooreDet(a);
    const double dr = realEmbed(a.toQuatMatrix()).determinant();
    CHECK(std::abs(md * md * md * md - dr) <= 1e-8 * (1.0 + std::abs(dr)));
  }
}

TEST_CASE("Moore determinant restricts to the complex determinant") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + (t % 4);
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
    CHECK(std::abs(mooreDet(a) - dc) <= 1e-9 * (1.0 + std::abs(dc)));
  }
}

TEST_CASE("oracles agree with the primary route") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 400; ++t) {
    const int n = 1 + (t % 4);
    const HHMatrix a = randomHH(n, rng);
    const double md = mooreDet(a);
    CHECK(std::abs(md - mooreDetOracleReal(a)) <= 1e-8 * (1.0 + std::abs(md)));
    CHECK(std::abs(md - mooreDetOracleComplex(a)) <= 1e-9 * (1.0 + std::abs(md)));
  }
}

TEST_CASE("positive definite matrices have positive Moore determinant") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + (t % 3);
    HHMatrix a = randomHH(n, rng);
    double shift = 0;
    for (int k = 0; k < n; ++k) {
      double s = 0;
      for (int l = 0; l < n; ++l) s += a(k, l).norm();
      shift = std::max(shift, s);
    }
    a = a + (shift + 0.25) * HHMatrix::identity(n);
    REQUIRE(isPositive(a, true));
    const double md = mooreDet(a);
    CHECK(md > 0.0);
    const HHEigen e = spectralDecompose(a);
    double prod = 1;
    for (double lam : e.eigenvalues) prod *= lam;
    CHECK(std::abs(md - prod) <= 1e-8 * (1.0 + std::abs(md)));
  }
}

TEST_CASE("spectral decomposition reconstructs the matrix") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + (t % 4);
    const HHMatrix a = randomHH(n, rng);
    const HHEigen e = spectralDecompose(a);

    // identity and diagonal sanity
    for (int l = 0; l < n; ++l) {
      // A w = w lambda
      const QuatVector aw = a.toQuatMatrix().apply(e.eigenvectors[l]);
      const QuatVector wl = e.eigenvectors[l].scaledRight(
          {e.eigenvalues[l], 0, 0, 0});
      for (int i = 0; i < n; ++i) CHECK((aw[i] - wl[i]).maxAbs() < 1e-9);
    }

    // {w, wI, wJ, wK} is an orthonormal basis of R^{4n}
    Eigen::MatrixXd basis(4 * n, 4 * n);
    int col = 0;
    for (const auto& w : e.eigenvectors)
      for (const Quaternion& u : {Quaternion::one(), Quaternion::i(),
                                  Quaternion::j(), Quaternion::k()})
        basis.col(col++) = w.scaledRight(u).toReal();
    CHECK((basis.transpose() * basis -
           Eigen::MatrixXd::Identity(4 * n, 4 * n)).cwiseAbs().maxCoeff() < 1e-9);

    // reconstruction through the real embedding
    Eigen::MatrixXd rec = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    for (int l = 0; l < n; ++l)
      for (const Quaternion& u : {Quaternion::one(), Quaternion::i(),
                                  Quaternion::j(), Quaternion::k()}) {
        const Eigen::VectorXd v = e.eigenvectors[l].scaledRight(u).toReal();
        rec += e.eigenvalues[l] * v * v.transpose();
      }
    CHECK((rec - realEmbed(a.toQuatMatrix())).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("spectralDecompose: trivial spectra") {
  const HHEigen id = spectralDecompose(HHMatrix::identity(3));
  for (double lam : id.eigenvalues) CHECK(std::abs(lam - 1.0) < 1e-12);
  const HHEigen dg = spectralDecompose(HHMatrix::diag({2, 3}));
  CHECK(std::abs(dg.eigenvalues[0] - 2.0) < 1e-12);
  CHECK(std::abs(dg.eigenvalues[1] - 3.0) < 1e-12);
  // coordinate eigenvectors up to a right unit factor
  for (int l = 0; l < 2; ++l) {
    int support = 0;
    for (int i = 0; i < 2; ++i)
      if (dg.eigenvectors[l][i].norm() > 1e-9) ++support;
    CHECK(support == 1);
  }
}

TEST_CASE("isPositive with the relaxed floor") {
  CHECK(isPositive(HHMatrix::identity(2), true));
  CHECK_FALSE(isPositive(HHMatrix::diag({1, 0}), true));
  CHECK(isPositive(HHMatrix::diag({1, 0}), false));
  HHMatrix a(2);
  a.set(0, 0, Quaternion::one());
  a.set(1, 1, Quaternion::one());
  a.set(0, 1, Quaternion::j());
  CHECK_FALSE(isPositive(a, true));
  CHECK(isPositive(a, false));
}

TEST_CASE("non-hyper-Hermitian input is rejected") {
  QuatMatrix q(2, 2);
  q(0, 0) = Quaternion::one();
  q(1, 1) = Quaternion::one();
  q(0, 1) = Quaternion::j();
  q(1, 0) = Quaternion::j();  // should be -j
  CHECK_THROWS_AS(HHMatrix::fromQuatMatrix(q), InputError);

  QuatMatrix d(1, 1);
  d(0, 0) = Quaternion::i();  // diagonal must be real
  CHECK_THROWS_AS(HHMatrix::fromQuatMatrix(d), InputError);
}

TEST_CASE("su2Average: the four-term formula") {
  // Q(h) = t1^2 averages to |h1|^2 / 4
  const int n = 2;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  q(0, 0) = 1.0;
  const QuadForm avg = su2Average(QuadForm(q));
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  expect.block<4, 4>(0, 0) = 0.25 * Eigen::Matrix4d::Identity();
  CHECK((avg.matrix() - expect).cwiseAbs().maxCoeff() < 1e-14);

  // |h|^2 is a fixed point
  const QuadForm norm2 = QuadForm::normSqForm(n);
  CHECK((su2Average(norm2).matrix() - norm2.matrix()).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("su2Average matches Monte-Carlo Haar averaging") {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> g;
  const int n = 1;
  Eigen::MatrixXd q(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) q(r, c) = g(rng);
  const QuadForm Q(q);
  const QuadForm avg = su2Average(Q);
  Eigen::Vector4d x;
  for (int c = 0; c < 4; ++c) x[c] = g(rng);

  const int m = 100000;
  double acc = 0, acc2 = 0;
  for (int t = 0; t < m; ++t) {
    const Quaternion u = sampleUnitQuaternion(rng);
    const Eigen::Vector4d xu = rightMultMatrix(u) * x;
    const double v = xu.dot(Q.matrix() * xu);
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / m;
  const double se = std::sqrt((acc2 / m - mean * mean) / m);
  const double formula = x.dot(avg.matrix() * x);
  CHECK(std::abs(mean - formula) < 5 * se);
}

TEST_CASE("qPlus is the complementary projection") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + (t % 3);
    Eigen::MatrixXd q(4 * n, 4 * n);
    for (int r = 0; r < 4 * n; ++r)
      for (int c = 0; c < 4 * n; ++c) q(r, c) = g(rng);
    const QuadForm Q(q);
    const QuadForm sum = su2Average(Q) + qPlus(Q);
    CHECK((sum.matrix() - QuadForm(q).matrix()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(su2Average(qPlus(Q)).matrix().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(qPlus(su2Average(Q)).matrix().cwiseAbs().maxCoeff() < 1e-12);
  }

  // Q = t1^2: the complement is t1^2 - |h1|^2/4
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
  q(0, 0) = 1.0;
  Eigen::MatrixXd expect = q - 0.25 * Eigen::Matrix4d::Identity();
  CHECK((qPlus(QuadForm(q)).matrix() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("invariantToHH: calibration and roundtrip") {
  for (int n = 1; n <= 3; ++n) {
    const HHMatrix id = invariantToHH(QuadForm::normSqForm(n));
    CHECK((id - HHMatrix::identity(n)).maxAbs() < 1e-14);
    const HHMatrix two =
        invariantToHH(QuadForm(2.0 * Eigen::MatrixXd::Identity(4 * n, 4 * n)));
    CHECK((two - 2.0 * HHMatrix::identity(n)).maxAbs() < 1e-14);
  }

  std::mt19937_64 rng(18);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + (t % 3);
    Eigen::MatrixXd q(4 * n, 4 * n);
    for (int r = 0; r < 4 * n; ++r)
      for (int c = 0; c < 4 * n; ++c) q(r, c) = g(rng);
    const QuadForm inv = su2Average(QuadForm(q));
    const HHMatrix h = invariantToHH(inv);
    CHECK((hhToInvariant(h).matrix() - inv.matrix()).cwiseAbs().maxCoeff() <
          1e-12);
    // positivity corresponds through the embedding
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inv.matrix(),
                                                      Eigen::EigenvaluesOnly);
    double minEig = 0;
    isPositive(h, true, &minEig);
    CHECK(std::abs(minEig - es.eigenvalues().minCoeff()) < 1e-10);
  }
}

TEST_CASE("invariantToHH rejects non-invariant forms") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(4, 4);
  q(0, 0) = 1.0;  // t1^2 is not SU(2)-invariant
  CHECK_THROWS_AS(invariantToHH(QuadForm(q)), InputError);
}

TEST_CASE("hhInverse closed forms") {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + (t % 3);
    HHMatrix a = randomHH(n, rng);
    double shift = 0;
    for (int k = 0; k < n; ++k) {
      double s = 0;
      for (int l = 0; l < n; ++l) s += a(k, l).norm();
      shift = std::max(shift, s);
    }
    a = a + (shift + 0.3) * HHMatrix::identity(n);
    const HHMatrix inv = hhInverse(a);
    const QuatMatrix prod = a.toQuatMatrix() * inv.toQuatMatrix();
    const QuatMatrix id = QuatMatrix::identity(n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        CHECK((prod(r, c) - id(r, c)).maxAbs() < 1e-10);
  }
}
