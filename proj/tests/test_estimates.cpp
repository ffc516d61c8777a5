#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "hktlab/estimates.hpp"

using namespace hktlab;

TEST_CASE("determinant inequality: equality at invariant Hessians") {
  // D^2 u = 2 Id: det D^2 u = 2^{4n}, mooreDet(Hess)^4 = (2^n)^4 -- equal
  for (int n = 1; n <= 2; ++n) {
    const Eigen::MatrixXd s = 2.0 * Eigen::MatrixXd::Identity(4 * n, 4 * n);
    const DetInequalityPoint pt = detInequalityMatrix(s);
    REQUIRE(pt.applicable);
    CHECK(std::abs(pt.margin) < 1e-10 * pt.scale);
    const double lhs = std::pow(2.0, 4 * n);
    const double rhs = std::pow(mooreDet(2.0 * HHMatrix::identity(n)), 4.0);
    CHECK(std::abs(lhs - rhs) < 1e-12 * rhs);
  }

  std::mt19937_64 rng(51);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + (t % 2);
    Eigen::MatrixXd b(4 * n, 4 * n);
    for (int r = 0; r < 4 * n; ++r)
      for (int c = 0; c < 4 * n; ++c) b(r, c) = g(rng);
    const Eigen::MatrixXd inv = su2Average(QuadForm(b * b.transpose())).matrix();
    const DetInequalityPoint pt = detInequalityMatrix(inv);
    REQUIRE(pt.applicable);
    CHECK(std::abs(pt.margin) <= 1e-10 * pt.scale);
  }
}

TEST_CASE("determinant inequality: strict on generic convex quadratics") {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> g;
  int strict = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + (t % 2);
    Eigen::MatrixXd b(4 * n, 4 * n);
    for (int r = 0; r < 4 * n; ++r)
      for (int c = 0; c < 4 * n; ++c) b(r, c) = g(rng);
    const DetInequalityPoint pt = detInequalityMatrix(b * b.transpose());
    REQUIRE(pt.applicable);
    CHECK(pt.margin >= -1e-9 * pt.scale);
    if (pt.margin > 1e-6 * pt.scale) ++strict;
  }
  CHECK(strict > 900);  // equality is the measure-zero case
}

TEST_CASE("determinant inequality: indefinite points are excluded") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
  s(0, 0) = -1.0;
  CHECK_FALSE(detInequalityMatrix(s).applicable);
}

TEST_CASE("determinant inequality on grid fields") {
  std::mt19937_64 rng(53);
  const TorusGrid g = TorusGrid::cube(1, 6);
  const DerivKit kit(g, DiffScheme::Spectral);
  GridFunction u = randomTrigField(g, rng, 1, 4);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= 0.01;
  const HHMatrix id = HHMatrix::identity(1);
  const DetInequalityReport rep = detInequalityCheck(kit, u, &id);
  CHECK(rep.checkedPoints > 0);
  CHECK(rep.minMargin >= -1e-9);
}

TEST_CASE("key proposition: scale invariance and the quadratic anchor") {
  RadialPshCase base;
  base.radius = 0.3;
  base.g = {1.0};
  const RadialNorms n1 = radialNorms(base);
  REQUIRE(n1.psh);
  REQUIRE(n1.nonpositive);
  const double r1 = n1.uInf / (2 * base.radius * n1.fL4);

  RadialPshCase scaled = base;
  scaled.g = {7.3};  // u -> lambda u
  const RadialNorms n2 = radialNorms(scaled);
  const double r2 = n2.uInf / (2 * scaled.radius * n2.fL4);
  CHECK(std::abs(r1 - r2) < 1e-12);

  CHECK(std::abs(r1 - quadraticAnchorRatio()) < 1e-4 * quadraticAnchorRatio());
}

namespace {
std::vector<RadialPshCase> randomFamily(int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ur(0.15, 0.45);
  std::uniform_real_distribution<double> uc(0.2, 2.0);
  std::uniform_real_distribution<double> ua(-0.3, 0.8);
  std::vector<RadialPshCase> out;
  for (int t = 0; t < count; ++t) {
    RadialPshCase c;
    c.radius = ur(rng);
    const double r2 = c.radius * c.radius;
    // g(s) = c0 (1 + a1 s/R^2 + a2 (s/R^2)^2), kept positive on [0, R^2]
    const double c0 = uc(rng);
    const double a1 = ua(rng), a2 = ua(rng);
    c.g = {c0, c0 * a1 / r2, c0 * a2 / (r2 * r2)};
    out.push_back(c);
  }
  return out;
}
}  // namespace

TEST_CASE("key proposition: bounded fitted constant across a random family") {
  std::mt19937_64 rng(54);
  const auto family = randomFamily(50, rng);
  const double cap = 10.0 * quadraticAnchorRatio();
  const PropositionReport rep = keyPropositionCheck(family, cap);
  CHECK(rep.admissibleCount > 25);
  CHECK(rep.pass);
  CHECK(rep.maxRatio / rep.minRatio < 50.0);
  for (const auto& row : rep.rows)
    if (!row.admissible) CHECK(row.note.find("skipped") == 0);
}

TEST_CASE("key lemma: anchor family at several sublevel depths") {
  std::mt19937_64 rng(55);
  const auto family = randomFamily(30, rng);
  const double cap = 10.0 * quadraticAnchorRatio();
  const PropositionReport prop = keyPropositionCheck(family, cap);
  REQUIRE(prop.pass);

  int tested = 0;
  for (const auto& c : family) {
    const double depth = -c.psi(0.0);
    if (depth <= 0) continue;
    for (double frac : {0.5, 0.9}) {
      const LemmaRow row = keyLemmaCheck(c, frac * depth, prop.maxRatio);
      if (!row.note.empty()) continue;
      ++tested;
      CHECK(row.pass);
      CHECK(row.sublevelCompact);
    }
  }
  CHECK(tested >= 30);
}

TEST_CASE("key lemma: precondition failures are reported, not asserted") {
  RadialPshCase c;
  c.radius = 0.25;
  c.g = {1.0};
  const double depth = -c.psi(0.0);
  const LemmaRow tooDeep = keyLemmaCheck(c, 1.5 * depth, 1.0);
  CHECK_FALSE(tooDeep.pass);
  CHECK(tooDeep.note.find("skipped") == 0);
}

TEST_CASE("c0 sweep: constant family is exactly flat") {
  const TorusGrid g = TorusGrid::cube(1, 6);
  GridFunction seed(g);  // zero seed: every f_k is constant 1
  const SweepReport rep = c0Sweep(g, seed, {0.0, 1.0, 2.0});
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    REQUIRE(r.solved);
    CHECK(r.phiInf < 1e-12);
  }
  CHECK(rep.envelopeHolds);
}

TEST_CASE("c0 sweep: growing family stays below the quartic envelope") {
  std::mt19937_64 rng(56);
  const TorusGrid g = TorusGrid::cube(1, 8);
  GridFunction seed = randomTrigField(g, rng, 1, 4);
  const double scale = maxAbs(seed);
  for (std::size_t i = 0; i < seed.size(); ++i) seed[i] /= scale;

  const SweepReport rep = c0Sweep(g, seed, {0, 0.5, 1.0, 1.5, 2.0});
  for (const auto& r : rep.rows) REQUIRE(r.solved);
  CHECK(rep.envelopeHolds);
  CHECK(rep.monotone);

  const std::string path = "test_estimates_sweep.csv";
  writeSweepCsv(path, rep);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "k,f_inf,phi_inf,newton_steps,solved,note");
  std::remove(path.c_str());
}
