#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "mitmp/assembly.hpp"
#include "mitmp/eigensolver.hpp"
#include "mitmp/errors.hpp"
#include "oracles.hpp"

using namespace mitmp;

namespace
{

OperatorPair RandomPair(int n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  OperatorPair p;
  p.L = oracle::RandomSpd(n, rng, 0.1, 3.0);
  p.R = oracle::RandomSpd(n, rng, 0.5, 2.0);
  p.dof = n;
  p.mu0 = 1.0;
  return p;
}

}  // namespace

TEST_CASE("scalar problem")
{
  const ModalBasis b = SolveModes(Eigen::MatrixXd::Constant(1, 1, 2.0),
                                  Eigen::MatrixXd::Constant(1, 1, 4.0));
  CHECK(b.taus[0] == doctest::Approx(0.5));
  CHECK(b.modes(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("diagonal problem")
{
  const Eigen::MatrixXd L = Eigen::Vector2d(1.0, 3.0).asDiagonal();
  const ModalBasis b = SolveModes(L, Eigen::MatrixXd::Identity(2, 2));
  CHECK(b.taus[0] == doctest::Approx(3.0));
  CHECK(b.taus[1] == doctest::Approx(1.0));
  CHECK(b.modes(1, 0) == doctest::Approx(1.0));
  CHECK(std::abs(b.modes(0, 0)) < 1e-15);
  CHECK(b.modes(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("random pair matches the whitening oracle")
{
  const OperatorPair p = RandomPair(5, 11);
  const ModalBasis b = SolveModes(p);
  const auto ref = oracle::WhitenedEigen(p.L, p.R);
  for (int n = 0; n < 5; n++)
  {
    CHECK(std::abs(b.taus[n] - ref.values[n]) <= 1e-10 * ref.values[0]);
    // same mode up to sign
    const double overlap = std::abs(b.modes.col(n).dot(p.R * ref.vectors.col(n)));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("modal invariants")
{
  const OperatorPair p = RandomPair(8, 3);
  const ModalBasis b = SolveModes(p);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(8, 8);
  CHECK((b.modes.transpose() * p.R * b.modes - I).cwiseAbs().maxCoeff() <= 1e-10);
  Eigen::MatrixXd D = b.modes.transpose() * p.L * b.modes;
  D.diagonal() -= b.taus;
  CHECK(D.cwiseAbs().maxCoeff() <= 1e-10 * b.taus[0]);
  for (int n = 0; n < 8; n++)
  {
    CHECK(b.taus[n] > 0.0);
    if (n)
    {
      CHECK(b.taus[n] <= b.taus[n - 1]);
    }
    Eigen::Index at;
    b.modes.col(n).cwiseAbs().maxCoeff(&at);
    CHECK(b.modes(at, n) > 0.0);
  }
}

TEST_CASE("solve_modes error paths")
{
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
  R(1, 1) = -1.0;
  CHECK_THROWS_AS(SolveModes(Eigen::MatrixXd::Identity(2, 2), R), NumericalError);
  try
  {
    SolveModes(Eigen::MatrixXd::Identity(2, 2), R);
  }
  catch (const NumericalError &e)
  {
    CHECK(e.Module() == "eigensolver");
    CHECK(e.Matrix() == "R");
  }
  CHECK_THROWS_AS(SolveModes(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)),
                  ValidationError);
}

TEST_CASE("rayleigh quotient")
{
  const OperatorPair p = RandomPair(6, 5);
  const ModalBasis b = SolveModes(p);
  for (int n = 0; n < 6; n++)
  {
    CHECK(RayleighQuotient(p, b.modes.col(n)) == doctest::Approx(b.taus[n]).epsilon(1e-12));
    CHECK(RayleighQuotient(p, -3.5 * b.modes.col(n)) ==
          doctest::Approx(b.taus[n]).epsilon(1e-12));
  }
  const Eigen::VectorXd mix = (b.modes.col(0) + b.modes.col(1)) / std::sqrt(2.0);
  const double q = RayleighQuotient(p, mix);
  CHECK(q >= b.taus[1] - 1e-12);
  CHECK(q <= b.taus[0] + 1e-12);
  CHECK(q == doctest::Approx(0.5 * (b.taus[0] + b.taus[1])));
  CHECK_THROWS_AS(RayleighQuotient(p, Eigen::VectorXd::Zero(6)), ValidationError);
}

TEST_CASE("restricted minimum over leading modes")
{
  const OperatorPair p = RandomPair(6, 8);
  const ModalBasis b = SolveModes(p);
  for (int n = 1; n <= 6; n++)
  {
    CHECK(std::abs(RestrictedMinimum(p, b.modes.leftCols(n)) - b.taus[n - 1]) <=
          1e-10 * b.taus[0]);
  }
}

TEST_CASE("max-min certificate")
{
  const OperatorPair p = RandomPair(6, 21);
  const ModalBasis b = SolveModes(p);

  const MinMaxCertificate c1 = VerifyMinMax(p, 1, 200, 1);
  CHECK(c1.holds);
  CHECK(c1.lhs_max_min <= b.taus[0] + 1e-10);
  CHECK(c1.witness_min == doctest::Approx(b.taus[0]).epsilon(1e-12));

  const MinMaxCertificate c3 = VerifyMinMax(p, 3, 500, 2);
  CHECK(c3.holds);
  CHECK(c3.lhs_max_min <= b.taus[2] + 1e-10);
  CHECK(std::abs(c3.witness_min - b.taus[2]) <= 1e-10 * b.taus[0]);
  CHECK(c3.witness_subspace.cols() == 3);

  const MinMaxCertificate c6 = VerifyMinMax(p, 6, 20, 3);
  CHECK(c6.lhs_max_min == doctest::Approx(b.taus[5]).epsilon(1e-10));

  CHECK_THROWS_AS(VerifyMinMax(p, 0, 10, 1), ValidationError);
  CHECK_THROWS_AS(VerifyMinMax(p, 7, 10, 1), ValidationError);
}

TEST_CASE("homogeneity and permutation invariance")
{
  const OperatorPair p = RandomPair(7, 13);
  const ModalBasis b = SolveModes(p);
  OperatorPair scaled = p;
  scaled.R *= 4.0;
  const ModalBasis bs = SolveModes(scaled);
  for (int n = 0; n < 7; n++)
  {
    CHECK(bs.taus[n] == doctest::Approx(b.taus[n] / 4.0).epsilon(1e-12));
  }
  CHECK((bs.modes * 2.0 - b.modes).cwiseAbs().maxCoeff() <= 1e-9);

  Eigen::VectorXi idx(7);
  idx << 3, 0, 6, 1, 5, 2, 4;
  const Eigen::PermutationMatrix<Eigen::Dynamic> P(idx);
  OperatorPair perm = p;
  perm.L = P * p.L * P.transpose();
  perm.R = P * p.R * P.transpose();
  const ModalBasis bp = SolveModes(perm);
  for (int n = 0; n < 7; n++)
  {
    CHECK(bp.taus[n] == doctest::Approx(b.taus[n]).epsilon(1e-12));
  }
}

TEST_CASE("assembled plate has a positive decreasing spectrum")
{
  const PlateGrid g(4, 4, 0.25, 0.01, Eigen::Vector2d::Zero(), UnitSystem::Normalized);
  const ModalBasis b = SolveModes(AssemblePair(g, ResistivityMap::Uniform(g, 1.0)));
  CHECK(b.dof == 16);
  CHECK(b.taus[15] > 0.0);
  // square symmetry makes the second and third modes degenerate
  CHECK(b.taus[1] == doctest::Approx(b.taus[2]).epsilon(1e-10));
}
