#include "mitmp/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mitmp/errors.hpp"

namespace mitmp
{

namespace
{

constexpr double kResidualTolerance = 1e-10;

void FixSign(Eigen::Ref<Eigen::VectorXd> v)
{
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0)
  {
    v = -v;
  }
}

}  // namespace

ModalBasis SolveModes(const Eigen::MatrixXd &L, const Eigen::MatrixXd &R)
{
  const Eigen::Index n = L.rows();
  if (L.cols() != n || R.rows() != n || R.cols() != n || n == 0)
  {
    throw ValidationError("eigensolver: L and R must be square with the same dimension");
  }

  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
  {
    throw NumericalError("eigensolver", "R", "Cholesky factorization failed (not definite)");
  }
  const auto G = llt.matrixL();

  // S = G^{-1} L G^{-T}
  const Eigen::MatrixXd X = G.solve(L);
  Eigen::MatrixXd S = G.solve(X.transpose()).transpose();
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success)
  {
    throw NumericalError("eigensolver", "L", "symmetric eigensolver did not converge");
  }

  ModalBasis basis;
  basis.dof = static_cast<int>(n);
  basis.taus = eig.eigenvalues().reverse();
  basis.modes = G.transpose().solve(eig.eigenvectors().rowwise().reverse());

  for (Eigen::Index k = 0; k < n; k++)
  {
    auto j = basis.modes.col(k);
    FixSign(j);
    const double tau = basis.taus[k];
    if (!(tau > 0.0))
    {
      throw NumericalError("eigensolver", "L",
                           "non-positive time constant at index " + std::to_string(k));
    }
    const Eigen::VectorXd Lj = L * j, Rj = R * j;
    const double residual = (Lj - tau * Rj).norm() / (Lj.norm() + tau * Rj.norm());
    if (!(residual <= kResidualTolerance))
    {
      throw NumericalError("eigensolver", "L",
                           "residual " + std::to_string(residual) + " above tolerance at mode " +
                               std::to_string(k));
    }
  }
  return basis;
}

ModalBasis SolveModes(const OperatorPair &pair)
{
  return SolveModes(pair.L, pair.R);
}

double RayleighQuotient(const OperatorPair &pair, const Eigen::VectorXd &j)
{
  if (j.size() != pair.dof)
  {
    throw ValidationError("rayleigh_quotient: vector size does not match dof");
  }
  if (j.isZero(0.0))
  {
    throw ValidationError("rayleigh_quotient: zero vector");
  }
  return j.dot(pair.L * j) / j.dot(pair.R * j);
}

double RestrictedMinimum(const OperatorPair &pair, const Eigen::MatrixXd &basis)
{
  if (basis.rows() != pair.dof || basis.cols() < 1)
  {
    throw ValidationError("restricted_minimum: basis shape does not match dof");
  }
  const Eigen::MatrixXd Lq = basis.transpose() * pair.L * basis;
  const Eigen::MatrixXd Rq = basis.transpose() * pair.R * basis;
  return SolveModes(Lq, Rq).taus.minCoeff();
}

MinMaxCertificate VerifyMinMax(const OperatorPair &pair, int n, int trials, std::uint64_t seed,
                               double tolerance)
{
  if (n < 1 || n > pair.dof)
  {
    throw ValidationError("verify_minmax: n must lie in [1, dof]");
  }
  if (trials < 0)
  {
    throw ValidationError("verify_minmax: trials must be non-negative");
  }
  const ModalBasis basis = SolveModes(pair);

  MinMaxCertificate cert;
  cert.n = n;
  cert.trials = trials;
  cert.tau_n = basis.taus[n - 1];
  cert.witness_subspace = basis.modes.leftCols(n);
  cert.witness_min = RestrictedMinimum(pair, cert.witness_subspace);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  cert.lhs_max_min = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; t++)
  {
    Eigen::MatrixXd Q(pair.dof, n);
    for (Eigen::Index c = 0; c < Q.cols(); c++)
    {
      for (Eigen::Index r = 0; r < Q.rows(); r++)
      {
        Q(r, c) = normal(rng);
      }
    }
    cert.lhs_max_min = std::max(cert.lhs_max_min, RestrictedMinimum(pair, Q));
  }

  const double tol = tolerance * basis.taus[0];
  cert.holds = cert.lhs_max_min <= cert.tau_n + tol &&
               std::abs(cert.witness_min - cert.tau_n) <= tol;
  return cert;
}

}  // namespace mitmp
