#ifndef MITMP_EIGENSOLVER_HPP
#define MITMP_EIGENSOLVER_HPP

#include <cstdint>

#include <Eigen/Core>

#include "mitmp/assembly.hpp"

namespace mitmp
{

// Solutions of L j = tau R j. taus are positive and non-increasing, column n
// of `modes` is j_n, and modes^T R modes = I.
struct ModalBasis
{
  Eigen::VectorXd taus;
  Eigen::MatrixXd modes;
  int dof = 0;
};

// Full generalized symmetric-definite eigensolve by Cholesky whitening of R.
// Each mode is scaled to unit R-norm and signed so that its largest-magnitude
// entry is positive. Throws NumericalError if R cannot be factored or a mode
// fails the residual check.
ModalBasis SolveModes(const OperatorPair &pair);

// Same on raw matrices (used for restricted subspace problems).
ModalBasis SolveModes(const Eigen::MatrixXd &L, const Eigen::MatrixXd &R);

// <L j, j> / <R j, j>. Throws ValidationError for j = 0.
double RayleighQuotient(const OperatorPair &pair, const Eigen::VectorXd &j);

// min over span(basis) of the Rayleigh quotient: the smallest generalized
// eigenvalue of the projected pair (Q^T L Q, Q^T R Q).
double RestrictedMinimum(const OperatorPair &pair, const Eigen::MatrixXd &basis);

struct MinMaxCertificate
{
  int n = 0;
  int trials = 0;
  double lhs_max_min = 0.0;  // max over random n-dim subspaces of the restricted min
  double tau_n = 0.0;
  double witness_min = 0.0;  // restricted min over span(j_1..j_n)
  Eigen::MatrixXd witness_subspace;
  bool holds = false;  // lhs_max_min <= tau_n + tol and witness attains tau_n
};

// Randomized check of the max-min characterization of the n-th time constant
// (1-based n). Random subspaces come from Gaussian bases seeded by `seed`.
MinMaxCertificate VerifyMinMax(const OperatorPair &pair, int n, int trials, std::uint64_t seed,
                               double tolerance = 1e-10);

}  // namespace mitmp

#endif  // MITMP_EIGENSOLVER_HPP
