#ifndef MITMP_ASSEMBLY_HPP
#define MITMP_ASSEMBLY_HPP

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "mitmp/filament.hpp"
#include "mitmp/grid.hpp"

namespace mitmp
{

// Dense discrete operator pair in loop-current coordinates.
//   L: inductance matrix (H), the discrete form of the 1/|x - x'| operator.
//   R: resistance matrix (Ohm), the discrete eta-weighted inner product.
// Both are symmetric positive definite.
struct OperatorPair
{
  Eigen::MatrixXd L;
  Eigen::MatrixXd R;
  int dof = 0;
  double mu0 = 0.0;
};

// Field probes and pickup coils located outside the plate.
struct SensorSet
{
  std::vector<Eigen::Vector3d> points;
  std::vector<Polygon> pickup_loops;

  // Throws ValidationError if any probe or pickup filament touches the plate.
  void Validate(const PlateGrid &grid) const;
};

// Effective filament radius used for self and overlapping partial inductances.
double WireRadius(const PlateGrid &grid);

// R = C^T diag(r_e) C with r_e = eta_e * l_e / (h * w_e); w_e = l_e = pitch, eta_e
// is the mean of the adjacent cells (the single neighbor on boundary edges).
// Exactly linear in eta. Throws NumericalError if R is not positive definite.
Eigen::MatrixXd AssembleResistance(const PlateGrid &grid, const ResistivityMap &eta);

// Edge partial-inductance matrix M (H), edges x edges.
Eigen::MatrixXd AssembleEdgeInductance(const PlateGrid &grid);

// L = C^T M C. Independent of eta. Throws NumericalError if L is not
// positive definite.
Eigen::MatrixXd AssembleInductance(const PlateGrid &grid);

// L = C^T M C for an already assembled edge matrix.
Eigen::MatrixXd ProjectToLoops(const PlateGrid &grid, const Eigen::MatrixXd &edge_inductance);

OperatorPair AssemblePair(const PlateGrid &grid, const ResistivityMap &eta);
OperatorPair AssemblePair(const PlateGrid &grid, const Eigen::MatrixXd &L,
                          const ResistivityMap &eta);

// Magnetic flux density (T) at `point` produced by loop currents `dof_vector`.
Eigen::Vector3d BField(const PlateGrid &grid, const Eigen::VectorXd &dof_vector,
                       const Eigen::Vector3d &point);

// m[k] = mutual inductance (H) between `source_loop` and the loop of cell k.
Eigen::VectorXd MutualCoupling(const PlateGrid &grid, const Polygon &source_loop);

// Mutual inductance (H) between two filament loops.
double LoopMutualInductance(const Polygon &a, const Polygon &b, double mu0, double wire_radius);

// Row-major CSV, one matrix row per line, 17 significant digits.
void WriteMatrixCsv(std::ostream &out, const Eigen::MatrixXd &m);

}  // namespace mitmp

#endif  // MITMP_ASSEMBLY_HPP
