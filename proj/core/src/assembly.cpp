#include "mitmp/assembly.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>

#include "mitmp/errors.hpp"
#include "mitmp/parallel.hpp"

namespace mitmp
{

namespace
{

Segment EdgeSegment(const Edge &e)
{
  return {e.start, e.end};
}

void RequirePositiveDefinite(const Eigen::MatrixXd &m, const char *name, const char *hint)
{
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
  {
    throw NumericalError("assembly", name, std::string("not positive definite (") + hint + ")");
  }
}

}  // namespace

void SensorSet::Validate(const PlateGrid &grid) const
{
  for (std::size_t i = 0; i < points.size(); i++)
  {
    if (!points[i].allFinite() || grid.Contains(points[i]))
    {
      throw ValidationError("sensors: probe " + std::to_string(i) +
                            " must lie strictly outside the plate");
    }
  }
  for (std::size_t i = 0; i < pickup_loops.size(); i++)
  {
    ValidatePolygon(pickup_loops[i], "sensors: pickup loop");
    for (const auto &seg : PolygonSegments(pickup_loops[i]))
    {
      if (grid.SegmentTouches(seg.a, seg.b))
      {
        throw ValidationError("sensors: pickup loop " + std::to_string(i) +
                              " must lie strictly outside the plate");
      }
    }
  }
}

double WireRadius(const PlateGrid &grid)
{
  return 0.25 * grid.Pitch();
}

Eigen::MatrixXd AssembleResistance(const PlateGrid &grid, const ResistivityMap &eta)
{
  if (eta.Size() != grid.Dof())
  {
    throw ValidationError("resistivity: size does not match grid");
  }
  const int n = grid.Dof();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  const double h = grid.Thickness();
  for (const auto &e : grid.Edges())
  {
    const double length = (e.end - e.start).norm();
    const double width = grid.Pitch();
    double eta_e;
    if (e.IsInterior())
    {
      eta_e = 0.5 * (eta[e.cells[0]] + eta[e.cells[1]]);
    }
    else
    {
      eta_e = eta[e.cells[0]];
    }
    const double r = eta_e * length / (h * width);
    for (int a = 0; a < 2; a++)
    {
      if (e.cells[a] < 0)
      {
        continue;
      }
      for (int b = 0; b < 2; b++)
      {
        if (e.cells[b] < 0)
        {
          continue;
        }
        R(e.cells[a], e.cells[b]) += e.signs[a] * e.signs[b] * r;
      }
    }
  }
  if (!R.allFinite())
  {
    throw NumericalError("assembly", "R", "non-finite entries (resistivity overflow)");
  }
  RequirePositiveDefinite(R, "R", "degenerate grid");
  return R;
}

Eigen::MatrixXd AssembleEdgeInductance(const PlateGrid &grid)
{
  const auto &edges = grid.Edges();
  const int ne = grid.NumEdges();
  const double scale = grid.Mu0() / (4.0 * std::numbers::pi);
  const double radius = WireRadius(grid);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(ne, ne);
  ParallelFor(ne, [&](int e) {
    const Segment s = EdgeSegment(edges[e]);
    for (int f = e; f < ne; f++)
    {
      if (edges[f].axis != edges[e].axis)
      {
        continue;
      }
      M(e, f) = scale * NeumannIntegral(s, EdgeSegment(edges[f]), radius);
    }
  });
  M.triangularView<Eigen::StrictlyLower>() = M.transpose();
  return M;
}

Eigen::MatrixXd ProjectToLoops(const PlateGrid &grid, const Eigen::MatrixXd &edge_inductance)
{
  const int n = grid.Dof();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  ParallelFor(n, [&](int k) {
    const auto &ek = grid.CellEdges(k);
    for (int l = k; l < n; l++)
    {
      const auto &el = grid.CellEdges(l);
      double sum = 0.0;
      for (const auto &[e, se] : ek)
      {
        for (const auto &[f, sf] : el)
        {
          sum += se * sf * edge_inductance(e, f);
        }
      }
      L(k, l) = sum;
    }
  });
  L.triangularView<Eigen::StrictlyLower>() = L.transpose();
  return L;
}

Eigen::MatrixXd AssembleInductance(const PlateGrid &grid)
{
  Eigen::MatrixXd L = ProjectToLoops(grid, AssembleEdgeInductance(grid));
  RequirePositiveDefinite(L, "L", "bad wire-radius regularization");
  return L;
}

OperatorPair AssemblePair(const PlateGrid &grid, const ResistivityMap &eta)
{
  return AssemblePair(grid, AssembleInductance(grid), eta);
}

OperatorPair AssemblePair(const PlateGrid &grid, const Eigen::MatrixXd &L,
                          const ResistivityMap &eta)
{
  if (L.rows() != grid.Dof() || L.cols() != grid.Dof())
  {
    throw ValidationError("assembly: inductance matrix does not match grid");
  }
  return {L, AssembleResistance(grid, eta), grid.Dof(), grid.Mu0()};
}

Eigen::Vector3d BField(const PlateGrid &grid, const Eigen::VectorXd &dof_vector,
                       const Eigen::Vector3d &point)
{
  if (dof_vector.size() != grid.Dof())
  {
    throw ValidationError("b_field: dof vector size does not match grid");
  }
  const Eigen::VectorXd currents = grid.Incidence() * dof_vector;
  Eigen::Vector3d field = Eigen::Vector3d::Zero();
  const auto &edges = grid.Edges();
  for (int e = 0; e < grid.NumEdges(); e++)
  {
    field += currents[e] * SegmentField(EdgeSegment(edges[e]), point);
  }
  return field * (grid.Mu0() / (4.0 * std::numbers::pi));
}

Eigen::VectorXd MutualCoupling(const PlateGrid &grid, const Polygon &source_loop)
{
  ValidatePolygon(source_loop, "source loop");
  const auto sides = PolygonSegments(source_loop);
  const double radius = WireRadius(grid);
  const auto &edges = grid.Edges();
  Eigen::VectorXd per_edge(grid.NumEdges());
  ParallelFor(grid.NumEdges(), [&](int e) {
    const Segment edge = EdgeSegment(edges[e]);
    double sum = 0.0;
    for (const auto &side : sides)
    {
      sum += NeumannIntegral(side, edge, radius);
    }
    per_edge[e] = sum;
  });
  Eigen::VectorXd m = grid.Incidence().transpose() * per_edge;
  return m * (grid.Mu0() / (4.0 * std::numbers::pi));
}

double LoopMutualInductance(const Polygon &a, const Polygon &b, double mu0, double wire_radius)
{
  ValidatePolygon(a, "loop a");
  ValidatePolygon(b, "loop b");
  return mu0 / (4.0 * std::numbers::pi) * LoopNeumannIntegral(a, b, wire_radius);
}

void WriteMatrixCsv(std::ostream &out, const Eigen::MatrixXd &m)
{
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); i++)
  {
    for (Eigen::Index j = 0; j < m.cols(); j++)
    {
      out << (j ? "," : "") << m(i, j);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace mitmp
