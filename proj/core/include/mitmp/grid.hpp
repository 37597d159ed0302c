#ifndef MITMP_GRID_HPP
#define MITMP_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace mitmp
{

enum class UnitSystem
{
  SI,
  Normalized  // mu0 = 1
};

// Free-space permeability for the chosen unit system (H/m in SI).
double Mu0(UnitSystem units);

enum class EdgeAxis
{
  X,
  Y
};

// A straight edge of the cell grid. Positive edge current flows from start to
// end, i.e. along +x or +y. Each edge borders at most two cells; `cells[s]` is
// -1 when absent and `signs[s]` is the incidence of that cell's
// counter-clockwise loop on the edge.
struct Edge
{
  EdgeAxis axis;
  Eigen::Vector3d start;
  Eigen::Vector3d end;
  std::array<int, 2> cells;
  std::array<int, 2> signs;

  bool IsInterior() const { return cells[0] >= 0 && cells[1] >= 0; }
};

//
// Thin rectangular conducting plate discretized into nx x ny square cells of
// side `pitch`. The plate mid-plane is z = 0 and it occupies
// |z| <= thickness / 2. Every cell carries one loop current (a piecewise
// constant stream function), so the represented current densities are
// divergence free with zero normal trace on the plate boundary by
// construction. Cells are indexed row-major: k = j * nx + i.
//
// Edges are ordered with all x-directed edges first (row j = 0..ny, then
// column i = 0..nx-1) followed by the y-directed edges (column i = 0..nx,
// then row j = 0..ny-1).
//
class PlateGrid
{
public:
  PlateGrid(int nx, int ny, double pitch, double thickness,
            Eigen::Vector2d origin = Eigen::Vector2d::Zero(),
            UnitSystem units = UnitSystem::SI);

  int Nx() const { return nx_; }
  int Ny() const { return ny_; }
  int Dof() const { return nx_ * ny_; }
  double Pitch() const { return pitch_; }
  double Thickness() const { return thickness_; }
  const Eigen::Vector2d &Origin() const { return origin_; }
  UnitSystem Units() const { return units_; }
  double Mu0() const { return mitmp::Mu0(units_); }

  int CellIndex(int i, int j) const { return j * nx_ + i; }
  int CellColumn(int k) const { return k % nx_; }
  int CellRow(int k) const { return k / nx_; }

  const std::vector<Edge> &Edges() const { return edges_; }
  int NumEdges() const { return static_cast<int>(edges_.size()); }
  int NumInteriorEdges() const;

  // The four edges of cell k with the loop's incidence sign on each.
  const std::array<std::pair<int, int>, 4> &CellEdges(int k) const { return cell_edges_[k]; }

  // Signed incidence C (edges x cells): net edge currents = C * loop currents.
  const Eigen::SparseMatrix<double> &Incidence() const { return incidence_; }

  Eigen::Vector3d CellCenter(int k) const;

  // Counter-clockwise corner loop of cell k (4 vertices in the plane z = 0).
  std::vector<Eigen::Vector3d> CellLoop(int k) const;

  // True if p lies inside or on the closed plate volume.
  bool Contains(const Eigen::Vector3d &p) const;

  // True if the closed segment [a, b] touches the closed plate volume.
  bool SegmentTouches(const Eigen::Vector3d &a, const Eigen::Vector3d &b) const;

private:
  int nx_;
  int ny_;
  double pitch_;
  double thickness_;
  Eigen::Vector2d origin_;
  UnitSystem units_;
  std::vector<Edge> edges_;
  std::vector<std::array<std::pair<int, int>, 4>> cell_edges_;
  Eigen::SparseMatrix<double> incidence_;
};

PlateGrid BuildGrid(int nx, int ny, double pitch, double thickness);

// Per-cell electrical resistivity (Ohm m); every value is finite and > 0.
class ResistivityMap
{
public:
  ResistivityMap(const PlateGrid &grid, std::vector<double> values);

  static ResistivityMap Uniform(const PlateGrid &grid, double eta);

  const std::vector<double> &Values() const { return values_; }
  double operator[](int k) const { return values_[k]; }
  int Size() const { return static_cast<int>(values_.size()); }
  double Min() const;

private:
  std::vector<double> values_;
};

// Boolean per-cell set (characteristic function of an inclusion).
class InclusionMask
{
public:
  InclusionMask() = default;
  explicit InclusionMask(int size) : cells_(size, 0) {}
  InclusionMask(const PlateGrid &grid, std::vector<std::uint8_t> cells);

  static InclusionMask FromIndices(const PlateGrid &grid, const std::vector<int> &indices);
  static InclusionMask Full(const PlateGrid &grid);

  int Size() const { return static_cast<int>(cells_.size()); }
  bool operator[](int k) const { return cells_[k] != 0; }
  void Set(int k, bool value = true) { cells_[k] = value ? 1 : 0; }

  int Count() const;
  bool Empty() const { return Count() == 0; }
  std::vector<int> Indices() const;
  bool IsSubsetOf(const InclusionMask &other) const;
  InclusionMask Complement() const;
  InclusionMask &operator|=(const InclusionMask &other);
  InclusionMask &operator&=(const InclusionMask &other);

  const std::vector<std::uint8_t> &Cells() const { return cells_; }

  friend bool operator==(const InclusionMask &, const InclusionMask &) = default;

private:
  std::vector<std::uint8_t> cells_;
};

// eta_inc inside the mask, eta_bg elsewhere.
ResistivityMap MaskToResistivity(const PlateGrid &grid, const InclusionMask &mask,
                                 double eta_bg, double eta_inc);

}  // namespace mitmp

#endif  // MITMP_GRID_HPP
