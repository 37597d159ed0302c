#include "mitmp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mitmp/errors.hpp"

namespace mitmp
{

double Mu0(UnitSystem units)
{
  return units == UnitSystem::SI ? 4.0e-7 * std::numbers::pi : 1.0;
}

PlateGrid::PlateGrid(int nx, int ny, double pitch, double thickness, Eigen::Vector2d origin,
                     UnitSystem units)
  : nx_(nx), ny_(ny), pitch_(pitch), thickness_(thickness), origin_(origin), units_(units)
{
  if (nx < 1 || ny < 1)
  {
    throw ValidationError("grid: cell counts must be >= 1 (got " + std::to_string(nx) + " x " +
                          std::to_string(ny) + ")");
  }
  if (!(pitch > 0.0) || !std::isfinite(pitch))
  {
    throw ValidationError("grid: pitch must be positive");
  }
  if (!(thickness > 0.0) || !std::isfinite(thickness))
  {
    throw ValidationError("grid: thickness must be positive");
  }
  if (!origin.allFinite())
  {
    throw ValidationError("grid: origin must be finite");
  }

  auto corner = [&](int i, int j) {
    return Eigen::Vector3d(origin_.x() + i * pitch_, origin_.y() + j * pitch_, 0.0);
  };

  cell_edges_.resize(Dof());
  std::vector<int> edge_slot(Dof(), 0);
  auto attach = [&](int edge, int cell, int sign) {
    cell_edges_[cell][edge_slot[cell]++] = {edge, sign};
  };

  // x-directed edges: bottom edge of cell (i, j) (+1), top edge of (i, j-1) (-1).
  for (int j = 0; j <= ny_; j++)
  {
    for (int i = 0; i < nx_; i++)
    {
      Edge e{EdgeAxis::X, corner(i, j), corner(i + 1, j), {-1, -1}, {0, 0}};
      int s = 0;
      const int id = static_cast<int>(edges_.size());
      if (j < ny_)
      {
        e.cells[s] = CellIndex(i, j);
        e.signs[s++] = +1;
        attach(id, CellIndex(i, j), +1);
      }
      if (j > 0)
      {
        e.cells[s] = CellIndex(i, j - 1);
        e.signs[s++] = -1;
        attach(id, CellIndex(i, j - 1), -1);
      }
      edges_.push_back(e);
    }
  }
  // y-directed edges: right edge of cell (i-1, j) (+1), left edge of (i, j) (-1).
  for (int i = 0; i <= nx_; i++)
  {
    for (int j = 0; j < ny_; j++)
    {
      Edge e{EdgeAxis::Y, corner(i, j), corner(i, j + 1), {-1, -1}, {0, 0}};
      int s = 0;
      const int id = static_cast<int>(edges_.size());
      if (i > 0)
      {
        e.cells[s] = CellIndex(i - 1, j);
        e.signs[s++] = +1;
        attach(id, CellIndex(i - 1, j), +1);
      }
      if (i < nx_)
      {
        e.cells[s] = CellIndex(i, j);
        e.signs[s++] = -1;
        attach(id, CellIndex(i, j), -1);
      }
      edges_.push_back(e);
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * Dof());
  for (int id = 0; id < NumEdges(); id++)
  {
    for (int s = 0; s < 2; s++)
    {
      if (edges_[id].cells[s] >= 0)
      {
        triplets.emplace_back(id, edges_[id].cells[s], edges_[id].signs[s]);
      }
    }
  }
  incidence_.resize(NumEdges(), Dof());
  incidence_.setFromTriplets(triplets.begin(), triplets.end());
}

int PlateGrid::NumInteriorEdges() const
{
  return static_cast<int>(
      std::count_if(edges_.begin(), edges_.end(), [](const Edge &e) { return e.IsInterior(); }));
}

Eigen::Vector3d PlateGrid::CellCenter(int k) const
{
  return {origin_.x() + (CellColumn(k) + 0.5) * pitch_, origin_.y() + (CellRow(k) + 0.5) * pitch_,
          0.0};
}

std::vector<Eigen::Vector3d> PlateGrid::CellLoop(int k) const
{
  const double x0 = origin_.x() + CellColumn(k) * pitch_;
  const double y0 = origin_.y() + CellRow(k) * pitch_;
  return {{x0, y0, 0.0}, {x0 + pitch_, y0, 0.0}, {x0 + pitch_, y0 + pitch_, 0.0},
          {x0, y0 + pitch_, 0.0}};
}

bool PlateGrid::Contains(const Eigen::Vector3d &p) const
{
  return p.x() >= origin_.x() && p.x() <= origin_.x() + nx_ * pitch_ && p.y() >= origin_.y() &&
         p.y() <= origin_.y() + ny_ * pitch_ && std::abs(p.z()) <= 0.5 * thickness_;
}

bool PlateGrid::SegmentTouches(const Eigen::Vector3d &a, const Eigen::Vector3d &b) const
{
  const Eigen::Vector3d lo(origin_.x(), origin_.y(), -0.5 * thickness_);
  const Eigen::Vector3d hi(origin_.x() + nx_ * pitch_, origin_.y() + ny_ * pitch_,
                           0.5 * thickness_);
  const Eigen::Vector3d d = b - a;
  double t0 = 0.0, t1 = 1.0;
  for (int c = 0; c < 3; c++)
  {
    if (d[c] == 0.0)
    {
      if (a[c] < lo[c] || a[c] > hi[c])
      {
        return false;
      }
      continue;
    }
    double ta = (lo[c] - a[c]) / d[c];
    double tb = (hi[c] - a[c]) / d[c];
    if (ta > tb)
    {
      std::swap(ta, tb);
    }
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1)
    {
      return false;
    }
  }
  return true;
}

PlateGrid BuildGrid(int nx, int ny, double pitch, double thickness)
{
  return PlateGrid(nx, ny, pitch, thickness);
}

ResistivityMap::ResistivityMap(const PlateGrid &grid, std::vector<double> values)
  : values_(std::move(values))
{
  if (static_cast<int>(values_.size()) != grid.Dof())
  {
    throw ValidationError("resistivity: expected " + std::to_string(grid.Dof()) +
                          " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); k++)
  {
    if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
    {
      throw ValidationError("resistivity: cell " + std::to_string(k) +
                            " must be finite and positive");
    }
  }
}

ResistivityMap ResistivityMap::Uniform(const PlateGrid &grid, double eta)
{
  return ResistivityMap(grid, std::vector<double>(grid.Dof(), eta));
}

double ResistivityMap::Min() const
{
  return *std::min_element(values_.begin(), values_.end());
}

InclusionMask::InclusionMask(const PlateGrid &grid, std::vector<std::uint8_t> cells)
  : cells_(std::move(cells))
{
  if (static_cast<int>(cells_.size()) != grid.Dof())
  {
    throw ValidationError("mask: expected " + std::to_string(grid.Dof()) + " cells, got " +
                          std::to_string(cells_.size()));
  }
  for (auto &c : cells_)
  {
    c = c ? 1 : 0;
  }
}

InclusionMask InclusionMask::FromIndices(const PlateGrid &grid, const std::vector<int> &indices)
{
  InclusionMask mask(grid.Dof());
  for (int k : indices)
  {
    if (k < 0 || k >= grid.Dof())
    {
      throw ValidationError("mask: cell index " + std::to_string(k) + " out of range");
    }
    mask.Set(k);
  }
  return mask;
}

InclusionMask InclusionMask::Full(const PlateGrid &grid)
{
  InclusionMask mask(grid.Dof());
  std::fill(mask.cells_.begin(), mask.cells_.end(), 1);
  return mask;
}

int InclusionMask::Count() const
{
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), 1));
}

std::vector<int> InclusionMask::Indices() const
{
  std::vector<int> out;
  for (int k = 0; k < Size(); k++)
  {
    if (cells_[k])
    {
      out.push_back(k);
    }
  }
  return out;
}

bool InclusionMask::IsSubsetOf(const InclusionMask &other) const
{
  for (int k = 0; k < Size(); k++)
  {
    if (cells_[k] && !other.cells_[k])
    {
      return false;
    }
  }
  return true;
}

InclusionMask InclusionMask::Complement() const
{
  InclusionMask out(Size());
  for (int k = 0; k < Size(); k++)
  {
    out.cells_[k] = cells_[k] ? 0 : 1;
  }
  return out;
}

InclusionMask &InclusionMask::operator|=(const InclusionMask &other)
{
  for (int k = 0; k < Size(); k++)
  {
    cells_[k] = (cells_[k] || other.cells_[k]) ? 1 : 0;
  }
  return *this;
}

InclusionMask &InclusionMask::operator&=(const InclusionMask &other)
{
  for (int k = 0; k < Size(); k++)
  {
    cells_[k] = (cells_[k] && other.cells_[k]) ? 1 : 0;
  }
  return *this;
}

ResistivityMap MaskToResistivity(const PlateGrid &grid, const InclusionMask &mask, double eta_bg,
                                 double eta_inc)
{
  if (!(eta_bg > 0.0) || !(eta_inc > 0.0))
  {
    throw ValidationError("resistivity: eta_bg and eta_inc must be positive");
  }
  if (mask.Size() != grid.Dof())
  {
    throw ValidationError("mask: size does not match grid");
  }
  std::vector<double> values(grid.Dof());
  for (int k = 0; k < grid.Dof(); k++)
  {
    values[k] = mask[k] ? eta_inc : eta_bg;
  }
  return ResistivityMap(grid, std::move(values));
}

}  // namespace mitmp
