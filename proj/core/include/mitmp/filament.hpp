#ifndef MITMP_FILAMENT_HPP
#define MITMP_FILAMENT_HPP

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mitmp
{

// Straight current filament from a to b.
struct Segment
{
  Eigen::Vector3d a;
  Eigen::Vector3d b;

  double Length() const { return (b - a).norm(); }
  Eigen::Vector3d Direction() const { return (b - a).normalized(); }
};

// Closed polygonal filament loop; the last vertex connects back to the first.
using Polygon = std::vector<Eigen::Vector3d>;

std::vector<Segment> PolygonSegments(const Polygon &loop);

// Throws ValidationError for fewer than three vertices, zero-length sides or
// collinear vertices (zero enclosed vector area).
void ValidatePolygon(const Polygon &loop, const char *what = "polygon");

// Geometric part of the Neumann double line integral between two segments,
//   int int (dl . dl') / |r - r'|,
// i.e. the partial mutual inductance divided by mu0 / (4 pi). Parallel pairs
// use the closed form, orthogonal pairs vanish and every other orientation
// is integrated with an adaptive Gauss-Legendre rule over the closed-form
// segment potential. Overlapping collinear pairs (including a segment with
// itself) are regularized as parallel filaments at distance `wire_radius`.
double NeumannIntegral(const Segment &s, const Segment &t, double wire_radius);

// Sum of NeumannIntegral over all side pairs of two loops.
double LoopNeumannIntegral(const Polygon &p, const Polygon &q, double wire_radius);

// int ds' / |p - r(s')| over the segment. Throws NumericalError if p lies on it.
double SegmentPotential(const Segment &s, const Eigen::Vector3d &p);

// Biot-Savart field of a unit current along the segment at p, divided by
// mu0 / (4 pi). Throws NumericalError if p lies on the segment.
Eigen::Vector3d SegmentField(const Segment &s, const Eigen::Vector3d &p);

// Shortest distance from p to the closed segment.
double PointSegmentDistance(const Segment &s, const Eigen::Vector3d &p);

}  // namespace mitmp

#endif  // MITMP_FILAMENT_HPP
