#include "mitmp/filament.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mitmp/errors.hpp"

namespace mitmp
{

namespace
{

constexpr int kGaussOrder = 16;

struct GaussRule
{
  std::array<double, kGaussOrder> nodes;
  std::array<double, kGaussOrder> weights;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule MakeGaussRule()
{
  GaussRule rule{};
  const int n = kGaussOrder;
  for (int i = 0; i < n; i++)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; it++)
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; k++)
      {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule &Gauss()
{
  static const GaussRule rule = MakeGaussRule();
  return rule;
}

template <typename F>
double GaussPanel(const F &f, double lo, double hi)
{
  const auto &rule = Gauss();
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (int i = 0; i < kGaussOrder; i++)
  {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

template <typename F>
double Adaptive(const F &f, double lo, double hi, double whole, double abs_tol, int depth)
{
  const double mid = 0.5 * (lo + hi);
  const double left = GaussPanel(f, lo, mid);
  const double right = GaussPanel(f, mid, hi);
  if (depth <= 0 || std::abs(left + right - whole) <= abs_tol)
  {
    return left + right;
  }
  return Adaptive(f, lo, mid, left, abs_tol, depth - 1) +
         Adaptive(f, mid, hi, right, abs_tol, depth - 1);
}

// Second antiderivative of 1/sqrt(u^2 + d^2).
double ParallelKernel(double u, double d)
{
  return u * std::asinh(u / d) - std::hypot(u, d);
}

// d -> 0 limit of ParallelKernel with the terms that cancel in the
// second difference of non-overlapping intervals removed.
double CollinearKernel(double u)
{
  const double a = std::abs(u);
  return a == 0.0 ? 0.0 : a * std::log(a);
}

double ParallelNeumann(const Segment &s, const Segment &t, double sign, double wire_radius)
{
  const Eigen::Vector3d dir = s.Direction();
  const double a1 = 0.0, a2 = s.Length();
  const double beta1 = (t.a - s.a).dot(dir), beta2 = (t.b - s.a).dot(dir);
  const double b1 = std::min(beta1, beta2), b2 = std::max(beta1, beta2);
  const double d = ((t.a - s.a) - beta1 * dir).norm();
  const double scale = std::max(s.Length(), t.Length());
  const bool overlapping = std::min(a2, b2) - std::max(a1, b1) > 1e-12 * scale;

  auto second_difference = [&](auto kernel) {
    return kernel(b2 - a1) - kernel(b1 - a1) - kernel(b2 - a2) + kernel(b1 - a2);
  };

  if (d <= 1e-12 * scale)
  {
    if (!overlapping)
    {
      return sign * second_difference(CollinearKernel);
    }
    if (!(wire_radius > 0.0))
    {
      throw NumericalError("assembly", "M", "overlapping filaments need a positive wire radius");
    }
    return sign * second_difference([&](double u) { return ParallelKernel(u, wire_radius); });
  }
  return sign * second_difference([&](double u) { return ParallelKernel(u, d); });
}

}  // namespace

std::vector<Segment> PolygonSegments(const Polygon &loop)
{
  std::vector<Segment> out;
  out.reserve(loop.size());
  for (std::size_t i = 0; i < loop.size(); i++)
  {
    out.push_back({loop[i], loop[(i + 1) % loop.size()]});
  }
  return out;
}

void ValidatePolygon(const Polygon &loop, const char *what)
{
  if (loop.size() < 3)
  {
    throw ValidationError(std::string(what) + ": needs at least 3 vertices");
  }
  double perimeter = 0.0;
  for (const auto &v : loop)
  {
    if (!v.allFinite())
    {
      throw ValidationError(std::string(what) + ": non-finite vertex");
    }
  }
  for (const auto &seg : PolygonSegments(loop))
  {
    perimeter += seg.Length();
  }
  for (const auto &seg : PolygonSegments(loop))
  {
    if (seg.Length() <= 1e-12 * perimeter)
    {
      throw ValidationError(std::string(what) + ": zero-length side");
    }
  }
  Eigen::Vector3d area = Eigen::Vector3d::Zero();
  for (std::size_t i = 1; i + 1 < loop.size(); i++)
  {
    area += 0.5 * (loop[i] - loop[0]).cross(loop[i + 1] - loop[0]);
  }
  if (area.norm() <= 1e-12 * perimeter * perimeter)
  {
    throw ValidationError(std::string(what) + ": degenerate (zero enclosed area)");
  }
}

double PointSegmentDistance(const Segment &s, const Eigen::Vector3d &p)
{
  const Eigen::Vector3d d = s.b - s.a;
  const double t = std::clamp((p - s.a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

double SegmentPotential(const Segment &s, const Eigen::Vector3d &p)
{
  const double l = s.Length();
  if (PointSegmentDistance(s, p) <= 1e-12 * l)
  {
    throw NumericalError("assembly", "potential", "evaluation point lies on a filament");
  }
  const Eigen::Vector3d dir = (s.b - s.a) / l;
  const Eigen::Vector3d r = p - s.a;
  const double u = r.dot(dir);
  const double rho = (r - u * dir).norm();
  if (rho == 0.0)
  {
    return u < 0.0 ? std::log((l - u) / (-u)) : std::log(u / (u - l));
  }
  return std::asinh(u / rho) + std::asinh((l - u) / rho);
}

Eigen::Vector3d SegmentField(const Segment &s, const Eigen::Vector3d &p)
{
  if (PointSegmentDistance(s, p) <= 1e-12 * s.Length())
  {
    throw NumericalError("assembly", "b_field", "evaluation point lies on a filament");
  }
  const Eigen::Vector3d r1 = p - s.a, r2 = p - s.b;
  const double n1 = r1.norm(), n2 = r2.norm();
  const double denom = n1 * n2 * (n1 * n2 + r1.dot(r2));
  if (denom == 0.0)
  {
    return Eigen::Vector3d::Zero();
  }
  return r1.cross(r2) * ((n1 + n2) / denom);
}

double NeumannIntegral(const Segment &s, const Segment &t, double wire_radius)
{
  const Eigen::Vector3d ds = s.Direction(), dt = t.Direction();
  const double cosine = ds.dot(dt);
  if (ds.cross(dt).norm() <= 1e-12)
  {
    return ParallelNeumann(s, t, cosine > 0.0 ? 1.0 : -1.0, wire_radius);
  }
  if (std::abs(cosine) <= 1e-14)
  {
    return 0.0;
  }
  const double l = s.Length();
  auto integrand = [&](double x) { return SegmentPotential(t, s.a + x * ds); };
  const double whole = GaussPanel(integrand, 0.0, l);
  const double tol = 1e-14 * std::max(std::abs(whole), 1e-300);
  return cosine * Adaptive(integrand, 0.0, l, whole, tol, 30);
}

double LoopNeumannIntegral(const Polygon &p, const Polygon &q, double wire_radius)
{
  double sum = 0.0;
  for (const auto &s : PolygonSegments(p))
  {
    for (const auto &t : PolygonSegments(q))
    {
      sum += NeumannIntegral(s, t, wire_radius);
    }
  }
  return sum;
}

}  // namespace mitmp
