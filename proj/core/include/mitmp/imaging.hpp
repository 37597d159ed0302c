#ifndef MITMP_IMAGING_HPP
#define MITMP_IMAGING_HPP

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "mitmp/grid.hpp"

namespace mitmp
{

// Sign of the inclusion/background contrast. With a resistive inclusion
// (eta_inc > eta_bg) growing the inclusion lowers every time constant:
//   A subset B  =>  tau_n(B) <= tau_n(A).
// A conductive inclusion reverses every inequality.
enum class Contrast
{
  Resistive,
  Conductive
};

Contrast ContrastOf(double eta_bg, double eta_inc);
Contrast Flip(Contrast c);

// Maps candidate inclusions to their largest k time constants. The
// inductance matrix does not depend on resistivity and is assembled once;
// results are cached per candidate. Safe to call concurrently.
class TauPredictor
{
public:
  TauPredictor(PlateGrid grid, double eta_bg, double eta_inc, int k);

  const PlateGrid &Grid() const { return grid_; }
  double EtaBackground() const { return eta_bg_; }
  double EtaInclusion() const { return eta_inc_; }
  Contrast ContrastSign() const { return contrast_; }
  int K() const { return k_; }

  Eigen::VectorXd Predict(const InclusionMask &candidate) const;

  std::size_t CacheSize() const;

private:
  struct MaskHash
  {
    std::size_t operator()(const std::vector<std::uint8_t> &cells) const;
  };

  PlateGrid grid_;
  double eta_bg_;
  double eta_inc_;
  Contrast contrast_;
  int k_;
  Eigen::MatrixXd L_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::vector<std::uint8_t>, Eigen::VectorXd, MaskHash> cache_;
};

// Top-k time constants of eta = eta_inc on the candidate and eta_bg elsewhere.
Eigen::VectorXd PredictedTaus(const PlateGrid &grid, double eta_bg, double eta_inc,
                              const InclusionMask &candidate, int k);

struct MPTestResult
{
  InclusionMask candidate;
  bool passes = false;
  double margin = 0.0;  // most violated signed gap (negative = violation)
  int n_compared = 0;
};

// Containment test: can the candidate lie inside the true inclusion?
// For a resistive contrast it passes iff measured_n <= candidate_n + tolerance
// for every compared n, with margin = min_n (candidate_n - measured_n); the
// conductive case swaps the roles. Time constants are paired by index after
// both lists are sorted decreasing; at most `max_compared` are compared.
// Throws InconclusiveError when nothing can be compared.
MPTestResult MpTest(const Eigen::VectorXd &measured_taus, const Eigen::VectorXd &candidate_taus,
                    double tolerance, Contrast contrast = Contrast::Resistive,
                    int max_compared = 10);

struct InclusionBounds
{
  InclusionMask inner;  // V_I
  InclusionMask outer;  // V_U
};

enum class CandidateFamily
{
  SingleCell,
  Block
};

// Single cells, or every k x k block (overlapping) that fits in the grid.
std::vector<InclusionMask> EnumerateCandidates(const PlateGrid &grid, CandidateFamily family,
                                               int block_size = 2);

struct ImagingReport
{
  InclusionBounds bounds;
  std::vector<MPTestResult> outer_tests;  // containment test per candidate
  std::vector<MPTestResult> inner_tests;  // complement test per single cell
  double tolerance = 0.0;
  int n_compared = 0;
  bool inconclusive = false;
  std::vector<std::string> diagnostics;
};

// Outer bound: union of candidates passing the containment test. Inner bound:
// cells c for which the containment test of the complement set (Omega \ c,
// inequality reversed) fails, certifying that the inclusion meets c. The
// inner bound is intersected with the outer one. When every candidate fails
// the bounds are empty and `inconclusive` is set.
ImagingReport ReconstructBounds(const TauPredictor &predictor, const Eigen::VectorXd &measured_taus,
                                double tolerance, CandidateFamily family, int block_size = 2,
                                int max_compared = 10);

}  // namespace mitmp

#endif  // MITMP_IMAGING_HPP
