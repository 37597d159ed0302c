#include "mitmp/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mitmp/assembly.hpp"
#include "mitmp/eigensolver.hpp"
#include "mitmp/errors.hpp"
#include "mitmp/parallel.hpp"

namespace mitmp
{

Contrast ContrastOf(double eta_bg, double eta_inc)
{
  if (!(eta_bg > 0.0) || !(eta_inc > 0.0))
  {
    throw ValidationError("imaging: eta_bg and eta_inc must be positive");
  }
  if (eta_inc == eta_bg)
  {
    throw ValidationError("imaging: eta_inc must differ from eta_bg");
  }
  return eta_inc > eta_bg ? Contrast::Resistive : Contrast::Conductive;
}

Contrast Flip(Contrast c)
{
  return c == Contrast::Resistive ? Contrast::Conductive : Contrast::Resistive;
}

std::size_t TauPredictor::MaskHash::operator()(const std::vector<std::uint8_t> &cells) const
{
  // FNV-1a
  std::size_t h = 1469598103934665603ull;
  for (auto c : cells)
  {
    h = (h ^ c) * 1099511628211ull;
  }
  return h;
}

TauPredictor::TauPredictor(PlateGrid grid, double eta_bg, double eta_inc, int k)
  : grid_(std::move(grid)), eta_bg_(eta_bg), eta_inc_(eta_inc),
    contrast_(ContrastOf(eta_bg, eta_inc)), k_(k)
{
  if (k < 1)
  {
    throw ValidationError("imaging: k must be >= 1");
  }
  L_ = AssembleInductance(grid_);
}

Eigen::VectorXd TauPredictor::Predict(const InclusionMask &candidate) const
{
  if (candidate.Size() != grid_.Dof())
  {
    throw ValidationError("imaging: candidate size does not match grid");
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(candidate.Cells()); it != cache_.end())
    {
      return it->second;
    }
  }
  const ResistivityMap eta = MaskToResistivity(grid_, candidate, eta_bg_, eta_inc_);
  const ModalBasis basis = SolveModes(AssemblePair(grid_, L_, eta));
  const Eigen::VectorXd taus = basis.taus.head(std::min(k_, basis.dof));
  std::lock_guard lock(mutex_);
  cache_.emplace(candidate.Cells(), taus);
  return taus;
}

std::size_t TauPredictor::CacheSize() const
{
  std::lock_guard lock(mutex_);
  return cache_.size();
}

Eigen::VectorXd PredictedTaus(const PlateGrid &grid, double eta_bg, double eta_inc,
                              const InclusionMask &candidate, int k)
{
  return TauPredictor(grid, eta_bg, eta_inc, k).Predict(candidate);
}

MPTestResult MpTest(const Eigen::VectorXd &measured_taus, const Eigen::VectorXd &candidate_taus,
                    double tolerance, Contrast contrast, int max_compared)
{
  if (!(tolerance >= 0.0))
  {
    throw ValidationError("mp_test: tolerance must be non-negative");
  }
  const auto n = static_cast<int>(
      std::min({measured_taus.size(), candidate_taus.size(), Eigen::Index(max_compared)}));
  if (n <= 0)
  {
    throw InconclusiveError("mp_test: empty comparison set");
  }
  std::vector<double> measured(measured_taus.data(), measured_taus.data() + measured_taus.size());
  std::vector<double> candidate(candidate_taus.data(),
                                candidate_taus.data() + candidate_taus.size());
  std::sort(measured.begin(), measured.end(), std::greater<>());
  std::sort(candidate.begin(), candidate.end(), std::greater<>());

  MPTestResult result;
  result.n_compared = n;
  result.margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; i++)
  {
    const double gap =
        contrast == Contrast::Resistive ? candidate[i] - measured[i] : measured[i] - candidate[i];
    result.margin = std::min(result.margin, gap);
  }
  result.passes = result.margin >= -tolerance;
  return result;
}

std::vector<InclusionMask> EnumerateCandidates(const PlateGrid &grid, CandidateFamily family,
                                               int block_size)
{
  std::vector<InclusionMask> out;
  if (family == CandidateFamily::SingleCell)
  {
    for (int k = 0; k < grid.Dof(); k++)
    {
      out.push_back(InclusionMask::FromIndices(grid, {k}));
    }
    return out;
  }
  if (block_size < 1 || block_size > std::min(grid.Nx(), grid.Ny()))
  {
    throw ValidationError("imaging: block size must lie in [1, min(nx, ny)]");
  }
  for (int j = 0; j + block_size <= grid.Ny(); j++)
  {
    for (int i = 0; i + block_size <= grid.Nx(); i++)
    {
      InclusionMask mask(grid.Dof());
      for (int dj = 0; dj < block_size; dj++)
      {
        for (int di = 0; di < block_size; di++)
        {
          mask.Set(grid.CellIndex(i + di, j + dj));
        }
      }
      out.push_back(std::move(mask));
    }
  }
  return out;
}

ImagingReport ReconstructBounds(const TauPredictor &predictor, const Eigen::VectorXd &measured_taus,
                                double tolerance, CandidateFamily family, int block_size,
                                int max_compared)
{
  const PlateGrid &grid = predictor.Grid();
  const Contrast contrast = predictor.ContrastSign();
  const std::vector<InclusionMask> candidates = EnumerateCandidates(grid, family, block_size);

  ImagingReport report;
  report.tolerance = tolerance;
  report.outer_tests.resize(candidates.size());
  report.inner_tests.resize(grid.Dof());

  ParallelFor(static_cast<int>(candidates.size()), [&](int c) {
    MPTestResult r =
        MpTest(measured_taus, predictor.Predict(candidates[c]), tolerance, contrast, max_compared);
    r.candidate = candidates[c];
    report.outer_tests[c] = std::move(r);
  });
  ParallelFor(grid.Dof(), [&](int k) {
    const InclusionMask rest = InclusionMask::FromIndices(grid, {k}).Complement();
    MPTestResult r =
        MpTest(measured_taus, predictor.Predict(rest), tolerance, Flip(contrast), max_compared);
    r.candidate = rest;
    report.inner_tests[k] = std::move(r);
  });

  report.bounds.outer = InclusionMask(grid.Dof());
  report.bounds.inner = InclusionMask(grid.Dof());
  report.n_compared = std::numeric_limits<int>::max();
  for (const auto &r : report.outer_tests)
  {
    report.n_compared = std::min(report.n_compared, r.n_compared);
    if (r.passes)
    {
      report.bounds.outer |= r.candidate;
    }
  }
  for (int k = 0; k < grid.Dof(); k++)
  {
    if (!report.inner_tests[k].passes)
    {
      report.bounds.inner.Set(k);
    }
  }

  InclusionMask clipped = report.bounds.inner;
  clipped &= report.bounds.outer;
  if (!(clipped == report.bounds.inner))
  {
    report.diagnostics.push_back("inner bound clipped to the outer bound (" +
                                 std::to_string(report.bounds.inner.Count() - clipped.Count()) +
                                 " cells); measurement noise exceeds the tolerance");
    report.bounds.inner = clipped;
  }
  if (report.bounds.outer.Empty())
  {
    report.inconclusive = true;
    report.diagnostics.push_back(
        "every candidate failed the containment test: bounds are empty (check tolerance and "
        "contrast)");
  }
  if (report.bounds.inner.Empty())
  {
    report.diagnostics.push_back("inner bound is empty: no cell is certified");
  }
  if (report.bounds.outer.Count() == grid.Dof())
  {
    report.diagnostics.push_back("outer bound is the whole plate");
  }
  return report;
}

}  // namespace mitmp
