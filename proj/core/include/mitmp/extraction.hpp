#ifndef MITMP_EXTRACTION_HPP
#define MITMP_EXTRACTION_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

namespace mitmp
{

// Uniformly sampled decay waveform y(t_start + k dt).
struct DecaySignal
{
  std::vector<double> samples;
  double dt = 0.0;
  double t_start = 0.0;

  // Builds a signal from explicit sample times; throws ValidationError if the
  // spacing is not uniform.
  static DecaySignal FromSamples(const std::vector<double> &times,
                                 const std::vector<double> &values);
};

// Time constants recovered from a decay, sorted decreasing, with amplitudes
// referred to t = 0: y(t) ~ sum_n amplitudes[n] exp(-t / taus[n]).
struct ExtractedSpectrum
{
  Eigen::VectorXd taus;
  Eigen::VectorXd amplitudes;
  Eigen::VectorXd tau_sigma;  // one-sigma uncertainty of each tau from the fit residual
  double noise_floor = 0.0;   // residual RMS of the fit (signal units)
  int retained = 0;
  std::vector<std::string> diagnostics;

  // Largest tau_sigma (0 for an empty spectrum).
  double ErrorBound() const;
};

// Matrix-pencil estimate with pencil parameter N / 3. The effective order is
// the number of normalized singular values of the Hankel matrix above
// max(1e-10, 10 * sigma_{max_order} / sigma_0), capped at max_order.
// Complex and non-decaying poles are discarded with a diagnostic, as are
// components whose amplitude at t_start is within 3 noise floors of zero.
// Throws SignalTooShortError when there are fewer than 2 * max_order + 1
// samples or the Hankel matrix has no signal subspace, and ExtractionError
// when no admissible real decaying pole remains.
ExtractedSpectrum ExtractTimeConstants(const DecaySignal &signal, int max_order);

// Drops every entry with tau <= delta.
ExtractedSpectrum TruncateByNoise(const ExtractedSpectrum &spectrum, double delta);

// Merges per-sensor spectra by clustering time constants whose relative
// distance to the running cluster mean is within `relative_tolerance`.
// Cluster tau is the mean; amplitude is the member with the largest magnitude.
ExtractedSpectrum MergeSpectra(const std::vector<ExtractedSpectrum> &spectra,
                               double relative_tolerance = 0.01);

}  // namespace mitmp

#endif  // MITMP_EXTRACTION_HPP
