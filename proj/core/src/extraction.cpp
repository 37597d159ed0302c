#include "mitmp/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "mitmp/errors.hpp"

namespace mitmp
{

namespace
{

struct Fit
{
  Eigen::VectorXd local_amplitudes;  // referred to t_start
  double residual_rms = 0.0;
  Eigen::VectorXd tau_sigma;
};

Eigen::MatrixXd DecayBasis(const Eigen::VectorXd &taus, int samples, double dt)
{
  Eigen::MatrixXd A(samples, taus.size());
  for (int k = 0; k < samples; k++)
  {
    for (Eigen::Index n = 0; n < taus.size(); n++)
    {
      A(k, n) = std::exp(-k * dt / taus[n]);
    }
  }
  return A;
}

Fit FitAmplitudes(const Eigen::VectorXd &y, const Eigen::VectorXd &taus, double dt)
{
  const int samples = static_cast<int>(y.size());
  const Eigen::MatrixXd A = DecayBasis(taus, samples, dt);
  Fit fit;
  fit.local_amplitudes = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd residual = y - A * fit.local_amplitudes;
  const auto params = 2 * taus.size();
  const double dof = std::max<double>(1.0, static_cast<double>(samples - params));
  fit.residual_rms = std::sqrt(residual.squaredNorm() / dof);

  // Linearized covariance of (amplitudes, taus): sigma^2 (J^T J)^{-1}.
  Eigen::MatrixXd J(samples, params);
  J.leftCols(taus.size()) = A;
  for (int k = 0; k < samples; k++)
  {
    const double s = k * dt;
    for (Eigen::Index n = 0; n < taus.size(); n++)
    {
      J(k, taus.size() + n) = fit.local_amplitudes[n] * A(k, n) * s / (taus[n] * taus[n]);
    }
  }
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  const Eigen::MatrixXd cov = JtJ.completeOrthogonalDecomposition().pseudoInverse();
  fit.tau_sigma = (fit.residual_rms * cov.diagonal().tail(taus.size()).cwiseAbs().cwiseSqrt());
  return fit;
}

}  // namespace

DecaySignal DecaySignal::FromSamples(const std::vector<double> &times,
                                     const std::vector<double> &values)
{
  if (times.size() != values.size() || times.size() < 2)
  {
    throw ValidationError("decay signal: need at least two (time, value) samples");
  }
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0))
  {
    throw ValidationError("decay signal: times must be increasing");
  }
  for (std::size_t k = 1; k < times.size(); k++)
  {
    if (std::abs((times[k] - times[k - 1]) - dt) > 1e-9 * dt)
    {
      throw ValidationError("decay signal: non-uniform sampling at index " + std::to_string(k));
    }
  }
  return {values, dt, times.front()};
}

double ExtractedSpectrum::ErrorBound() const
{
  return tau_sigma.size() ? tau_sigma.maxCoeff() : 0.0;
}

ExtractedSpectrum ExtractTimeConstants(const DecaySignal &signal, int max_order)
{
  if (max_order < 1)
  {
    throw ValidationError("extract: max_order must be >= 1");
  }
  if (!(signal.dt > 0.0))
  {
    throw ValidationError("extract: dt must be positive");
  }
  const int N = static_cast<int>(signal.samples.size());
  if (N < 2 * max_order + 1)
  {
    throw SignalTooShortError("need at least " + std::to_string(2 * max_order + 1) +
                              " samples for order " + std::to_string(max_order) + ", got " +
                              std::to_string(N));
  }
  const Eigen::Map<const Eigen::VectorXd> y(signal.samples.data(), N);
  if (!y.allFinite())
  {
    throw ValidationError("extract: non-finite samples");
  }

  const int pencil = std::clamp(N / 3, max_order, N - max_order - 1);
  const int rows = N - pencil;
  Eigen::MatrixXd Y(rows, pencil + 1);
  for (int i = 0; i < rows; i++)
  {
    Y.row(i) = y.segment(i, pencil + 1).transpose();
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinV);
  const Eigen::VectorXd &sv = svd.singularValues();
  if (!(sv[0] > 0.0))
  {
    throw SignalTooShortError("Hankel matrix is zero (no signal)");
  }
  const double noise_level = sv.size() > max_order ? sv[max_order] / sv[0] : 0.0;
  const double cutoff = std::max(1e-10, 10.0 * noise_level);
  int order = 0;
  while (order < max_order && order < sv.size() && sv[order] / sv[0] > cutoff)
  {
    order++;
  }
  if (order == 0)
  {
    throw SignalTooShortError("rank collapse: no singular value above the noise cutoff");
  }

  ExtractedSpectrum out;
  const Eigen::MatrixXd V = svd.matrixV().leftCols(order);
  const Eigen::MatrixXd V1 = V.topRows(pencil);
  const Eigen::MatrixXd V2 = V.bottomRows(pencil);
  const Eigen::MatrixXd shift = V1.colPivHouseholderQr().solve(V2);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(shift, false);
  if (eig.info() != Eigen::Success)
  {
    throw ExtractionError("pole eigenproblem did not converge");
  }

  std::vector<double> taus;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); k++)
  {
    const std::complex<double> z = eig.eigenvalues()[k];
    std::ostringstream note;
    if (std::abs(z.imag()) > 1e-8 * std::abs(z))
    {
      note << "rejected oscillatory pole " << z;
      out.diagnostics.push_back(note.str());
      continue;
    }
    if (!(z.real() > 0.0 && z.real() < 1.0))
    {
      note << "rejected non-decaying pole " << z.real();
      out.diagnostics.push_back(note.str());
      continue;
    }
    taus.push_back(-signal.dt / std::log(z.real()));
  }
  if (taus.empty())
  {
    throw ExtractionError("no admissible real decaying pole");
  }
  std::sort(taus.begin(), taus.end(), std::greater<>());

  Eigen::VectorXd tau_vec = Eigen::Map<Eigen::VectorXd>(taus.data(), taus.size());
  Fit fit = FitAmplitudes(y, tau_vec, signal.dt);

  // Components indistinguishable from the residual are dropped and the rest refit.
  std::vector<double> kept;
  for (Eigen::Index n = 0; n < tau_vec.size(); n++)
  {
    if (std::abs(fit.local_amplitudes[n]) > 3.0 * fit.residual_rms)
    {
      kept.push_back(tau_vec[n]);
    }
    else
    {
      std::ostringstream note;
      note << "dropped tau " << tau_vec[n] << " with amplitude below the noise threshold";
      out.diagnostics.push_back(note.str());
    }
  }
  if (kept.empty())
  {
    throw ExtractionError("every pole has an amplitude below the noise threshold");
  }
  if (kept.size() != taus.size())
  {
    tau_vec = Eigen::Map<Eigen::VectorXd>(kept.data(), kept.size());
    fit = FitAmplitudes(y, tau_vec, signal.dt);
  }

  out.taus = tau_vec;
  out.amplitudes =
      fit.local_amplitudes.cwiseProduct((signal.t_start / tau_vec.array()).exp().matrix());
  out.tau_sigma = fit.tau_sigma;
  out.noise_floor = fit.residual_rms;
  out.retained = static_cast<int>(tau_vec.size());
  return out;
}

ExtractedSpectrum TruncateByNoise(const ExtractedSpectrum &spectrum, double delta)
{
  if (!(delta >= 0.0))
  {
    throw ValidationError("truncate: delta must be non-negative");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index n = 0; n < spectrum.taus.size(); n++)
  {
    if (spectrum.taus[n] > delta)
    {
      keep.push_back(n);
    }
  }
  ExtractedSpectrum out = spectrum;
  const auto count = static_cast<Eigen::Index>(keep.size());
  out.taus.resize(count);
  out.amplitudes.resize(count);
  out.tau_sigma.resize(count);
  for (Eigen::Index i = 0; i < count; i++)
  {
    out.taus[i] = spectrum.taus[keep[i]];
    out.amplitudes[i] = spectrum.amplitudes.size() ? spectrum.amplitudes[keep[i]] : 0.0;
    out.tau_sigma[i] = spectrum.tau_sigma.size() ? spectrum.tau_sigma[keep[i]] : 0.0;
  }
  out.retained = static_cast<int>(count);
  return out;
}

ExtractedSpectrum MergeSpectra(const std::vector<ExtractedSpectrum> &spectra,
                               double relative_tolerance)
{
  struct Entry
  {
    double tau, amplitude, sigma;
  };
  std::vector<Entry> all;
  ExtractedSpectrum out;
  for (const auto &s : spectra)
  {
    for (Eigen::Index n = 0; n < s.taus.size(); n++)
    {
      all.push_back({s.taus[n], s.amplitudes[n], s.tau_sigma.size() ? s.tau_sigma[n] : 0.0});
    }
    out.noise_floor = std::max(out.noise_floor, s.noise_floor);
    out.diagnostics.insert(out.diagnostics.end(), s.diagnostics.begin(), s.diagnostics.end());
  }
  std::sort(all.begin(), all.end(), [](const Entry &a, const Entry &b) { return a.tau > b.tau; });

  std::vector<Entry> merged;
  std::vector<int> counts;
  for (const auto &e : all)
  {
    if (!merged.empty())
    {
      Entry &c = merged.back();
      const double mean = c.tau / counts.back();
      if (std::abs(e.tau - mean) <= relative_tolerance * mean)
      {
        c.tau += e.tau;
        c.sigma = std::max(c.sigma, e.sigma);
        if (std::abs(e.amplitude) > std::abs(c.amplitude))
        {
          c.amplitude = e.amplitude;
        }
        counts.back()++;
        continue;
      }
    }
    merged.push_back(e);
    counts.push_back(1);
  }

  const auto count = static_cast<Eigen::Index>(merged.size());
  out.taus.resize(count);
  out.amplitudes.resize(count);
  out.tau_sigma.resize(count);
  for (Eigen::Index i = 0; i < count; i++)
  {
    out.taus[i] = merged[i].tau / counts[i];
    out.amplitudes[i] = merged[i].amplitude;
    out.tau_sigma[i] = merged[i].sigma;
  }
  out.retained = static_cast<int>(count);
  return out;
}

}  // namespace mitmp
