#include <doctest.h>

#include <cmath>
#include <random>

#include "mitmp/errors.hpp"
#include "mitmp/extraction.hpp"

using namespace mitmp;

namespace
{

DecaySignal Synthetic(const std::vector<double> &taus, const std::vector<double> &amps, int n,
                      double dt, double t_start = 0.0)
{
  DecaySignal s;
  s.dt = dt;
  s.t_start = t_start;
  for (int k = 0; k < n; k++)
  {
    const double t = t_start + k * dt;
    double y = 0.0;
    for (std::size_t m = 0; m < taus.size(); m++)
    {
      y += amps[m] * std::exp(-t / taus[m]);
    }
    s.samples.push_back(y);
  }
  return s;
}

void AddNoise(DecaySignal &s, double snr_db, std::uint64_t seed)
{
  double power = 0.0;
  for (double v : s.samples)
  {
    power += v * v;
  }
  const double sigma = std::sqrt(power / s.samples.size()) * std::pow(10.0, -snr_db / 20.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  for (double &v : s.samples)
  {
    v += g(rng);
  }
}

double Rel(double a, double b)
{
  return std::abs(a - b) / std::abs(b);
}

}  // namespace

TEST_CASE("single clean exponential")
{
  const ExtractedSpectrum s = ExtractTimeConstants(Synthetic({0.2}, {5.0}, 200, 0.005), 4);
  REQUIRE(s.retained == 1);
  CHECK(Rel(s.taus[0], 0.2) <= 1e-8);
  CHECK(Rel(s.amplitudes[0], 5.0) <= 1e-8);
}

TEST_CASE("two clean modes")
{
  const ExtractedSpectrum s = ExtractTimeConstants(Synthetic({1.0, 0.1}, {1.0, 1.0}, 500, 0.01), 6);
  REQUIRE(s.retained == 2);
  CHECK(Rel(s.taus[0], 1.0) <= 1e-6);
  CHECK(Rel(s.taus[1], 0.1) <= 1e-6);
  CHECK(Rel(s.amplitudes[0], 1.0) <= 1e-6);
  CHECK(Rel(s.amplitudes[1], 1.0) <= 1e-6);
}

TEST_CASE("two modes at 60 dB")
{
  DecaySignal sig = Synthetic({1.0, 0.1}, {1.0, 1.0}, 500, 0.01);
  AddNoise(sig, 60.0, 2024);
  const ExtractedSpectrum s = ExtractTimeConstants(sig, 6);
  REQUIRE(s.retained == 2);
  CHECK(Rel(s.taus[0], 1.0) <= 0.01);
  CHECK(Rel(s.taus[1], 0.1) <= 0.01);
  CHECK(s.noise_floor > 0.0);
  CHECK(s.ErrorBound() > 0.0);
  // the linearized uncertainty should be of the order of the actual error
  CHECK(std::abs(s.taus[0] - 1.0) <= 10.0 * s.tau_sigma[0]);
}

TEST_CASE("time shift moves amplitudes, not taus")
{
  const auto a = ExtractTimeConstants(Synthetic({0.5, 0.05}, {2.0, -1.0}, 300, 0.004), 4);
  const auto b = ExtractTimeConstants(Synthetic({0.5, 0.05}, {2.0, -1.0}, 300, 0.004, 0.3), 4);
  REQUIRE(a.retained == 2);
  REQUIRE(b.retained == 2);
  for (int n = 0; n < 2; n++)
  {
    CHECK(Rel(b.taus[n], a.taus[n]) <= 1e-8);
    // amplitudes are referred to t = 0 in both cases
    CHECK(Rel(b.amplitudes[n], a.amplitudes[n]) <= 1e-6);
  }
}

TEST_CASE("extraction errors")
{
  CHECK_THROWS_AS(ExtractTimeConstants(Synthetic({0.2}, {1.0}, 8, 0.01), 4), SignalTooShortError);
  CHECK_THROWS_AS(ExtractTimeConstants(Synthetic({0.2}, {0.0}, 100, 0.01), 4),
                  SignalTooShortError);
  // growing exponential has no admissible decaying pole
  CHECK_THROWS_AS(ExtractTimeConstants(Synthetic({-0.2}, {1.0}, 100, 0.01), 2), ExtractionError);
  CHECK_THROWS_AS(ExtractTimeConstants(Synthetic({0.2}, {1.0}, 100, 0.01), 0), ValidationError);
  DecaySignal bad = Synthetic({0.2}, {1.0}, 100, 0.01);
  bad.dt = 0.0;
  CHECK_THROWS_AS(ExtractTimeConstants(bad, 2), ValidationError);
}

TEST_CASE("oscillatory poles are rejected with a diagnostic")
{
  DecaySignal s;
  s.dt = 0.01;
  for (int k = 0; k < 400; k++)
  {
    const double t = k * s.dt;
    s.samples.push_back(std::exp(-t / 0.5) + 0.5 * std::exp(-t / 0.3) * std::cos(20.0 * t));
  }
  const ExtractedSpectrum out = ExtractTimeConstants(s, 4);
  REQUIRE(out.retained >= 1);
  CHECK(Rel(out.taus[0], 0.5) <= 1e-6);
  bool noted = false;
  for (const auto &d : out.diagnostics)
  {
    noted = noted || d.find("oscillatory") != std::string::npos;
  }
  CHECK(noted);
}

TEST_CASE("truncate_by_noise")
{
  ExtractedSpectrum s;
  s.taus = Eigen::Vector3d(1.0, 0.1, 0.01);
  s.amplitudes = Eigen::Vector3d(1.0, 2.0, 3.0);
  s.tau_sigma = Eigen::Vector3d(0.0, 0.0, 0.0);
  s.retained = 3;
  CHECK(TruncateByNoise(s, 0.0).retained == 3);
  CHECK(TruncateByNoise(s, 1.0).retained == 0);
  CHECK(TruncateByNoise(s, 5.0).taus.size() == 0);
  const ExtractedSpectrum t = TruncateByNoise(s, 0.05);
  REQUIRE(t.retained == 2);
  CHECK(t.taus[0] == 1.0);
  CHECK(t.taus[1] == 0.1);
  CHECK(t.amplitudes[1] == 2.0);
  CHECK_THROWS_AS(TruncateByNoise(s, -1.0), ValidationError);
}

TEST_CASE("merge spectra clusters within the relative tolerance")
{
  ExtractedSpectrum a, b;
  a.taus = Eigen::Vector2d(1.0, 0.1);
  a.amplitudes = Eigen::Vector2d(1.0, 0.5);
  a.tau_sigma = Eigen::Vector2d(1e-3, 1e-4);
  b.taus = Eigen::Vector3d(1.004, 0.3, 0.1001);
  b.amplitudes = Eigen::Vector3d(-2.0, 1.0, 0.1);
  b.tau_sigma = Eigen::Vector3d(2e-3, 1e-3, 5e-5);
  const ExtractedSpectrum m = MergeSpectra({a, b});
  REQUIRE(m.retained == 3);
  CHECK(m.taus[0] == doctest::Approx(1.002));
  CHECK(m.amplitudes[0] == -2.0);
  CHECK(m.tau_sigma[0] == 2e-3);
  CHECK(m.taus[1] == 0.3);
  CHECK(m.taus[2] == doctest::Approx(0.10005));
}
