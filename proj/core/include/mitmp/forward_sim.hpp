#ifndef MITMP_FORWARD_SIM_HPP
#define MITMP_FORWARD_SIM_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mitmp/assembly.hpp"
#include "mitmp/eigensolver.hpp"

namespace mitmp
{

// Modal expansion coefficients c_n of a loop-current state x = sum c_n j_n.
// Uses the R-inner product: c_n = j_n^T R x0.
Eigen::VectorXd ProjectInitial(const ModalBasis &basis, const Eigen::MatrixXd &R,
                               const Eigen::VectorXd &x0);

// Source-free state at time t >= 0: sum_n c_n j_n exp(-t / tau_n).
Eigen::VectorXd FreeResponse(const ModalBasis &basis, const Eigen::VectorXd &coeffs, double t);

// Per-mode equivalent circuit r_n i_n + l_n i_n' = -m_n i_s'. With
// R-orthonormal modes r_n = 1 and l_n = tau_n.
struct CircuitParams
{
  Eigen::VectorXd r;
  Eigen::VectorXd l;
  Eigen::VectorXd m;
};

CircuitParams ModalCircuit(const OperatorPair &pair, const ModalBasis &basis,
                           const Eigen::VectorXd &coupling);

// State right after a source coil carrying `current` is switched off
// instantaneously. Flux conservation gives L x(0+) = m i_s(0-), so
// x0 = L^{-1} m i_s(0-) and, in modal form, c_n = m_n i_s(0-) / tau_n.
Eigen::VectorXd StepOffState(const OperatorPair &pair, const Eigen::VectorXd &coupling,
                             double current);
Eigen::VectorXd StepOffCoefficients(const ModalBasis &basis, const Eigen::VectorXd &coupling,
                                    double current);

// Uniformly sampled source current i_s(t0 + k dt).
struct SampledWaveform
{
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  // Throws ValidationError unless `times` is strictly increasing with uniform
  // spacing (relative tolerance 1e-9).
  static SampledWaveform FromSamples(const std::vector<double> &times,
                                     const std::vector<double> &values);
};

// Loop currents driven by the source coil, one column per waveform sample.
// Each modal circuit is advanced with the exact exponential integrator for a
// piecewise-linear i_s; the state at the first sample is `initial` (zero if
// empty).
Eigen::MatrixXd DrivenResponse(const OperatorPair &pair, const ModalBasis &basis,
                               const Eigen::VectorXd &coupling, const SampledWaveform &source,
                               const Eigen::VectorXd &initial = {});

struct SensorTraces
{
  std::vector<double> times;
  std::vector<Eigen::Matrix3Xd> b;  // per probe, 3 x times (T)
  Eigen::MatrixXd flux;              // pickup loops x times (Wb)
  Eigen::MatrixXd voltage;           // pickup loops x times (V), v = d(flux)/dt

  // Named scalar channels: "b<i>.x|y|z", "phi<i>", "v<i>".
  std::map<std::string, std::vector<double>> Channels() const;
};

// Per-mode sensor responses of the free decay. b_n comes from the
// Biot-Savart sum of mode n, phi_n from the pickup-to-cell mutual couplings,
// and v_n = -phi_n / tau_n so that v = d(phi)/dt.
SensorTraces SensorTrace(const PlateGrid &grid, const ModalBasis &basis,
                         const Eigen::VectorXd &coeffs, const SensorSet &sensors,
                         const std::vector<double> &times);

// CSV with header `time,sensor_id,value`, 17 significant digits.
void WriteTracesCsv(std::ostream &out, const SensorTraces &traces);

struct TraceChannel
{
  std::vector<double> times;
  std::vector<double> values;
};

// Reads the CSV written by WriteTracesCsv. Throws ValidationError on
// malformed input (with the 1-based line number).
std::map<std::string, TraceChannel> ReadTracesCsv(std::istream &in);

}  // namespace mitmp

#endif  // MITMP_FORWARD_SIM_HPP
