#include "mitmp/forward_sim.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>

#include "mitmp/errors.hpp"

namespace mitmp
{

Eigen::VectorXd ProjectInitial(const ModalBasis &basis, const Eigen::MatrixXd &R,
                               const Eigen::VectorXd &x0)
{
  if (x0.size() != basis.dof || R.rows() != basis.dof || R.cols() != basis.dof)
  {
    throw ValidationError("project_initial: dimension mismatch");
  }
  return basis.modes.transpose() * (R * x0);
}

Eigen::VectorXd FreeResponse(const ModalBasis &basis, const Eigen::VectorXd &coeffs, double t)
{
  if (!(t >= 0.0))
  {
    throw ValidationError("free_response: time must be non-negative");
  }
  if (coeffs.size() != basis.dof)
  {
    throw ValidationError("free_response: coefficient count does not match dof");
  }
  const Eigen::VectorXd decay = (-t / basis.taus.array()).exp();
  return basis.modes * coeffs.cwiseProduct(decay);
}

CircuitParams ModalCircuit(const OperatorPair &pair, const ModalBasis &basis,
                           const Eigen::VectorXd &coupling)
{
  if (coupling.size() != pair.dof || basis.dof != pair.dof)
  {
    throw ValidationError("modal_circuit: dimension mismatch");
  }
  CircuitParams p;
  p.r = (basis.modes.transpose() * pair.R * basis.modes).diagonal();
  p.l = (basis.modes.transpose() * pair.L * basis.modes).diagonal();
  p.m = basis.modes.transpose() * coupling;
  return p;
}

Eigen::VectorXd StepOffState(const OperatorPair &pair, const Eigen::VectorXd &coupling,
                             double current)
{
  if (coupling.size() != pair.dof)
  {
    throw ValidationError("step_off: coupling size does not match dof");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(pair.L);
  if (llt.info() != Eigen::Success)
  {
    throw NumericalError("forward-sim", "L", "Cholesky factorization failed");
  }
  return llt.solve(coupling * current);
}

Eigen::VectorXd StepOffCoefficients(const ModalBasis &basis, const Eigen::VectorXd &coupling,
                                    double current)
{
  if (coupling.size() != basis.dof)
  {
    throw ValidationError("step_off: coupling size does not match dof");
  }
  return (basis.modes.transpose() * coupling * current).cwiseQuotient(basis.taus);
}

SampledWaveform SampledWaveform::FromSamples(const std::vector<double> &times,
                                             const std::vector<double> &values)
{
  if (times.size() != values.size() || times.size() < 2)
  {
    throw ValidationError("waveform: need at least two (time, value) samples");
  }
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0))
  {
    throw ValidationError("waveform: times must be increasing");
  }
  for (std::size_t k = 1; k < times.size(); k++)
  {
    if (std::abs((times[k] - times[k - 1]) - dt) > 1e-9 * dt)
    {
      throw ValidationError("waveform: non-uniform sampling at index " + std::to_string(k));
    }
  }
  return {times.front(), dt, values};
}

Eigen::MatrixXd DrivenResponse(const OperatorPair &pair, const ModalBasis &basis,
                               const Eigen::VectorXd &coupling, const SampledWaveform &source,
                               const Eigen::VectorXd &initial)
{
  if (!(source.dt > 0.0))
  {
    throw ValidationError("driven_response: dt must be positive");
  }
  if (source.values.empty())
  {
    throw ValidationError("driven_response: empty waveform");
  }
  const CircuitParams circuit = ModalCircuit(pair, basis, coupling);
  Eigen::VectorXd modal = Eigen::VectorXd::Zero(pair.dof);
  if (initial.size() != 0)
  {
    modal = ProjectInitial(basis, pair.R, initial);
  }

  const Eigen::ArrayXd rate = -source.dt * circuit.r.array() / circuit.l.array();
  const Eigen::ArrayXd decay = rate.exp();
  const Eigen::ArrayXd gain = -rate.unaryExpr([](double v) { return std::expm1(v); });
  const auto samples = static_cast<Eigen::Index>(source.values.size());
  Eigen::MatrixXd states(pair.dof, samples);
  states.col(0) = basis.modes * modal;
  for (Eigen::Index k = 1; k < samples; k++)
  {
    const double slope = (source.values[k] - source.values[k - 1]) / source.dt;
    // r i + l i' = -m slope has the fixed point i* = -m slope / r
    const Eigen::ArrayXd fixed = -circuit.m.array() * slope / circuit.r.array();
    modal = (modal.array() * decay + fixed * gain).matrix();
    states.col(k) = basis.modes * modal;
  }
  return states;
}

std::map<std::string, std::vector<double>> SensorTraces::Channels() const
{
  std::map<std::string, std::vector<double>> out;
  const char axes[3] = {'x', 'y', 'z'};
  for (std::size_t p = 0; p < b.size(); p++)
  {
    for (int c = 0; c < 3; c++)
    {
      const Eigen::VectorXd row = b[p].row(c).transpose();
      out["b" + std::to_string(p) + "." + axes[c]] =
          std::vector<double>(row.data(), row.data() + row.size());
    }
  }
  for (Eigen::Index i = 0; i < flux.rows(); i++)
  {
    const Eigen::VectorXd phi = flux.row(i).transpose();
    const Eigen::VectorXd v = voltage.row(i).transpose();
    out["phi" + std::to_string(i)] = std::vector<double>(phi.data(), phi.data() + phi.size());
    out["v" + std::to_string(i)] = std::vector<double>(v.data(), v.data() + v.size());
  }
  return out;
}

SensorTraces SensorTrace(const PlateGrid &grid, const ModalBasis &basis,
                         const Eigen::VectorXd &coeffs, const SensorSet &sensors,
                         const std::vector<double> &times)
{
  sensors.Validate(grid);
  if (coeffs.size() != basis.dof || basis.dof != grid.Dof())
  {
    throw ValidationError("sensor_trace: dimension mismatch");
  }
  for (double t : times)
  {
    if (!(t >= 0.0))
    {
      throw ValidationError("sensor_trace: times must be non-negative");
    }
  }

  const auto nt = static_cast<Eigen::Index>(times.size());
  const Eigen::Index nm = basis.dof;
  // weights(n, k) = c_n exp(-t_k / tau_n)
  Eigen::MatrixXd weights(nm, nt);
  for (Eigen::Index k = 0; k < nt; k++)
  {
    weights.col(k) = coeffs.cwiseProduct((-times[k] / basis.taus.array()).exp().matrix());
  }

  SensorTraces out;
  out.times = times;
  for (const auto &point : sensors.points)
  {
    Eigen::Matrix3Xd per_mode(3, nm);
    for (Eigen::Index n = 0; n < nm; n++)
    {
      per_mode.col(n) = BField(grid, basis.modes.col(n), point);
    }
    out.b.emplace_back(per_mode * weights);
  }

  const auto nl = static_cast<Eigen::Index>(sensors.pickup_loops.size());
  out.flux.resize(nl, nt);
  out.voltage.resize(nl, nt);
  for (Eigen::Index i = 0; i < nl; i++)
  {
    const Eigen::VectorXd coupling = MutualCoupling(grid, sensors.pickup_loops[i]);
    const Eigen::VectorXd phi = basis.modes.transpose() * coupling;
    const Eigen::VectorXd v = -phi.cwiseQuotient(basis.taus);
    out.flux.row(i) = phi.transpose() * weights;
    out.voltage.row(i) = v.transpose() * weights;
  }
  return out;
}

void WriteTracesCsv(std::ostream &out, const SensorTraces &traces)
{
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17) << "time,sensor_id,value\n";
  for (const auto &[id, values] : traces.Channels())
  {
    for (std::size_t k = 0; k < values.size(); k++)
    {
      out << traces.times[k] << ',' << id << ',' << values[k] << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

std::map<std::string, TraceChannel> ReadTracesCsv(std::istream &in)
{
  std::map<std::string, TraceChannel> out;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string &what) {
    throw ValidationError("traces csv line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line))
  {
    line_no++;
    if (!line.empty() && line.back() == '\r')
    {
      line.pop_back();
    }
    if (line_no == 1)
    {
      if (line != "time,sensor_id,value")
      {
        fail("expected header 'time,sensor_id,value'");
      }
      continue;
    }
    if (line.empty())
    {
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
    {
      fail("expected three comma-separated fields");
    }
    double t = 0.0, v = 0.0;
    try
    {
      std::size_t used = 0;
      const std::string ts = line.substr(0, c1), vs = line.substr(c2 + 1);
      t = std::stod(ts, &used);
      if (used != ts.size())
      {
        fail("malformed time");
      }
      v = std::stod(vs, &used);
      if (used != vs.size())
      {
        fail("malformed value");
      }
    }
    catch (const std::logic_error &)
    {
      fail("malformed number");
    }
    auto &channel = out[line.substr(c1 + 1, c2 - c1 - 1)];
    channel.times.push_back(t);
    channel.values.push_back(v);
  }
  if (line_no == 0)
  {
    throw ValidationError("traces csv: empty input");
  }
  return out;
}

}  // namespace mitmp
