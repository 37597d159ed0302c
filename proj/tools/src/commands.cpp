#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <fmt/core.h>
#include <json.hpp>

#include "mitmp/assembly.hpp"
#include "mitmp/eigensolver.hpp"
#include "mitmp/errors.hpp"
#include "mitmp/extraction.hpp"
#include "mitmp/forward_sim.hpp"
#include "mitmp/imaging.hpp"
#include "mitmp/parallel.hpp"
#include "scenario.hpp"

namespace mitmp::app
{

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

json ToJson(const Eigen::VectorXd &v)
{
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

std::vector<double> ToStd(const Eigen::VectorXd &v)
{
  return {v.data(), v.data() + v.size()};
}

class Context
{
public:
  Context(const RunOptions &options, std::ostream &err)
    : options_(options), err_(err), scenario_(LoadScenario(options.scenario))
  {
  }

  const Scenario &S() const { return scenario_; }

  template <typename... Args>
  void Log(fmt::format_string<Args...> f, Args &&...args)
  {
    if (!options_.quiet)
    {
      err_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }
  }

  std::ofstream Open(const std::string &name)
  {
    fs::create_directories(options_.out);
    const fs::path p = options_.out / name;
    std::ofstream out(p, std::ios::binary);
    if (!out)
    {
      throw ValidationError(p.string() + ": cannot open for writing");
    }
    Log("writing {}", p.string());
    return out;
  }

  void WriteJson(const std::string &name, const json &j)
  {
    auto out = Open(name);
    out << j.dump(2) << '\n';
  }

  const Eigen::MatrixXd &L()
  {
    if (!L_)
    {
      Log("assembling L ({} cells)", scenario_.grid.Dof());
      L_ = AssembleInductance(scenario_.grid);
    }
    return *L_;
  }

  const OperatorPair &Pair()
  {
    if (!pair_)
    {
      pair_ = AssemblePair(scenario_.grid, L(), scenario_.eta);
    }
    return *pair_;
  }

  const ModalBasis &Basis()
  {
    if (!basis_)
    {
      const OperatorPair &pair = Pair();
      Log("solving the generalized eigenproblem");
      basis_ = SolveModes(pair);
    }
    return *basis_;
  }

  const SensorTraces &Simulate()
  {
    if (traces_)
    {
      return *traces_;
    }
    const Scenario &s = scenario_;
    if (!s.source)
    {
      throw ValidationError(s.path.string() + ": simulation needs a \"source\" section");
    }
    if (!s.simulation)
    {
      throw ValidationError(s.path.string() + ": simulation needs a \"simulation\" section");
    }
    if (s.sensors.points.empty() && s.sensors.pickup_loops.empty())
    {
      throw ValidationError(s.path.string() + ": simulation needs at least one sensor");
    }
    const ModalBasis &basis = Basis();
    const Eigen::VectorXd m = MutualCoupling(s.grid, s.source->loop);
    Eigen::VectorXd coeffs;
    if (s.source->current.size() == 1)
    {
      coeffs = StepOffCoefficients(basis, m, s.source->current[0]);
    }
    else
    {
      // drive through the switch-off waveform, then record the free decay
      const Eigen::MatrixXd states =
          DrivenResponse(Pair(), basis, m, {0.0, s.source->dt, s.source->current});
      coeffs = ProjectInitial(basis, Pair().R, states.col(states.cols() - 1));
    }
    std::vector<double> times(s.simulation->samples);
    for (int k = 0; k < s.simulation->samples; k++)
    {
      times[k] = k * s.simulation->dt;
    }
    Log("simulating {} samples for {} probes and {} pickup loops", times.size(),
        s.sensors.points.size(), s.sensors.pickup_loops.size());
    traces_ = SensorTrace(s.grid, basis, coeffs, s.sensors, times);
    return *traces_;
  }

  std::map<std::string, TraceChannel> Traces(bool allow_file)
  {
    if (allow_file && scenario_.extraction.trace_file)
    {
      const fs::path &p = *scenario_.extraction.trace_file;
      std::ifstream in(p, std::ios::binary);
      if (!in)
      {
        throw ValidationError(p.string() + ": cannot open trace file");
      }
      Log("reading traces from {}", p.string());
      try
      {
        return ReadTracesCsv(in);
      }
      catch (const ValidationError &e)
      {
        throw ValidationError(p.string() + ": " + e.what());
      }
    }
    const SensorTraces &tr = Simulate();
    std::map<std::string, TraceChannel> out;
    for (auto &[name, values] : tr.Channels())
    {
      out[name] = {tr.times, values};
    }
    return out;
  }

  struct Extraction
  {
    ExtractedSpectrum merged;
    std::vector<std::pair<std::string, ExtractedSpectrum>> channels;
    double delta = 0.0;
    json report;
  };

  Extraction Extract(bool allow_file)
  {
    const ExtractionSpec &spec = scenario_.extraction;
    const auto traces = Traces(allow_file);
    std::vector<std::string> names = spec.channels;
    if (names.empty())
    {
      for (const auto &[name, ch] : traces)
      {
        if (name[0] == 'v')
        {
          names.push_back(name);
        }
      }
      if (names.empty())
      {
        for (const auto &[name, ch] : traces)
        {
          if (name.size() > 2 && name.compare(name.size() - 2, 2, ".z") == 0)
          {
            names.push_back(name);
          }
        }
      }
    }
    if (names.empty())
    {
      throw ValidationError(scenario_.path.string() + ": no trace channel to extract from");
    }

    std::mt19937_64 rng(scenario_.seed);
    Extraction ex;
    std::vector<ExtractedSpectrum> spectra;
    json per_channel = json::array();
    for (const auto &name : names)
    {
      const auto it = traces.find(name);
      if (it == traces.end())
      {
        throw ValidationError(scenario_.path.string() + ": unknown trace channel \"" + name +
                              "\"");
      }
      DecaySignal sig = DecaySignal::FromSamples(it->second.times, it->second.values);
      if (spec.snr_db)
      {
        double power = 0.0;
        for (double v : sig.samples)
        {
          power += v * v;
        }
        const double sigma =
            std::sqrt(power / sig.samples.size()) * std::pow(10.0, -*spec.snr_db / 20.0);
        std::normal_distribution<double> noise(0.0, sigma);
        for (double &v : sig.samples)
        {
          v += noise(rng);
        }
      }
      Log("extracting {} (max order {})", name, spec.max_order);
      ExtractedSpectrum sp = ExtractTimeConstants(sig, spec.max_order);
      per_channel.push_back({{"channel", name},
                             {"taus", ToJson(sp.taus)},
                             {"amplitudes", ToJson(sp.amplitudes)},
                             {"tau_sigma", ToJson(sp.tau_sigma)},
                             {"noise_floor", sp.noise_floor},
                             {"retained", sp.retained},
                             {"diagnostics", sp.diagnostics}});
      ex.channels.emplace_back(name, sp);
      spectra.push_back(std::move(sp));
    }
    ExtractedSpectrum merged = MergeSpectra(spectra, spec.merge_tolerance);
    ex.delta = spec.noise_floor.value_or(0.0);
    ex.merged = TruncateByNoise(merged, ex.delta);

    json j = {{"channels", names},
              {"taus", ToJson(ex.merged.taus)},
              {"amplitudes", ToJson(ex.merged.amplitudes)},
              {"tau_sigma", ToJson(ex.merged.tau_sigma)},
              {"error_bound", ex.merged.ErrorBound()},
              {"noise_floor", ex.merged.noise_floor},
              {"truncation_delta", ex.delta},
              {"retained", ex.merged.retained},
              {"merge_tolerance", spec.merge_tolerance},
              {"per_channel", per_channel},
              {"diagnostics", ex.merged.diagnostics}};
    if (spec.snr_db)
    {
      j["snr_db"] = *spec.snr_db;
    }
    if (!spec.reference_taus.empty())
    {
      double worst = 0.0;
      json matches = json::array();
      for (double ref : spec.reference_taus)
      {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index n = 0; n < ex.merged.taus.size(); n++)
        {
          best = std::min(best, std::abs(ex.merged.taus[n] - ref) / ref);
        }
        matches.push_back(best);
        worst = std::max(worst, best);
      }
      j["reference_taus"] = spec.reference_taus;
      j["reference_relative_errors"] = matches;
      j["max_relative_error"] = worst;
    }
    ex.report = std::move(j);
    return ex;
  }

  struct Imaging
  {
    ImagingReport report;
    json json_report;
  };

  Imaging Image(const Eigen::VectorXd &measured, double error_bound)
  {
    const Scenario &s = scenario_;
    if (!s.imaging)
    {
      throw ValidationError(s.path.string() + ": imaging needs an \"imaging\" section");
    }
    const ImagingSpec &spec = *s.imaging;
    if (measured.size() == 0)
    {
      throw InconclusiveError("imaging: no measured time constant survived truncation");
    }
    Eigen::VectorXd sorted = measured;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double tolerance = spec.tolerance.value_or(std::max(3.0 * error_bound, 1e-6 * sorted[0]));
    const int compared = std::min<int>(spec.max_compared, static_cast<int>(measured.size()));

    Log("imaging: {} candidates family, tolerance {:.6g}, comparing {} time constants",
        spec.family == CandidateFamily::Block ? "block" : "single-cell", tolerance, compared);
    const TauPredictor predictor(s.grid, spec.eta_bg, spec.eta_inc, compared);
    ImagingReport r =
        ReconstructBounds(predictor, measured, tolerance, spec.family, spec.block_size, compared);

    auto cells = [](const InclusionMask &m) { return json(m.Indices()); };
    json candidates = json::array();
    for (const auto &t : r.outer_tests)
    {
      candidates.push_back({{"cells", cells(t.candidate)},
                            {"passes", t.passes},
                            {"margin", t.margin},
                            {"n_compared", t.n_compared}});
    }
    json inner = json::array();
    for (int k = 0; k < static_cast<int>(r.inner_tests.size()); k++)
    {
      inner.push_back({{"cell", k},
                       {"complement_passes", r.inner_tests[k].passes},
                       {"margin", r.inner_tests[k].margin}});
    }
    json j = {{"contrast",
               predictor.ContrastSign() == Contrast::Resistive ? "resistive" : "conductive"},
              {"eta_bg", spec.eta_bg},
              {"eta_inc", spec.eta_inc},
              {"family", spec.family == CandidateFamily::Block ? "block" : "single_cell"},
              {"block_size", spec.block_size},
              {"tolerance", tolerance},
              {"n_compared", r.n_compared},
              {"measured_taus", ToStd(measured)},
              {"inner", cells(r.bounds.inner)},
              {"outer", cells(r.bounds.outer)},
              {"inconclusive", r.inconclusive},
              {"diagnostics", r.diagnostics},
              {"candidates", candidates},
              {"inner_tests", inner}};
    if (!spec.true_cells.empty())
    {
      const InclusionMask truth = InclusionMask::FromIndices(s.grid, spec.true_cells);
      j["true_cells"] = spec.true_cells;
      j["truth_in_outer"] = truth.IsSubsetOf(r.bounds.outer);
      j["inner_in_truth"] = r.bounds.inner.IsSubsetOf(truth);
    }
    return {std::move(r), std::move(j)};
  }

  void WriteOccupancy(const ImagingReport &r)
  {
    auto out = Open("occupancy.csv");
    const PlateGrid &g = scenario_.grid;
    for (int j = 0; j < g.Ny(); j++)
    {
      for (int i = 0; i < g.Nx(); i++)
      {
        const int k = g.CellIndex(i, j);
        const int v = r.bounds.inner[k] ? 2 : r.bounds.outer[k] ? 1 : 0;
        out << (i ? "," : "") << v;
      }
      out << '\n';
    }
  }

  void WriteModes()
  {
    const ModalBasis &b = Basis();
    WriteJson("taus.json", {{"dof", b.dof}, {"taus", ToJson(b.taus)}});
    json rows = json::array();
    for (Eigen::Index i = 0; i < b.modes.rows(); i++)
    {
      rows.push_back(ToJson(b.modes.row(i).transpose()));
    }
    WriteJson("modes.json", {{"dof", b.dof},
                             {"taus", ToJson(b.taus)},
                             {"layout", "modes[k][n] = loop current of cell k in mode n"},
                             {"modes", rows}});
  }

private:
  const RunOptions &options_;
  std::ostream &err_;
  Scenario scenario_;
  std::optional<Eigen::MatrixXd> L_;
  std::optional<OperatorPair> pair_;
  std::optional<ModalBasis> basis_;
  std::optional<SensorTraces> traces_;
};

int Assemble(Context &ctx)
{
  const OperatorPair &p = ctx.Pair();
  auto l = ctx.Open("L.csv");
  WriteMatrixCsv(l, p.L);
  auto r = ctx.Open("R.csv");
  WriteMatrixCsv(r, p.R);
  return kOk;
}

int Modes(Context &ctx)
{
  ctx.WriteModes();
  return kOk;
}

int Simulate(Context &ctx)
{
  const SensorTraces &tr = ctx.Simulate();
  auto out = ctx.Open("traces.csv");
  WriteTracesCsv(out, tr);
  return kOk;
}

int Extract(Context &ctx)
{
  ctx.WriteJson("spectrum.json", ctx.Extract(true).report);
  return kOk;
}

int Image(Context &ctx)
{
  const Scenario &s = ctx.S();
  if (!s.imaging)
  {
    throw ValidationError(s.path.string() + ": imaging needs an \"imaging\" section");
  }
  Eigen::VectorXd measured;
  double bound = 0.0;
  if (!s.imaging->measured_taus.empty())
  {
    measured = Eigen::Map<const Eigen::VectorXd>(s.imaging->measured_taus.data(),
                                                 s.imaging->measured_taus.size());
  }
  else
  {
    const auto ex = ctx.Extract(true);
    measured = ex.merged.taus;
    bound = ex.merged.ErrorBound();
  }
  const auto im = ctx.Image(measured, bound);
  ctx.WriteJson("imaging_report.json", im.json_report);
  ctx.WriteOccupancy(im.report);
  return im.report.inconclusive ? kInconclusive : kOk;
}

int Pipeline(Context &ctx)
{
  const Scenario &s = ctx.S();
  ctx.WriteModes();
  {
    const SensorTraces &tr = ctx.Simulate();
    auto out = ctx.Open("traces.csv");
    WriteTracesCsv(out, tr);
  }
  const auto ex = ctx.Extract(false);
  ctx.WriteJson("spectrum.json", ex.report);

  // each extracted tau against the nearest eigenvalue of the true system
  const ModalBasis &b = ctx.Basis();
  double consistency = 0.0;
  for (Eigen::Index n = 0; n < ex.merged.taus.size(); n++)
  {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < b.taus.size(); m++)
    {
      best = std::min(best, std::abs(ex.merged.taus[n] - b.taus[m]) / b.taus[m]);
    }
    consistency = std::max(consistency, best);
  }

  json summary = {{"schema_version", kSchemaVersion},
                  {"seed", s.seed},
                  {"dof", b.dof},
                  {"modes_taus", ToJson(b.taus)},
                  {"extracted_taus", ToJson(ex.merged.taus)},
                  {"extracted_tau_sigma", ToJson(ex.merged.tau_sigma)},
                  {"extraction_error_bound", ex.merged.ErrorBound()},
                  {"max_relative_deviation_from_modes", consistency}};
  int code = kOk;
  if (s.imaging)
  {
    const auto im = ctx.Image(ex.merged.taus, ex.merged.ErrorBound());
    ctx.WriteJson("imaging_report.json", im.json_report);
    ctx.WriteOccupancy(im.report);
    json imaging = {{"tolerance", im.json_report["tolerance"]},
                    {"n_compared", im.report.n_compared},
                    {"inner", im.json_report["inner"]},
                    {"outer", im.json_report["outer"]},
                    {"inconclusive", im.report.inconclusive},
                    {"diagnostics", im.report.diagnostics}};
    for (const char *key : {"true_cells", "truth_in_outer", "inner_in_truth"})
    {
      if (im.json_report.contains(key))
      {
        imaging[key] = im.json_report[key];
      }
    }
    summary["imaging"] = imaging;
    code = im.report.inconclusive ? kInconclusive : kOk;
  }
  ctx.WriteJson("summary.json", summary);
  return code;
}

}  // namespace

int Run(const std::string &command, const RunOptions &options, std::ostream &err)
{
  static const std::map<std::string, int (*)(Context &)> commands = {
      {"assemble", Assemble}, {"modes", Modes},   {"simulate", Simulate},
      {"extract", Extract},   {"image", Image},   {"pipeline", Pipeline}};
  const auto it = commands.find(command);
  if (it == commands.end())
  {
    err << "error: unknown command \"" << command << "\"\n";
    return kUsage;
  }
  try
  {
    SetNumThreads(options.threads);
    Context ctx(options, err);
    return it->second(ctx);
  }
  catch (const InconclusiveError &e)
  {
    err << "inconclusive: " << e.what() << '\n';
    return kInconclusive;
  }
  catch (const ValidationError &e)
  {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  }
  catch (const NumericalError &e)
  {
    err << fmt::format("numerical error in module {} (matrix {}): {}\n", e.Module(), e.Matrix(),
                       e.Detail());
    return kNumerical;
  }
  catch (const fs::filesystem_error &e)
  {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace mitmp::app
