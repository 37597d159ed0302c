#ifndef MITMP_TOOLS_SCENARIO_HPP
#define MITMP_TOOLS_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mitmp/assembly.hpp"
#include "mitmp/grid.hpp"
#include "mitmp/imaging.hpp"

namespace mitmp::app
{

inline constexpr int kSchemaVersion = 1;

struct SourceSpec
{
  Polygon loop;
  // Source current samples i_s(k dt), ending at zero; a single sample means
  // an ideal step-off from that current.
  std::vector<double> current;
  double dt = 0.0;
};

struct SimulationSpec
{
  double dt = 0.0;
  int samples = 0;
};

struct ExtractionSpec
{
  int max_order = 6;
  std::vector<std::string> channels;  // empty: every pickup voltage (or b.z)
  std::optional<double> snr_db;
  std::optional<std::filesystem::path> trace_file;
  std::optional<double> noise_floor;
  double merge_tolerance = 0.01;
  std::vector<double> reference_taus;
};

struct ImagingSpec
{
  double eta_bg = 0.0;
  double eta_inc = 0.0;
  CandidateFamily family = CandidateFamily::SingleCell;
  int block_size = 2;
  std::optional<double> tolerance;
  int max_compared = 10;
  std::vector<double> measured_taus;
  std::vector<int> true_cells;  // for reporting only
};

struct Scenario
{
  std::filesystem::path path;
  UnitSystem units = UnitSystem::SI;
  std::uint64_t seed = 0;
  PlateGrid grid{1, 1, 1.0, 1.0};
  ResistivityMap eta{grid, {1.0}};
  std::optional<InclusionMask> true_inclusion;
  std::optional<SourceSpec> source;
  SensorSet sensors;
  std::optional<SimulationSpec> simulation;
  ExtractionSpec extraction;
  std::optional<ImagingSpec> imaging;
};

// Reads and validates a scenario file. Every problem is reported as a
// ValidationError of the form "<file>:<line>: <json pointer>: <reason>".
Scenario LoadScenario(const std::filesystem::path &path);
Scenario ParseScenario(const std::string &text, const std::filesystem::path &path);

}  // namespace mitmp::app

#endif  // MITMP_TOOLS_SCENARIO_HPP
