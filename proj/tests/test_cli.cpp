#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "mitmp/errors.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using mitmp::app::RunOptions;

namespace
{

const fs::path kScenarios = MITMP_SCENARIO_DIR;

// Fresh scratch directory per call, removed with the fixture.
struct Scratch
{
  fs::path dir;

  Scratch()
  {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("mitmp_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path Write(const std::string &name, const std::string &text) const
  {
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
  }
};

std::string Slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json ReadJson(const fs::path &p)
{
  return json::parse(Slurp(p));
}

int RunCli(const std::string &cmd, const fs::path &scenario, const fs::path &out,
           std::string *err_text = nullptr)
{
  RunOptions opt;
  opt.scenario = scenario;
  opt.out = out;
  opt.quiet = true;
  std::ostringstream err;
  const int code = mitmp::app::Run(cmd, opt, err);
  if (err_text)
  {
    *err_text = err.str();
  }
  return code;
}

std::string ValidationMessage(const std::string &text)
{
  try
  {
    mitmp::app::ParseScenario(text, "case.json");
  }
  catch (const mitmp::ValidationError &e)
  {
    return e.what();
  }
  return "";
}

const char *kTiny = R"({
  "schema_version": 1,
  "unit_system": "normalized",
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform", "value": 1.0}
})";

}  // namespace

TEST_SUITE("cli")
{
  TEST_CASE("minimal scenario parses")
  {
    const auto s = mitmp::app::ParseScenario(kTiny, "tiny.json");
    CHECK(s.grid.Dof() == 2);
    CHECK_FALSE(s.source.has_value());
  }

  TEST_CASE("unknown field is reported with its line")
  {
    const std::string msg = ValidationMessage(R"({
  "schema_version": 1,
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01,
           "colour": "red"},
  "resistivity": {"kind": "uniform", "value": 1.0}
})");
    CHECK(msg.find("case.json:4:") != std::string::npos);
    CHECK(msg.find("colour") != std::string::npos);
  }

  TEST_CASE("wrong type is reported with its line")
  {
    const std::string msg = ValidationMessage(R"({
  "schema_version": 1,
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform",
                  "value": "one"}
})");
    CHECK(msg.find("case.json:5:") != std::string::npos);
  }

  TEST_CASE("non-positive value is rejected")
  {
    const std::string msg = ValidationMessage(R"({
  "schema_version": 1,
  "grid": {"nx": 2, "ny": 1, "pitch": -0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform", "value": 1.0}
})");
    CHECK(msg.find("case.json:3:") != std::string::npos);
  }

  TEST_CASE("malformed JSON is reported with its line")
  {
    const std::string msg = ValidationMessage("{\n  \"schema_version\": 1,\n  \"grid\": {,\n}");
    CHECK(msg.find("case.json:3:") != std::string::npos);
  }

  TEST_CASE("duplicate key is rejected")
  {
    const std::string msg = ValidationMessage(R"({
  "schema_version": 1,
  "schema_version": 1,
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform", "value": 1.0}
})");
    CHECK(msg.find("case.json:3:") != std::string::npos);
  }

  TEST_CASE("missing schema version and unsupported version are rejected")
  {
    CHECK_FALSE(ValidationMessage(R"({
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform", "value": 1.0}
})").empty());
    CHECK_FALSE(ValidationMessage(R"({
  "schema_version": 2,
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform", "value": 1.0}
})").empty());
  }

  TEST_CASE("sensor inside the plate is rejected")
  {
    const std::string msg = ValidationMessage(R"({
  "schema_version": 1,
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "uniform", "value": 1.0},
  "sensors": {"points": [[0.3, 0.2, 0.0]]}
})");
    CHECK_FALSE(msg.empty());
  }

  TEST_CASE("validation failure exits with 2")
  {
    Scratch tmp;
    const auto p = tmp.Write("bad.json", "{\n  \"schema_version\": 1,\n  \"extra\": 0\n}\n");
    std::string err;
    CHECK(RunCli("modes", p, tmp.dir / "out", &err) == mitmp::app::kValidation);
    CHECK(err.find("bad.json:3:") != std::string::npos);
  }

  TEST_CASE("missing section for a command exits with 2")
  {
    Scratch tmp;
    const auto p = tmp.Write("tiny.json", kTiny);
    CHECK(RunCli("simulate", p, tmp.dir / "out") == mitmp::app::kValidation);
    CHECK(RunCli("image", p, tmp.dir / "out") == mitmp::app::kValidation);
  }

  TEST_CASE("numerical failure exits with 3 and names module and matrix")
  {
    Scratch tmp;
    const auto p = tmp.Write("overflow.json", R"({
  "schema_version": 1,
  "unit_system": "normalized",
  "grid": {"nx": 2, "ny": 1, "pitch": 0.5, "thickness": 0.01},
  "resistivity": {"kind": "explicit", "values": [1.0, 1e308]}
})");
    std::string err;
    CHECK(RunCli("modes", p, tmp.dir / "out", &err) == mitmp::app::kNumerical);
    CHECK(err.find("module assembly") != std::string::npos);
    CHECK(err.find("matrix R") != std::string::npos);
  }

  TEST_CASE("imaging with no admissible candidate exits with 4")
  {
    Scratch tmp;
    const auto p = tmp.Write("inconclusive.json", R"({
  "schema_version": 1,
  "unit_system": "normalized",
  "grid": {"nx": 3, "ny": 3, "pitch": 0.3333333333333333, "thickness": 0.01},
  "resistivity": {"kind": "mask", "eta_bg": 1.0, "eta_inc": 100.0, "cells": [0]},
  "imaging": {"measured_taus": [10.0], "tolerance": 0.0}
})");
    std::string err;
    CHECK(RunCli("image", p, tmp.dir / "out", &err) == mitmp::app::kInconclusive);
    const json report = ReadJson(tmp.dir / "out" / "imaging_report.json");
    CHECK(report["inconclusive"].get<bool>());
    CHECK(report["outer"].empty());
  }

  TEST_CASE("assemble writes symmetric L and R")
  {
    Scratch tmp;
    const auto p = tmp.Write("tiny.json", kTiny);
    REQUIRE(RunCli("assemble", p, tmp.dir) == mitmp::app::kOk);
    for (const char *name : {"L.csv", "R.csv"})
    {
      std::istringstream in(Slurp(tmp.dir / name));
      std::vector<std::vector<double>> rows;
      for (std::string line; std::getline(in, line);)
      {
        std::vector<double> row;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');)
        {
          row.push_back(std::stod(cell));
        }
        rows.push_back(row);
      }
      REQUIRE(rows.size() == 2);
      CHECK(rows[0][1] == rows[1][0]);
      CHECK(rows[0][0] > 0.0);
    }
  }

  TEST_CASE("modes on the uniform plate are strictly decreasing")
  {
    Scratch tmp;
    REQUIRE(RunCli("modes", kScenarios / "uniform_plate.json", tmp.dir) == mitmp::app::kOk);
    const json taus = ReadJson(tmp.dir / "taus.json");
    REQUIRE(taus["dof"].get<int>() == 64);
    const auto t = taus["taus"].get<std::vector<double>>();
    REQUIRE(t.size() == 64);
    for (std::size_t n = 1; n < t.size(); n++)
    {
      CHECK(t[n] < t[n - 1]);
    }
    const json modes = ReadJson(tmp.dir / "modes.json");
    CHECK(modes["modes"].size() == 64);
    CHECK(modes["modes"][0].size() == 64);
  }

  TEST_CASE("simulate writes long-format traces")
  {
    Scratch tmp;
    REQUIRE(RunCli("simulate", kScenarios / "two_mode_trace.json", tmp.dir) == mitmp::app::kOk);
    const std::string text = Slurp(tmp.dir / "traces.csv");
    CHECK(text.rfind("time,sensor_id,value\n", 0) == 0);
    // the bundled trace file was produced by this command
    CHECK(text == Slurp(kScenarios / "two_mode_traces.csv"));
  }

  TEST_CASE("extract recovers the bundled two-mode trace")
  {
    Scratch tmp;
    REQUIRE(RunCli("extract", kScenarios / "two_mode_trace.json", tmp.dir) == mitmp::app::kOk);
    const json sp = ReadJson(tmp.dir / "spectrum.json");
    CHECK(sp["taus"].size() == 2);
    CHECK(sp["max_relative_error"].get<double>() <= 1e-6);
  }

  TEST_CASE("pipeline extracted taus agree with modes on the two-mode plate")
  {
    Scratch tmp;
    REQUIRE(RunCli("pipeline", kScenarios / "two_mode_trace.json", tmp.dir) == mitmp::app::kOk);
    const json s = ReadJson(tmp.dir / "summary.json");
    const auto modes = s["modes_taus"].get<std::vector<double>>();
    const auto got = s["extracted_taus"].get<std::vector<double>>();
    REQUIRE(got.size() == modes.size());
    for (std::size_t n = 0; n < got.size(); n++)
    {
      CHECK(std::abs(got[n] - modes[n]) <= 1e-6 * modes[n]);
    }
  }

  TEST_CASE("pipeline on the 6x6 phantom keeps the truth inside the outer bound")
  {
    Scratch tmp;
    REQUIRE(RunCli("pipeline", kScenarios / "phantom_6x6.json", tmp.dir) == mitmp::app::kOk);
    const json r = ReadJson(tmp.dir / "imaging_report.json");
    CHECK(r["truth_in_outer"].get<bool>());
    CHECK(r["inner_in_truth"].get<bool>());
    // the bound is informative
    CHECK(r["outer"].size() < 36);

    // occupancy agrees with the report
    std::istringstream in(Slurp(tmp.dir / "occupancy.csv"));
    int ones = 0, rows = 0;
    for (std::string line; std::getline(in, line); rows++)
    {
      for (char c : line)
      {
        ones += c == '1' || c == '2';
      }
    }
    CHECK(rows == 6);
    CHECK(ones == static_cast<int>(r["outer"].size()));

    const json s = ReadJson(tmp.dir / "summary.json");
    const double tau1 = s["modes_taus"][0].get<double>();
    CHECK(std::abs(s["extracted_taus"][0].get<double>() - tau1) <= 1e-4 * tau1);
  }

  TEST_CASE("pipeline output is byte-identical across runs")
  {
    Scratch a, b;
    REQUIRE(RunCli("pipeline", kScenarios / "phantom_6x6.json", a.dir) == mitmp::app::kOk);
    REQUIRE(RunCli("pipeline", kScenarios / "phantom_6x6.json", b.dir) == mitmp::app::kOk);
    int files = 0;
    for (const auto &entry : fs::directory_iterator(a.dir))
    {
      const fs::path other = b.dir / entry.path().filename();
      REQUIRE(fs::exists(other));
      CHECK_MESSAGE(Slurp(entry.path()) == Slurp(other), entry.path().filename().string());
      files++;
    }
    CHECK(files >= 7);
  }

  TEST_CASE("noisy extraction is seeded by the scenario")
  {
    Scratch tmp;
    std::string text = Slurp(kScenarios / "two_mode_trace.json");
    const std::string key = "\"max_order\": 4,";
    const auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    text.insert(pos + key.size(), " \"snr_db\": 60,");
    // the trace path resolves next to the scenario
    const auto p = tmp.Write("noisy.json", text);
    fs::copy_file(kScenarios / "two_mode_traces.csv", tmp.dir / "two_mode_traces.csv");

    REQUIRE(RunCli("extract", p, tmp.dir / "a") == mitmp::app::kOk);
    REQUIRE(RunCli("extract", p, tmp.dir / "b") == mitmp::app::kOk);
    CHECK(Slurp(tmp.dir / "a" / "spectrum.json") == Slurp(tmp.dir / "b" / "spectrum.json"));
    const json sp = ReadJson(tmp.dir / "a" / "spectrum.json");
    CHECK(sp["max_relative_error"].get<double>() < 0.05);
  }
}
