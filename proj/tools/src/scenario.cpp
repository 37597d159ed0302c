#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "located_json.hpp"
#include "mitmp/errors.hpp"

namespace mitmp::app
{

namespace
{

using nlohmann::json;

// Cursor into the located document; every accessor reports failures at the
// line of the value it looks at.
class Node
{
public:
  Node(const LocatedJson &src, const json &j, std::string pointer)
    : src_(src), j_(j), pointer_(std::move(pointer))
  {
  }

  [[noreturn]] void Fail(const std::string &what) const
  {
    throw ValidationError(src_.Where(pointer_, what));
  }

  const std::string &Pointer() const { return pointer_; }

  void Object(std::initializer_list<const char *> allowed) const
  {
    if (!j_.is_object())
    {
      Fail("expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &[k, v] : j_.items())
    {
      if (!ok.count(k))
      {
        Node(src_, v, pointer_ + "/" + k).Fail("unknown field \"" + k + "\"");
      }
    }
  }

  bool Has(const char *key) const { return j_.is_object() && j_.contains(key); }

  Node operator[](const char *key) const
  {
    if (!Has(key))
    {
      Fail(std::string("missing required field \"") + key + "\"");
    }
    return Node(src_, j_.at(key), pointer_ + "/" + key);
  }

  std::vector<Node> Items(std::size_t min_size = 0) const
  {
    if (!j_.is_array())
    {
      Fail("expected an array");
    }
    if (j_.size() < min_size)
    {
      Fail("expected at least " + std::to_string(min_size) + " entries");
    }
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_.size(); i++)
    {
      out.emplace_back(src_, j_[i], pointer_ + "/" + std::to_string(i));
    }
    return out;
  }

  double Number() const
  {
    if (!j_.is_number())
    {
      Fail("expected a number");
    }
    const double v = j_.get<double>();
    if (!std::isfinite(v))
    {
      Fail("expected a finite number");
    }
    return v;
  }

  double Positive() const
  {
    const double v = Number();
    if (!(v > 0.0))
    {
      Fail("must be positive");
    }
    return v;
  }

  std::int64_t Integer(std::int64_t lo, std::int64_t hi) const
  {
    if (!j_.is_number_integer())
    {
      Fail("expected an integer");
    }
    const auto v = j_.get<std::int64_t>();
    if (v < lo || v > hi)
    {
      Fail("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
  }

  std::string String(std::initializer_list<const char *> choices = {}) const
  {
    if (!j_.is_string())
    {
      Fail("expected a string");
    }
    const auto v = j_.get<std::string>();
    if (choices.size())
    {
      std::string list;
      for (const char *c : choices)
      {
        if (v == c)
        {
          return v;
        }
        list += std::string(list.empty() ? "" : ", ") + "\"" + c + "\"";
      }
      Fail("unknown value \"" + v + "\" (expected one of " + list + ")");
    }
    return v;
  }

  std::vector<double> Numbers(std::size_t min_size = 0) const
  {
    std::vector<double> out;
    for (const auto &n : Items(min_size))
    {
      out.push_back(n.Number());
    }
    return out;
  }

  Eigen::Vector3d Point() const
  {
    const auto items = Items();
    if (items.size() != 3)
    {
      Fail("expected [x, y, z]");
    }
    return {items[0].Number(), items[1].Number(), items[2].Number()};
  }

  Polygon Loop() const
  {
    Polygon p;
    for (const auto &n : Items(3))
    {
      p.push_back(n.Point());
    }
    try
    {
      ValidatePolygon(p, "loop");
    }
    catch (const ValidationError &e)
    {
      Fail(e.what());
    }
    return p;
  }

  std::vector<int> Cells(int dof) const
  {
    std::vector<int> out;
    for (const auto &n : Items())
    {
      out.push_back(static_cast<int>(n.Integer(0, dof - 1)));
    }
    return out;
  }

private:
  const LocatedJson &src_;
  const json &j_;
  std::string pointer_;
};

PlateGrid ReadGrid(const Node &n, UnitSystem units)
{
  n.Object({"nx", "ny", "pitch", "thickness", "origin"});
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  if (n.Has("origin"))
  {
    const auto o = n["origin"].Items();
    if (o.size() != 2)
    {
      n["origin"].Fail("expected [x, y]");
    }
    origin = {o[0].Number(), o[1].Number()};
  }
  const int nx = static_cast<int>(n["nx"].Integer(1, 4096));
  const int ny = static_cast<int>(n["ny"].Integer(1, 4096));
  if (nx * ny > 4096)
  {
    n.Fail("at most 4096 cells are supported by the dense solvers");
  }
  return PlateGrid(nx, ny, n["pitch"].Positive(), n["thickness"].Positive(), origin, units);
}

void ReadResistivity(const Node &n, Scenario &s)
{
  const std::string kind = n["kind"].String({"uniform", "mask", "explicit"});
  if (kind == "uniform")
  {
    n.Object({"kind", "value"});
    s.eta = ResistivityMap::Uniform(s.grid, n["value"].Positive());
  }
  else if (kind == "mask")
  {
    n.Object({"kind", "eta_bg", "eta_inc", "cells"});
    const InclusionMask mask = InclusionMask::FromIndices(s.grid, n["cells"].Cells(s.grid.Dof()));
    s.eta = MaskToResistivity(s.grid, mask, n["eta_bg"].Positive(), n["eta_inc"].Positive());
    s.true_inclusion = mask;
  }
  else
  {
    n.Object({"kind", "values"});
    std::vector<double> values;
    for (const auto &v : n["values"].Items())
    {
      values.push_back(v.Positive());
    }
    if (static_cast<int>(values.size()) != s.grid.Dof())
    {
      n["values"].Fail("expected " + std::to_string(s.grid.Dof()) + " values (one per cell)");
    }
    s.eta = ResistivityMap(s.grid, values);
  }
}

SourceSpec ReadSource(const Node &n)
{
  n.Object({"loop", "waveform"});
  SourceSpec src;
  src.loop = n["loop"].Loop();
  const Node w = n["waveform"];
  const std::string kind = w["kind"].String({"step_off", "samples"});
  if (kind == "step_off")
  {
    w.Object({"kind", "current"});
    src.current = {w["current"].Number()};
  }
  else
  {
    w.Object({"kind", "dt", "values"});
    src.dt = w["dt"].Positive();
    src.current = w["values"].Numbers(2);
    if (src.current.back() != 0.0)
    {
      w["values"].Fail("the source must be switched off (last sample 0)");
    }
  }
  return src;
}

SensorSet ReadSensors(const Node &n, const PlateGrid &grid)
{
  n.Object({"points", "pickup_loops"});
  SensorSet s;
  if (n.Has("points"))
  {
    for (const auto &p : n["points"].Items())
    {
      s.points.push_back(p.Point());
      if (grid.Contains(s.points.back()))
      {
        p.Fail("probe must lie strictly outside the plate");
      }
    }
  }
  if (n.Has("pickup_loops"))
  {
    for (const auto &l : n["pickup_loops"].Items())
    {
      s.pickup_loops.push_back(l.Loop());
      for (const auto &seg : PolygonSegments(s.pickup_loops.back()))
      {
        if (grid.SegmentTouches(seg.a, seg.b))
        {
          l.Fail("pickup loop must lie strictly outside the plate");
        }
      }
    }
  }
  return s;
}

ExtractionSpec ReadExtraction(const Node &n, const std::filesystem::path &base)
{
  n.Object({"max_order", "channels", "snr_db", "trace_file", "noise_floor", "merge_tolerance",
            "reference_taus"});
  ExtractionSpec e;
  if (n.Has("max_order"))
  {
    e.max_order = static_cast<int>(n["max_order"].Integer(1, 64));
  }
  if (n.Has("channels"))
  {
    for (const auto &c : n["channels"].Items(1))
    {
      e.channels.push_back(c.String());
    }
  }
  if (n.Has("snr_db"))
  {
    e.snr_db = n["snr_db"].Number();
  }
  if (n.Has("trace_file"))
  {
    e.trace_file = base / n["trace_file"].String();
  }
  if (n.Has("noise_floor"))
  {
    e.noise_floor = n["noise_floor"].Number();
    if (*e.noise_floor < 0.0)
    {
      n["noise_floor"].Fail("must be non-negative");
    }
  }
  if (n.Has("merge_tolerance"))
  {
    e.merge_tolerance = n["merge_tolerance"].Positive();
  }
  if (n.Has("reference_taus"))
  {
    for (const auto &t : n["reference_taus"].Items())
    {
      e.reference_taus.push_back(t.Positive());
    }
  }
  return e;
}

ImagingSpec ReadImaging(const Node &n, const Scenario &s, const Node &resistivity)
{
  n.Object({"eta_bg", "eta_inc", "family", "block_size", "tolerance", "max_compared",
            "measured_taus"});
  ImagingSpec im;
  const bool from_mask = s.true_inclusion.has_value();
  auto eta = [&](const char *key) {
    if (n.Has(key))
    {
      return n[key].Positive();
    }
    if (!from_mask)
    {
      n.Fail(std::string("missing required field \"") + key +
             "\" (only implied by a mask resistivity)");
    }
    return resistivity[key].Positive();
  };
  im.eta_bg = eta("eta_bg");
  im.eta_inc = eta("eta_inc");
  if (im.eta_bg == im.eta_inc)
  {
    n.Fail("eta_inc must differ from eta_bg");
  }
  if (n.Has("family"))
  {
    im.family = n["family"].String({"single_cell", "block"}) == "block" ? CandidateFamily::Block
                                                                       : CandidateFamily::SingleCell;
  }
  if (n.Has("block_size"))
  {
    im.block_size = static_cast<int>(
        n["block_size"].Integer(1, std::min(s.grid.Nx(), s.grid.Ny())));
  }
  else if (im.block_size > std::min(s.grid.Nx(), s.grid.Ny()))
  {
    im.block_size = 1;
  }
  if (n.Has("tolerance"))
  {
    im.tolerance = n["tolerance"].Number();
    if (*im.tolerance < 0.0)
    {
      n["tolerance"].Fail("must be non-negative");
    }
  }
  if (n.Has("max_compared"))
  {
    im.max_compared = static_cast<int>(n["max_compared"].Integer(1, 1 << 20));
  }
  if (n.Has("measured_taus"))
  {
    for (const auto &t : n["measured_taus"].Items(1))
    {
      im.measured_taus.push_back(t.Positive());
    }
  }
  if (s.true_inclusion)
  {
    im.true_cells = s.true_inclusion->Indices();
  }
  return im;
}

}  // namespace

Scenario ParseScenario(const std::string &text, const std::filesystem::path &path)
{
  const LocatedJson src = ParseLocated(text, path.string());
  const Node root(src, src.doc, "");
  root.Object({"schema_version", "unit_system", "seed", "grid", "resistivity", "source",
               "sensors", "simulation", "extraction", "imaging"});
  const auto version = root["schema_version"].Integer(0, 1 << 20);
  if (version != kSchemaVersion)
  {
    root["schema_version"].Fail("unsupported schema version " + std::to_string(version) +
                                " (expected " + std::to_string(kSchemaVersion) + ")");
  }

  Scenario s;
  s.path = path;
  if (root.Has("unit_system"))
  {
    s.units = root["unit_system"].String({"si", "normalized"}) == "normalized"
                  ? UnitSystem::Normalized
                  : UnitSystem::SI;
  }
  if (root.Has("seed"))
  {
    s.seed = static_cast<std::uint64_t>(root["seed"].Integer(0, INT64_MAX));
  }
  s.grid = ReadGrid(root["grid"], s.units);
  s.eta = ResistivityMap::Uniform(s.grid, 1.0);
  ReadResistivity(root["resistivity"], s);
  if (root.Has("source"))
  {
    s.source = ReadSource(root["source"]);
  }
  if (root.Has("sensors"))
  {
    s.sensors = ReadSensors(root["sensors"], s.grid);
  }
  if (root.Has("simulation"))
  {
    const Node sim = root["simulation"];
    sim.Object({"dt", "samples"});
    s.simulation = SimulationSpec{sim["dt"].Positive(),
                                  static_cast<int>(sim["samples"].Integer(2, 10'000'000))};
  }
  if (root.Has("extraction"))
  {
    s.extraction = ReadExtraction(root["extraction"], path.parent_path());
  }
  if (root.Has("imaging"))
  {
    s.imaging = ReadImaging(root["imaging"], s, root["resistivity"]);
  }
  return s;
}

Scenario LoadScenario(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ValidationError(path.string() + ": cannot open scenario file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseScenario(text.str(), path);
}

}  // namespace mitmp::app
