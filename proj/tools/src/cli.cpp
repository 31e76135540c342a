#include "spinent/cli.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "spinent/errors.hpp"
#include "spinent/observables.hpp"

#ifndef SPINENT_VERSION
#define SPINENT_VERSION "0.0.0"
#endif

namespace spinent::cli {

using nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.command",     "model.name",      "model.j1",        "model.j2",
      "model.delta",     "model.lambda",    "model.j_leg",     "model.j_rung",
      "model.jx",        "model.jy",        "model.jz",        "model.h",
      "lattice.sites",   "grid.sweep",      "solver.levels",   "solver.tol",
      "solver.seed",     "solver.dense_cap", "solver.threads", "solver.max_iter", "output.format",
      "output.path",     "output.timing",   "analysis.pairs",  "analysis.sector",
      "analysis.operator", "analysis.sizes", "analysis.order", "analysis.raw",
      "analysis.preset"};
  return keys;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Shortest text that reads back to the same double.
std::string exact_text(double x) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

[[noreturn]] void bad(const std::string& key, const Setting& s, const std::string& why) {
  throw InvalidInput(s.origin + ": " + key + " = '" + s.value + "': " + why);
}

double to_double(const std::string& key, const Setting& s) {
  const std::string v = trim(s.value);
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(x)) {
    bad(key, s, "expected a finite number");
  }
  return x;
}

long long to_int(const std::string& key, const Setting& s) {
  const std::string v = trim(s.value);
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    bad(key, s, "expected an integer");
  }
  return x;
}

bool to_bool(const std::string& key, const Setting& s) {
  std::string v = trim(s.value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, s, "expected true or false");
}

Command parse_command(const std::string& key, const Setting& s) {
  const std::string v = trim(s.value);
  if (v == "spectrum") return Command::spectrum;
  if (v == "sweep") return Command::sweep;
  if (v == "classify") return Command::classify;
  if (v == "sumrule") return Command::sumrule;
  if (v == "scaling") return Command::scaling;
  bad(key, s, "expected spectrum, sweep, classify, sumrule or scaling");
}

SweepAxis parse_sweep(const std::string& key, const Setting& s, const ModelSpec& model) {
  const auto parts = split(trim(s.value), ':');
  if (parts.size() != 4) bad(key, s, "expected name:min:max:step");
  SweepAxis axis;
  axis.parameter = trim(parts[0]);
  const auto names = model.parameter_names();
  if (std::find(names.begin(), names.end(), axis.parameter) == names.end()) {
    bad(key, s, "'" + axis.parameter + "' is not a coupling of the " + to_string(model.family) +
                    " model");
  }
  axis.grid.g_min = to_double(key, {parts[1], s.origin});
  axis.grid.g_max = to_double(key, {parts[2], s.origin});
  axis.grid.step = to_double(key, {parts[3], s.origin});
  try {
    axis.grid.validate();
  } catch (const InvalidInput& e) {
    bad(key, s, e.what());
  }
  return axis;
}

ordered_json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::strtod(format_number(x).c_str(), nullptr);
}

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return num(*v);
  } else {
    return *v;
  }
}

ordered_json grid_json(const Grid& g) {
  ordered_json j;
  j["min"] = num(g.g_min);
  j["max"] = num(g.g_max);
  j["step"] = num(g.step);
  j["points"] = g.size();
  return j;
}

ordered_json label_json(const StateLabel& l) {
  ordered_json j;
  j["sz_twice"] = opt(l.sz_twice);
  j["total_spin"] = opt(l.total_spin);
  j["parity"] = opt(l.parity);
  return j;
}

ordered_json level_label_json(const LevelLabel& l) {
  ordered_json j;
  j["total_spin"] = opt(l.total_spin);
  j["parity"] = opt(l.parity);
  j["sz_twice"] = l.sz_twice;
  j["multiplicity"] = l.multiplicity;
  return j;
}

ordered_json pair_json(const PairObservables& p) {
  ordered_json j;
  j["i"] = p.pair.i;
  j["j"] = p.pair.j;
  j["cxx"] = num(p.cxx);
  j["cyy"] = num(p.cyy);
  j["czz"] = num(p.czz);
  j["C_raw"] = num(p.concurrence.raw);
  j["C"] = num(p.concurrence.value);
  return j;
}

ordered_json crossing_json(const CrossingEvent& e) {
  ordered_json j;
  j["kind"] = "level_crossing";
  j["levels"] = {e.level_a, e.level_b};
  j["location"] = num(e.location);
  j["gap"] = num(e.gap);
  j["crossing"] = to_string(e.kind);
  j["on_grid_point"] = e.on_grid_point;
  j["bracket"] = {num(e.bracket_lo), num(e.bracket_hi)};
  j["refinement_steps"] = e.bisection_widths.size();
  j["below"] = {{"a", level_label_json(e.a_below)}, {"b", level_label_json(e.b_below)}};
  j["above"] = {{"a", level_label_json(e.a_above)}, {"b", level_label_json(e.b_above)}};
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

ordered_json extremum_json(const Extremum& x) {
  ordered_json j;
  j["location"] = num(x.location);
  j["value"] = num(x.value);
  j["kind"] = to_string(x.kind);
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ResourceError("cannot open '" + path + "' for writing");
    f << text;
    if (!f.flush()) throw ResourceError("write to '" + path + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ResourceError("cannot move output into place at '" + path + "'");
  }
}

Settings settings_from_json(const nlohmann::json& doc, const std::string& origin) {
  const nlohmann::json& cfg = doc.contains("config") ? doc.at("config") : doc;
  if (!cfg.is_object()) throw InvalidInput(origin + ": expected a JSON object");
  Settings out;
  for (const auto& [section, body] : cfg.items()) {
    if (!body.is_object()) {
      throw InvalidInput(origin + ": '" + section + "' must be an object of settings");
    }
    for (const auto& [k, v] : body.items()) {
      const std::string key = section + "." + k;
      const std::string where = origin + ":" + key;
      if (!known_keys().count(key)) throw InvalidInput(where + ": unknown key '" + key + "'");
      if (v.is_null()) continue;
      std::string text;
      if (v.is_string()) {
        text = v.get<std::string>();
      } else if (v.is_boolean()) {
        text = v.get<bool>() ? "true" : "false";
      } else if (v.is_number_integer()) {
        text = std::to_string(v.get<long long>());
      } else if (v.is_number()) {
        text = exact_text(v.get<double>());
      } else if (v.is_array()) {
        for (const auto& item : v) {
          if (!item.is_number_integer()) throw InvalidInput(where + ": expected integers");
          text += (text.empty() ? "" : ",") + std::to_string(item.get<long long>());
        }
      } else {
        throw InvalidInput(where + ": unsupported value");
      }
      out[key] = {text, where};
    }
  }
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

ordered_json model_json(const ModelSpec& m) {
  ordered_json j;
  j["name"] = to_string(m.family);
  for (const auto& p : m.parameter_names()) j[p] = num(m.parameter(p));
  return j;
}

// ---- commands ----

ordered_json do_spectrum(const RunConfig& c) {
  const SweepSpec spec = c.sweep_spec();
  const double g = spec.model.parameter(spec.parameter);
  const SweepPoint point = solve_point(spec, g, false, true);
  ordered_json p;
  p["model"] = model_json(c.model);
  p["lattice"] = {{"geometry", to_string(spec.lattice.geometry)}, {"sites", spec.lattice.n_sites}};
  ordered_json states = ordered_json::array();
  const std::size_t n = std::min<std::size_t>(point.states.size(), c.levels);
  for (std::size_t k = 0; k < n; ++k) {
    ordered_json s;
    s["index"] = k;
    s["energy"] = num(point.states[k].energy);
    s["label"] = label_json(point.states[k].label);
    states.push_back(s);
  }
  p["states"] = states;
  p["ground_multiplicity"] = point.ground_multiplicity;
  ordered_json pairs = ordered_json::array();
  for (const auto& po : point.pairs) pairs.push_back(pair_json(po));
  p["ground_pairs"] = pairs;
  return p;
}

ordered_json do_sumrule(const RunConfig& c) {
  const LatticeSpec lattice = c.lattice();
  std::vector<OperatorTag> ops;
  if (c.op == "all") {
    if (c.model.family == Family::TransverseIsing) {
      ops = {OperatorTag::uniform_x, OperatorTag::uniform_y, OperatorTag::uniform_z};
    } else {
      ops = {OperatorTag::staggered_x, OperatorTag::staggered_y, OperatorTag::staggered_z};
    }
  } else {
    ops = {parse_operator(c.op)};
  }
  ordered_json p;
  p["model"] = model_json(c.model);
  p["lattice"] = {{"geometry", to_string(lattice.geometry)}, {"sites", lattice.n_sites}};
  ordered_json rows = ordered_json::array();
  double worst = 0.0;
  for (OperatorTag op : ops) {
    const SumRuleCheck s = sum_rule(c.model, lattice, op, c.dense_cap);
    worst = std::max(worst, s.residual);
    ordered_json r;
    r["operator"] = to_string(op);
    r["ground_energy"] = num(s.ground_energy);
    r["lhs"] = num(s.lhs);
    r["rhs"] = num(s.rhs);
    r["residual"] = num(s.residual);
    r["weight_total"] = num(s.weight_total);
    r["norm_squared"] = num(s.norm_squared);
    rows.push_back(r);
  }
  p["rows"] = rows;
  p["max_residual"] = num(worst);
  const bool rearrangeable =
      c.model.family == Family::XXZ || c.model.family == Family::TransverseIsing;
  if (c.op == "all" && rearrangeable && lattice.geometry == Geometry::chain) {
    const RearrangedSumRule r = rearranged_sum_rule(c.model, lattice, c.dense_cap);
    p["rearranged"] = {{"coupling_J", num(r.coupling_J)},
                       {"correlator_side", num(r.correlator_side)},
                       {"spectral_side", num(r.spectral_side)},
                       {"residual", num(r.residual)}};
  }
  return p;
}

ordered_json classify_payload(const SweepSpec& spec, const TransitionReport& report) {
  ordered_json p;
  p["model"] = model_json(spec.model);
  p["parameter"] = spec.parameter;
  p["window"] = grid_json(spec.grid);
  p["sites"] = spec.lattice.n_sites;
  const ordered_json body = report_json(report);
  for (const auto& [k, v] : body.items()) p[k] = v;
  return p;
}

struct PresetRow {
  std::string name;
  std::string expected;
  std::optional<SweepSpec> spec;  // empty: out of scope
};

std::vector<PresetRow> table1_rows(const RunConfig& c) {
  auto make = [&](ModelSpec m, Geometry geo, std::string param, Grid grid, std::string pairs) {
    SweepSpec s;
    s.model = m;
    s.parameter = std::move(param);
    s.grid = grid;
    s.lattice = LatticeSpec{geo, c.sites};
    s.lattice.validate();
    s.k_levels = std::max(3, c.levels);
    if (!pairs.empty()) s.pairs = resolve_pairs(pairs, s.lattice);
    s.solver.lanczos.tol = c.tol;
    s.solver.lanczos.seed = c.seed;
    s.solver.lanczos.max_iter = c.max_iter;
    s.solver.dense_cap = c.dense_cap;
    s.threads = c.threads;
    s.keep_states = true;
    return s;
  };
  const double h = 0.01;
  return {
      {"XXZ chain (delta=-1)", "I",
       make(ModelSpec::xxz(-1.0), Geometry::chain, "delta", {-1.5, -0.5, h}, "nn")},
      {"J1-J2 model (J2=0.5)", "I",
       make(ModelSpec::j1j2(1.0, 0.5), Geometry::chain, "j2", {0.3, 0.7, h}, "nn")},
      {"XXZ chain (delta=1)", "II",
       make(ModelSpec::xxz(1.0), Geometry::chain, "delta", {0.0, 2.0, h}, "nn")},
      {"spin ladder (J=0)", "II",
       make(ModelSpec::ladder(0.0), Geometry::ladder, "j_rung", {-0.5, 0.5, h}, "leg")},
      {"XXZ 2D and 3D (delta=1)", "II", std::nullopt},
      {"J1-J2 model (J2=0.241)", "III",
       make(ModelSpec::j1j2(1.0, 0.241), Geometry::chain, "j2", {0.05, 0.45, h}, "nn")},
      {"Ising model (lambda=1)", "III",
       make(ModelSpec::ising(1.0), Geometry::chain, "lambda", {0.2, 2.0, h}, "nn")},
  };
}

ordered_json do_classify(const RunConfig& c, std::ostream& err) {
  ClassifyOptions opts;
  opts.use_raw = c.raw;
  if (c.preset.empty()) {
    SweepSpec spec = c.sweep_spec();
    spec.keep_states = true;
    const SweepResult r = sweep(spec);
    if (r.failures() > 0) {
      err << "warning: " << r.failures() << " of " << r.points.size() << " grid points failed\n";
    }
    return classify_payload(spec, classify(r, opts));
  }
  ordered_json p;
  p["preset"] = c.preset;
  ordered_json rows = ordered_json::array();
  for (const auto& row : table1_rows(c)) {
    ordered_json j;
    j["row"] = row.name;
    j["expected"] = row.expected;
    if (!row.spec) {
      j["status"] = "out of scope";
      rows.push_back(j);
      continue;
    }
    const SweepResult r = sweep(*row.spec);
    if (r.failures() > 0) {
      err << "warning: " << row.name << ": " << r.failures() << " grid points failed\n";
    }
    const TransitionReport rep = classify(r, opts);
    j["status"] = "computed";
    j["matches"] = to_string(rep.type) == row.expected;
    const ordered_json body = classify_payload(*row.spec, rep);
    for (const auto& [k, v] : body.items()) j[k] = v;
    rows.push_back(j);
  }
  p["rows"] = rows;
  return p;
}

ordered_json do_scaling(const RunConfig& c, std::ostream& err) {
  std::vector<std::pair<int, Series>> curves;
  for (int n : c.sizes) {
    RunConfig sized = c;
    sized.sites = n;
    const SweepSpec spec = sized.sweep_spec();
    const SweepResult r = sweep(spec);
    if (r.failures() > 0) {
      err << "warning: N=" << n << ": " << r.failures() << " grid points failed\n";
    }
    curves.push_back({n, Series{spec.grid.points(), r.concurrence(0, c.raw)}});
  }
  std::vector<int> orders;
  if (c.order == "all") {
    orders = {1, 2, 3, 4};
  } else {
    orders = {std::stoi(c.order)};
  }
  ordered_json p;
  p["model"] = model_json(c.model);
  p["parameter"] = c.sweep->parameter;
  p["window"] = grid_json(c.sweep->grid);
  if (orders.size() == 1) {
    const ordered_json body = scaling_json(scaling_from_series(curves, orders[0]));
    for (const auto& [k, v] : body.items()) p[k] = v;
    return p;
  }
  ordered_json all = ordered_json::array();
  for (int o : orders) all.push_back(scaling_json(scaling_from_series(curves, o)));
  p["orders"] = all;
  return p;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::sweep: return "sweep";
    case Command::classify: return "classify";
    case Command::sumrule: return "sumrule";
    case Command::scaling: return "scaling";
  }
  return "?";
}

LatticeSpec RunConfig::lattice() const {
  LatticeSpec l{model.family == Family::Ladder ? Geometry::ladder : Geometry::chain, sites};
  l.validate();
  return l;
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s;
  s.model = model;
  if (sweep) {
    s.parameter = sweep->parameter;
    s.grid = sweep->grid;
  } else {
    s.parameter = model.parameter_names().front();
    const double v = model.parameter(s.parameter);
    s.grid = {v, v, 1.0};
  }
  s.lattice = lattice();
  s.k_levels = levels;
  if (!pairs.empty()) s.pairs = resolve_pairs(pairs, s.lattice);
  s.only_sz_twice = sector;
  s.solver.lanczos.tol = tol;
  s.solver.lanczos.seed = seed;
  s.solver.lanczos.max_iter = max_iter;
  s.solver.dense_cap = dense_cap;
  s.threads = threads;
  s.validate();
  return s;
}

Settings parse_config_text(const std::string& text, const std::string& origin) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidInput(origin + ": " + e.what());
    }
    return settings_from_json(doc, origin);
  }
  Settings out;
  std::string section;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidInput(where + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw InvalidInput(where + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput(where + ": expected key = value");
    const std::string k = trim(std::string_view(line).substr(0, eq));
    if (section.empty()) throw InvalidInput(where + ": '" + k + "' is outside any [section]");
    const std::string key = section + "." + k;
    if (!known_keys().count(key)) throw InvalidInput(where + ": unknown key '" + key + "'");
    if (out.count(key)) throw InvalidInput(where + ": '" + key + "' is set twice");
    out[key] = {trim(std::string_view(line).substr(eq + 1)), where};
  }
  return out;
}

Settings load_config_file(const std::string& path) { return parse_config_text(read_file(path), path); }

RunConfig build_config(const Settings& settings) {
  for (const auto& [key, s] : settings) {
    if (!known_keys().count(key)) throw InvalidInput(s.origin + ": unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> const Setting* {
    auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };
  RunConfig c;
  const Setting* cmd = get("run.command");
  if (!cmd) throw InvalidInput("no command given (spectrum, sweep, classify, sumrule or scaling)");
  c.command = parse_command("run.command", *cmd);

  if (const Setting* s = get("analysis.preset")) {
    c.preset = trim(s->value);
    if (c.preset != "table1") bad("analysis.preset", *s, "the only preset is table1");
    if (c.command != Command::classify) bad("analysis.preset", *s, "presets belong to classify");
  }

  const Setting* name = get("model.name");
  if (name) {
    try {
      c.model.family = parse_family(trim(name->value));
    } catch (const InvalidInput& e) {
      bad("model.name", *name, e.what());
    }
    switch (c.model.family) {
      case Family::J1J2: c.model = ModelSpec::j1j2(1.0, 0.0); break;
      case Family::XXZ: c.model = ModelSpec::xxz(1.0); break;
      case Family::TransverseIsing: c.model = ModelSpec::ising(1.0); break;
      case Family::Ladder: c.model = ModelSpec::ladder(1.0, 1.0); break;
      case Family::GeneralXYZ: c.model = ModelSpec::general_xyz(1.0, 1.0, 1.0, 0.0); break;
    }
  } else if (c.preset.empty()) {
    throw InvalidInput("model.name is required (--model j1j2|xxz|ising|ladder|xyz)");
  }
  const auto params = c.model.parameter_names();
  for (const auto& [key, s] : settings) {
    if (key.rfind("model.", 0) != 0 || key == "model.name") continue;
    const std::string p = key.substr(6);
    if (std::find(params.begin(), params.end(), p) == params.end()) {
      bad(key, s, "not a coupling of the " + to_string(c.model.family) + " model");
    }
    c.model = c.model.with_parameter(p, to_double(key, s));
  }

  if (const Setting* s = get("lattice.sites")) {
    const long long n = to_int("lattice.sites", *s);
    if (n < 2 || n > kMaxSites) bad("lattice.sites", *s, "must be in [2, " + std::to_string(kMaxSites) + "]");
    c.sites = static_cast<int>(n);
  }
  if (const Setting* s = get("grid.sweep")) c.sweep = parse_sweep("grid.sweep", *s, c.model);
  if (const Setting* s = get("solver.levels")) {
    const long long k = to_int("solver.levels", *s);
    if (k < 1 || k > 1000) bad("solver.levels", *s, "must be in [1, 1000]");
    c.levels = static_cast<int>(k);
  }
  if (const Setting* s = get("solver.tol")) {
    c.tol = to_double("solver.tol", *s);
    if (!(c.tol > 0.0 && c.tol < 1e-2)) bad("solver.tol", *s, "must be in (0, 1e-2)");
  }
  if (const Setting* s = get("solver.seed")) {
    std::string v = trim(s->value);
    if (v.rfind("0x", 0) == 0 || v.rfind("0X", 0) == 0) v = v.substr(2);
    const auto r = std::from_chars(v.data(), v.data() + v.size(), c.seed, 16);
    if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
      bad("solver.seed", *s, "expected a hexadecimal integer");
    }
  }
  if (const Setting* s = get("solver.dense_cap")) {
    const long long d = to_int("solver.dense_cap", *s);
    if (d < 1) bad("solver.dense_cap", *s, "must be positive");
    c.dense_cap = static_cast<std::size_t>(d);
  }
  if (const Setting* s = get("solver.max_iter")) {
    const long long m = to_int("solver.max_iter", *s);
    if (m < 1 || m > 100000000) bad("solver.max_iter", *s, "must be in [1, 1e8]");
    c.max_iter = static_cast<int>(m);
  }
  if (const Setting* s = get("solver.threads")) {
    const long long t = to_int("solver.threads", *s);
    if (t < 0 || t > 1024) bad("solver.threads", *s, "must be in [0, 1024]");
    c.threads = static_cast<unsigned>(t);
  } else {
    c.threads = 0;
  }
  if (c.threads == 0) c.threads = std::max(1U, std::thread::hardware_concurrency());

  if (const Setting* s = get("output.format")) {
    const std::string v = trim(s->value);
    if (v == "csv") {
      c.format = Format::csv;
    } else if (v == "json") {
      c.format = Format::json;
    } else {
      bad("output.format", *s, "expected csv or json");
    }
    if (c.format == Format::csv && c.command != Command::sweep) {
      bad("output.format", *s, "csv output is only available for sweep");
    }
  }
  if (const Setting* s = get("output.path")) c.out_path = trim(s->value);
  if (const Setting* s = get("output.timing")) c.timing = to_bool("output.timing", *s);
  if (const Setting* s = get("analysis.raw")) c.raw = to_bool("analysis.raw", *s);
  if (const Setting* s = get("analysis.pairs")) c.pairs = trim(s->value);
  if (const Setting* s = get("analysis.sector")) c.sector = static_cast<int>(to_int("analysis.sector", *s));
  if (const Setting* s = get("analysis.operator")) {
    c.op = trim(s->value);
    if (c.op != "all") {
      try {
        (void)parse_operator(c.op);
      } catch (const InvalidInput& e) {
        bad("analysis.operator", *s, e.what());
      }
    }
  }
  if (const Setting* s = get("analysis.sizes")) {
    for (const auto& item : split(trim(s->value), ',')) {
      const long long n = to_int("analysis.sizes", {item, s->origin});
      if (n < 2 || n > kMaxSites) bad("analysis.sizes", *s, "sizes must be in [2, 32]");
      c.sizes.push_back(static_cast<int>(n));
    }
  }
  if (const Setting* s = get("analysis.order")) {
    c.order = trim(s->value);
    if (c.order != "all" && c.order != "1" && c.order != "2" && c.order != "3" && c.order != "4") {
      bad("analysis.order", *s, "expected 1, 2, 3, 4 or all");
    }
  }

  // command-level requirements
  const bool needs_sweep = c.command == Command::sweep || c.command == Command::scaling ||
                           (c.command == Command::classify && c.preset.empty());
  if (needs_sweep && !c.sweep) {
    throw InvalidInput(to_string(c.command) + " needs --sweep name:min:max:step");
  }
  if (c.command == Command::classify && c.levels < 3) {
    throw InvalidInput("classify needs at least 3 levels (got " + std::to_string(c.levels) + ")");
  }
  if (c.command == Command::scaling && c.sizes.empty()) {
    throw InvalidInput("scaling needs --sizes, e.g. --sizes 6,8,10");
  }
  if (c.command == Command::sumrule) {
    const std::uint64_t dim = std::uint64_t{1} << c.sites;
    if (dim > c.dense_cap) {
      throw InvalidInput("sumrule diagonalizes the full 2^" + std::to_string(c.sites) +
                         " basis, which exceeds dense_cap " + std::to_string(c.dense_cap));
    }
    (void)c.lattice();
    c.model.validate();
  } else if (c.command == Command::scaling) {
    for (int n : c.sizes) {
      RunConfig sized = c;
      sized.sites = n;
      (void)sized.sweep_spec();
    }
  } else if (c.preset.empty()) {
    (void)c.sweep_spec();
  } else {
    (void)table1_rows(c);
  }
  return c;
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["run"] = {{"command", to_string(c.command)}};
  if (c.preset.empty()) {
    j["model"] = model_json(c.model);
  }
  j["lattice"] = {{"sites", c.sites}};
  if (c.sweep) {
    j["grid"] = {{"sweep", c.sweep->parameter + ":" + exact_text(c.sweep->grid.g_min) + ":" +
                               exact_text(c.sweep->grid.g_max) + ":" +
                               exact_text(c.sweep->grid.step)}};
  }
  char seed[32];
  std::snprintf(seed, sizeof seed, "0x%llx", static_cast<unsigned long long>(c.seed));
  j["solver"] = {{"levels", c.levels},
                 {"tol", c.tol},
                 {"seed", seed},
                 {"dense_cap", c.dense_cap},
                 {"max_iter", c.max_iter},
                 {"threads", c.threads}};
  j["output"] = {{"format", c.format == Format::csv ? "csv" : "json"}, {"timing", c.timing}};
  if (!c.out_path.empty()) j["output"]["path"] = c.out_path;
  ordered_json a;
  if (!c.pairs.empty()) a["pairs"] = c.pairs;
  if (c.sector) a["sector"] = *c.sector;
  a["operator"] = c.op;
  if (!c.sizes.empty()) a["sizes"] = c.sizes;
  a["order"] = c.order;
  a["raw"] = c.raw;
  if (!c.preset.empty()) a["preset"] = c.preset;
  j["analysis"] = a;
  return j;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string emit_csv(const SweepResult& result) {
  const SweepSpec& spec = result.spec;
  const int k = spec.k_levels;
  const auto pairs = spec.pairs.empty() ? default_pairs(spec.lattice) : spec.pairs;
  std::string out = "g";
  for (int i = 0; i < k; ++i) out += ",E_" + std::to_string(i);
  for (int i = 0; i < k; ++i) out += ",S_" + std::to_string(i);
  for (int i = 0; i < k; ++i) out += ",parity_" + std::to_string(i);
  for (const auto& p : pairs) {
    const std::string tag = "_" + std::to_string(p.i) + "_" + std::to_string(p.j);
    out += ",cxx" + tag + ",cyy" + tag + ",czz" + tag + ",C_raw" + tag + ",C" + tag;
  }
  out += ",status\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& pt : result.points) {
    out += format_number(pt.g);
    auto state = [&](int i) -> const SweepState* {
      return pt.ok && i < static_cast<int>(pt.states.size()) ? &pt.states[i] : nullptr;
    };
    for (int i = 0; i < k; ++i) out += "," + format_number(state(i) ? state(i)->energy : nan);
    for (int i = 0; i < k; ++i) {
      const auto* s = state(i);
      out += "," + format_number(s && s->label.total_spin ? *s->label.total_spin : nan);
    }
    for (int i = 0; i < k; ++i) {
      const auto* s = state(i);
      out += ",";
      if (s && s->label.parity) out += std::to_string(*s->label.parity);
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const PairObservables* o = pt.ok && p < pt.pairs.size() ? &pt.pairs[p] : nullptr;
      for (double v : {o ? o->cxx : nan, o ? o->cyy : nan, o ? o->czz : nan,
                       o ? o->concurrence.raw : nan, o ? o->concurrence.value : nan}) {
        out += "," + format_number(v);
      }
    }
    out += pt.ok ? ",ok\n" : ",failed\n";
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InvalidInput("empty CSV");
  t.header = split(lines[0], ',');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split(lines[i], ',');
    if (cells.size() != t.header.size()) {
      throw InvalidInput("CSV line " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                         " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

ordered_json sweep_json(const SweepResult& result) {
  const SweepSpec& spec = result.spec;
  ordered_json p;
  p["model"] = model_json(spec.model);
  p["lattice"] = {{"geometry", to_string(spec.lattice.geometry)}, {"sites", spec.lattice.n_sites}};
  p["parameter"] = spec.parameter;
  p["grid"] = grid_json(spec.grid);
  p["levels"] = spec.k_levels;
  p["failures"] = result.failures();
  ordered_json pts = ordered_json::array();
  for (const auto& pt : result.points) {
    ordered_json j;
    j["g"] = num(pt.g);
    j["ok"] = pt.ok;
    if (!pt.ok) {
      j["error"] = pt.error;
      pts.push_back(j);
      continue;
    }
    ordered_json e = ordered_json::array(), l = ordered_json::array();
    const std::size_t n = std::min<std::size_t>(pt.states.size(), spec.k_levels);
    for (std::size_t i = 0; i < n; ++i) {
      e.push_back(num(pt.states[i].energy));
      l.push_back(label_json(pt.states[i].label));
    }
    j["energies"] = e;
    j["labels"] = l;
    j["ground_multiplicity"] = pt.ground_multiplicity;
    ordered_json pairs = ordered_json::array();
    for (const auto& po : pt.pairs) pairs.push_back(pair_json(po));
    j["pairs"] = pairs;
    pts.push_back(j);
  }
  p["points"] = pts;
  return p;
}

ordered_json report_json(const TransitionReport& r) {
  ordered_json j;
  j["type"] = to_string(r.type);
  j["location"] = opt(r.location);
  j["jump_tol"] = num(r.jump_tol);
  j["median_jump"] = num(r.median_jump);
  j["concurrence_jump"] = opt(r.concurrence_jump);
  j["concurrence_argmax"] = opt(r.concurrence_argmax);
  j["concurrence_max"] = opt(r.concurrence_max);
  j["derivative_order_used"] = r.derivative_order_used;
  j["concurrence_behavior"] = r.concurrence_behavior;
  j["transition_character"] = r.transition_character;
  ordered_json ev = ordered_json::array();
  for (const auto& e : r.ground_crossings) ev.push_back(crossing_json(e));
  for (const auto& e : r.excited_crossings) ev.push_back(crossing_json(e));
  for (const auto& d : r.derivatives) {
    ordered_json x;
    x["kind"] = "derivative";
    x["order"] = d.order;
    ordered_json ex = ordered_json::array();
    for (const auto& e : d.extrema) ex.push_back(extremum_json(e));
    x["extrema"] = ex;
    ev.push_back(x);
  }
  j["evidence"] = ev;
  return j;
}

ordered_json scaling_json(const ScalingResult& r) {
  ordered_json j;
  j["order"] = r.order;
  ordered_json sizes = ordered_json::array();
  for (const auto& s : r.sizes) {
    ordered_json x;
    x["n_sites"] = s.n_sites;
    x["extremum"] = s.extremum ? extremum_json(*s.extremum) : ordered_json(nullptr);
    ordered_json mins = ordered_json::array();
    for (const auto& m : s.minima) mins.push_back(extremum_json(m));
    x["minima"] = mins;
    if (!s.note.empty()) x["note"] = s.note;
    sizes.push_back(x);
  }
  j["sizes"] = sizes;
  if (r.fit) {
    j["fit"] = {{"slope", num(r.fit->slope)},
                {"intercept", num(r.fit->intercept)},
                {"residual", num(r.fit->residual)},
                {"points", r.fit->points}};
  } else {
    j["fit"] = nullptr;
  }
  j["monotone"] = r.monotone;
  return j;
}

std::string emit_json(const RunConfig& config, const ordered_json& payload,
                      std::optional<double> wall_time_s) {
  ordered_json env;
  env["schema_version"] = "1";
  env["toolkit"] = {{"name", "spinent"}, {"version", SPINENT_VERSION}};
  env["command"] = to_string(config.command);
  env["config"] = config_json(config);
  if (wall_time_s) env["wall_time_s"] = num(*wall_time_s);
  env["payload"] = payload;
  return env.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact diagonalization of small spin-1/2 rings and ladders: spectra, "
               "two-site concurrence, level crossings and transition classification.",
               "spinent"};
  app.set_version_flag("--version", SPINENT_VERSION);
  app.get_formatter()->column_width(34);

  std::string command, config_path;
  app.add_option("command", command, "spectrum | sweep | classify | sumrule | scaling");
  app.add_option("--config", config_path, "INI-style settings file or an earlier JSON result");

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Flag flags[] = {
      {"--model", "model.name", "j1j2 | xxz | ising | ladder | xyz"},
      {"--j1", "model.j1", "J1 (j1j2)"},
      {"--j2", "model.j2", "J2 (j1j2)"},
      {"--delta", "model.delta", "anisotropy (xxz)"},
      {"--lambda", "model.lambda", "Ising coupling (ising)"},
      {"--j-leg", "model.j_leg", "leg exchange (ladder)"},
      {"--j-rung", "model.j_rung", "rung exchange (ladder)"},
      {"--jx", "model.jx", "xx exchange (xyz)"},
      {"--jy", "model.jy", "yy exchange (xyz)"},
      {"--jz", "model.jz", "zz exchange (xyz)"},
      {"--field", "model.h", "longitudinal field h (xyz)"},
      {"--sites", "lattice.sites", "number of sites (a ladder has sites/2 rungs)"},
      {"--sweep", "grid.sweep", "name:min:max:step"},
      {"--levels", "solver.levels", "number of low-lying states"},
      {"--tol", "solver.tol", "Lanczos residual tolerance"},
      {"--seed", "solver.seed", "Lanczos start-vector seed (hex)"},
      {"--dense-cap", "solver.dense_cap", "largest dimension for dense matrices"},
      {"--max-iter", "solver.max_iter", "Lanczos budget in operator applications"},
      {"--threads", "solver.threads", "worker threads (0: all processors)"},
      {"--format", "output.format", "csv | json"},
      {"--out", "output.path", "write the result here instead of stdout"},
      {"--pairs", "analysis.pairs", "nn | rung | leg | i-j, comma separated"},
      {"--sector", "analysis.sector", "restrict to one 2*Sz sector"},
      {"--operator", "analysis.operator", "all | staggered_x|y|z | uniform_x|y|z"},
      {"--sizes", "analysis.sizes", "lattice sizes for scaling, e.g. 6,8,10"},
      {"--order", "analysis.order", "derivative order 1..4 or all"},
      {"--preset", "analysis.preset", "table1 (classify)"},
  };
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  for (const auto& f : flags) {
    bound.push_back({app.add_option(f.name, values[f.key], f.help), f.key});
  }
  bool raw = false, timing = false;
  auto* raw_opt = app.add_flag("--raw", raw, "use the unclamped concurrence");
  auto* timing_opt = app.add_flag("--timing", timing, "record wall time in the JSON envelope");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    Settings settings;
    if (!config_path.empty()) settings = load_config_file(config_path);
    if (!command.empty()) settings["run.command"] = {command, "command line"};
    for (const auto& [o, key] : bound) {
      if (o->count() > 0) settings[key] = {values[key], std::string("flag ") + o->get_name()};
    }
    if (raw_opt->count() > 0) settings["analysis.raw"] = {raw ? "true" : "false", "flag --raw"};
    if (timing_opt->count() > 0) settings["output.timing"] = {timing ? "true" : "false", "flag --timing"};
    config = build_config(settings);
  } catch (const std::exception& e) {
    err << "spinent: configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    const Timer timer;
    std::string text;
    if (config.command == Command::sweep) {
      const SweepResult r = sweep(config.sweep_spec());
      if (r.failures() > 0) {
        err << "warning: " << r.failures() << " of " << r.points.size() << " grid points failed\n";
      }
      text = config.format == Format::csv
                 ? emit_csv(r)
                 : emit_json(config, sweep_json(r),
                             config.timing ? std::optional(timer.seconds()) : std::nullopt);
    } else {
      ordered_json payload;
      switch (config.command) {
        case Command::spectrum: payload = do_spectrum(config); break;
        case Command::sumrule: payload = do_sumrule(config); break;
        case Command::classify: payload = do_classify(config, err); break;
        case Command::scaling: payload = do_scaling(config, err); break;
        case Command::sweep: break;
      }
      text = emit_json(config, payload,
                       config.timing ? std::optional(timer.seconds()) : std::nullopt);
    }
    if (config.out_path.empty()) {
      out << text;
    } else {
      write_file(config.out_path, text);
    }
    return 0;
  } catch (const NumericError& e) {
    err << "spinent: numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const InvalidInput& e) {
    err << "spinent: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    err << "spinent: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "spinent: unexpected failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace spinent::cli
