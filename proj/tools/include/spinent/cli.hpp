#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinent/analysis.hpp"

namespace spinent::cli {

enum class Command { spectrum, sweep, classify, sumrule, scaling };
enum class Format { csv, json };

std::string to_string(Command c);

struct SweepAxis {
  std::string parameter;
  Grid grid;
};

/// Everything a run needs. Built from an optional config file plus flags;
/// flags win. Every field is checked before any solve starts.
struct RunConfig {
  Command command = Command::spectrum;
  ModelSpec model;
  int sites = 8;
  std::optional<SweepAxis> sweep;
  int levels = 3;
  std::string pairs;  // empty: lattice defaults
  std::optional<int> sector;
  double tol = 1e-10;
  std::uint64_t seed = 0x5EED;
  std::size_t dense_cap = kDefaultDenseCap;
  int max_iter = LanczosOptions{}.max_iter;
  unsigned threads = 1;
  Format format = Format::json;
  std::string out_path;
  bool timing = false;
  std::string op = "all";
  std::vector<int> sizes;
  std::string order = "2";  // 1..4 or "all"
  bool raw = false;
  std::string preset;

  LatticeSpec lattice() const;
  SweepSpec sweep_spec() const;
};

/// Flat "section.key" -> value settings with the place each came from,
/// used for diagnostics.
struct Setting {
  std::string value;
  std::string origin;
};
using Settings = std::map<std::string, Setting>;

/// INI-style file: [section] headers, key = value lines, '#' or ';'
/// comments. A JSON document (for instance an earlier result envelope) is
/// accepted too; its "config" object is read.
Settings load_config_file(const std::string& path);
Settings parse_config_text(const std::string& text, const std::string& origin);

/// Throws InvalidInput naming the offending key and its origin.
RunConfig build_config(const Settings& settings);

/// Config echo, in the same section/key layout the file reader accepts.
nlohmann::ordered_json config_json(const RunConfig& config);

/// Decimal text with 12 significant digits; NaN gives an empty string.
std::string format_number(double x);

std::string emit_csv(const SweepResult& result);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);

nlohmann::ordered_json sweep_json(const SweepResult& result);
nlohmann::ordered_json report_json(const TransitionReport& report);
nlohmann::ordered_json scaling_json(const ScalingResult& result);

/// Full envelope: schema version, toolkit, command, config echo, payload.
std::string emit_json(const RunConfig& config, const nlohmann::ordered_json& payload,
                      std::optional<double> wall_time_s = std::nullopt);

/// Entry point. Returns 0 on success, 2 on a configuration error and 1 on
/// a numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinent::cli
