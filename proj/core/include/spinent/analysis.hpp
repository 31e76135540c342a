#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinent/eigensolver.hpp"
#include "spinent/entanglement.hpp"
#include "spinent/models.hpp"

namespace spinent {

/// Uniform grid g_k = g_min + k * step, k = 0 .. size()-1, with g_max
/// included when it lies on the grid (to 1e-9 steps).
struct Grid {
  double g_min = 0.0;
  double g_max = 0.0;
  double step = 1.0;

  std::size_t size() const;
  double at(std::size_t k) const { return g_min + static_cast<double>(k) * step; }
  std::vector<double> points() const;
  void validate() const;
  friend bool operator==(const Grid&, const Grid&) = default;
};

struct SitePair {
  int i = 0;
  int j = 1;
  friend bool operator==(const SitePair&, const SitePair&) = default;
};

/// "nn" -> (0,1); "rung" -> (0,1) and "leg" -> (0,2) on a ladder; "i-j"
/// for an explicit pair. Several entries may be comma separated.
std::vector<SitePair> resolve_pairs(std::string_view spec, const LatticeSpec& lattice);
/// Nearest neighbours on a chain, rung and leg pairs on a ladder.
std::vector<SitePair> default_pairs(const LatticeSpec& lattice);

struct SolverOptions {
  LanczosOptions lanczos;
  std::size_t dense_threshold = 600;  // dense solve at or below this dimension
  std::size_t dense_cap = kDefaultDenseCap;
  double cluster_tol = 1e-8;  // energies closer than this form one level
};

struct SweepSpec {
  ModelSpec model;
  std::string parameter;  // swept coupling, e.g. "delta", "j2", "lambda", "j_rung"
  Grid grid;
  LatticeSpec lattice = LatticeSpec::chain(8);
  int k_levels = 3;
  std::vector<SitePair> pairs;  // empty: default_pairs(lattice)
  /// Solve only this Sz sector (Sz-conserving models). Levels are then
  /// levels of the sector.
  std::optional<int> only_sz_twice;
  SolverOptions solver;
  unsigned threads = 1;
  bool keep_states = false;

  /// States solved per Sz sector, or in the full basis when Sz is not
  /// conserved (momentum pairs make full-basis levels twofold).
  int states_per_solve(bool sector) const { return sector ? k_levels + 2 : 2 * k_levels + 4; }
  void validate() const;
};

struct PairObservables {
  SitePair pair;
  double cxx = 0.0;
  double cyy = 0.0;
  double czz = 0.0;
  ConcurrenceValue concurrence;  // NaN value/raw when undefined
};

struct SweepState {
  double energy = 0.0;
  StateLabel label;
  std::optional<int> sector;   // sz_twice of the basis the vector lives in
  std::vector<double> vector;  // only with keep_states
};

struct SweepPoint {
  double g = 0.0;
  bool ok = true;
  std::string error;
  std::vector<SweepState> states;  // ascending
  /// Levels at or above this energy may be incomplete.
  double reliable_below = std::numeric_limits<double>::infinity();
  int ground_multiplicity = 0;
  std::vector<PairObservables> pairs;

  std::vector<double> energies() const;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepPoint> points;
  std::size_t failures() const;
  /// Concurrence of pair `p` at every point (value or raw).
  std::vector<double> concurrence(std::size_t p = 0, bool raw = false) const;
};

/// Solves one grid point. Pair observables are filled when `observables`.
SweepPoint solve_point(const SweepSpec& spec, double g, bool keep_states, bool observables);

/// Runs every grid point; a failed point is flagged and the sweep goes on.
SweepResult sweep(const SweepSpec& spec);

// ---- levels and crossings ----

/// States whose energies agree within the cluster tolerance.
struct Level {
  double energy = 0.0;
  std::vector<std::size_t> members;  // indices into SweepPoint::states
};

struct LevelLabel {
  std::optional<double> total_spin;  // common S of the members, if any
  std::optional<int> parity;
  std::vector<int> sz_twice;  // distinct Sz values present
  int multiplicity = 0;
};

/// Distinct levels below the reliability cutoff, ascending.
std::vector<Level> distinct_levels(const SweepPoint& point, double cluster_tol);
LevelLabel level_label(const SweepPoint& point, const Level& level);

enum class CrossingKind { true_crossing, avoided, unresolved };
std::string to_string(CrossingKind k);

struct CrossingEvent {
  int level_a = 0;
  int level_b = 1;
  double location = 0.0;
  double gap = 0.0;  // |E_a - E_b| at location
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t bracket_index = 0;  // grid index of bracket_lo
  bool on_grid_point = false;
  LevelLabel a_below, b_below, a_above, b_above;
  std::vector<double> bisection_widths;
  CrossingKind kind = CrossingKind::unresolved;
  std::string note;
};

struct CrossingOptions {
  double bracket_width = 1e-6;
  double gap_tol = 1e-8;        // largest gap still counted as a true crossing
  double min_overlap = 0.6;     // below this the level identity is ambiguous
  int max_polish = 60;
};

/// Level identity is followed between grid points by eigenvector overlap,
/// so the sweep must have been run with keep_states. A crossing is a swap
/// in the energy order of the images of levels a and b; each one is
/// refined with fresh solves.
std::vector<CrossingEvent> detect_crossings(const SweepResult& sweep, int a, int b,
                                            const CrossingOptions& opts = {});

// ---- series analysis ----

struct Series {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Iterated central differences, O(h^2). The output loses `order` points
/// on each side. Throws on non-uniform grids or too short series.
Series derivative(const Series& series, int order);

enum class ExtremumKind { min, max };
std::string to_string(ExtremumKind k);

struct Extremum {
  double location = 0.0;
  double value = 0.0;
  ExtremumKind kind = ExtremumKind::min;
  std::size_t index = 0;
};

/// Interior slope sign changes, refined by a 3-point parabola. NaN values
/// are skipped.
std::vector<Extremum> locate_extrema(const Series& series);

// ---- classification ----

enum class TransitionType { I, II, III, none };
std::string to_string(TransitionType t);

struct ClassifyOptions {
  std::optional<double> jump_tol;  // default: 10 x median adjacent |dC|
  int max_derivative_order = 4;
  std::size_t pair_index = 0;
  bool use_raw = false;
  CrossingOptions crossing;
};

struct DerivativeEvidence {
  int order = 0;
  std::vector<Extremum> extrema;
};

struct TransitionReport {
  TransitionType type = TransitionType::none;
  std::optional<double> location;
  std::vector<CrossingEvent> ground_crossings;   // levels (0, 1)
  std::vector<CrossingEvent> excited_crossings;  // levels (1, 2)
  double jump_tol = 0.0;
  double median_jump = 0.0;
  std::optional<double> concurrence_jump;  // across the ground crossing
  std::optional<double> concurrence_argmax;
  std::optional<double> concurrence_max;
  std::vector<DerivativeEvidence> derivatives;
  int derivative_order_used = 0;
  std::string concurrence_behavior;
  std::string transition_character;
};

/// Needs a sweep with k_levels >= 3 and stored states.
TransitionReport classify(const SweepResult& sweep, const ClassifyOptions& opts = {});

// ---- finite-size scaling ----

struct ScalingFit {
  double intercept = 0.0;  // location as N -> infinity
  double slope = 0.0;      // coefficient of 1/N
  double residual = 0.0;   // RMS deviation of the fit
  std::size_t points = 0;
};

struct ScalingPoint {
  int n_sites = 0;
  std::optional<Extremum> extremum;  // dominant (lowest) minimum
  std::vector<Extremum> minima;
  std::string note;
};

struct ScalingResult {
  int order = 1;
  std::vector<ScalingPoint> sizes;
  std::optional<ScalingFit> fit;
  bool monotone = false;
};

struct ScalingSpec {
  SweepSpec sweep;  // the lattice size is replaced per entry of `sizes`
  std::vector<int> sizes;
  int order = 2;
  std::size_t pair_index = 0;
  bool use_raw = false;
};

ScalingResult scaling_study(const ScalingSpec& spec);

/// Same analysis on externally supplied concurrence curves.
ScalingResult scaling_from_series(const std::vector<std::pair<int, Series>>& curves, int order);

/// Least squares location = a + b / N.
ScalingFit fit_inverse_size(const std::vector<std::pair<int, double>>& points);

}  // namespace spinent
