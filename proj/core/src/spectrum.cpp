#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

#include "spinent/analysis.hpp"
#include "spinent/errors.hpp"
#include "spinent/observables.hpp"

namespace spinent {

std::size_t Grid::size() const {
  validate();
  return static_cast<std::size_t>(std::floor((g_max - g_min) / step + 1e-9)) + 1;
}

std::vector<double> Grid::points() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k);
  return out;
}

void Grid::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("grid step must be positive");
  if (!std::isfinite(g_min) || !std::isfinite(g_max) || g_max < g_min) {
    throw InvalidInput("grid needs finite g_min <= g_max");
  }
  if ((g_max - g_min) / step > 1e7) throw InvalidInput("grid has more than 1e7 points");
}

std::vector<SitePair> default_pairs(const LatticeSpec& lattice) {
  if (lattice.geometry == Geometry::ladder) return {{0, 1}, {0, 2}};
  return {{0, 1}};
}

std::vector<SitePair> resolve_pairs(std::string_view spec, const LatticeSpec& lattice) {
  std::vector<SitePair> out;
  const bool ladder = lattice.geometry == Geometry::ladder;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string_view item = spec.substr(pos, comma - pos);
    pos = comma + 1;
    if (item == "nn") {
      out.push_back({0, 1});
    } else if (item == "rung" || item == "leg") {
      if (!ladder) throw InvalidInput("pair '" + std::string(item) + "' needs a ladder lattice");
      out.push_back(item == "rung" ? SitePair{0, 1} : SitePair{0, 2});
    } else {
      const std::size_t dash = item.find('-');
      SitePair p{-1, -1};
      if (dash != std::string_view::npos) {
        const auto r1 = std::from_chars(item.data(), item.data() + dash, p.i);
        const auto r2 = std::from_chars(item.data() + dash + 1, item.data() + item.size(), p.j);
        if (r1.ec != std::errc{} || r1.ptr != item.data() + dash || r2.ec != std::errc{} ||
            r2.ptr != item.data() + item.size()) {
          p = {-1, -1};
        }
      }
      if (p.i < 0 || p.j < 0) {
        throw InvalidInput("bad pair '" + std::string(item) + "' (expected nn, rung, leg or i-j)");
      }
      if (p.i == p.j || p.i >= lattice.n_sites || p.j >= lattice.n_sites) {
        throw InvalidInput("pair '" + std::string(item) + "' is not two distinct sites of the lattice");
      }
      out.push_back(p);
    }
    if (comma == spec.size()) break;
  }
  return out;
}

void SweepSpec::validate() const {
  lattice.validate();
  grid.validate();
  model.validate();
  (void)model.parameter(parameter);
  if (k_levels < 1) throw InvalidInput("k_levels must be at least 1");
  for (const auto& p : pairs) {
    if (p.i < 0 || p.j < 0 || p.i >= lattice.n_sites || p.j >= lattice.n_sites || p.i == p.j) {
      throw InvalidInput("pair (" + std::to_string(p.i) + "," + std::to_string(p.j) +
                         ") is not two distinct sites of the lattice");
    }
  }
  for (double g : {grid.g_min, grid.at(grid.size() - 1)}) {
    const ModelSpec m = model.with_parameter(parameter, g);
    m.validate();
    (void)coupling_graph(m, lattice);
    if (only_sz_twice && !conserved_quantities(m).sz_conserved) {
      throw InvalidInput("an Sz sector restriction needs an Sz-conserving model");
    }
  }
  if (only_sz_twice) {
    const int m = *only_sz_twice;
    if (std::abs(m) > lattice.n_sites || (lattice.n_sites + m) % 2 != 0) {
      throw InvalidInput("sz_twice " + std::to_string(m) + " is not a sector of " +
                         std::to_string(lattice.n_sites) + " sites");
    }
  }
}

std::vector<double> SweepPoint::energies() const {
  std::vector<double> e;
  e.reserve(states.size());
  for (const auto& s : states) e.push_back(s.energy);
  return e;
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const SweepPoint& p) { return !p.ok; }));
}

std::vector<double> SweepResult::concurrence(std::size_t p, bool raw) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) {
    if (!pt.ok || p >= pt.pairs.size()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.push_back(raw ? pt.pairs[p].concurrence.raw : pt.pairs[p].concurrence.value);
    }
  }
  return out;
}

namespace {

using BasisCache = std::map<std::optional<int>, std::shared_ptr<const SectorBasis>>;

std::vector<std::optional<int>> sectors_for(const SweepSpec& spec, const Symmetries& sym) {
  if (!sym.sz_conserved) return {std::nullopt};
  if (spec.only_sz_twice) return {spec.only_sz_twice};
  std::vector<std::optional<int>> out;
  for (int m = -spec.lattice.n_sites; m <= spec.lattice.n_sites; m += 2) out.emplace_back(m);
  return out;
}

BasisCache make_cache(const SweepSpec& spec) {
  BasisCache cache;
  const Symmetries sym = conserved_quantities(spec.model.with_parameter(spec.parameter, spec.grid.g_min));
  for (const auto& s : sectors_for(spec, sym)) {
    cache[s] = std::make_shared<const SectorBasis>(spec.lattice, s);
  }
  return cache;
}

std::shared_ptr<const SectorBasis> basis_for(const SweepSpec& spec, const BasisCache& cache,
                                             std::optional<int> sector) {
  auto it = cache.find(sector);
  if (it != cache.end()) return it->second;
  return std::make_shared<const SectorBasis>(spec.lattice, sector);
}

EigenSolution solve_sector(const ModelSpec& model, const std::shared_ptr<const SectorBasis>& basis,
                           std::size_t k, const SolverOptions& opts) {
  const std::size_t dim = basis->dimension();
  if (dim <= opts.dense_threshold || dim <= k) {
    EigenSolution all = dense_spectrum(hamiltonian_dense(model, basis, std::max(opts.dense_cap, dim)));
    all.energies.resize(k);
    all.vectors.resize(k);
    all.labels.resize(k);
    all.residuals.resize(k);
    return all;
  }
  const HamiltonianOperator h(model, basis);
  LanczosOptions lo = opts.lanczos;
  if (lo.scale <= 0.0) lo.scale = 2.0 * h.norm_bound();
  return lanczos_lowest_k(
      [&h](std::span<const double> in, std::span<double> out) { h.apply(in, out); }, dim, k, lo);
}

std::size_t complete_levels(const std::vector<double>& sorted, double cutoff, double tol) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] - sorted[i] <= tol) ++j;
    if (sorted[j] >= cutoff - tol) break;
    ++count;
    i = j + 1;
  }
  return count;
}

SweepPoint solve_point_impl(const SweepSpec& spec, double g, bool keep_states, bool observables,
                            const BasisCache& cache) {
  SweepPoint point;
  point.g = g;
  const ModelSpec model = spec.model.with_parameter(spec.parameter, g);
  const Symmetries sym = conserved_quantities(model);

  struct Raw {
    double energy;
    std::size_t sector_slot;
    std::vector<double> vec;
  };
  const auto sectors = sectors_for(spec, sym);
  std::vector<std::shared_ptr<const SectorBasis>> owners;
  for (const auto& sec : sectors) owners.push_back(basis_for(spec, cache, sec));

  // Degenerate points can push level k out of reach of a fixed number of
  // states per sector; widen until k_levels + 1 levels are complete.
  std::vector<Raw> raw;
  for (std::size_t widen = 1;; widen *= 2) {
    raw.clear();
    point.reliable_below = std::numeric_limits<double>::infinity();
    bool truncated = false;
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      const auto& basis = owners[s];
      const std::size_t want = widen * static_cast<std::size_t>(spec.states_per_solve(sectors[s].has_value()));
      const std::size_t k = std::min(want, basis->dimension());
      EigenSolution sol = solve_sector(model, basis, k, spec.solver);
      if (k < basis->dimension()) {
        truncated = true;
        point.reliable_below = std::min(point.reliable_below, sol.energies.back());
      }
      for (std::size_t i = 0; i < sol.size(); ++i) raw.push_back({sol.energies[i], s, std::move(sol.vectors[i])});
    }
    std::vector<double> e;
    for (const auto& r : raw) e.push_back(r.energy);
    std::sort(e.begin(), e.end());
    if (!truncated || complete_levels(e, point.reliable_below, spec.solver.cluster_tol) >
                          static_cast<std::size_t>(spec.k_levels) || widen >= 64) {
      break;
    }
  }
  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.energy < b.energy; });

  point.states.reserve(raw.size());
  for (auto& r : raw) {
    SweepState st;
    st.energy = r.energy;
    st.sector = sectors[r.sector_slot];
    const StateVector v(owners[r.sector_slot], r.vec);
    st.label = label_state(v, sym);
    if (keep_states || observables) st.vector = std::move(r.vec);
    point.states.push_back(std::move(st));
  }

  const double tol = spec.solver.cluster_tol;
  const double e0 = point.states.front().energy;
  std::vector<std::size_t> ground;
  for (std::size_t i = 0; i < point.states.size() && point.states[i].energy - e0 <= tol; ++i) ground.push_back(i);
  point.ground_multiplicity = static_cast<int>(ground.size());

  if (observables) {
    std::optional<std::size_t> chosen;
    if (ground.size() == 1) {
      chosen = ground[0];
    } else if (ground.size() == 2) {
      const auto& a = point.states[ground[0]].sector;
      const auto& b = point.states[ground[1]].sector;
      if (a && b && *a == -*b && *a != 0) chosen = *a > 0 ? ground[0] : ground[1];
    }
    const auto& pairs = spec.pairs.empty() ? default_pairs(spec.lattice) : spec.pairs;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& p : pairs) {
      PairObservables po;
      po.pair = p;
      if (chosen) {
        const SweepState& gs = point.states[*chosen];
        const std::size_t slot = static_cast<std::size_t>(
            std::find(sectors.begin(), sectors.end(), gs.sector) - sectors.begin());
        const StateVector v(owners[slot], gs.vector);
        const TwoSiteRDM rdm = two_site_rdm(v, p.i, p.j);
        po.cxx = correlator(rdm, Axis::x);
        po.cyy = correlator(rdm, Axis::y);
        po.czz = correlator(rdm, Axis::z);
        po.concurrence = wootters_concurrence(rdm);
      } else {
        po.cxx = po.cyy = po.czz = nan;
        po.concurrence = {nan, nan, ConcurrenceMethod::wootters};
      }
      point.pairs.push_back(po);
    }
    if (!keep_states) {
      for (auto& s : point.states) {
        s.vector.clear();
        s.vector.shrink_to_fit();
      }
    }
  }
  return point;
}

}  // namespace

SweepPoint solve_point(const SweepSpec& spec, double g, bool keep_states, bool observables) {
  return solve_point_impl(spec, g, keep_states, observables, {});
}

SweepResult sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  result.spec = spec;
  const std::size_t n = spec.grid.size();
  result.points.resize(n);
  const BasisCache cache = make_cache(spec);

  auto work = [&](std::size_t k) {
    const double g = spec.grid.at(k);
    try {
      result.points[k] = solve_point_impl(spec, g, spec.keep_states, true, cache);
    } catch (const std::exception& e) {
      SweepPoint bad;
      bad.g = g;
      bad.ok = false;
      bad.error = e.what();
      result.points[k] = std::move(bad);
    }
  };

  const unsigned threads = std::max(1U, std::min<unsigned>(spec.threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  return result;
}

std::vector<Level> distinct_levels(const SweepPoint& point, double cluster_tol) {
  std::vector<Level> out;
  for (std::size_t i = 0; i < point.states.size(); ++i) {
    const double e = point.states[i].energy;
    if (!out.empty() && e - point.states[out.back().members.front()].energy <= cluster_tol) {
      out.back().members.push_back(i);
    } else {
      out.push_back({e, {i}});
    }
  }
  for (auto& lv : out) {
    double s = 0.0;
    for (auto m : lv.members) s += point.states[m].energy;
    lv.energy = s / static_cast<double>(lv.members.size());
  }
  while (!out.empty()) {
    const double top = point.states[out.back().members.back()].energy;
    if (top < point.reliable_below - cluster_tol) break;
    out.pop_back();
  }
  return out;
}

LevelLabel level_label(const SweepPoint& point, const Level& level) {
  LevelLabel out;
  out.multiplicity = static_cast<int>(level.members.size());
  bool same_s = true, same_p = true;
  const auto& first = point.states[level.members.front()].label;
  for (auto m : level.members) {
    const auto& l = point.states[m].label;
    same_s = same_s && l.total_spin && first.total_spin && std::abs(*l.total_spin - *first.total_spin) < 1e-9;
    same_p = same_p && l.parity && first.parity && *l.parity == *first.parity;
    if (l.sz_twice) out.sz_twice.push_back(*l.sz_twice);
  }
  std::sort(out.sz_twice.begin(), out.sz_twice.end());
  out.sz_twice.erase(std::unique(out.sz_twice.begin(), out.sz_twice.end()), out.sz_twice.end());
  if (same_s) out.total_spin = first.total_spin;
  if (same_p) out.parity = first.parity;
  return out;
}

}  // namespace spinent
