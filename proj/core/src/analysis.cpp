#include "spinent/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "spinent/errors.hpp"

namespace spinent {

std::string to_string(ExtremumKind k) { return k == ExtremumKind::min ? "min" : "max"; }

std::string to_string(TransitionType t) {
  switch (t) {
    case TransitionType::I: return "I";
    case TransitionType::II: return "II";
    case TransitionType::III: return "III";
    case TransitionType::none: return "none";
  }
  return "?";
}

Series derivative(const Series& series, int order) {
  if (order < 1 || order > 4) throw InvalidInput("derivative order must be 1..4");
  const std::size_t n = series.grid.size();
  if (series.values.size() != n) throw InvalidInput("series grid and values differ in length");
  if (n <= static_cast<std::size_t>(2 * order)) {
    throw InvalidInput("series of length " + std::to_string(n) + " is too short for order " +
                       std::to_string(order));
  }
  const double h = series.grid[1] - series.grid[0];
  if (!(h > 0.0)) throw InvalidInput("series grid must be strictly increasing");
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(series.grid[k] - series.grid[k - 1] - h) > 1e-6 * h) {
      throw InvalidInput("series grid is not uniform at index " + std::to_string(k));
    }
  }
  Series out = series;
  for (int o = 0; o < order; ++o) {
    Series next;
    for (std::size_t k = 1; k + 1 < out.values.size(); ++k) {
      next.grid.push_back(out.grid[k]);
      next.values.push_back((out.values[k + 1] - out.values[k - 1]) / (2.0 * h));
    }
    out = std::move(next);
  }
  return out;
}

std::vector<Extremum> locate_extrema(const Series& series) {
  std::vector<Extremum> out;
  const auto& y = series.values;
  const auto& g = series.grid;
  if (y.size() < 3 || g.size() != y.size()) return out;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    const double a = y[k - 1], b = y[k], c = y[k + 1];
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
    const double left = b - a, right = c - b;
    ExtremumKind kind;
    if (left < 0.0 && right >= 0.0) {
      kind = ExtremumKind::min;
    } else if (left > 0.0 && right <= 0.0) {
      kind = ExtremumKind::max;
    } else {
      continue;
    }
    const double h = 0.5 * (g[k + 1] - g[k - 1]);
    const double den = a - 2.0 * b + c;
    Extremum e;
    e.kind = kind;
    e.index = k;
    if (den != 0.0) {
      e.location = g[k] + 0.5 * (a - c) / den * h;
      e.value = b - (a - c) * (a - c) / (8.0 * den);
    } else {
      e.location = g[k];
      e.value = b;
    }
    out.push_back(e);
  }
  return out;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::optional<double> jump_across(const std::vector<double>& grid, const std::vector<double>& c,
                                  double location, double step) {
  const double eps = 1e-9 * step;
  std::optional<std::size_t> lo, hi;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(c[k])) continue;
    if (grid[k] < location - eps) lo = k;
    if (grid[k] > location + eps && !hi) hi = k;
  }
  if (!lo || !hi) return std::nullopt;
  return std::abs(c[*hi] - c[*lo]);
}

const Extremum* dominant_min(const std::vector<Extremum>& ex) {
  const Extremum* best = nullptr;
  for (const auto& e : ex) {
    if (e.kind == ExtremumKind::min && (!best || e.value < best->value)) best = &e;
  }
  return best;
}

}  // namespace

TransitionReport classify(const SweepResult& sweep, const ClassifyOptions& opts) {
  if (sweep.spec.k_levels < 3) throw InvalidInput("classify needs a sweep with k_levels >= 3");
  if (sweep.points.size() < 3) throw InvalidInput("classify needs at least 3 grid points");
  TransitionReport rep;
  const double step = sweep.spec.grid.step;
  std::vector<double> grid;
  for (const auto& p : sweep.points) grid.push_back(p.g);
  const std::vector<double> c = sweep.concurrence(opts.pair_index, opts.use_raw);

  rep.ground_crossings = detect_crossings(sweep, 0, 1, opts.crossing);
  rep.excited_crossings = detect_crossings(sweep, 1, 2, opts.crossing);

  std::vector<double> jumps;
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (std::isfinite(c[k]) && std::isfinite(c[k - 1])) jumps.push_back(std::abs(c[k] - c[k - 1]));
  }
  rep.median_jump = median(jumps);
  rep.jump_tol = opts.jump_tol.value_or(10.0 * rep.median_jump);

  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::isfinite(c[k]) && (!rep.concurrence_max || c[k] > *rep.concurrence_max)) {
      rep.concurrence_max = c[k];
      rep.concurrence_argmax = grid[k];
    }
  }

  for (int order = 1; order <= opts.max_derivative_order; ++order) {
    if (c.size() <= static_cast<std::size_t>(2 * order)) break;
    rep.derivatives.push_back({order, locate_extrema(derivative({grid, c}, order))});
  }

  bool ground_true = false;
  for (const auto& ev : rep.ground_crossings) {
    if (ev.kind != CrossingKind::true_crossing) continue;
    ground_true = true;
    const auto jump = jump_across(grid, c, ev.location, step);
    if (jump && (!rep.concurrence_jump || *jump > *rep.concurrence_jump)) {
      rep.concurrence_jump = jump;
      if (*jump > rep.jump_tol) rep.location = ev.location;
    }
  }
  if (rep.concurrence_jump && *rep.concurrence_jump > rep.jump_tol) {
    rep.type = TransitionType::I;
    rep.concurrence_behavior = "discontinuous";
    rep.transition_character = "ground-state level crossing";
    return rep;
  }

  if (!ground_true && rep.concurrence_argmax) {
    for (const auto& ev : rep.excited_crossings) {
      if (ev.kind != CrossingKind::true_crossing) continue;
      if (std::abs(*rep.concurrence_argmax - ev.location) <= 2.0 * step * (1.0 + 1e-9)) {
        rep.type = TransitionType::II;
        rep.location = ev.location;
        rep.concurrence_behavior = "continuous, maximum";
        rep.transition_character = "excited-state level crossing";
        return rep;
      }
    }
  }

  for (const auto& d : rep.derivatives) {
    if (d.extrema.empty()) continue;
    rep.type = TransitionType::III;
    rep.derivative_order_used = d.order;
    const Extremum* m = dominant_min(d.extrema);
    rep.location = m ? m->location : d.extrema.front().location;
    rep.concurrence_behavior = "continuous, extremum in derivative of order " + std::to_string(d.order);
    rep.transition_character = "no level crossing (order-disorder)";
    return rep;
  }

  rep.type = TransitionType::none;
  rep.concurrence_behavior = "smooth";
  rep.transition_character = "no transition detected";
  return rep;
}

ScalingFit fit_inverse_size(const std::vector<std::pair<int, double>>& points) {
  if (points.size() < 2) throw InvalidInput("a 1/N fit needs at least two sizes");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [size, loc] : points) {
    const double x = 1.0 / size;
    sx += x;
    sy += loc;
    sxx += x * x;
    sxy += x * loc;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw InvalidInput("a 1/N fit needs distinct sizes");
  ScalingFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [size, loc] : points) {
    const double r = loc - (fit.intercept + fit.slope / size);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.points = points.size();
  return fit;
}

ScalingResult scaling_from_series(const std::vector<std::pair<int, Series>>& curves, int order) {
  ScalingResult out;
  out.order = order;
  std::vector<std::pair<int, double>> found;
  for (const auto& [n, series] : curves) {
    ScalingPoint sp;
    sp.n_sites = n;
    for (const auto& e : locate_extrema(derivative(series, order))) {
      if (e.kind == ExtremumKind::min) sp.minima.push_back(e);
    }
    if (const Extremum* m = dominant_min(sp.minima)) {
      sp.extremum = *m;
      found.emplace_back(n, m->location);
    } else {
      sp.note = "no interior minimum; excluded from the fit";
    }
    out.sizes.push_back(std::move(sp));
  }
  if (found.size() >= 2) {
    std::sort(found.begin(), found.end());
    out.fit = fit_inverse_size(found);
    bool up = true, down = true;
    for (std::size_t k = 1; k < found.size(); ++k) {
      up = up && found[k].second > found[k - 1].second;
      down = down && found[k].second < found[k - 1].second;
    }
    out.monotone = (up || down) && found.size() == curves.size();
  }
  return out;
}

ScalingResult scaling_study(const ScalingSpec& spec) {
  if (spec.sizes.empty()) throw InvalidInput("scaling study needs at least one size");
  std::vector<int> sizes = spec.sizes;
  std::sort(sizes.begin(), sizes.end());
  std::vector<std::pair<int, Series>> curves;
  for (int n : sizes) {
    SweepSpec s = spec.sweep;
    s.lattice = spec.sweep.lattice.geometry == Geometry::ladder ? LatticeSpec::ladder(n / 2)
                                                                 : LatticeSpec::chain(n);
    s.keep_states = false;
    const SweepResult r = sweep(s);
    Series series;
    for (const auto& p : r.points) series.grid.push_back(p.g);
    series.values = r.concurrence(spec.pair_index, spec.use_raw);
    curves.emplace_back(n, std::move(series));
  }
  return scaling_from_series(curves, spec.order);
}

}  // namespace spinent
