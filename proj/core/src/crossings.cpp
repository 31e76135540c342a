#include <algorithm>
#include <cmath>

#include "spinent/analysis.hpp"
#include "spinent/errors.hpp"

namespace spinent {

std::string to_string(CrossingKind k) {
  switch (k) {
    case CrossingKind::true_crossing: return "true_crossing";
    case CrossingKind::avoided: return "avoided";
    case CrossingKind::unresolved: return "unresolved";
  }
  return "?";
}

namespace {

struct Match {
  std::size_t index = 0;
  double fraction = 0.0;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Fraction of level `x` of point p that lies in each level of q; the best one.
Match match(const SweepPoint& p, const Level& x, const SweepPoint& q, const std::vector<Level>& levels) {
  Match best;
  for (std::size_t y = 0; y < levels.size(); ++y) {
    double f = 0.0;
    for (auto u : x.members) {
      const auto& su = p.states[u];
      for (auto w : levels[y].members) {
        const auto& sw = q.states[w];
        if (su.sector != sw.sector) continue;
        const double o = dot(su.vector, sw.vector);
        f += o * o;
      }
    }
    f /= static_cast<double>(x.members.size());
    if (f > best.fraction) best = {y, f};
  }
  return best;
}

struct Reference {
  SweepPoint point;
  Level a;
  Level b;
};

struct GapSample {
  bool resolved = false;
  double gap = 0.0;  // E(image of a) - E(image of b); 0 when they coincide
  Reference next;
};

class Refiner {
 public:
  Refiner(const SweepSpec& spec, const CrossingOptions& opts) : spec_(spec), opts_(opts) {}

  GapSample sample(const Reference& ref, double x) const {
    GapSample out;
    out.next.point = solve_point(spec_, x, true, false);
    const auto levels = distinct_levels(out.next.point, spec_.solver.cluster_tol);
    const Match ma = match(ref.point, ref.a, out.next.point, levels);
    const Match mb = match(ref.point, ref.b, out.next.point, levels);
    if (ma.fraction < opts_.min_overlap || mb.fraction < opts_.min_overlap) return out;
    out.resolved = true;
    out.next.a = levels[ma.index];
    out.next.b = levels[mb.index];
    out.gap = ma.index == mb.index ? 0.0 : levels[ma.index].energy - levels[mb.index].energy;
    return out;
  }

  // `ref` sits at x_neg where the gap is negative; the gap is positive at x_pos.
  void refine(Reference ref, double x_neg, double x_pos, CrossingEvent& ev) const {
    while (std::abs(x_pos - x_neg) > opts_.bracket_width) {
      const double mid = 0.5 * (x_neg + x_pos);
      GapSample s = sample(ref, mid);
      if (!s.resolved) {
        ev.kind = CrossingKind::unresolved;
        ev.location = mid;
        ev.note = "level identity ambiguous during bisection";
        return;
      }
      if (s.gap == 0.0) {
        finish(ev, mid, 0.0);
        return;
      }
      if (s.gap < 0.0) {
        x_neg = mid;
        ref = std::move(s.next);
      } else {
        x_pos = mid;
      }
      ev.bisection_widths.push_back(std::abs(x_pos - x_neg));
    }

    // Illinois regula falsi on the signed gap, reference fixed at x_neg.
    double a = x_neg, fa = ref.a.energy - ref.b.energy;
    double b = x_pos;
    GapSample sb = sample(ref, b);
    if (!sb.resolved || sb.gap <= 0.0) {
      finish(ev, a, std::abs(fa));
      return;
    }
    double fb = sb.gap;
    double best_x = std::abs(fa) < std::abs(fb) ? a : b;
    double best_f = std::min(std::abs(fa), std::abs(fb));
    int side = 0;
    for (int it = 0; it < opts_.max_polish && best_f > 1e-13 && std::abs(b - a) > 1e-15; ++it) {
      const double c = (a * fb - b * fa) / (fb - fa);
      const GapSample sc = sample(ref, c);
      if (!sc.resolved) break;
      const double fc = sc.gap;
      if (std::abs(fc) < best_f) {
        best_f = std::abs(fc);
        best_x = c;
      }
      if (fc == 0.0) break;
      if ((fc > 0.0) == (fb > 0.0)) {
        b = c;
        fb = fc;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = c;
        fa = fc;
        if (side == 1) fb *= 0.5;
        side = 1;
      }
    }
    finish(ev, best_x, best_f);
  }

 private:
  void finish(CrossingEvent& ev, double x, double gap) const {
    ev.location = x;
    ev.gap = gap;
    ev.kind = gap <= opts_.gap_tol ? CrossingKind::true_crossing : CrossingKind::avoided;
  }

  const SweepSpec& spec_;
  const CrossingOptions& opts_;
};

bool has_vectors(const SweepPoint& p) {
  return p.ok && !p.states.empty() && !p.states.front().vector.empty();
}

}  // namespace

std::vector<CrossingEvent> detect_crossings(const SweepResult& sweep, int a, int b,
                                            const CrossingOptions& opts) {
  if (a < 0 || b <= a) throw InvalidInput("detect_crossings needs 0 <= a < b");
  const auto& pts = sweep.points;
  for (const auto& p : pts) {
    if (p.ok && !has_vectors(p)) throw InvalidInput("detect_crossings needs a sweep run with keep_states");
  }
  const double tol = sweep.spec.solver.cluster_tol;
  const Refiner refiner(sweep.spec, opts);
  const auto ua = static_cast<std::size_t>(a);
  const auto ub = static_cast<std::size_t>(b);

  std::vector<std::vector<Level>> levels(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].ok) levels[i] = distinct_levels(pts[i], tol);
  }
  auto usable = [&](std::size_t i) { return i < pts.size() && pts[i].ok && levels[i].size() > ub; };

  std::vector<CrossingEvent> events;
  auto base_event = [&](std::size_t i, std::size_t above) {
    CrossingEvent ev;
    ev.level_a = a;
    ev.level_b = b;
    ev.bracket_index = i;
    ev.bracket_lo = pts[i].g;
    ev.bracket_hi = pts[above].g;
    ev.a_below = level_label(pts[i], levels[i][ua]);
    ev.b_below = level_label(pts[i], levels[i][ub]);
    return ev;
  };

  auto target = [&](std::size_t i) { return i < pts.size() && pts[i].ok && !levels[i].empty(); };

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!usable(i) || !target(i + 1)) continue;
    const SweepPoint& P = pts[i];
    const SweepPoint& Q = pts[i + 1];
    const auto& LP = levels[i];
    const auto& LQ = levels[i + 1];
    const Match fa = match(P, LP[ua], Q, LQ);
    const Match fb = match(P, LP[ub], Q, LQ);

    if (fa.fraction >= opts.min_overlap && fb.fraction >= opts.min_overlap) {
      if (fa.index == fb.index) {
        // both levels merge at Q: compare the neighbours on either side
        if (!target(i + 2)) continue;
        const SweepPoint& R = pts[i + 2];
        const Match ra = match(P, LP[ua], R, levels[i + 2]);
        const Match rb = match(P, LP[ub], R, levels[i + 2]);
        CrossingEvent ev = base_event(i, i + 2);
        if (ra.fraction < opts.min_overlap || rb.fraction < opts.min_overlap) {
          ev.kind = CrossingKind::unresolved;
          ev.location = Q.g;
          ev.note = "level identity ambiguous across a degenerate grid point";
          events.push_back(std::move(ev));
          ++i;
          continue;
        }
        if (ra.index != rb.index && levels[i + 2][ra.index].energy > levels[i + 2][rb.index].energy) {
          ev.a_above = level_label(R, levels[i + 2][ra.index]);
          ev.b_above = level_label(R, levels[i + 2][rb.index]);
          ev.location = Q.g;
          const auto& m = LQ[fa.index].members;
          ev.gap = Q.states[m.back()].energy - Q.states[m.front()].energy;
          ev.on_grid_point = true;
          ev.kind = ev.gap <= opts.gap_tol ? CrossingKind::true_crossing : CrossingKind::avoided;
          ev.note = "levels degenerate on a grid point";
          events.push_back(std::move(ev));
          ++i;
        }
        continue;
      }
      if (LQ[fa.index].energy > LQ[fb.index].energy) {
        CrossingEvent ev = base_event(i, i + 1);
        ev.a_above = level_label(Q, LQ[fa.index]);
        ev.b_above = level_label(Q, LQ[fb.index]);
        refiner.refine({P, LP[ua], LP[ub]}, P.g, Q.g, ev);
        events.push_back(std::move(ev));
      }
      continue;
    }

    // forward images ambiguous (typically a split out of a degenerate
    // level at P): follow Q's levels backwards instead
    Match ba, bb;
    if (usable(i + 1)) {
      ba = match(Q, LQ[ua], P, LP);
      bb = match(Q, LQ[ub], P, LP);
    }
    if (ba.fraction < opts.min_overlap || bb.fraction < opts.min_overlap) {
      CrossingEvent ev = base_event(i, i + 1);
      ev.kind = CrossingKind::unresolved;
      ev.location = 0.5 * (P.g + Q.g);
      ev.note = "level identity ambiguous between grid points";
      events.push_back(std::move(ev));
      continue;
    }
    if (ba.index == bb.index) continue;
    if (LP[ba.index].energy > LP[bb.index].energy) {
      CrossingEvent ev = base_event(i, i + 1);
      ev.a_below = level_label(P, LP[ba.index]);
      ev.b_below = level_label(P, LP[bb.index]);
      ev.a_above = level_label(Q, LQ[ua]);
      ev.b_above = level_label(Q, LQ[ub]);
      refiner.refine({Q, LQ[ua], LQ[ub]}, Q.g, P.g, ev);
      events.push_back(std::move(ev));
    }
  }
  return events;
}

}  // namespace spinent
