#include "spinmarket/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "spinmarket/kernel.hpp"
#include "spinmarket/spectral.hpp"

namespace spinmarket {

namespace {

int signum(double v, double tol) { return std::fabs(v) < tol ? 0 : (v > 0 ? 1 : -1); }

double f_from(const MacroState& s, const StayProbabilities& st, int n) {
  const double w = static_cast<double>(s.i) / n;
  return (1.0 - w) * (1.0 - st.site_minus) - w * (1.0 - st.site_plus);
}

double g_from(const MacroState& s, const StayProbabilities& st, int arcs) {
  const double w = static_cast<double>(s.j) / arcs;
  return (1.0 - w) * (1.0 - st.arc_minus) - w * (1.0 - st.arc_plus);
}

// The cycle reached from s, rotated to start at its smallest state.
Cycle orbit_cycle(MacroState s, const DriftField& field) {
  std::map<MacroState, int> seen;
  std::vector<MacroState> orbit;
  while (!seen.count(s)) {
    seen[s] = static_cast<int>(orbit.size());
    orbit.push_back(s);
    s = ca_step(s, field);
  }
  Cycle c;
  c.states.assign(orbit.begin() + seen[s], orbit.end());
  std::rotate(c.states.begin(), std::min_element(c.states.begin(), c.states.end()),
              c.states.end());
  return c;
}

std::string join_states(const std::vector<MacroState>& states) {
  std::string out;
  for (std::size_t k = 0; k < states.size(); ++k) out += (k ? ", " : "") + to_string(states[k]);
  return out;
}

}  // namespace

double drift_f(int i, int j, const ModelParams& params) {
  const MacroState s{i, j};
  return f_from(s, stay_probabilities(s, params), params.n);
}

double drift_g(int i, int j, const ModelParams& params) {
  const MacroState s{i, j};
  return g_from(s, stay_probabilities(s, params), params.arc_count());
}

double DriftField::f_at(const MacroState& s) const { return f.at(state_index(s, n)); }
double DriftField::g_at(const MacroState& s) const { return g.at(state_index(s, n)); }
int DriftField::sign_f_at(const MacroState& s) const { return sign_f.at(state_index(s, n)); }
int DriftField::sign_g_at(const MacroState& s) const { return sign_g.at(state_index(s, n)); }

DriftField make_drift_field(int n, std::vector<double> f, std::vector<double> g,
                            double zero_tolerance) {
  const int dim = state_count(n);
  if (static_cast<int>(f.size()) != dim || static_cast<int>(g.size()) != dim)
    throw DomainError("drift grids do not match N");
  DriftField field;
  field.n = n;
  field.zero_tolerance = zero_tolerance;
  field.f = std::move(f);
  field.g = std::move(g);
  for (int k = 0; k < dim; ++k) {
    field.sign_f.push_back(signum(field.f[k], zero_tolerance));
    field.sign_g.push_back(signum(field.g[k], zero_tolerance));
  }
  return field;
}

DriftField drift_field(const ModelParams& params, double zero_tolerance) {
  const int n = params.n;
  const int dim = state_count(n);
  std::vector<double> f(dim), g(dim);
  for (int k = 0; k < dim; ++k) {
    const MacroState s = index_state(k, n);
    const StayProbabilities st = stay_probabilities(s, params);
    f[k] = f_from(s, st, n);
    g[k] = g_from(s, st, params.arc_count());
  }
  return make_drift_field(n, std::move(f), std::move(g), zero_tolerance);
}

MacroState ca_step(const MacroState& s, const DriftField& field) {
  const int arcs = field.n * (field.n - 1) / 2;
  return {std::clamp(s.i + field.sign_f_at(s), 0, field.n),
          std::clamp(s.j + field.sign_g_at(s), 0, arcs)};
}

bool Cycle::contains(const MacroState& s) const {
  return std::find(states.begin(), states.end(), s) != states.end();
}

Equilibria find_equilibria(const DriftField& field) {
  const int n = field.n;
  const int dim = state_count(n);
  Equilibria eq;
  eq.basin.assign(dim, -1);
  std::map<MacroState, int> cycle_of;
  for (int k = 0; k < dim; ++k) {
    if (eq.basin[k] >= 0) continue;
    std::vector<int> trail;
    MacroState s = index_state(k, n);
    // Walk until the orbit meets a classified state or closes on itself.
    std::set<int> on_trail;
    int idx = k;
    while (eq.basin[idx] < 0 && !on_trail.count(idx)) {
      on_trail.insert(idx);
      trail.push_back(idx);
      s = ca_step(s, field);
      idx = state_index(s, n);
    }
    int target = eq.basin[idx];
    if (target < 0) {
      Cycle c = orbit_cycle(s, field);
      target = static_cast<int>(eq.cycles.size());
      for (const MacroState& m : c.states) cycle_of[m] = target;
      eq.cycles.push_back(std::move(c));
    }
    for (int t : trail) eq.basin[t] = target;
  }

  // Deterministic order: period, then first state.
  std::vector<int> order(eq.cycles.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Cycle& x = eq.cycles[a];
    const Cycle& y = eq.cycles[b];
    if (x.period() != y.period()) return x.period() < y.period();
    return x.states.front() < y.states.front();
  });
  std::vector<int> rank(order.size());
  std::vector<Cycle> sorted;
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<int>(r);
    sorted.push_back(eq.cycles[order[r]]);
  }
  eq.cycles = std::move(sorted);
  for (int& b : eq.basin) b = rank[b];
  return eq;
}

std::vector<MacroState> zero_crossings(const DriftField& field) {
  const int n = field.n;
  const int arcs = n * (n - 1) / 2;
  std::vector<MacroState> out;
  const auto straddles = [&](const std::vector<int>& signs, int i, int j) {
    int lo = 1, hi = -1;
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) {
        const int v = signs[state_index({i + di, j + dj}, n)];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    return lo <= 0 && hi >= 0 && !(lo == 0 && hi == 0);
  };
  for (int j = 0; j < arcs; ++j)
    for (int i = 0; i < n; ++i)
      if (straddles(field.sign_f, i, j) && straddles(field.sign_g, i, j)) out.push_back({i, j});
  return out;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::kStable: return "stable";
    case Stability::kSaddle: return "saddle";
    case Stability::kUnstable: return "unstable";
  }
  return "unknown";
}

StabilityVerdict classify_stability(const std::vector<MacroState>& attractor,
                                    const DriftField& field, const StabilityOptions& opts) {
  if (attractor.empty()) throw DomainError("empty attractor");
  if (opts.radius < 1) throw DomainError("stability radius must be >= 1");
  const int n = field.n;
  for (const MacroState& s : attractor) check_state(s, n);
  const int budget = opts.follow_steps >= 0 ? opts.follow_steps : 4 * opts.radius + 4;
  const std::set<MacroState> core(attractor.begin(), attractor.end());

  std::set<MacroState> hood;
  for (const MacroState& a : attractor)
    for (int di = -opts.radius; di <= opts.radius; ++di)
      for (int dj = -opts.radius; dj <= opts.radius; ++dj) {
        const MacroState s{a.i + di, a.j + dj};
        if (in_grid(s, n)) hood.insert(s);
      }

  StabilityVerdict v;
  for (const MacroState& start : hood) {
    if (core.count(start)) continue;
    bool back = false;
    MacroState s = start;
    for (int k = 0; k <= budget && !back; ++k) {
      back = core.count(s) > 0;
      s = ca_step(s, field);
    }
    if (!back) {
      const Cycle c = orbit_cycle(start, field);
      back = std::all_of(c.states.begin(), c.states.end(),
                         [&](const MacroState& m) { return hood.count(m) > 0; });
    }
    (back ? v.returning : v.escaping).push_back(start);
  }

  if (v.escaping.empty()) {
    v.cls = Stability::kStable;
    v.escape_notes = "all neighbors return";
  } else if (v.returning.empty()) {
    v.cls = Stability::kUnstable;
    v.escape_notes = "escape from everywhere";
  } else {
    v.cls = Stability::kSaddle;
    std::set<int> core_i, core_j;
    for (const MacroState& a : attractor) {
      core_i.insert(a.i);
      core_j.insert(a.j);
    }
    const auto axis_only = [&](const std::set<int>& core_axis, auto coord) {
      for (const MacroState& s : v.escaping)
        if (core_axis.count(coord(s))) return false;
      for (const MacroState& s : v.returning)
        if (!core_axis.count(coord(s))) return false;
      return true;
    };
    std::ostringstream notes;
    notes << "escape through " << join_states(v.escaping);
    if (axis_only(core_i, [](const MacroState& s) { return s.i; }))
      notes << "; unstable along horizontal axis";
    else if (axis_only(core_j, [](const MacroState& s) { return s.j; }))
      notes << "; unstable along vertical axis";
    v.escape_notes = notes.str();
  }
  return v;
}

AttractorReport attractor_report(const DriftField& field, const StabilityOptions& opts) {
  const Equilibria eq = find_equilibria(field);
  AttractorReport report;
  for (const Cycle& c : eq.cycles)
    report.attractors.push_back({c, classify_stability(c.states, field, opts)});
  report.basin = eq.basin;
  return report;
}

ExcursionSet extract_excursions(const std::vector<MacroState>& path, Coordinate monitored,
                                const std::function<bool(const MacroState&)>& region) {
  const auto value = [monitored](const MacroState& s) {
    return monitored == Coordinate::kSites ? s.i : s.j;
  };
  ExcursionSet out;
  std::size_t t = 0;
  while (t < path.size()) {
    if (!region(path[t])) {
      ++t;
      continue;
    }
    std::vector<int> w{value(path[t])};
    ++t;
    while (t < path.size()) {
      w.push_back(value(path[t]));
      const bool exited = !region(path[t]);
      ++t;
      if (exited) break;
    }
    out.excursions.push_back(std::move(w));
  }
  return out;
}

SubmartingaleReport test_contingent_submartingale(const ExcursionSet& set, double epsilon) {
  SubmartingaleReport r;
  double sum = 0.0, sum_sq = 0.0;
  std::map<int, std::pair<long, double>> groups;
  for (const auto& w : set.excursions) {
    auto& g = groups[w.front()];
    for (std::size_t k = 1; k < w.size(); ++k) {
      const double d = w[k] - w[k - 1];
      sum += d;
      sum_sq += d * d;
      ++r.increments;
      ++g.first;
      g.second += d;
    }
  }
  for (const auto& [start, g] : groups)
    if (g.first > 0) r.by_start.push_back({start, g.first, g.second / g.first});
  r.meaningful = r.increments > 0;
  if (!r.meaningful) return r;
  r.pooled_mean = sum / r.increments;
  const double var = std::max(0.0, sum_sq / r.increments - r.pooled_mean * r.pooled_mean);
  r.standard_error = std::sqrt(var / r.increments);
  r.pass = r.pooled_mean >= -epsilon;
  return r;
}

TwoStepDeviation two_step_deviation(int x, int y, const ModelParams& params) {
  const int n = params.n;
  const int arcs = params.arc_count();
  if (x < 1 || x > n - 1 || y < 1 || y > arcs - 1)
    throw DomainError("two-step deviation needs all four neighbors of " + to_string({x, y}));
  TwoStepDeviation d;
  for (const auto& [u, pu] : macro_step_distribution({x, y}, params).entries())
    for (const auto& [w, pw] : macro_step_distribution(u, params).entries())
      d.exact += pu * pw * w.i;

  const double f = drift_f(x, y, params);
  const double g = drift_g(x, y, params);
  const MacroState r{static_cast<int>(std::round(2.0 * f / (n + 1) + x)),
                     static_cast<int>(std::round((n - 1) * g / (n + 1) + y))};
  check_state(r, n);
  d.ca_estimate = 2.0 / (n + 1) * drift_f(r.i, r.j, params) + 2.0 * f / (n + 1) + x;
  d.gap = d.exact - d.ca_estimate;
  return d;
}

DiscretizationDeviation discretization_deviation(int x, int y, const ModelParams& params) {
  const int n = params.n;
  check_state({x, y}, n);
  const double f = drift_f(x, y, params);
  const double g = drift_g(x, y, params);
  const MacroState rounded{static_cast<int>(std::round(x + f)),
                           static_cast<int>(std::round(y + g))};
  const MacroState stepped{x + signum(f, 1e-12), y + signum(g, 1e-12)};
  if (!in_grid(rounded, n) || !in_grid(stepped, n))
    throw DomainError("shifted argument leaves the grid at " + to_string({x, y}));
  return {drift_f(rounded.i, rounded.j, params), drift_f(stepped.i, stepped.j, params)};
}

}  // namespace spinmarket
