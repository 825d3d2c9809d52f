// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinmarket/kernel.hpp"
#include "spinmarket/longmem.hpp"
#include "spinmarket/oracle.hpp"
#include "spinmarket/scan.hpp"
#include "spinmarket/skeleton.hpp"
#include "spinmarket/spectral.hpp"
#include "spinmarket/spin_core.hpp"
#include "test_data.hpp"

using namespace spinmarket;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ModelParams exact_params(int n, const char* alpha) {
  ModelParams p;
  p.n = n;
  p.alpha = Coupling::parse(alpha);
  return p;
}

Outcome matrix_n3() {
  const auto rows = test_data::read_tokens("n3_a6_matrix.txt");
  const ModelParams p = exact_params(3, "6");
  const TransitionMatrix m = assemble_matrix(p);
  int exact_bad = 0;
  double float_err = 0.0;
  std::set<int> bad_rows;
  for (int r = 0; r < 16; ++r) {
    const MacroState s = index_state(r, 3);
    const ExactStepDistribution d = exact_step_distribution(s, p);
    std::vector<Rational> row(16);
    const auto put = [&](MacroState t, const Rational& v) {
      if (in_grid(t, 3)) row[state_index(t, 3)] += v;
    };
    put({s.i + 1, s.j}, d.up_site);
    put({s.i - 1, s.j}, d.down_site);
    put({s.i, s.j + 1}, d.up_arc);
    put({s.i, s.j - 1}, d.down_arc);
    put(s, d.hold);
    for (int c = 0; c < 16; ++c) {
      const Rational expected = parse_rational(rows.at(r).at(c));
      if (row[c] != expected) {
        ++exact_bad;
        bad_rows.insert(r + 1);
      }
      const double e = std::fabs(m.at(r, c) - static_cast<double>(expected));
      if (e > 1e-12) bad_rows.insert(r + 1);
      float_err = std::max(float_err, e);
    }
  }
  std::ostringstream os;
  os << exact_bad << " exact mismatches, float max err " << fmt("%.3g", float_err);
  if (!bad_rows.empty()) {
    os << ", rows differing:";
    for (int r : bad_rows) os << ' ' << r;
  }
  return {exact_bad == 0 && float_err <= 1e-12, os.str()};
}

Outcome measure_n3() {
  const auto tokens = test_data::read_tokens("n3_a6_measure.txt").at(0);
  const StationaryResult st = stationary_measure(assemble_matrix(exact_params(3, "6")));
  double err = 0.0;
  int worst = 0;
  for (int k = 0; k < 16; ++k) {
    const double e = std::fabs(st.measure.values[k] - std::stod(tokens[k]));
    if (e > err) {
      err = e;
      worst = k;
    }
  }
  return {err <= 5e-4, "max deviation " + fmt("%.4f", err) + " at flat index " +
                           std::to_string(worst) + " (computed " +
                           fmt("%.4f", st.measure.values[worst]) + ", listed " + tokens[worst] +
                           ")"};
}

Outcome spectral_n10() {
  const ModelParams p = exact_params(10, "3");
  const TransitionMatrix m = assemble_matrix(p);
  const auto ev = eigenvalues(m, 2);
  const double l2 = std::abs(ev[1]);
  const double gap = 1.0 - l2;
  const double trap = trap_mass(stationary_measure(m).measure);
  const bool hold = macro_step_distribution({10, 45}, p).hold == 1.0;
  const bool ok = std::fabs(l2 - 0.9999986235) <= 1e-8 && std::fabs(gap - 1.3765e-6) <= 1e-8 &&
                  trap >= 1.0 - 1e-6 && hold;
  return {ok, "lambda2 " + fmt("%.12f", l2) + ", gap " + fmt("%.6g", gap) + ", trap mass " +
                  fmt("%.12f", trap) + ", hold(10,45)=" + (hold ? "1" : "<1")};
}

Outcome half_lives() {
  const auto a = mixing_half_life(0.9942);
  const auto b = mixing_half_life(0.9999986235);
  const bool ok = a && *a == 120 && b && std::llabs(*b - 503558) <= 2;
  return {ok, "half-lives " + std::to_string(a.value_or(-1)) + " and " +
                  std::to_string(b.value_or(-1))};
}

Outcome lambda_n10_a18() {
  const double l2 = std::abs(eigenvalues(assemble_matrix(exact_params(10, "18")), 2)[1]);
  return {std::fabs(l2 - 0.9942) <= 5e-4, "lambda2 " + fmt("%.7f", l2)};
}

Outcome drift_table() {
  const ModelParams p = exact_params(10, "3");
  double err = 0.0;
  int worst_i = 0, worst_j = 0;
  const auto rows = test_data::read_drift_rows();
  for (const auto& r : rows) {
    const double e = std::max(std::fabs(drift_f(r.i, r.j, p) - r.f),
                              std::fabs(drift_g(r.i, r.j, p) - r.g));
    if (e > err) {
      err = e;
      worst_i = r.i;
      worst_j = r.j;
    }
  }
  return {rows.size() >= 60 && err <= 5e-4,
          std::to_string(rows.size()) + " pairs, max deviation " + fmt("%.2g", err) + " at (" +
              std::to_string(worst_i) + "," + std::to_string(worst_j) + ")"};
}

std::string cycle_text(const Cycle& c) {
  std::string s;
  for (std::size_t k = 0; k < c.states.size(); ++k) s += (k ? "<->" : "") + to_string(c.states[k]);
  return s;
}

Outcome ca_attractors() {
  const DriftField field = drift_field(exact_params(10, "3"));
  const AttractorReport rep = attractor_report(field);
  const std::set<std::set<MacroState>> expected_fixed{
      {{10, 45}}, {{5, 36}}, {{4, 15}}, {{6, 41}}, {{4, 33}}};
  const std::set<std::set<MacroState>> expected_two{
      {{0, 23}, {1, 22}}, {{0, 22}, {1, 23}}, {{5, 8}, {5, 9}}};
  std::set<std::set<MacroState>> fixed, two;
  int stable_fixed = 0, stable_two = 0, saddles = 0, unstable = 0;
  std::string found;
  for (const auto& e : rep.attractors) {
    std::set<MacroState> states(e.cycle.states.begin(), e.cycle.states.end());
    (e.cycle.period() == 1 ? fixed : two).insert(states);
    if (e.verdict.cls == Stability::kStable) (e.cycle.period() == 1 ? stable_fixed : stable_two)++;
    if (e.verdict.cls == Stability::kSaddle) ++saddles;
    if (e.verdict.cls == Stability::kUnstable) ++unstable;
    found += (found.empty() ? "" : ", ") + cycle_text(e.cycle) + " " + to_string(e.verdict.cls);
  }
  const bool ok = fixed == expected_fixed && two == expected_two && stable_fixed == 1 &&
                  stable_two == 3 && saddles == 1 && unstable == 3;
  return {ok, "found " + found};
}

Outcome oracle_equivalence() {
  double err = 0.0;
  long checked = 0;
  for (int n : {3, 4, 5})
    for (const char* a : {"0", "1", "3", "6"}) {
      const ModelParams p = exact_params(n, a);
      const int c = p.arc_count();
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= c; ++j) {
          const auto cmp = [&](bool valid, ElementKind kind, auto fn) {
            if (!valid) return;
            const double exact = static_cast<double>(brute_force_flip_oracle(i, j, p, kind));
            err = std::max(err, std::fabs(fn(i, j, p) - exact));
            ++checked;
          };
          cmp(i >= 1, ElementKind::kSitePlus, p_plus_plus);
          cmp(i <= n - 1, ElementKind::kSiteMinus, p_minus_minus);
          cmp(j >= 1, ElementKind::kArcPlus, q_plus_plus);
          cmp(j <= c - 1, ElementKind::kArcMinus, q_minus_minus);
        }
    }
  return {err <= 1e-12, std::to_string(checked) + " probabilities, max err " + fmt("%.3g", err)};
}

Outcome phase_bracket() {
  std::vector<double> grid;
  for (int a = 1; a <= 40; ++a) grid.push_back(a);
  const AlphaStarResult r = detect_alpha_star(10, grid);
  std::string detail = r.found ? "bracket (" + fmt("%g", r.lo) + "," + fmt("%g", r.hi) + ")"
                               : std::string("no bracket");
  if (!r.violations.empty()) detail += ", monotonicity violations present";
  return {r.found && r.lo == 17 && r.hi == 18 && r.violations.empty(), detail};
}

Outcome micro_macro() {
  const int trials = 100000;
  int worst_z_state = -1;
  double worst_z = 0.0;
  bool ok = true;
  int tested = 0;
  const std::vector<std::pair<const char*, MacroState>> cases{
      {"1", {0, 0}}, {"1", {2, 3}}, {"1", {4, 6}}, {"3", {1, 5}}, {"3", {3, 2}},
      {"3", {2, 0}}, {"6", {2, 3}}, {"6", {4, 1}}, {"0", {1, 4}}};
  Rng rng = make_rng(20240611);
  for (const auto& [alpha, s] : cases) {
    const ModelParams p = exact_params(4, alpha);
    const StepDistribution d = macro_step_distribution(s, p);
    const MicroConfig start = MicroConfig::with_counts(4, s);
    std::map<MacroState, long> counts;
    for (int t = 0; t < trials; ++t) {
      MicroConfig c = start;
      heat_bath_step(c, p, rng);
      ++counts[macro_counts(c)];
    }
    const std::vector<std::pair<MacroState, double>> expect{
        {{s.i + 1, s.j}, d.up_site}, {{s.i - 1, s.j}, d.down_site}, {{s.i, s.j + 1}, d.up_arc},
        {{s.i, s.j - 1}, d.down_arc}, {s, d.hold}};
    for (const auto& [t, prob] : expect) {
      const double freq = static_cast<double>(counts[t]) / trials;
      const double sd = std::sqrt(prob * (1.0 - prob) / trials);
      if (sd == 0.0) {
        if (freq != prob) ok = false;
        continue;
      }
      const double z = std::fabs(freq - prob) / sd;
      if (z > worst_z) {
        worst_z = z;
        worst_z_state = tested;
      }
      if (z > 3.0) ok = false;
    }
    ++tested;
  }
  return {ok, std::to_string(tested) + " states x " + std::to_string(trials) +
                  " trials, worst |z| " + fmt("%.2f", worst_z) + " (case " +
                  std::to_string(worst_z_state) + ")"};
}

Outcome long_memory() {
  // i.i.d. Gaussian increments
  Rng rng = make_rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> walk{0.0};
  for (int t = 0; t < 200000; ++t) walk.push_back(walk.back() + normal(rng));
  double iid_err = 0.0;
  for (int tau : {50, 100, 200, 500})
    iid_err = std::max(iid_err, std::fabs(rs_index(walk, tau) - 0.5));

  const ModelParams p = exact_params(10, "10");
  RsOptions levels;
  levels.input = RsInput::kLevels;
  std::vector<RsCurve> site_runs, arc_runs;
  for (int r = 0; r < 20; ++r) {
    Rng run_rng = make_rng(1000, r);
    const auto path = simulate_macro_chain({8, 10}, p, 100000, run_rng);
    site_runs.push_back(rs_curve(site_series(path), {1000}, levels));
    arc_runs.push_back(rs_curve(arc_series(path), {1000}, levels));
  }
  const PersistenceSummary s = persistence_summary(site_runs, 1000);
  const PersistenceSummary a = persistence_summary(arc_runs, 1000);
  const auto share = [](const PersistenceSummary& x) {
    return std::to_string(x.above_half) + "/" + std::to_string(x.total) + " (mean " +
           fmt("%.3f", x.mean) + ")";
  };
  return {iid_err <= 0.1 && s.fraction_above_half >= 0.8 && a.fraction_above_half >= 0.8,
          "iid max |index-0.5| " + fmt("%.3f", iid_err) + ", model runs above 0.5: sites " +
              share(s) + ", arcs " + share(a)};
}

Outcome step_deviations() {
  const ModelParams p = exact_params(10, "3");
  const TwoStepDeviation two = two_step_deviation(5, 36, p);
  const DiscretizationDeviation disc = discretization_deviation(4, 15, p);
  const TwoStepDeviation two_trivial = two_step_deviation(2, 3, exact_params(4, "0"));
  const DiscretizationDeviation disc_trivial = discretization_deviation(10, 45, p);
  // Values below 1e-12 are rounding residue of exactly cancelling sums.
  const auto zero = [](double v) { return std::fabs(v) <= 1e-12; };
  const bool ok = !zero(two.gap) && !zero(disc.lhs - disc.rhs) && zero(two_trivial.gap) &&
                  zero(disc_trivial.lhs - disc_trivial.rhs);
  return {ok, "two-step gap " + fmt("%.4g", two.gap) + ", discretization " + fmt("%.4g", disc.lhs) +
                  " vs " + fmt("%.4g", disc.rhs) + "; trivial cases " +
                  fmt("%.3g", two_trivial.gap) + " and " +
                  fmt("%.3g", disc_trivial.lhs - disc_trivial.rhs)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "N=3 alpha=6 transition matrix", 1, matrix_n3},
      {2, "N=3 alpha=6 stationary measure", 1, measure_n3},
      {3, "N=10 alpha=3 spectral facts", 10, spectral_n10},
      {4, "mixing half-lives", 0, half_lives},
      {5, "lambda2 at N=10 alpha=18", 0, lambda_n10_a18},
      {6, "drift table N=10 alpha=3", 0, drift_table},
      {7, "CA attractors N=10 alpha=3", 5, ca_attractors},
      {8, "brute-force oracle equivalence", 60, oracle_equivalence},
      {9, "phase bracket N=10", 0, phase_bracket},
      {10, "micro/macro flip frequencies", 0, micro_macro},
      {11, "long-memory properties", 0, long_memory},
      {12, "two-step and discretization deviations", 0, step_deviations},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += "; runtime over " + fmt("%g", c.limit_s) + " s";
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %-40s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
