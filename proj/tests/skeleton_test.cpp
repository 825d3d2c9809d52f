#include <gtest/gtest.h>

#include <cmath>

#include "spinmarket/kernel.hpp"
#include "spinmarket/skeleton.hpp"
#include "spinmarket/spectral.hpp"
#include "test_data.hpp"

using namespace spinmarket;

namespace {

ModelParams params(int n, const char* alpha) {
  ModelParams p;
  p.n = n;
  p.alpha = Coupling::parse(alpha);
  return p;
}

const ModelParams& n10a3() {
  static const ModelParams p = params(10, "3");
  return p;
}

}  // namespace

TEST(Drift, TableValues) {
  EXPECT_NEAR(drift_f(9, 44, n10a3()), 0.1, 5e-4);
  EXPECT_NEAR(drift_g(9, 44, n10a3()), 0.0222, 5e-4);
  EXPECT_NEAR(drift_f(1, 22, n10a3()), -0.0852, 5e-4);
  EXPECT_NEAR(drift_g(1, 22, n10a3()), 0.0156, 5e-4);
  EXPECT_EQ(drift_f(10, 45, n10a3()), 0.0);
  EXPECT_EQ(drift_g(10, 45, n10a3()), 0.0);
  for (const auto& r : test_data::read_drift_rows()) {
    EXPECT_NEAR(drift_f(r.i, r.j, n10a3()), r.f, 5e-4) << r.i << "," << r.j;
    EXPECT_NEAR(drift_g(r.i, r.j, n10a3()), r.g, 5e-4) << r.i << "," << r.j;
  }
}

TEST(Drift, KernelConsistency) {
  for (const char* a : {"0", "3", "18"}) {
    const ModelParams p = params(6, a);
    const int n = p.n, c = p.arc_count();
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= c; ++j) {
        const StepDistribution d = macro_step_distribution({i, j}, p);
        EXPECT_NEAR((n + 1) / 2.0 * (d.up_site - d.down_site), drift_f(i, j, p), 1e-12);
        EXPECT_NEAR((n + 1.0) / (n - 1.0) * (d.up_arc - d.down_arc), drift_g(i, j, p), 1e-12);
      }
  }
}

TEST(Drift, NoContrarianTermPushesDownAtFullSites) {
  const ModelParams p = params(5, "0");
  for (int j = 0; j <= 10; ++j) EXPECT_LE(drift_f(5, j, p), 0.0);
}

TEST(DriftField, MatchesPointwise) {
  const DriftField field = drift_field(n10a3());
  for (int k = 0; k < state_count(10); ++k) {
    const MacroState s = index_state(k, 10);
    EXPECT_EQ(field.f_at(s), drift_f(s.i, s.j, n10a3()));
    EXPECT_EQ(field.g_at(s), drift_g(s.i, s.j, n10a3()));
    const int sf = std::fabs(field.f_at(s)) < 1e-12 ? 0 : field.f_at(s) > 0 ? 1 : -1;
    EXPECT_EQ(field.sign_f_at(s), sf);
  }
}

TEST(CaStep, Examples) {
  const DriftField field = drift_field(n10a3());
  EXPECT_EQ(ca_step({9, 44}, field), (MacroState{10, 45}));
  EXPECT_EQ(ca_step({0, 23}, field), (MacroState{1, 22}));
  EXPECT_EQ(ca_step({1, 22}, field), (MacroState{0, 23}));
  EXPECT_EQ(ca_step({10, 45}, field), (MacroState{10, 45}));
}

TEST(CaStep, ClampsAtTheBoundary) {
  const int dim = state_count(3);
  const DriftField up = make_drift_field(3, std::vector<double>(dim, 1.0), std::vector<double>(dim, 1.0));
  EXPECT_EQ(ca_step({3, 3}, up), (MacroState{3, 3}));
  EXPECT_EQ(ca_step({3, 1}, up), (MacroState{3, 2}));
}

TEST(Equilibria, AllZeroFieldMakesEveryStateFixed) {
  const int dim = state_count(3);
  const DriftField zero = make_drift_field(3, std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0));
  const Equilibria eq = find_equilibria(zero);
  EXPECT_EQ(eq.cycles.size(), static_cast<std::size_t>(dim));
  for (const Cycle& c : eq.cycles) EXPECT_EQ(c.period(), 1);
}

TEST(Equilibria, CyclesAreClosedAndBasinsCover) {
  const DriftField field = drift_field(n10a3());
  const Equilibria eq = find_equilibria(field);
  ASSERT_EQ(eq.basin.size(), static_cast<std::size_t>(state_count(10)));
  for (const Cycle& c : eq.cycles)
    for (std::size_t k = 0; k < c.states.size(); ++k)
      EXPECT_EQ(ca_step(c.states[k], field), c.states[(k + 1) % c.states.size()]);
  for (int b : eq.basin) {
    EXPECT_GE(b, 0);
    EXPECT_LT(b, static_cast<int>(eq.cycles.size()));
  }
}

// The CA at N=10, alpha=3 has the trap, the three twin 2-cycles and the
// (5,36)-(5,37) cycle. (4,15), (6,41) and (4,33) are not CA cycles.
TEST(Equilibria, DetectedCyclesAtN10Alpha3) {
  const Equilibria eq = find_equilibria(drift_field(n10a3()));
  std::vector<std::vector<MacroState>> got;
  for (const Cycle& c : eq.cycles) got.push_back(c.states);
  const std::vector<std::vector<MacroState>> expected{
      {{10, 45}},
      {{0, 22}, {1, 23}},
      {{0, 23}, {1, 22}},
      {{5, 8}, {5, 9}},
      {{5, 36}, {5, 37}},
  };
  EXPECT_EQ(got, expected);
}

TEST(ZeroCrossings, ListedEquilibriaLieNearCrossings) {
  const auto cells = zero_crossings(drift_field(n10a3()));
  for (const MacroState& target : {MacroState{4, 15}, MacroState{6, 41}, MacroState{4, 33}}) {
    bool near = false;
    for (const MacroState& c : cells)
      near = near || (std::abs(c.i - target.i) <= 1 && std::abs(c.j - target.j) <= 2);
    EXPECT_TRUE(near) << to_string(target);
  }
}

TEST(Stability, TableClasses) {
  const DriftField field = drift_field(n10a3());
  EXPECT_EQ(classify_stability({{10, 45}}, field).cls, Stability::kStable);
  const StabilityVerdict saddle = classify_stability({{5, 36}, {5, 37}}, field);
  EXPECT_EQ(saddle.cls, Stability::kSaddle);
  EXPECT_NE(saddle.escape_notes.find("horizontal"), std::string::npos);
  for (const MacroState& e : saddle.escaping) EXPECT_NE(e.i, 5);
  const StabilityVerdict u = classify_stability({{4, 33}}, field);
  EXPECT_EQ(u.cls, Stability::kUnstable);
  EXPECT_EQ(u.escape_notes, "escape from everywhere");
  EXPECT_EQ(classify_stability({{4, 15}}, field).cls, Stability::kUnstable);
  EXPECT_EQ(classify_stability({{6, 41}}, field).cls, Stability::kUnstable);
  for (const auto& cyc : std::vector<std::vector<MacroState>>{
           {{0, 23}, {1, 22}}, {{0, 22}, {1, 23}}, {{5, 8}, {5, 9}}})
    EXPECT_EQ(classify_stability(cyc, field).cls, Stability::kStable);
}

TEST(Stability, ReportCoversAllCycles) {
  const AttractorReport rep = attractor_report(drift_field(n10a3()));
  ASSERT_EQ(rep.attractors.size(), 5u);
  EXPECT_EQ(rep.attractors[0].verdict.cls, Stability::kStable);
  EXPECT_EQ(rep.attractors.back().verdict.cls, Stability::kSaddle);
  EXPECT_EQ(to_string(Stability::kSaddle), "saddle");
}

TEST(Excursions, HandTraces) {
  const auto inside = [](const MacroState& s) { return s.j > 0; };
  const std::vector<MacroState> never{{1, 0}, {2, 0}, {3, 0}};
  EXPECT_TRUE(extract_excursions(never, Coordinate::kSites, inside).excursions.empty());

  const std::vector<MacroState> always{{1, 1}, {2, 1}, {3, 2}};
  const auto one = extract_excursions(always, Coordinate::kSites, inside);
  ASSERT_EQ(one.excursions.size(), 1u);
  EXPECT_EQ(one.excursions[0], (std::vector<int>{1, 2, 3}));

  // in/out alternating: three excursions of one step, each stopped at its exit
  const std::vector<MacroState> alt{{1, 1}, {2, 0}, {3, 1}, {4, 0}, {5, 1}, {6, 0}};
  const auto three = extract_excursions(alt, Coordinate::kSites, inside);
  ASSERT_EQ(three.excursions.size(), 3u);
  for (const auto& w : three.excursions) EXPECT_EQ(w.size(), 2u);
  EXPECT_EQ(three.excursions[1], (std::vector<int>{3, 4}));
}

TEST(Submartingale, MonotoneExcursions) {
  ExcursionSet up{{{1, 2, 3, 4}, {2, 3}}};
  ExcursionSet down{{{4, 3, 2, 1}, {3, 2}}};
  const SubmartingaleReport a = test_contingent_submartingale(up, 0.01);
  EXPECT_TRUE(a.meaningful);
  EXPECT_TRUE(a.pass);
  EXPECT_DOUBLE_EQ(a.pooled_mean, 1.0);
  EXPECT_EQ(a.increments, 4);
  EXPECT_FALSE(test_contingent_submartingale(down, 0.01).pass);
  EXPECT_FALSE(test_contingent_submartingale(ExcursionSet{}, 0.01).meaningful);
}

TEST(Submartingale, HoldsWherePositiveDriftOnSimulatedPaths) {
  const DriftField field = drift_field(n10a3());
  const auto region = [&](const MacroState& s) { return field.f_at(s) > 0; };
  Rng rng = make_rng(31);
  ExcursionSet all;
  for (int r = 0; r < 20; ++r) {
    const auto path = simulate_macro_chain({3, 20}, n10a3(), 6000, rng);
    const ExcursionSet part = extract_excursions(path, Coordinate::kSites, region);
    all.excursions.insert(all.excursions.end(), part.excursions.begin(), part.excursions.end());
  }
  const SubmartingaleReport rep = test_contingent_submartingale(all, 0.01);
  ASSERT_TRUE(rep.meaningful);
  EXPECT_TRUE(rep.pass) << rep.pooled_mean;
}

TEST(StepDeviations, TwoStepAgainstPathEnumeration) {
  const ModelParams p = params(6, "2");
  for (const MacroState s : {MacroState{2, 5}, MacroState{3, 7}, MacroState{4, 12}}) {
    // direct enumeration of the <= 25 two-step paths
    double expected = 0.0;
    const StepDistribution first = macro_step_distribution(s, p);
    const std::pair<MacroState, double> moves[] = {{{s.i + 1, s.j}, first.up_site},
                                                   {{s.i - 1, s.j}, first.down_site},
                                                   {{s.i, s.j + 1}, first.up_arc},
                                                   {{s.i, s.j - 1}, first.down_arc},
                                                   {s, first.hold}};
    for (const auto& [u, pu] : moves) {
      if (pu == 0.0) continue;
      const StepDistribution second = macro_step_distribution(u, p);
      expected += pu * (second.up_site * (u.i + 1) + second.down_site * (u.i - 1) +
                        (second.up_arc + second.down_arc + second.hold) * u.i);
    }
    EXPECT_NEAR(two_step_deviation(s.i, s.j, p).exact, expected, 1e-12);
  }
}

TEST(StepDeviations, DomainAndTies) {
  EXPECT_THROW(two_step_deviation(0, 5, n10a3()), DomainError);
  EXPECT_THROW(two_step_deviation(3, 45, n10a3()), DomainError);
  const DiscretizationDeviation d = discretization_deviation(4, 15, n10a3());
  EXPECT_GT(std::fabs(d.lhs - d.rhs), 1e-6);
  const DiscretizationDeviation fixed = discretization_deviation(10, 45, n10a3());
  EXPECT_EQ(fixed.lhs, fixed.rhs);
  EXPECT_EQ(std::round(2.5), 3.0);
  EXPECT_EQ(std::round(-2.5), -3.0);
}

// At i = N/2 the site drift vanishes and f is odd about N/2, so the exact
// two-step mean and the composed estimate coincide.
TEST(StepDeviations, MidlineTwoStepGapVanishes) {
  EXPECT_NEAR(two_step_deviation(5, 36, n10a3()).gap, 0.0, 1e-12);
  EXPECT_NEAR(drift_f(4, 36, n10a3()), -drift_f(6, 36, n10a3()), 1e-15);
  EXPECT_GT(std::fabs(two_step_deviation(6, 36, n10a3()).gap), 1e-6);
}
