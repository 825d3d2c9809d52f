#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spinmarket/types.hpp"

namespace spinmarket {

/// (1 - i/N)(1 - P--) - (i/N)(1 - P++)
double drift_f(int i, int j, const ModelParams& params);
/// (1 - j/C)(1 - Q--) - (j/C)(1 - Q++),  C = C(N,2)
double drift_g(int i, int j, const ModelParams& params);

/// Drift values and their signs on the whole grid, flat order j*(N+1)+i.
struct DriftField {
  int n = 0;
  double zero_tolerance = 1e-12;
  std::vector<double> f, g;
  std::vector<int> sign_f, sign_g;

  double f_at(const MacroState& s) const;
  double g_at(const MacroState& s) const;
  int sign_f_at(const MacroState& s) const;
  int sign_g_at(const MacroState& s) const;
};

DriftField drift_field(const ModelParams& params, double zero_tolerance = 1e-12);

/// Builds a field from explicit grids (used for synthetic fields).
DriftField make_drift_field(int n, std::vector<double> f, std::vector<double> g,
                            double zero_tolerance = 1e-12);

/// (i + sgn f, j + sgn g), clamped to the grid.
MacroState ca_step(const MacroState& s, const DriftField& field);

struct Cycle {
  std::vector<MacroState> states;  // in orbit order, starting from the smallest state
  int period() const { return static_cast<int>(states.size()); }
  /// Periods above 2 are reported but lie outside the fixed-point/2-cycle analysis.
  bool beyond_scope() const { return period() > 2; }
  bool contains(const MacroState& s) const;
};

struct Equilibria {
  std::vector<Cycle> cycles;  // sorted by period, then by first state
  std::vector<int> basin;     // flat index -> index into cycles
};

/// Iterates ca_step from every state until its orbit closes.
Equilibria find_equilibria(const DriftField& field);

/// Grid cells (i,j)-(i+1,j+1) whose corner values of f and of g both
/// straddle zero: approximate intersections of the curves f=0 and g=0.
std::vector<MacroState> zero_crossings(const DriftField& field);

enum class Stability { kStable, kSaddle, kUnstable };
std::string to_string(Stability s);

struct StabilityOptions {
  int radius = 1;         // Chebyshev radius of the tested neighborhood
  int follow_steps = -1;  // -1 means 4*radius + 4
};

struct StabilityVerdict {
  Stability cls = Stability::kStable;
  std::vector<MacroState> returning;
  std::vector<MacroState> escaping;
  std::string escape_notes;
};

/// Follows the CA from every state within the radius (attractor states
/// excluded). A start returns when its orbit reaches the attractor within the
/// step budget, or when the cycle it ends in lies inside the tested
/// neighborhood. Stable: all return; unstable: none return; saddle otherwise.
StabilityVerdict classify_stability(const std::vector<MacroState>& attractor,
                                    const DriftField& field, const StabilityOptions& opts = {});

struct AttractorReport {
  struct Entry {
    Cycle cycle;
    StabilityVerdict verdict;
  };
  std::vector<Entry> attractors;
  std::vector<int> basin;  // flat index -> attractor entry
};

AttractorReport attractor_report(const DriftField& field, const StabilityOptions& opts = {});

enum class Coordinate { kSites, kArcs };

struct ExcursionSet {
  std::vector<std::vector<int>> excursions;
};

/// Slices the monitored coordinate at the entry/exit times of `region`.
/// path[0] is the first observed epoch; an excursion runs from an entry up to
/// and including the first exit, or to the end of the path.
ExcursionSet extract_excursions(const std::vector<MacroState>& path, Coordinate monitored,
                                const std::function<bool(const MacroState&)>& region);

struct SubmartingaleReport {
  bool meaningful = false;  // at least one increment observed
  bool pass = false;        // pooled mean increment >= -epsilon
  long increments = 0;
  double pooled_mean = 0.0;
  double standard_error = 0.0;
  struct StartGroup {
    int start_value;
    long increments;
    double mean;
  };
  std::vector<StartGroup> by_start;
};

SubmartingaleReport test_contingent_submartingale(const ExcursionSet& set, double epsilon);

struct TwoStepDeviation {
  double exact = 0.0;
  double ca_estimate = 0.0;
  double gap = 0.0;
};

/// E[S+ two epochs ahead] against the composed-drift estimate
/// (2/(N+1)) f([2f/(N+1) + x], [(N-1)g/(N+1) + y]) + 2f/(N+1) + x.
TwoStepDeviation two_step_deviation(int x, int y, const ModelParams& params);

struct DiscretizationDeviation {
  double lhs = 0.0;  // f([x + f], [y + g])
  double rhs = 0.0;  // f(x + sgn f, y + sgn g)
};

/// Rounding is half away from zero.
DiscretizationDeviation discretization_deviation(int x, int y, const ModelParams& params);

}  // namespace spinmarket
