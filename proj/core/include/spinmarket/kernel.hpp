#pragma once

#include <utility>
#include <vector>

#include "spinmarket/types.hpp"

namespace spinmarket {

/// log C(n,k); -infinity when k < 0 or k > n.
double log_binomial(int n, int k);

/// Probability that a chosen +1 site keeps its spin. Requires 1 <= i <= N.
double p_plus_plus(int i, int j, const ModelParams& params);
/// Probability that a chosen -1 site keeps its spin. Requires 0 <= i <= N-1.
double p_minus_minus(int i, int j, const ModelParams& params);
/// Probability that a chosen +1 arc keeps its spin. Requires 1 <= j <= C(N,2).
double q_plus_plus(int i, int j, const ModelParams& params);
/// Probability that a chosen -1 arc keeps its spin. Requires 0 <= j <= C(N,2)-1.
double q_minus_minus(int i, int j, const ModelParams& params);

/// The four stay probabilities at a state. An entry whose selection weight
/// vanishes (no element of that kind and sign exists) is left at 0 and is
/// never evaluated.
struct StayProbabilities {
  double site_plus = 0.0;
  double site_minus = 0.0;
  double arc_plus = 0.0;
  double arc_minus = 0.0;
};

StayProbabilities stay_probabilities(const MacroState& s, const ModelParams& params);

/// One-step law of the macro chain from `from`.
struct StepDistribution {
  MacroState from;
  double up_site = 0.0;    // (i+1, j)
  double down_site = 0.0;  // (i-1, j)
  double up_arc = 0.0;     // (i, j+1)
  double down_arc = 0.0;   // (i, j-1)
  double hold = 0.0;       // (i, j)

  /// Positive-probability entries in the order up_site, down_site, up_arc, down_arc, hold.
  std::vector<std::pair<MacroState, double>> entries() const;
  double total() const { return up_site + down_site + up_arc + down_arc + hold; }
};

/// Frozen-limit kernel; throws DomainError for finite beta.
StepDistribution macro_step_distribution(const MacroState& s, const ModelParams& params);

/// Hold probability exactly 1.
bool is_trapping(const MacroState& s, const ModelParams& params);

/// Samples `steps` successive states (start excluded).
std::vector<MacroState> simulate_macro_chain(const MacroState& start, const ModelParams& params,
                                             long steps, Rng& rng);

}  // namespace spinmarket
