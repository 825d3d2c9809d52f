#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "spinmarket/types.hpp"

namespace spinmarket {

using Rational = boost::multiprecision::cpp_rational;

enum class ElementKind { kSitePlus, kSiteMinus, kArcPlus, kArcMinus };

/// Exact stay probability by enumeration of every neighborhood size and every
/// positive-member count, comparing the sign of the potential directly.
/// Refuses N > 6.
Rational brute_force_flip_oracle(int i, int j, const ModelParams& params, ElementKind kind);

/// Exact one-step law assembled from the oracle.
struct ExactStepDistribution {
  MacroState from;
  Rational up_site, down_site, up_arc, down_arc, hold;
};

ExactStepDistribution exact_step_distribution(const MacroState& s, const ModelParams& params);

/// Parses "p/q" or an integer into an exact rational.
Rational parse_rational(const std::string& text);

}  // namespace spinmarket
