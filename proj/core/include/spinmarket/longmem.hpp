#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spinmarket/types.hpp"

namespace spinmarket {

/// Whether windows are taken over the path's increments or over its values.
enum class RsInput {
  kIncrements,  // differences path[t+1] - path[t]
  kLevels,      // the path values as given
};

enum class RsMethod {
  kClassic,  // population standard deviation in the denominator
  kLo,       // autocovariance-corrected denominator with Bartlett weights
};

struct RsOptions {
  RsInput input = RsInput::kIncrements;
  RsMethod method = RsMethod::kClassic;
  /// Lo bandwidth; empty selects Andrews' AR(1) rule per window.
  std::optional<int> lo_bandwidth{};
};

struct RsValue {
  double value = 0.0;  // mean R/S over the usable windows
  int windows_used = 0;
  int windows_skipped = 0;  // zero-variance windows
};

/// Mean rescaled range over non-overlapping windows of length tau.
/// Requires tau >= 2 and path length >= 2*tau; throws UndefinedStatistic when
/// every window is degenerate.
RsValue rs_statistic(std::span<const double> path, int tau, const RsOptions& opts = {});

/// log(R/S) / log(tau)
double rs_index(std::span<const double> path, int tau, const RsOptions& opts = {});

struct RsCurve {
  std::vector<int> taus;
  std::vector<double> index_values;
  std::optional<double> at(int tau) const;
};

/// rs_index at each tau; taus must be strictly increasing after sorting (no duplicates).
RsCurve rs_curve(std::span<const double> path, const std::vector<int>& taus,
                 const RsOptions& opts = {});

struct PersistenceSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1); 0 for a single run
  int above_half = 0;
  int total = 0;
  double fraction_above_half = 0.0;
};

PersistenceSummary persistence_summary(const std::vector<RsCurve>& runs, int tau);

/// Coordinate series of a macro path as doubles.
std::vector<double> site_series(const std::vector<MacroState>& path);
std::vector<double> arc_series(const std::vector<MacroState>& path);

}  // namespace spinmarket
