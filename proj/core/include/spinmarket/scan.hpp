#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spinmarket/spectral.hpp"
#include "spinmarket/types.hpp"

namespace spinmarket {

enum class Neighborhood { kVonNeumann, kMoore };
enum class Smoothing {
  kNone,
  kCross,  // mean over the cell and its in-grid 4-neighbors
};

struct ModalityOptions {
  Neighborhood neighborhood = Neighborhood::kVonNeumann;
  Smoothing smoothing = Smoothing::kNone;
  /// Values at or below this fraction of the maximum count as zero.
  double floor = 1e-12;
};

struct Mode {
  MacroState location;  // plateau member with the smallest flat index
  double mass = 0.0;    // measure summed over the plateau
  int plateau_size = 1;
};

struct ModalityResult {
  int mode_count = 0;
  std::vector<Mode> modes;  // by mass, descending
};

/// Strict local maxima of the (optionally smoothed) measure; a connected
/// plateau of equal values counts once.
ModalityResult modality_analysis(const MeasureGrid& measure, const ModalityOptions& opts = {});

/// E[S+ A+] - E[S+] E[A+]
double correlation_check(const MeasureGrid& measure);

/// Mass at (N, C(N,2)).
double trap_mass(const MeasureGrid& measure);

struct SweepRecord {
  int n = 0;
  double alpha = 0.0;
  std::string alpha_text;
  double gap = 0.0;
  double lambda2 = 0.0;
  double trap_mass = 0.0;
  int mode_count = 0;
  std::vector<MacroState> mode_locations;
  double correlation_gap = 0.0;
  std::optional<long long> half_life;
  MacroState argmin;  // location of the smallest stationary value
  bool multiple_invariant = false;
  std::string error;  // non-empty when the point failed numerically
};

/// Matrix, eigensolve, stationary measure and derived statistics for one point.
SweepRecord analyze_point(const ModelParams& params, const ModalityOptions& modality = {});

enum class Regime { kSubcritical, kSupercritical };
std::string to_string(Regime r);

Regime classify_regime(const SweepRecord& record, double trap_threshold = 1.0 - 1e-6);

struct AlphaStarResult {
  bool found = false;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::pair<double, double>> trap_masses;  // (alpha, mass) per evaluated point
  std::vector<double> violations;  // supercritical alphas lying below a subcritical one
};

/// First adjacent pair of the sorted grid going from subcritical to
/// supercritical. With `refine`, the bracket is narrowed by bisection on
/// integer alpha.
AlphaStarResult detect_alpha_star(int n, const std::vector<double>& alpha_grid,
                                  bool refine = false, double trap_threshold = 1.0 - 1e-6);

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;     // log-log intercept
  double max_residual = 0.0;  // in log units
  int samples = 0;
};

/// Least squares of log y on log x.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct GapPowerLawReport {
  PowerLawFit sub;
  PowerLawFit super;
  double alpha_break = 0.0;        // midpoint between the last sub- and first supercritical alpha
  bool sub_exceeds_super = false;  // sub-critical slope steeper than super-critical
  std::vector<double> monotonicity_violations;  // alphas where the gap fell
};

/// Fits each regime separately; needs at least three samples per side.
GapPowerLawReport gap_power_law_fit(const std::vector<SweepRecord>& records,
                                    double trap_threshold = 1.0 - 1e-6);
GapPowerLawReport gap_power_law_fit(int n, const std::vector<double>& alpha_samples,
                                    double trap_threshold = 1.0 - 1e-6);

struct GaussianFit {
  double sigma = 0.0;
  double max_abs_residual = 0.0;
};

/// Least-squares sigma for
///   exp(-(4(2i-N)^2 + (4j-N^2+N)^2) / (32 sigma^2)) / (2 pi sigma^2).
GaussianFit gaussian_limit_fit(const MeasureGrid& measure, int n);

struct SweepConfig {
  std::vector<int> n_list;
  std::vector<std::string> alpha_list;  // kept as text so rationals stay exact
  std::uint64_t seed = 0;
  long steps = 0;                       // > 0 adds simulated R/S runs per point
  std::vector<int> taus;
  double trap_threshold = 1.0 - 1e-6;
  ModalityOptions modality{};
  int threads = 1;
  bool write_measures = true;
  bool write_spectra = true;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the JSON sweep configuration; throws ConfigError.
SweepConfig parse_sweep_config(const std::string& json_text);

struct SweepOutcome {
  std::vector<SweepRecord> records;
  int failures = 0;
};

/// Runs every (N, alpha) point on a bounded worker pool and writes
/// records.csv, measure_N{n}_a{alpha}.csv, spectrum_N{n}_a{alpha}.csv,
/// rs.csv (when steps > 0) and manifest.json into out_dir.
SweepOutcome run_sweep(const SweepConfig& config, const std::filesystem::path& out_dir,
                       const std::string& config_text = "");

}  // namespace spinmarket
