#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spinmarket {

/// Raised when an argument lies outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an iterative or direct solve misses its accuracy target.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Raised when a statistic has no defined value for the given input.
class UndefinedStatistic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coupling constant stored as an exact rational num/den (den > 0).
///
/// Thresholds of the frozen dynamics sit exactly on integers for many
/// (alpha, N), so the kernel compares against this rational instead of a
/// rounded double.
struct Coupling {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Parses "17", "17.5", "35/2" or "1e1" exactly where possible.
  static Coupling parse(std::string_view text);
  /// Best rational approximation with denominator <= 1e9.
  static Coupling from_double(double value);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  friend bool operator==(const Coupling& a, const Coupling& b) {
    return a.num == b.num && a.den == b.den;
  }
};

/// What happens when the potential of the chosen element is exactly zero.
enum class TiePolicy {
  kFlipOnTie,   // the element flips; matches the closed-form kernel
  kHeatBathHalf,  // +1 or -1 with probability 1/2 each
};

struct ModelParams {
  int n = 2;
  Coupling alpha{};
  TiePolicy tie_policy = TiePolicy::kFlipOnTie;
  /// Inverse temperature; empty means the frozen limit beta -> infinity.
  std::optional<double> beta{};

  static ModelParams frozen(int n, double alpha,
                            TiePolicy tie = TiePolicy::kFlipOnTie);

  int arc_count() const { return n * (n - 1) / 2; }
  int element_count() const { return n * (n + 1) / 2; }
  /// Number of macro states, (N+1)(C(N,2)+1).
  int state_count() const { return (n + 1) * (arc_count() + 1); }
  bool is_frozen() const { return !beta.has_value(); }

  /// Throws DomainError on N < 2, alpha < 0 or a non-positive beta.
  void validate() const;
};

/// Counts of +1 sites (i) and +1 arcs (j).
struct MacroState {
  int i = 0;
  int j = 0;
  friend auto operator<=>(const MacroState&, const MacroState&) = default;
};

std::string to_string(const MacroState& s);

/// Throws DomainError unless 0 <= i <= N and 0 <= j <= C(N,2).
void check_state(const MacroState& s, int n);
bool in_grid(const MacroState& s, int n);

/// 1/2 |4(i+j)/(N(N+1)) - 1|
double global_imbalance(const MacroState& s, int n);

/// Exact sign of   local_sum - alpha * spin * G(state),   computed on integers.
int potential_sign(int local_sum, int spin, const MacroState& state,
                   const ModelParams& params);

using Rng = std::mt19937_64;

/// Seeds an engine from (seed, stream) through std::seed_seq so that
/// per-point streams derived from one master seed do not overlap in practice.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace spinmarket
